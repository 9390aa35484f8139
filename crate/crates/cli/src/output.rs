//! Run reports: output files plus a deterministic `summary.txt`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub const UNITS: &str = "energies meV; rates Gamma/2pi in MHz; eta as 2pi x MHz/meV^3; \
                         temperatures K; lifetimes ns; spin-orbit and strain inputs GHz";

/// Everything a command produces, written only after it succeeds.
#[derive(Debug, Default)]
pub struct Report {
    pub command: String,
    pub inputs: Vec<(String, String)>,
    pub results: Vec<String>,
    pub files: Vec<(String, String)>,
    /// Set when an inference produced no admissible values.
    pub empty: Option<String>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            command: command.into(),
            ..Report::default()
        }
    }

    pub fn result(&mut self, line: impl Into<String>) {
        self.results.push(line.into());
    }

    pub fn file(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    pub fn summary(&self) -> String {
        let mut s = format!("command: {}\nunits: {UNITS}\n\ninputs:\n", self.command);
        for (k, v) in &self.inputs {
            s.push_str(&format!("  {k} = {v}\n"));
        }
        s.push_str("\nresults:\n");
        for r in &self.results {
            s.push_str(&format!("  {r}\n"));
        }
        if let Some(e) = &self.empty {
            s.push_str(&format!("  EMPTY: {e}\n"));
        }
        s.push_str("\nfiles:\n");
        for (name, _) in &self.files {
            s.push_str(&format!("  {name}\n"));
        }
        s.push_str("  summary.txt\n");
        s
    }

    /// Writes every file and `summary.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.to_path_buf(),
            source,
        })?;
        for (name, contents) in &self.files {
            write_atomic(&dir.join(name), contents)?;
        }
        write_atomic(&dir.join("summary.txt"), &self.summary())
    }
}

/// Writes to a hidden sibling and renames, so readers never see a partial
/// file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp: PathBuf = path.with_file_name(format!(".{name}.tmp"));
    let werr = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    fs::write(&tmp, contents).map_err(werr)?;
    fs::rename(&tmp, path).map_err(|source| {
        let _ = fs::remove_file(&tmp);
        CliError::Write {
            path: path.to_path_buf(),
            source,
        }
    })
}

/// Six significant digits, switching to exponent form outside `1e-4..1e7`.
pub fn sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..7).contains(&mag) {
        let d = (5 - mag).max(0) as usize;
        format!("{x:.d$}")
    } else {
        format!("{x:.5e}")
    }
}

/// `value [lo, hi]` with [`sig`] formatting.
pub fn banded(value: f64, lo: f64, hi: f64) -> String {
    format!("{} [{}, {}]", sig(value), sig(lo), sig(hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig(16.0512345), "16.0512");
        assert_eq!(sig(0.4576123), "0.457612");
        assert_eq!(sig(3.67e6), "3670000");
        assert_eq!(sig(5.8e7), "5.80000e7");
        assert_eq!(sig(1.5e-9), "1.50000e-9");
        assert_eq!(sig(0.0), "0");
        assert_eq!(sig(f64::INFINITY), "inf");
    }

    #[test]
    fn atomic_write_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = Report::new("test");
        r.file("a.csv", "x\n1\n".into());
        r.write(dir.path()).unwrap();
        let mut names: Vec<String> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        assert_eq!(names, vec!["a.csv", "summary.txt"]);
    }
}
