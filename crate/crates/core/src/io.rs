//! CSV serialization for grids and measurement series.

use std::path::Path;

use crate::error::{Error, Result};
use crate::gridfn::GridFunction;
use crate::interval::{Interval, IntervalSet};

pub const GRID_HEADER: [&str; 2] = ["omega_meV", "value"];
pub const INTERVAL_HEADER: [&str; 2] = ["lo_mev", "hi_mev"];

/// Reads a headed CSV with `#` comments, checking the header and returning
/// each record with its 1-based line number.
pub fn read_records(path: &Path, text: &str, header: &[&str]) -> Result<Vec<(usize, Vec<String>)>> {
    let perr = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    // Comments are dropped here rather than by the reader, whose line
    // counter would then skip them.
    let mut kept = String::with_capacity(text.len());
    let mut lines = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let t = l.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        kept.push_str(l);
        kept.push('\n');
        lines.push(i + 1);
    }
    let original = |pos: Option<&csv::Position>| {
        pos.and_then(|p| lines.get((p.line() as usize).saturating_sub(1)))
            .copied()
            .unwrap_or(0)
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(kept.as_bytes());
    let got = rdr
        .headers()
        .map_err(|e| perr(original(e.position()), e.to_string()))?
        .clone();
    let got: Vec<&str> = got.iter().collect();
    if got != header {
        return Err(perr(
            lines.first().copied().unwrap_or(1),
            format!(
                "expected header `{}`, got `{}`",
                header.join(","),
                got.join(",")
            ),
        ));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| perr(original(e.position()), e.to_string()))?;
        let line = original(rec.position());
        if rec.len() != header.len() {
            return Err(perr(
                line,
                format!("expected {} fields, got {}", header.len(), rec.len()),
            ));
        }
        out.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok(out)
}

/// Parses a float field, citing the line on failure.
pub fn parse_f64(path: &Path, line: usize, field: &str, name: &str) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            reason: format!("`{name}`: `{field}` is not a finite number"),
        }),
    }
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses `omega_meV,value` text into a grid; spacing must be uniform to
/// within `1e-9·step`.
pub fn parse_grid_csv(path: &Path, text: &str) -> Result<GridFunction> {
    let rows = read_records(path, text, &GRID_HEADER)?;
    let perr = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    if rows.len() < 2 {
        return Err(perr(
            rows.first().map_or(1, |r| r.0),
            "need at least 2 samples".into(),
        ));
    }
    let mut omega = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    for (line, rec) in &rows {
        omega.push(parse_f64(path, *line, &rec[0], "omega_meV")?);
        values.push(parse_f64(path, *line, &rec[1], "value")?);
    }
    let first = omega[1] - omega[0];
    if !(first > 0.0) {
        return Err(perr(rows[1].0, "omega must be strictly increasing".into()));
    }
    for i in 1..omega.len() {
        let d = omega[i] - omega[i - 1];
        if !(d > 0.0) || (d - first).abs() > 1e-9 * first {
            return Err(perr(
                rows[i].0,
                format!("omega {} breaks uniform spacing {first}", omega[i]),
            ));
        }
    }
    let step = (omega[omega.len() - 1] - omega[0]) / (omega.len() - 1) as f64;
    GridFunction::new(omega[0], step, values)
}

pub fn read_grid_csv(path: &Path) -> Result<GridFunction> {
    parse_grid_csv(path, &read_to_string(path)?)
}

pub fn grid_to_csv(g: &GridFunction) -> String {
    let mut s = String::with_capacity(g.len() * 24);
    s.push_str(&GRID_HEADER.join(","));
    s.push('\n');
    for (w, v) in g.nodes() {
        s.push_str(&format!("{w},{v}\n"));
    }
    s
}

pub fn write_grid_csv(path: &Path, g: &GridFunction) -> Result<()> {
    std::fs::write(path, grid_to_csv(g)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Headed CSV from pre-formatted fields.
pub fn table_to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",") + "\n";
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

/// One `lo_mev,hi_mev` row per interval; an unbounded end is written `inf`.
pub fn intervals_to_csv(set: &IntervalSet) -> String {
    let rows: Vec<Vec<String>> = set
        .iter()
        .map(|i| vec![i.lo.to_string(), i.hi.to_string()])
        .collect();
    table_to_csv(&INTERVAL_HEADER, &rows)
}

pub fn parse_intervals_csv(path: &Path, text: &str) -> Result<IntervalSet> {
    let rows = read_records(path, text, &INTERVAL_HEADER)?;
    let mut out = Vec::with_capacity(rows.len());
    for (line, r) in &rows {
        let lo = parse_f64(path, *line, &r[0], INTERVAL_HEADER[0])?;
        let hi = match r[1].as_str() {
            "inf" => f64::INFINITY,
            f => parse_f64(path, *line, f, INTERVAL_HEADER[1])?,
        };
        if !(hi >= lo) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: *line,
                reason: format!("interval [{lo}, {hi}] is reversed"),
            });
        }
        out.push(Interval::new(lo, hi));
    }
    Ok(IntervalSet::from_intervals(out))
}

pub fn read_intervals_csv(path: &Path) -> Result<IntervalSet> {
    parse_intervals_csv(path, &read_to_string(path)?)
}
