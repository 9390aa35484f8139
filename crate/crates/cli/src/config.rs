//! Flat `key = value` run configuration.
//!
//! Every key ends in its unit: `_mev`, `_ghz`, `_mhz`, `_mhz_per_mev3`,
//! `_ev`, `_k`, `_ns`, `_dimless` for pure numbers, `_path` for files and
//! `_flag` for booleans. Relative paths resolve against the config file.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: cannot read config: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`{hint}")]
    UnknownKey {
        line: usize,
        key: String,
        hint: String,
    },
    #[error("line {line}: key `{key}` already set on line {first}")]
    Duplicate {
        line: usize,
        key: String,
        first: usize,
    },
    #[error("line {line}: `{key}`: {reason}")]
    Value {
        line: usize,
        key: String,
        reason: String,
    },
    #[error("missing required keys: {}", .0.join(", "))]
    Missing(Vec<&'static str>),
    #[error("`{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Number,
    List,
    Path,
    Flag,
}

struct KeyDef {
    name: &'static str,
    kind: Kind,
    /// `None` marks a required key.
    default: Option<&'static str>,
}

const fn req(name: &'static str, kind: Kind) -> KeyDef {
    KeyDef {
        name,
        kind,
        default: None,
    }
}

const fn opt(name: &'static str, kind: Kind, default: &'static str) -> KeyDef {
    KeyDef {
        name,
        kind,
        default: Some(default),
    }
}

/// Optional keys whose absence means "not supplied".
const UNSET: &str = "";

use Kind::*;

const KEYS: &[KeyDef] = &[
    req("psb_manifest_path", Path),
    req("lambda_par_ghz", Number),
    req("lambda_ratio_dimless", Number),
    opt("lambda_ratio_lo_dimless", Number, UNSET),
    opt("lambda_ratio_hi_dimless", Number, UNSET),
    req("eta_mhz_per_mev3", Number),
    opt("eta_lo_mhz_per_mev3", Number, UNSET),
    opt("eta_hi_mhz_per_mev3", Number, UNSET),
    req("omega_mev", Number),
    req("delta_mev", Number),
    opt("delta_prime_mev", Number, "1190"),
    opt("singlet_path_flag", Flag, "true"),
    opt("temperature_k", Number, "5"),
    opt("g_rad_mhz", Number, "13.2"),
    opt("g_rad_lo_mhz", Number, UNSET),
    opt("g_rad_hi_mhz", Number, UNSET),
    opt("tau0_ns", Number, "12.0"),
    opt("delta_xy_ghz", Number, "3.9"),
    opt("gamma_a1_target_mhz", Number, "16.0"),
    opt("gamma_a1_target_lo_mhz", Number, "15.4"),
    opt("gamma_a1_target_hi_mhz", Number, "16.6"),
    opt("ratio_target_dimless", Number, "0.50"),
    opt("ratio_target_lo_dimless", Number, "0.45"),
    opt("ratio_target_hi_dimless", Number, "0.55"),
    opt("exclusion_floor_mev", Number, "148"),
    opt("delta_sweep_lo_mev", Number, "20"),
    opt("delta_sweep_hi_mev", Number, "600"),
    opt("delta_sweep_step_mev", Number, "1"),
    opt("omega_search_delta_lo_mev", Number, "344"),
    opt("omega_search_delta_hi_mev", Number, "430"),
    opt("omega_search_delta_step_mev", Number, "1"),
    opt("lowt_omega_lo_mev", Number, "74"),
    opt("lowt_omega_hi_mev", Number, "93"),
    opt("lowt_omega_step_mev", Number, "1"),
    opt("mott_seitz_s_dimless", Number, "5.8e7"),
    opt("mott_seitz_delta_e_ev", Number, "0.94"),
    opt("epsilon_values_dimless", List, "0, 0.5, 1"),
    opt("mix_sweep_lo_k", Number, "2"),
    opt("mix_sweep_hi_k", Number, "30"),
    opt("mix_sweep_step_k", Number, "1"),
    opt("mix_data_path", Path, UNSET),
    opt("lifetime_data_path", Path, UNSET),
];

/// A value with its lower and upper confidence limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Banded {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Closed sweep `lo..=hi` in steps of `step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub psb_manifest: PathBuf,
    pub lambda_par_ghz: f64,
    pub lambda_ratio: Banded,
    pub eta_mhz_per_mev3: Banded,
    pub omega_mev: f64,
    pub delta_mev: f64,
    pub delta_prime_mev: f64,
    pub singlet_path: bool,
    pub temperature_k: f64,
    pub g_rad_mhz: Banded,
    pub tau0_ns: f64,
    pub delta_xy_ghz: f64,
    pub gamma_a1_target_mhz: Banded,
    pub ratio_target: Banded,
    pub exclusion_floor_mev: f64,
    pub delta_sweep: Range,
    pub omega_search_deltas: Range,
    pub lowt_omegas: Range,
    pub mott_seitz_s: f64,
    pub mott_seitz_delta_e_ev: f64,
    pub epsilons: Vec<f64>,
    pub mix_sweep: Range,
    pub mix_data: Option<PathBuf>,
    pub lifetime_data: Option<PathBuf>,
    /// Resolved `key = value` pairs in canonical order, for the summary.
    pub echo: Vec<(&'static str, String)>,
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.echo {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

pub fn read_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Hint for an unknown key whose stem matches a known key.
fn suffix_hint(key: &str) -> String {
    let stem = |k: &str| {
        k.rsplit_once('_')
            .map_or(k.to_string(), |(s, _)| s.to_string())
    };
    let want = stem(key);
    KEYS.iter()
        .find(|k| k.name.starts_with(&format!("{want}_")) && stem(k.name) == want)
        .or_else(|| {
            KEYS.iter()
                .find(|k| k.name.starts_with(&format!("{want}_")))
        })
        .map_or(String::new(), |k| {
            format!(" (wrong unit suffix? expected `{}`)", k.name)
        })
}

pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig, ConfigError> {
    let mut raw: HashMap<&'static str, (usize, String)> = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: line_no,
            text: body.to_string(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let def = KEYS
            .iter()
            .find(|k| k.name == key)
            .ok_or_else(|| ConfigError::UnknownKey {
                line: line_no,
                key: key.to_string(),
                hint: suffix_hint(key),
            })?;
        if let Some((first, _)) = raw.get(def.name) {
            return Err(ConfigError::Duplicate {
                line: line_no,
                key: key.to_string(),
                first: *first,
            });
        }
        if value.is_empty() {
            return Err(ConfigError::Value {
                line: line_no,
                key: key.to_string(),
                reason: "empty value".into(),
            });
        }
        raw.insert(def.name, (line_no, value.to_string()));
    }

    let missing: Vec<&'static str> = KEYS
        .iter()
        .filter(|k| k.default.is_none() && !raw.contains_key(k.name))
        .map(|k| k.name)
        .collect();
    if !missing.is_empty() {
        return Err(ConfigError::Missing(missing));
    }

    let mut values = Values {
        raw,
        base_dir,
        echo: Vec::new(),
    };
    for k in KEYS {
        values.check(k)?;
    }
    build(&mut values)
}

struct Values<'a> {
    raw: HashMap<&'static str, (usize, String)>,
    base_dir: &'a Path,
    echo: Vec<(&'static str, String)>,
}

impl Values<'_> {
    /// Raw text and line (0 for defaults), or `None` for an unset optional.
    fn get(&self, name: &'static str) -> Option<(usize, String)> {
        if let Some(v) = self.raw.get(name) {
            return Some(v.clone());
        }
        let def = KEYS.iter().find(|k| k.name == name).expect("known key");
        match def.default {
            Some(d) if d != UNSET => Some((0, d.to_string())),
            _ => None,
        }
    }

    fn value_err(name: &str, line: usize, reason: String) -> ConfigError {
        if line == 0 {
            ConfigError::Value {
                line,
                key: name.into(),
                reason: format!("default {reason}"),
            }
        } else {
            ConfigError::Value {
                line,
                key: name.into(),
                reason,
            }
        }
    }

    /// Type-checks one key and records it for the echo.
    fn check(&mut self, def: &KeyDef) -> Result<(), ConfigError> {
        let Some((line, text)) = self.get(def.name) else {
            return Ok(());
        };
        match def.kind {
            Number => {
                number(&text).map_err(|r| Self::value_err(def.name, line, r))?;
            }
            List => {
                for item in text.split(',') {
                    number(item.trim()).map_err(|r| Self::value_err(def.name, line, r))?;
                }
            }
            Flag => {
                flag(&text).map_err(|r| Self::value_err(def.name, line, r))?;
            }
            Path => {
                let p = self.base_dir.join(&text);
                if !p.is_file() {
                    return Err(Self::value_err(
                        def.name,
                        line,
                        format!("file `{}` does not exist", p.display()),
                    ));
                }
            }
        }
        self.echo.push((def.name, text));
        Ok(())
    }

    fn num(&self, name: &'static str) -> f64 {
        self.get(name)
            .map_or(f64::NAN, |(_, t)| number(&t).unwrap_or(f64::NAN))
    }

    fn opt_num(&self, name: &'static str) -> Option<f64> {
        self.get(name).and_then(|(_, t)| number(&t).ok())
    }

    fn path(&self, name: &'static str) -> Option<PathBuf> {
        self.get(name).map(|(_, t)| self.base_dir.join(t))
    }

    fn banded(
        &self,
        value: &'static str,
        lo: &'static str,
        hi: &'static str,
    ) -> Result<Banded, ConfigError> {
        let v = self.num(value);
        let b = Banded {
            value: v,
            lo: self.opt_num(lo).unwrap_or(v),
            hi: self.opt_num(hi).unwrap_or(v),
        };
        if !(b.lo <= b.value && b.value <= b.hi) {
            return Err(ConfigError::Invalid {
                key: value,
                reason: format!(
                    "band must satisfy lo ≤ value ≤ hi, got {} ≤ {} ≤ {}",
                    b.lo, b.value, b.hi
                ),
            });
        }
        Ok(b)
    }

    fn range(
        &self,
        lo: &'static str,
        hi: &'static str,
        step: &'static str,
    ) -> Result<Range, ConfigError> {
        let r = Range {
            lo: self.num(lo),
            hi: self.num(hi),
            step: self.num(step),
        };
        if !(r.step > 0.0 && r.hi >= r.lo) {
            return Err(ConfigError::Invalid {
                key: step,
                reason: format!(
                    "sweep {}..{} step {} is empty or reversed",
                    r.lo, r.hi, r.step
                ),
            });
        }
        Ok(r)
    }

    fn positive(&self, name: &'static str) -> Result<f64, ConfigError> {
        let v = self.num(name);
        if !(v > 0.0) {
            return Err(ConfigError::Invalid {
                key: name,
                reason: format!("must be positive, got {v}"),
            });
        }
        Ok(v)
    }
}

fn number(text: &str) -> Result<f64, String> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("`{text}` is not a finite number")),
    }
}

fn flag(text: &str) -> Result<bool, String> {
    match text {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("`{text}` is not a boolean (true/false)")),
    }
}

fn build(v: &mut Values<'_>) -> Result<RunConfig, ConfigError> {
    let epsilons: Vec<f64> = v
        .get("epsilon_values_dimless")
        .map(|(_, t)| t.split(',').filter_map(|s| number(s.trim()).ok()).collect())
        .unwrap_or_default();
    if epsilons.iter().any(|&e| e < 0.0) {
        return Err(ConfigError::Invalid {
            key: "epsilon_values_dimless",
            reason: "values must be non-negative".into(),
        });
    }
    let cfg = RunConfig {
        psb_manifest: v.path("psb_manifest_path").expect("required"),
        lambda_par_ghz: v.positive("lambda_par_ghz")?,
        lambda_ratio: v.banded(
            "lambda_ratio_dimless",
            "lambda_ratio_lo_dimless",
            "lambda_ratio_hi_dimless",
        )?,
        eta_mhz_per_mev3: v.banded(
            "eta_mhz_per_mev3",
            "eta_lo_mhz_per_mev3",
            "eta_hi_mhz_per_mev3",
        )?,
        omega_mev: v.positive("omega_mev")?,
        delta_mev: v.positive("delta_mev")?,
        delta_prime_mev: v.positive("delta_prime_mev")?,
        singlet_path: v
            .get("singlet_path_flag")
            .map(|(_, t)| flag(&t).unwrap_or(true))
            .unwrap_or(true),
        temperature_k: {
            let t = v.num("temperature_k");
            if !(t >= 0.0) {
                return Err(ConfigError::Invalid {
                    key: "temperature_k",
                    reason: format!("must be non-negative, got {t}"),
                });
            }
            t
        },
        g_rad_mhz: v.banded("g_rad_mhz", "g_rad_lo_mhz", "g_rad_hi_mhz")?,
        tau0_ns: v.positive("tau0_ns")?,
        delta_xy_ghz: v.num("delta_xy_ghz"),
        gamma_a1_target_mhz: v.banded(
            "gamma_a1_target_mhz",
            "gamma_a1_target_lo_mhz",
            "gamma_a1_target_hi_mhz",
        )?,
        ratio_target: v.banded(
            "ratio_target_dimless",
            "ratio_target_lo_dimless",
            "ratio_target_hi_dimless",
        )?,
        exclusion_floor_mev: v.num("exclusion_floor_mev"),
        delta_sweep: v.range(
            "delta_sweep_lo_mev",
            "delta_sweep_hi_mev",
            "delta_sweep_step_mev",
        )?,
        omega_search_deltas: v.range(
            "omega_search_delta_lo_mev",
            "omega_search_delta_hi_mev",
            "omega_search_delta_step_mev",
        )?,
        lowt_omegas: v.range(
            "lowt_omega_lo_mev",
            "lowt_omega_hi_mev",
            "lowt_omega_step_mev",
        )?,
        mott_seitz_s: v.num("mott_seitz_s_dimless"),
        mott_seitz_delta_e_ev: v.positive("mott_seitz_delta_e_ev")?,
        epsilons,
        mix_sweep: v.range("mix_sweep_lo_k", "mix_sweep_hi_k", "mix_sweep_step_k")?,
        mix_data: v.path("mix_data_path"),
        lifetime_data: v.path("lifetime_data_path"),
        echo: std::mem::take(&mut v.echo),
    };
    if cfg.mix_sweep.lo <= 0.0 {
        return Err(ConfigError::Invalid {
            key: "mix_sweep_lo_k",
            reason: "mixing rates need T > 0".into(),
        });
    }
    Ok(cfg)
}
