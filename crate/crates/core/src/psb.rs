//! Phonon sideband model.
//!
//! The low-temperature vibrational overlap function is a Poisson series of
//! self-convolutions of a one-phonon density `f`:
//! `F0 = e^{−S0} Σ_{i≥1} S0^i/i! · f^{⊗i}`. At finite temperature `f` is
//! replaced by the thermal one-phonon function `F₁(ω,T)` and `S0` by `S(T)`.
//!
//! Shapes are handled with Poisson normalization (`∫F = 1 − e^{−S}`); a
//! [`PsbModel`] additionally carries an `amplitude` so that
//! [`PsbModel::overlap`] returns the physically scaled `F` used by rates.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::gridfn::{aligned_offset, GridFunction};
use crate::io;
use crate::units::Temperature;

/// Upper end of the one-phonon support, meV.
pub const DEFAULT_SUPPORT_CAP_MEV: f64 = 200.0;
/// Default sideband window, meV.
pub const DEFAULT_WINDOW_MEV: (f64, f64) = (-400.0, 1200.0);
pub const DEFAULT_STEP_MEV: f64 = 0.25;

/// Bose–Einstein occupation `1/(e^{ω/k_BT} − 1)`.
pub fn thermal_occupation(omega_mev: f64, t: Temperature) -> Result<f64> {
    if t.is_zero() {
        return Ok(0.0);
    }
    if omega_mev == 0.0 {
        return Err(Error::DivergentOccupation {
            temperature_k: t.value(),
        });
    }
    Ok(1.0 / (omega_mev / t.thermal_energy_mev()).exp_m1())
}

/// `ω·n(ω)`, finite at `ω = 0` where it tends to `k_BT`.
pub fn omega_times_occupation(omega_mev: f64, t: Temperature) -> f64 {
    if t.is_zero() {
        return 0.0;
    }
    let kt = t.thermal_energy_mev();
    if omega_mev == 0.0 {
        return kt;
    }
    omega_mev / (omega_mev / kt).exp_m1()
}

/// Number of Poisson terms kept for Huang–Rhys factor `s`.
pub fn required_terms(s: f64) -> usize {
    let s = s.max(0.0);
    ((s + 10.0 * s.sqrt()).ceil() as usize).max(20)
}

/// `Σ values · step`, the mass preserved exactly by discrete convolution.
fn mass(g: &GridFunction) -> f64 {
    g.values().iter().sum::<f64>() * g.step()
}

/// Re-grids `f` onto nodes `0, step, …, omega_max(f)`; `f` must have a node
/// at (or an aligned position relative to) zero.
fn from_zero(f: &GridFunction) -> Result<GridFunction> {
    let off = aligned_offset(f.omega_min(), 0.0, f.step())
        .ok_or_else(|| Error::InvalidGrid("one-phonon grid must have a node at ω = 0".into()))?;
    if f.omega_max() <= 0.0 {
        return Err(Error::InvalidGrid(
            "one-phonon density has no support above 0".into(),
        ));
    }
    let len = (f.len() as isize - off).max(2) as usize;
    f.embed(0.0, len)
}

/// `F₁(ω,T)`: `[n+1]·f(ω)` for `ω ≥ 0` and `n(|ω|)·f(|ω|)` for `ω < 0`, on a
/// grid symmetric about zero. At `T = 0` this is `f` padded with zeros.
pub fn thermal_one_phonon(f: &GridFunction, t: Temperature) -> Result<GridFunction> {
    let f = from_zero(f)?;
    let n = f.len();
    let mut values = vec![0.0; 2 * n - 1];
    for (i, &v) in f.values().iter().enumerate() {
        let w = f.omega(i);
        if i == 0 {
            // n(0) diverges; one-phonon densities vanish there, so the node
            // keeps its bare value.
            values[n - 1] = v;
            continue;
        }
        if t.is_zero() {
            values[n - 1 + i] = v;
            continue;
        }
        let occ = thermal_occupation(w, t)?;
        values[n - 1 + i] = (occ + 1.0) * v;
        values[n - 1 - i] = occ * v;
    }
    GridFunction::new(-f.omega_max(), f.step(), values)
}

/// `S(T) = S0·∫₀^limit [2n(ω,T)+1]·f(ω) dω`.
pub fn huang_rhys(f: &GridFunction, s0: f64, t: Temperature, limit_mev: f64) -> Result<f64> {
    if !(s0 >= 0.0) {
        return Err(Error::param(
            "s0",
            format!("must be non-negative, got {s0}"),
        ));
    }
    let weighted = f.map(|w, v| {
        if w <= 0.0 || t.is_zero() {
            v
        } else {
            v * (1.0 + 2.0 / (w / t.thermal_energy_mev()).exp_m1())
        }
    })?;
    Ok(s0 * weighted.integrate(0.0, limit_mev.max(0.0))?)
}

/// Poisson series `e^{−s}·Σ_{i=1}^{i_max} s^i/i!·k^{⊗i}` on the aligned
/// window `[lo, hi]`. `kernel` should have unit mass.
pub fn poisson_series(
    kernel: &GridFunction,
    s: f64,
    i_max: usize,
    window: (f64, f64),
) -> Result<GridFunction> {
    if i_max < 1 {
        return Err(Error::param("i_max", "must be at least 1"));
    }
    let h = kernel.step();
    let len = ((window.1 - window.0) / h + 1e-6).floor() as usize + 1;
    let mut term = kernel.embed(window.0, len)?;
    let mut acc = vec![0.0; len];
    let mut weight = (-s).exp();
    for i in 1..=i_max {
        weight *= s / i as f64;
        if i > 1 {
            term = term.convolve_on(kernel, window.0, window.1)?;
        }
        for (a, t) in acc.iter_mut().zip(term.values()) {
            *a += weight * t;
        }
    }
    GridFunction::new(window.0, h, acc)
}

/// Options for [`extract_one_phonon_with`].
#[derive(Debug, Clone, Copy)]
pub struct DeconvolutionOptions {
    pub support_cap_mev: f64,
    pub relax: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for DeconvolutionOptions {
    fn default() -> Self {
        DeconvolutionOptions {
            support_cap_mev: DEFAULT_SUPPORT_CAP_MEV,
            relax: 0.5,
            max_iterations: 500,
            tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Deconvolution {
    pub f: GridFunction,
    pub iterations: usize,
    /// L1 distance between the Poisson-normalized target and the forward
    /// model of `f`.
    pub residual: f64,
    /// Scale of the input relative to the Poisson-normalized forward model.
    pub amplitude: f64,
}

/// Recovers the unit-mass one-phonon density from a low-temperature
/// sideband with default options.
pub fn extract_one_phonon(f0: &GridFunction, s0: f64) -> Result<GridFunction> {
    extract_one_phonon_with(f0, s0, &DeconvolutionOptions::default()).map(|d| d.f)
}

/// Deconvolution of the Poisson series.
///
/// On the grid the series is `1 + h·e^{S0}·F0 = exp(G)` as power series in
/// the node index, with `G_n = S0·h·f_n`, so the exact discrete inverse is a
/// power-series logarithm. That gives the starting point; a relaxed
/// fixed-point iteration then enforces `f ≥ 0`, the support cap and unit
/// mass while driving the forward residual below tolerance.
pub fn extract_one_phonon_with(
    f0: &GridFunction,
    s0: f64,
    opts: &DeconvolutionOptions,
) -> Result<Deconvolution> {
    if !(s0 > 0.0 && s0.is_finite()) {
        return Err(Error::param("s0", format!("must be positive, got {s0}")));
    }
    if f0.values().iter().any(|&v| v < 0.0) {
        return Err(Error::param("F0", "overlap function must be non-negative"));
    }
    let h = f0.step();
    let target = from_zero(f0)?;
    let total = mass(&target);
    if !(total > 0.0) {
        return Err(Error::param("F0", "no weight at ω ≥ 0"));
    }
    let n_all = target.len();
    let k_cap = ((opts.support_cap_mev / h + 1e-6).floor() as usize).min(n_all - 1);
    // The scale is fixed by requiring the logarithm to carry exactly S0
    // within the support cap. Only nodes below the cap enter, so a spectrum
    // cropped at high energy does not bias it.
    let weight = |norm: f64| -> f64 {
        let t: Vec<f64> = target.values()[..=k_cap].iter().map(|v| v * norm).collect();
        log_coefficients(&t, s0, h, k_cap).iter().sum::<f64>() - s0
    };
    let mut x0 = (1.0 - (-s0).exp()) / total;
    let mut x1 = x0 * 1.001;
    let (mut y0, mut y1) = (weight(x0), weight(x1));
    for _ in 0..50 {
        if y1 == y0 || y1.abs() < 1e-14 * s0 {
            break;
        }
        let x2 = x1 - y1 * (x1 - x0) / (y1 - y0);
        if !(x2 > 0.0 && x2.is_finite()) {
            break;
        }
        (x0, y0) = (x1, y1);
        x1 = x2;
        y1 = weight(x1);
    }
    let norm = if y1.abs() <= 1e-6 * s0 {
        x1
    } else {
        (1.0 - (-s0).exp()) / total
    };
    let t: Vec<f64> = target.values().iter().map(|v| v * norm).collect();
    let mut f = log_coefficients(&t, s0, h, k_cap);
    for v in f.iter_mut() {
        *v /= s0 * h;
    }
    project(&mut f, h);

    let mut residual = forward_residual(&f, s0, h, &t);
    let mut iterations = 0;
    let mut relax = opts.relax;
    while residual >= opts.tolerance {
        if iterations >= opts.max_iterations {
            return Err(Error::NotConverged {
                iterations,
                residual,
            });
        }
        iterations += 1;
        let model = forward(&f, s0, h, n_all);
        let r: Vec<f64> = t.iter().zip(&model).map(|(a, b)| a - b).collect();
        // Backtrack on the step length until the residual drops.
        let mut accepted = false;
        while relax > 1e-6 {
            let mut trial: Vec<f64> = f.iter().zip(&r).map(|(a, b)| a + relax * b).collect();
            project(&mut trial, h);
            let res = forward_residual(&trial, s0, h, &t);
            if res < residual {
                f = trial;
                residual = res;
                accepted = true;
                break;
            }
            relax *= 0.5;
        }
        if !accepted {
            return Err(Error::NotConverged {
                iterations,
                residual,
            });
        }
        relax = (relax * 2.0).min(opts.relax);
    }
    let f = GridFunction::new(0.0, h, f)?;
    Ok(Deconvolution {
        f,
        iterations,
        residual,
        amplitude: 1.0 / norm,
    })
}

/// Coefficients `G_0..=G_k_cap` of `log(1 + h·e^{S0}·t)` as a power series
/// in the node index.
fn log_coefficients(t: &[f64], s0: f64, h: f64, k_cap: usize) -> Vec<f64> {
    let es = s0.exp();
    let m: Vec<f64> = t[..=k_cap]
        .iter()
        .enumerate()
        .map(|(n, v)| es * h * v + if n == 0 { 1.0 } else { 0.0 })
        .collect();
    let mut g = vec![0.0; k_cap + 1];
    g[0] = m[0].ln();
    for n in 1..=k_cap {
        let mut s = 0.0;
        for k in 1..n {
            s += k as f64 * g[k] * m[n - k];
        }
        g[n] = (m[n] - s / n as f64) / m[0];
    }
    g
}

/// Clip negatives and rescale to unit mass.
fn project(f: &mut [f64], h: f64) {
    for v in f.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let s: f64 = f.iter().sum::<f64>() * h;
    if s > 0.0 {
        for v in f.iter_mut() {
            *v /= s;
        }
    }
}

/// Untruncated discrete forward model on `n` nodes from zero via the
/// power-series exponential: `n·m_n = Σ_k k·G_k·m_{n−k}`.
fn forward(f: &[f64], s0: f64, h: f64, n: usize) -> Vec<f64> {
    let g: Vec<f64> = f.iter().map(|v| v * s0 * h).collect();
    let mut m = vec![0.0; n];
    m[0] = g[0].exp();
    for j in 1..n {
        let kmax = j.min(g.len() - 1);
        let mut s = 0.0;
        for k in 1..=kmax {
            s += k as f64 * g[k] * m[j - k];
        }
        m[j] = s / j as f64;
    }
    let scale = (-s0).exp() / h;
    m.iter()
        .enumerate()
        .map(|(j, v)| (v - if j == 0 { 1.0 } else { 0.0 }) * scale)
        .collect()
}

fn forward_residual(f: &[f64], s0: f64, h: f64, target: &[f64]) -> f64 {
    let model = forward(f, s0, h, target.len());
    model
        .iter()
        .zip(target)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        * h
}

/// Low-temperature sideband, its one-phonon density and scale.
#[derive(Debug, Clone)]
pub struct PsbModel {
    /// Measured (or synthetic) overlap function, physical scale.
    pub f0: GridFunction,
    /// One-phonon density with unit integral, node at 0.
    pub f1: GridFunction,
    pub s0: f64,
    /// Upper limit of the `S(T)` integral, meV.
    pub omega_limit_mev: f64,
    /// Scale of `F0` over the Poisson-normalized series, as solved by the
    /// deconvolution; 1 for normalized spectra.
    pub amplitude: f64,
    /// Window on which finite-temperature overlaps are built.
    pub window: (f64, f64),
}

impl PsbModel {
    /// Builds a model from a measured `F0`, deconvolving the one-phonon
    /// density.
    pub fn from_f0(f0: GridFunction, s0: f64) -> Result<Self> {
        PsbModel::from_f0_with(f0, s0, &DeconvolutionOptions::default())
    }

    pub fn from_f0_with(f0: GridFunction, s0: f64, opts: &DeconvolutionOptions) -> Result<Self> {
        let d = extract_one_phonon_with(&f0, s0, opts)?;
        Ok(PsbModel {
            f0,
            f1: d.f,
            s0,
            omega_limit_mev: opts.support_cap_mev,
            amplitude: d.amplitude,
            window: DEFAULT_WINDOW_MEV,
        })
    }

    /// Model from a known one-phonon density (unit amplitude); `F0` is the
    /// forward Poisson series.
    pub fn from_one_phonon(f1: GridFunction, s0: f64) -> Result<Self> {
        if !(s0 > 0.0) {
            return Err(Error::param("s0", format!("must be positive, got {s0}")));
        }
        let f1 = from_zero(&f1)?;
        let limit = f1.omega_max();
        let f0 = poisson_series(&f1, s0, required_terms(s0), (0.0, DEFAULT_WINDOW_MEV.1))?;
        Ok(PsbModel {
            f0,
            f1,
            s0,
            omega_limit_mev: limit,
            amplitude: 1.0,
            window: DEFAULT_WINDOW_MEV,
        })
    }

    pub fn with_window(mut self, lo: f64, hi: f64) -> Self {
        self.window = (lo, hi);
        self
    }

    pub fn with_omega_limit(mut self, limit_mev: f64) -> Self {
        self.omega_limit_mev = limit_mev;
        self
    }

    pub fn huang_rhys(&self, t: Temperature) -> Result<f64> {
        huang_rhys(&self.f1, self.s0, t, self.omega_limit_mev)
    }

    /// Poisson-normalized `F(ω,T)` with the series cut at `i_max`.
    pub fn thermal_overlap(&self, t: Temperature, i_max: usize) -> Result<GridFunction> {
        let s = self.huang_rhys(t)?;
        let required = required_terms(s);
        if i_max < required {
            return Err(Error::TruncationTooLow { i_max, required });
        }
        let k = thermal_one_phonon(&self.f1, t)?;
        let kernel = k.scale(1.0 / mass(&k))?;
        poisson_series(&kernel, s, i_max, self.window)
    }

    /// Physically scaled `F(ω,T)` with the default truncation.
    pub fn overlap(&self, t: Temperature) -> Result<GridFunction> {
        let s = self.huang_rhys(t)?;
        self.thermal_overlap(t, required_terms(s))?
            .scale(self.amplitude)
    }

    /// Loads a model from a `key = value` manifest. Keys: `f0_csv`
    /// (relative to the manifest), `s0`, and optionally `omega_mev`,
    /// `support_cap_mev`, `window_lo_mev`, `window_hi_mev`.
    pub fn from_manifest(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let perr = |line: usize, reason: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let mut csv: Option<PathBuf> = None;
        let mut s0 = None;
        let mut omega = None;
        let mut opts = DeconvolutionOptions::default();
        let mut window = DEFAULT_WINDOW_MEV;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| perr(line_no, format!("expected key = value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let num = || {
                value
                    .parse::<f64>()
                    .map_err(|_| perr(line_no, format!("`{key}`: `{value}` is not a number")))
            };
            match key {
                "f0_csv" => {
                    let p = PathBuf::from(value);
                    csv = Some(if p.is_absolute() {
                        p
                    } else {
                        path.parent().unwrap_or(Path::new(".")).join(p)
                    });
                }
                "s0" => s0 = Some(num()?),
                "omega_mev" => omega = Some(num()?),
                "support_cap_mev" => opts.support_cap_mev = num()?,
                "window_lo_mev" => window.0 = num()?,
                "window_hi_mev" => window.1 = num()?,
                other => return Err(perr(line_no, format!("unknown key `{other}`"))),
            }
        }
        let csv = csv.ok_or_else(|| perr(0, "missing key `f0_csv`".into()))?;
        let s0 = s0.ok_or_else(|| perr(0, "missing key `s0`".into()))?;
        let f0 = io::read_grid_csv(&csv)?;
        let mut model = PsbModel::from_f0_with(f0, s0, &opts)?.with_window(window.0, window.1);
        if let Some(o) = omega {
            model = model.with_omega_limit(o);
        }
        Ok(model)
    }
}

/// Analytic test spectra.
pub mod synthetic {
    use super::*;

    /// Unit-mass spike at `omega0` on `[0, cap]`.
    pub fn spike(omega0: f64, step: f64, cap: f64) -> Result<GridFunction> {
        let mut f = GridFunction::zeros(0.0, cap, step)?.into_values();
        let i = (omega0 / step).round() as usize;
        if i >= f.len() {
            return Err(Error::param("omega0", "outside the support"));
        }
        f[i] = 1.0 / step;
        GridFunction::new(0.0, step, f)
    }

    /// Poisson comb of a single mode: weight `e^{−S}S^i/i!` concentrated on
    /// the node at `i·omega0`.
    pub fn poisson_comb(omega0: f64, s0: f64, step: f64, hi: f64) -> Result<GridFunction> {
        let mut v = GridFunction::zeros(0.0, hi, step)?.into_values();
        let mut w = (-s0).exp();
        let mut i = 1;
        loop {
            w *= s0 / i as f64;
            let k = (i as f64 * omega0 / step).round() as usize;
            if k >= v.len() {
                break;
            }
            v[k] = w / step;
            i += 1;
        }
        GridFunction::new(0.0, step, v)
    }

    /// Weighted pair of Gaussians `w·N(m1,σ1) + (1−w)·N(m2,σ2)`.
    #[derive(Debug, Clone, Copy)]
    pub struct TwoGaussian {
        pub weight: f64,
        pub mean1: f64,
        pub sigma1: f64,
        pub mean2: f64,
        pub sigma2: f64,
    }

    fn normal(x: f64, mu: f64, var: f64) -> f64 {
        (-(x - mu) * (x - mu) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
    }

    impl TwoGaussian {
        pub fn density(&self, x: f64) -> f64 {
            self.weight * normal(x, self.mean1, self.sigma1 * self.sigma1)
                + (1.0 - self.weight) * normal(x, self.mean2, self.sigma2 * self.sigma2)
        }

        pub fn one_phonon(&self, step: f64, cap: f64) -> Result<GridFunction> {
            GridFunction::from_fn(0.0, cap, step, |x| self.density(x))
        }

        /// Closed-form Poisson series: the i-fold self-convolution is a
        /// binomial mixture of Gaussians.
        pub fn overlap(&self, s0: f64, step: f64, hi: f64) -> Result<GridFunction> {
            let i_max = required_terms(s0) + 10;
            let (v1, v2) = (self.sigma1 * self.sigma1, self.sigma2 * self.sigma2);
            let mut comps = Vec::new();
            let mut pw = (-s0).exp();
            for i in 1..=i_max {
                pw *= s0 / i as f64;
                let mut binom = 1.0;
                for k in 0..=i {
                    if k > 0 {
                        binom *= (i - k + 1) as f64 / k as f64;
                    }
                    let w = pw
                        * binom
                        * self.weight.powi(k as i32)
                        * (1.0 - self.weight).powi((i - k) as i32);
                    let mu = k as f64 * self.mean1 + (i - k) as f64 * self.mean2;
                    let var = k as f64 * v1 + (i - k) as f64 * v2;
                    if w > 1e-18 {
                        comps.push((w, mu, var));
                    }
                }
            }
            GridFunction::from_fn(0.0, hi, step, |x| {
                comps
                    .iter()
                    .map(|&(w, mu, var)| w * normal(x, mu, var))
                    .sum()
            })
        }
    }
}
