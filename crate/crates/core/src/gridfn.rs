//! Uniformly sampled real functions of energy.
//!
//! Every spectral quantity in the crate (overlap functions, one-phonon
//! densities, rate integrands) is a [`GridFunction`]: samples `values[i]` at
//! `omega_min + i·step` meV. Integration is the composite trapezoid rule,
//! convolution is the discrete linear convolution scaled by `step`, and
//! evaluation between nodes is linear with zero outside the support.

use crate::error::{Error, Result};
use crate::exec;
use crate::interval::{Band, Interval, IntervalSet};

/// Relative tolerance used when comparing steps and grid alignment.
const STEP_RTOL: f64 = 1e-9;
/// Tolerance, in units of `step`, for two origins to count as aligned.
const ALIGN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    omega_min: f64,
    step: f64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(omega_min: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "step must be positive, got {step}"
            )));
        }
        if !omega_min.is_finite() {
            return Err(Error::InvalidGrid("omega_min is not finite".into()));
        }
        if values.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 samples, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                op: "GridFunction::new",
            });
        }
        Ok(GridFunction {
            omega_min,
            step,
            values,
        })
    }

    /// Samples `f` on nodes `lo, lo+step, …` up to the last node `≤ hi`
    /// (within rounding).
    pub fn from_fn(lo: f64, hi: f64, step: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidGrid(format!("empty range [{lo}, {hi}]")));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        let values = (0..n).map(|i| f(lo + i as f64 * step)).collect();
        GridFunction::new(lo, step, values)
    }

    /// Samples `f` on `[lo, hi]` with the largest step `≤ max_step` that
    /// puts nodes exactly on both ends.
    pub fn spanning(lo: f64, hi: f64, max_step: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(hi > lo) || !(max_step > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "cannot span [{lo}, {hi}] with step {max_step}"
            )));
        }
        let n = ((hi - lo) / max_step - 1e-9).ceil().max(1.0) as usize;
        let step = (hi - lo) / n as f64;
        let values = (0..=n)
            .map(|i| {
                if i == n {
                    f(hi)
                } else {
                    f(lo + i as f64 * step)
                }
            })
            .collect();
        GridFunction::new(lo, step, values)
    }

    /// Zero function on nodes `lo..=hi`.
    pub fn zeros(lo: f64, hi: f64, step: f64) -> Result<Self> {
        GridFunction::from_fn(lo, hi, step, |_| 0.0)
    }

    pub fn omega_min(&self) -> f64 {
        self.omega_min
    }

    pub fn omega_max(&self) -> f64 {
        self.omega(self.values.len() - 1)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn omega(&self, i: usize) -> f64 {
        self.omega_min + i as f64 * self.step
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.omega(i), v))
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Abscissa of the largest sample.
    pub fn argmax(&self) -> f64 {
        let (i, _) = self
            .values
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
            );
        self.omega(i)
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        let values = self.nodes().map(|(w, v)| f(w, v)).collect();
        GridFunction::new(self.omega_min, self.step, values)
    }

    pub fn scale(&self, k: f64) -> Result<GridFunction> {
        self.map(|_, v| v * k)
    }

    /// Composite-trapezoid estimate of ∫g over `[lo, hi]` ∩ support.
    ///
    /// Partial end segments use the linearly interpolated endpoint, so the
    /// result is exact for the piecewise-linear interpolant.
    pub fn integrate(&self, lo: f64, hi: f64) -> Result<f64> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::param(
                "integration range",
                format!("need lo ≤ hi, got [{lo}, {hi}]"),
            ));
        }
        let a = lo.max(self.omega_min);
        let b = hi.min(self.omega_max());
        if a >= b {
            return Ok(0.0);
        }
        let h = self.step;
        let pos = |x: f64| (x - self.omega_min) / h;
        let (pa, pb) = (pos(a), pos(b));
        // First node at or after a, last node at or before b.
        let ia = (pa - ALIGN_TOL).ceil().max(0.0) as usize;
        let ib = ((pb + ALIGN_TOL).floor() as usize).min(self.len() - 1);
        let total = if ia > ib {
            // a and b fall inside one segment.
            0.5 * (self.sample(a) + self.sample(b)) * (b - a)
        } else {
            let mut s = 0.0;
            for i in ia..ib {
                s += 0.5 * (self.values[i] + self.values[i + 1]);
            }
            s *= h;
            let xa = self.omega(ia);
            if xa > a {
                s += 0.5 * (self.sample(a) + self.values[ia]) * (xa - a);
            }
            let xb = self.omega(ib);
            if b > xb {
                s += 0.5 * (self.values[ib] + self.sample(b)) * (b - xb);
            }
            s
        };
        if !total.is_finite() {
            return Err(Error::NonFinite { op: "integrate" });
        }
        Ok(total)
    }

    /// ∫g over the whole support.
    pub fn integral(&self) -> f64 {
        let interior: f64 = self.values.iter().sum();
        let ends = 0.5 * (self.values[0] + self.values[self.len() - 1]);
        (interior - ends) * self.step
    }

    /// Linear interpolation inside the support, 0 outside.
    pub fn sample(&self, omega: f64) -> f64 {
        if omega.is_nan() {
            return 0.0;
        }
        let p = (omega - self.omega_min) / self.step;
        let last = (self.len() - 1) as f64;
        if p < -ALIGN_TOL || p > last + ALIGN_TOL {
            return 0.0;
        }
        let p = p.clamp(0.0, last);
        let i = p.floor() as usize;
        if i >= self.len() - 1 {
            return self.values[self.len() - 1];
        }
        let t = p - i as f64;
        if t == 0.0 {
            return self.values[i];
        }
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    /// Discrete linear convolution scaled by the step. The output grid spans
    /// `[a_min + b_min, a_max + b_max]`.
    pub fn convolve(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_step(other)?;
        let n = self.len() + other.len() - 1;
        self.convolve_window(other, 0, n)
    }

    /// The part of `self ⊗ other` on nodes `omega_lo..=omega_hi` of the
    /// output grid, zero where the full convolution has no support. Both
    /// bounds must be aligned with the output grid.
    pub fn convolve_on(
        &self,
        other: &GridFunction,
        omega_lo: f64,
        omega_hi: f64,
    ) -> Result<GridFunction> {
        self.check_step(other)?;
        let origin = self.omega_min + other.omega_min;
        let k0 = aligned_offset(origin, omega_lo, self.step).ok_or_else(|| {
            Error::InvalidGrid(format!(
                "window start {omega_lo} is not aligned with the output grid"
            ))
        })?;
        let len = ((omega_hi - omega_lo) / self.step + ALIGN_TOL).floor() as usize + 1;
        let out = self.convolve_window_signed(other, k0, len);
        GridFunction::new(omega_lo, self.step, out)
    }

    fn convolve_window(&self, other: &GridFunction, k0: usize, len: usize) -> Result<GridFunction> {
        let out = self.convolve_window_signed(other, k0 as isize, len);
        GridFunction::new(
            self.omega_min + other.omega_min + k0 as f64 * self.step,
            self.step,
            out,
        )
    }

    fn convolve_window_signed(&self, other: &GridFunction, k0: isize, len: usize) -> Vec<f64> {
        let a = &self.values;
        let na = a.len() as isize;
        let nb = other.len() as isize;
        // b reversed so the inner product runs over two forward slices.
        let br: Vec<f64> = other.values.iter().rev().copied().collect();
        let h = self.step;
        exec::map_range(len, |m| {
            let k = k0 + m as isize;
            if k < 0 || k > na + nb - 2 {
                return 0.0;
            }
            let j_lo = (k - (na - 1)).max(0);
            let j_hi = k.min(nb - 1);
            let i_lo = (k - j_hi) as usize;
            let i_hi = (k - j_lo) as usize;
            let r_lo = (nb - 1 - j_hi) as usize;
            let xs = &a[i_lo..=i_hi];
            let ys = &br[r_lo..r_lo + xs.len()];
            h * xs.iter().zip(ys).map(|(x, y)| x * y).sum::<f64>()
        })
    }

    fn check_step(&self, other: &GridFunction) -> Result<()> {
        if (self.step - other.step).abs() > STEP_RTOL * self.step.max(other.step) {
            return Err(Error::StepMismatch {
                a: self.step,
                b: other.step,
            });
        }
        Ok(())
    }

    /// Linear-interpolation resampling onto a new step over the same span.
    pub fn resample(&self, step: f64) -> Result<GridFunction> {
        GridFunction::from_fn(self.omega_min, self.omega_max(), step, |w| self.sample(w))
    }

    /// Copies the samples onto the aligned grid `omega_lo + i·step`,
    /// `i < len`, zero-padding or cropping as needed.
    pub fn embed(&self, omega_lo: f64, len: usize) -> Result<GridFunction> {
        let off = aligned_offset(self.omega_min, omega_lo, self.step).ok_or_else(|| {
            Error::InvalidGrid(format!("{omega_lo} is not aligned with the source grid"))
        })?;
        let values = (0..len)
            .map(|i| {
                let j = i as isize + off;
                if j >= 0 && (j as usize) < self.len() {
                    self.values[j as usize]
                } else {
                    0.0
                }
            })
            .collect();
        GridFunction::new(omega_lo, self.step, values)
    }

    /// Crops to nodes inside `[lo, hi]` (aligned to this grid).
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<GridFunction> {
        let i0 = (((lo - self.omega_min) / self.step) - ALIGN_TOL)
            .ceil()
            .max(0.0) as usize;
        let i1 = ((((hi - self.omega_min) / self.step) + ALIGN_TOL).floor() as usize)
            .min(self.len() - 1);
        if i1 <= i0 {
            return Err(Error::InvalidGrid(format!(
                "[{lo}, {hi}] leaves fewer than 2 samples"
            )));
        }
        GridFunction::new(self.omega(i0), self.step, self.values[i0..=i1].to_vec())
    }

    /// Pointwise `self + k·other` on this grid; `other` is sampled.
    pub fn add_scaled(&self, other: &GridFunction, k: f64) -> Result<GridFunction> {
        self.map(|w, v| v + k * other.sample(w))
    }

    /// ∫|self − other| over the union of supports, evaluated on this grid's
    /// step (both functions sampled).
    pub fn l1_distance(&self, other: &GridFunction) -> f64 {
        let lo = self.omega_min.min(other.omega_min);
        let hi = self.omega_max().max(other.omega_max());
        let n = ((hi - lo) / self.step).ceil() as usize + 1;
        let h = (hi - lo) / (n - 1) as f64;
        let diffs: Vec<f64> = (0..n)
            .map(|i| {
                let w = lo + i as f64 * h;
                (self.sample(w) - other.sample(w)).abs()
            })
            .collect();
        let interior: f64 = diffs.iter().sum();
        (interior - 0.5 * (diffs[0] + diffs[n - 1])) * h
    }

    /// Largest absolute pointwise difference at this grid's nodes.
    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.nodes()
            .map(|(w, v)| (v - other.sample(w)).abs())
            .fold(0.0, f64::max)
    }

    /// First moment ∫ωg / ∫g.
    pub fn mean(&self) -> f64 {
        let m0 = self.integral();
        let m1 = self
            .map(|w, v| w * v)
            .map(|g| g.integral())
            .unwrap_or(f64::NAN);
        m1 / m0
    }

    /// Second central moment ∫(ω−μ)²g / ∫g.
    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        let m0 = self.integral();
        let m2 = self
            .map(|w, v| (w - mu) * (w - mu) * v)
            .map(|g| g.integral())
            .unwrap_or(f64::NAN);
        m2 / m0
    }
}

/// Integer `k` with `to ≈ from + k·step`, if the two are aligned.
pub(crate) fn aligned_offset(from: f64, to: f64, step: f64) -> Option<isize> {
    let p = (to - from) / step;
    let k = p.round();
    ((p - k).abs() <= ALIGN_TOL).then_some(k as isize)
}

/// Abscissa intervals where the curve band `[lower(x), upper(x)]` overlaps
/// `[band.lo, band.hi]`.
///
/// Both curves are treated as piecewise linear between their (shared) nodes,
/// so interval endpoints are exact crossings of the interpolants.
pub fn band_intersections(
    lower: &GridFunction,
    upper: &GridFunction,
    band: &Band,
) -> Result<IntervalSet> {
    if lower.len() != upper.len()
        || aligned_offset(lower.omega_min, upper.omega_min, lower.step) != Some(0)
        || (lower.step - upper.step).abs() > STEP_RTOL * lower.step
    {
        return Err(Error::InvalidGrid(
            "lower and upper curves must share a grid".into(),
        ));
    }
    let mut pieces = Vec::new();
    for i in 0..lower.len() - 1 {
        let x0 = lower.omega(i);
        let h = lower.step;
        // upper(x) - band.lo >= 0
        let a = solve_nonneg(upper.values[i] - band.lo, upper.values[i + 1] - band.lo);
        // band.hi - lower(x) >= 0
        let b = solve_nonneg(band.hi - lower.values[i], band.hi - lower.values[i + 1]);
        if let (Some((a0, a1)), Some((b0, b1))) = (a, b) {
            let (t0, t1) = (a0.max(b0), a1.min(b1));
            if t0 <= t1 {
                pieces.push(Interval::new(x0 + t0 * h, x0 + t1 * h));
            }
        }
    }
    Ok(IntervalSet::from_intervals(pieces))
}

/// Sub-interval of `t ∈ [0, 1]` where `c0 + (c1 − c0)·t ≥ 0`.
fn solve_nonneg(c0: f64, c1: f64) -> Option<(f64, f64)> {
    match (c0 >= 0.0, c1 >= 0.0) {
        (true, true) => Some((0.0, 1.0)),
        (false, false) => None,
        (true, false) => Some((0.0, c0 / (c0 - c1))),
        (false, true) => Some((c0 / (c0 - c1), 1.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(mu: f64, sigma: f64) -> impl Fn(f64) -> f64 {
        move |x| {
            (-(x - mu).powi(2) / (2.0 * sigma * sigma)).exp()
                / (sigma * (2.0 * std::f64::consts::PI).sqrt())
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridFunction::new(0.0, 0.0, vec![1.0, 2.0]).is_err());
        assert!(GridFunction::new(0.0, 1.0, vec![1.0]).is_err());
        assert!(matches!(
            GridFunction::new(0.0, 1.0, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn integrates_constant_and_linear_exactly() {
        let one = GridFunction::from_fn(0.0, 10.0, 0.25, |_| 1.0).unwrap();
        assert_eq!(one.integrate(0.0, 10.0).unwrap(), 10.0);
        let lin = GridFunction::from_fn(0.0, 2.0, 0.1, |w| w).unwrap();
        assert!((lin.integrate(0.0, 2.0).unwrap() - 2.0).abs() < 1e-12);
        // Off-node limits on a linear function are still exact.
        assert!(
            (lin.integrate(0.33, 1.77).unwrap() - 0.5 * (1.77f64.powi(2) - 0.33f64.powi(2))).abs()
                < 1e-12
        );
        assert!(
            (lin.integrate(0.31, 0.38).unwrap() - 0.5 * (0.38f64.powi(2) - 0.31f64.powi(2))).abs()
                < 1e-14
        );
    }

    #[test]
    fn integrate_clips_to_support() {
        let one = GridFunction::from_fn(0.0, 10.0, 0.5, |_| 1.0).unwrap();
        assert_eq!(one.integrate(-5.0, 20.0).unwrap(), 10.0);
        assert_eq!(one.integrate(11.0, 20.0).unwrap(), 0.0);
        assert!(one.integrate(3.0, 2.0).is_err());
    }

    #[test]
    fn gaussian_integral_matches_erf_oracle() {
        // erf(8/√2) differs from 1 by ~1e-15.
        let g = GridFunction::from_fn(-8.0, 8.0, 0.01, gaussian(0.0, 1.0)).unwrap();
        assert!((g.integrate(-8.0, 8.0).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sample_interpolates_and_vanishes_outside() {
        let g = GridFunction::new(1.0, 0.5, vec![2.0, 4.0, 8.0]).unwrap();
        assert_eq!(g.sample(1.5), 4.0);
        assert_eq!(g.sample(1.25), 3.0);
        assert_eq!(g.sample(0.99), 0.0);
        assert_eq!(g.sample(2.01), 0.0);
        assert_eq!(g.sample(2.0), 8.0);
    }

    #[test]
    fn delta_convolution_shifts() {
        let h = 0.05;
        let g = GridFunction::from_fn(-5.0, 5.0, h, gaussian(0.3, 0.7)).unwrap();
        let mut spike = vec![0.0; 41];
        spike[20] = 1.0 / h;
        let delta = GridFunction::new(1.0, h, spike).unwrap(); // spike at 2.0
        let c = g.convolve(&delta).unwrap();
        assert!((c.omega_min() - (g.omega_min() + 1.0)).abs() < 1e-12);
        assert!((c.omega_max() - (g.omega_max() + 3.0)).abs() < 1e-9);
        for (w, v) in c.nodes() {
            assert!((v - g.sample(w - 2.0)).abs() < 1e-10, "at {w}");
        }
    }

    #[test]
    fn gaussian_convolution_matches_analytic() {
        let h = 0.05;
        let a = GridFunction::from_fn(-15.0, 15.0, h, gaussian(0.0, 1.0)).unwrap();
        let b = GridFunction::from_fn(-20.0, 20.0, h, gaussian(0.0, 2.0)).unwrap();
        let c = a.convolve(&b).unwrap();
        let oracle = gaussian(0.0, 5f64.sqrt());
        let err = c
            .nodes()
            .map(|(w, v)| (v - oracle(w)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "L∞ error {err}");
    }

    #[test]
    fn convolve_rejects_step_mismatch() {
        let a = GridFunction::zeros(0.0, 1.0, 0.1).unwrap();
        let b = GridFunction::zeros(0.0, 1.0, 0.2).unwrap();
        assert!(matches!(a.convolve(&b), Err(Error::StepMismatch { .. })));
    }

    #[test]
    fn convolve_on_matches_full_convolution() {
        let h = 0.25;
        let a = GridFunction::from_fn(-3.0, 7.0, h, gaussian(2.0, 1.5)).unwrap();
        let b = GridFunction::from_fn(0.0, 4.0, h, |w| w * (4.0 - w)).unwrap();
        let full = a.convolve(&b).unwrap();
        let part = a.convolve_on(&b, -5.0, 6.0).unwrap();
        for (w, v) in part.nodes() {
            assert!((v - full.sample(w)).abs() < 1e-12, "at {w}");
        }
    }

    #[test]
    fn monotone_crossing_gives_single_interval() {
        let lower = GridFunction::from_fn(0.0, 10.0, 1.0, |x| x).unwrap();
        let upper = GridFunction::from_fn(0.0, 10.0, 1.0, |x| x + 1.0).unwrap();
        let band = Band::new(4.5, 4.0, 5.0).unwrap();
        let s = band_intersections(&lower, &upper, &band).unwrap();
        assert_eq!(s.len(), 1);
        let i = s.as_slice()[0];
        assert!((i.lo - 3.0).abs() < 1e-12 && (i.hi - 5.0).abs() < 1e-12);
    }

    #[test]
    fn identical_band_covers_domain() {
        let lower = GridFunction::from_fn(0.0, 10.0, 0.5, |_| 15.4).unwrap();
        let upper = GridFunction::from_fn(0.0, 10.0, 0.5, |_| 16.6).unwrap();
        let band = Band::new(16.0, 15.4, 16.6).unwrap();
        let s = band_intersections(&lower, &upper, &band).unwrap();
        assert_eq!(s.as_slice(), &[Interval::new(0.0, 10.0)]);
    }

    #[test]
    fn empty_overlap_is_empty_set() {
        let c = GridFunction::from_fn(0.0, 10.0, 0.5, |_| 1.0).unwrap();
        let band = Band::new(5.0, 4.0, 6.0).unwrap();
        assert!(band_intersections(&c, &c, &band).unwrap().is_empty());
    }
}
