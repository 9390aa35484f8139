//! Inverse analyses: gap and cutoff intervals from measured rates, the
//! error of the low-temperature limit, activated-decay fits, lifetime
//! curves and the sensitivity of the ISC rate to the gap.

use std::path::Path;

use crate::error::{Error, Result};
use crate::exec;
use crate::gridfn::{band_intersections, GridFunction};
use crate::interval::{Band, Interval, IntervalSet};
use crate::io;
use crate::psb::PsbModel;
use crate::rates::{
    self, gamma_a1, gamma_e12_direct, gamma_e12_finite_t_on, isc_average, HighTempParams,
    LevelSpacings, PhononCoupling, RateResult, SpinClass, SpinOrbit, SPECTRAL_STEP_MEV,
};
use crate::units::{self, Temperature};

/// Uniform sweep `lo, lo+step, …, ≤ hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Sweep {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) {
            return Err(Error::param(
                "sweep",
                format!("invalid sweep {lo}..{hi} step {step}"),
            ));
        }
        Ok(Sweep { lo, hi, step })
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.lo + i as f64 * self.step)
            .collect()
    }
}

/// Gap sweep used by [`infer_delta`].
pub const DEFAULT_DELTA_SWEEP: Sweep = Sweep {
    lo: 20.0,
    hi: 600.0,
    step: 1.0,
};

#[derive(Debug, Clone)]
pub struct DeltaInference {
    /// Gap values consistent with the target after the exclusion floor.
    pub intervals: IntervalSet,
    /// Consistent values before the exclusion floor is applied.
    pub unfiltered: IntervalSet,
    /// Predicted `Γ_A1` band edges and centre along the sweep, MHz.
    pub lower: GridFunction,
    pub upper: GridFunction,
    pub central: GridFunction,
}

pub fn infer_delta(
    so: &SpinOrbit,
    f: &GridFunction,
    target: &Band,
    exclusion_floor_mev: f64,
) -> Result<DeltaInference> {
    infer_delta_with(so, f, target, exclusion_floor_mev, &DEFAULT_DELTA_SWEEP)
}

/// Intersects the predicted `Γ_A1(Δ)` band with the measured band and drops
/// everything below `exclusion_floor_mev`.
pub fn infer_delta_with(
    so: &SpinOrbit,
    f: &GridFunction,
    target: &Band,
    exclusion_floor_mev: f64,
    sweep: &Sweep,
) -> Result<DeltaInference> {
    if sweep.lo <= 0.0 {
        return Err(Error::param("delta sweep", "must start above 0"));
    }
    let nodes = sweep.nodes();
    let rates = exec::map_slice(&nodes, |&d| gamma_a1(so, f, d));
    let rates: Vec<RateResult> = rates.into_iter().collect::<Result<_>>()?;
    let curve = |sel: fn(&RateResult) -> f64| {
        GridFunction::new(sweep.lo, sweep.step, rates.iter().map(sel).collect())
    };
    let lower = curve(|r| r.lo())?;
    let upper = curve(|r| r.hi())?;
    let central = curve(|r| r.value_mhz)?;
    let unfiltered = band_intersections(&lower, &upper, target)?;
    Ok(DeltaInference {
        intervals: unfiltered.remove_below(exclusion_floor_mev),
        unfiltered,
        lower,
        upper,
        central,
    })
}

/// `Γ_E1,2/Γ_A1` as a function of the cutoff, on `[0, Δ]`; beyond `Δ` it
/// is constant.
pub fn ratio_vs_omega(
    pc: &PhononCoupling,
    f: &GridFunction,
    ls: &LevelSpacings,
    singlet_path: bool,
) -> Result<GridFunction> {
    let d = ls.delta_mev;
    let fd = f.sample(d);
    if !(fd > 0.0) {
        return Err(Error::UndefinedRatio { delta_mev: d });
    }
    let c = if singlet_path {
        2.0 / (ls.delta_mev + ls.delta_prime_mev)
    } else {
        0.0
    };
    let pref = 2.0 / std::f64::consts::PI * pc.eta_internal() / fd;
    let g = GridFunction::spanning(0.0, d, SPECTRAL_STEP_MEV, |w| {
        let p = 1.0 - c * w;
        w * p * p * f.sample(d - w)
    })?;
    let h = g.step();
    let v = g.values();
    let mut acc = vec![0.0; v.len()];
    for i in 1..v.len() {
        acc[i] = acc[i - 1] + 0.5 * h * (v[i - 1] + v[i]);
    }
    GridFunction::new(0.0, h, acc.into_iter().map(|a| a * pref).collect())
}

/// Ratio with unlimited cutoff (`Ω ≥ Δ`).
pub fn max_ratio(
    pc: &PhononCoupling,
    f: &GridFunction,
    ls: &LevelSpacings,
    singlet_path: bool,
) -> Result<f64> {
    rates::ratio_e12_a1(&pc.with_omega(ls.delta_mev), f, ls, singlet_path)
}

/// Smallest abscissa where `g` first reaches `level`, interpolated.
fn first_crossing(g: &GridFunction, level: f64) -> Option<f64> {
    let v = g.values();
    if v[0] >= level {
        return Some(g.omega_min());
    }
    let i = v.iter().position(|&x| x >= level)?;
    let (a, b) = (v[i - 1], v[i]);
    let t = if b > a { (level - a) / (b - a) } else { 0.0 };
    Some(g.omega(i - 1) + t * g.step())
}

#[derive(Debug, Clone)]
pub struct OmegaInference {
    /// Union over the gap range of cutoff intervals matching the target; an
    /// upper end of `+∞` means every larger cutoff also matches.
    pub set: IntervalSet,
    /// Largest ratio reachable with any cutoff over the gap range.
    pub max_ratio: f64,
    /// Per-gap intervals, `None` where the target is out of reach.
    pub per_delta: Vec<(f64, Option<Interval>)>,
}

/// Cutoff intervals for which the predicted ratio lies in `target`, for each
/// gap in `deltas`.
pub fn infer_omega(
    pc: &PhononCoupling,
    f: &GridFunction,
    ls: &LevelSpacings,
    target: &Band,
    deltas: &Sweep,
    singlet_path: bool,
) -> Result<OmegaInference> {
    let nodes = deltas.nodes();
    let per = exec::map_slice(&nodes, |&d| -> Result<(f64, f64, Option<Interval>)> {
        let ls_d = ls.with_delta(d)?;
        let cum = match ratio_vs_omega(pc, f, &ls_d, singlet_path) {
            Ok(c) => c,
            Err(Error::UndefinedRatio { .. }) => return Ok((d, 0.0, None)),
            Err(e) => return Err(e),
        };
        let top = cum.values()[cum.len() - 1];
        let lo = match first_crossing(&cum, target.lo) {
            Some(x) => x,
            None => return Ok((d, top, None)),
        };
        let hi = if top <= target.hi {
            f64::INFINITY
        } else {
            // Last Ω with ratio ≤ hi equals the first crossing of hi.
            first_crossing(&cum, target.hi).unwrap_or(f64::INFINITY)
        };
        Ok((d, top, Some(Interval::new(lo, hi))))
    });
    let per: Vec<(f64, f64, Option<Interval>)> = per.into_iter().collect::<Result<_>>()?;
    let max_ratio = per.iter().map(|p| p.1).fold(0.0, f64::max);
    let set = IntervalSet::from_intervals(per.iter().filter_map(|p| p.2));
    Ok(OmegaInference {
        set,
        max_ratio,
        per_delta: per.into_iter().map(|(d, _, i)| (d, i)).collect(),
    })
}

/// Unlimited-cutoff ratio along a gap sweep (0 where undefined).
pub fn max_ratio_curve(
    pc: &PhononCoupling,
    f: &GridFunction,
    ls: &LevelSpacings,
    deltas: &Sweep,
    singlet_path: bool,
) -> Result<GridFunction> {
    let nodes = deltas.nodes();
    let vals = exec::map_slice(&nodes, |&d| {
        match max_ratio(pc, f, &ls.with_delta(d)?, singlet_path) {
            Ok(r) => Ok(r),
            Err(Error::UndefinedRatio { .. }) => Ok(0.0),
            Err(e) => Err(e),
        }
    });
    GridFunction::new(
        deltas.lo,
        deltas.step,
        vals.into_iter().collect::<Result<_>>()?,
    )
}

/// First gap in the sweep at which some cutoff can reach `ratio_floor`;
/// smaller gaps are excluded by the ratio measurement.
pub fn ratio_exclusion_boundary(
    pc: &PhononCoupling,
    f: &GridFunction,
    ls: &LevelSpacings,
    ratio_floor: f64,
    deltas: &Sweep,
    singlet_path: bool,
) -> Result<Option<f64>> {
    let curve = max_ratio_curve(pc, f, ls, deltas, singlet_path)?;
    Ok(first_crossing(&curve, ratio_floor))
}

/// Axis of a low-temperature error map.
#[derive(Debug, Clone, Copy)]
pub enum ErrorAxis {
    Delta(Sweep),
    Omega(Sweep),
}

/// `|ratio_T − ratio_lowT| / ratio_lowT` along `axis` at temperature `t`.
///
/// Both ratios use the same `F(·,T)`, so the map isolates the error of
/// dropping the occupation factors.
pub fn lowt_error_map(
    so: &SpinOrbit,
    pc: &PhononCoupling,
    psb: &PsbModel,
    ls: &LevelSpacings,
    t: Temperature,
    axis: ErrorAxis,
) -> Result<GridFunction> {
    let f_t = psb.overlap(t)?;
    lowt_error_map_on(so, pc, &f_t, ls, t, axis)
}

pub fn lowt_error_map_on(
    so: &SpinOrbit,
    pc: &PhononCoupling,
    f_t: &GridFunction,
    ls: &LevelSpacings,
    t: Temperature,
    axis: ErrorAxis,
) -> Result<GridFunction> {
    let sweep = match axis {
        ErrorAxis::Delta(s) | ErrorAxis::Omega(s) => s,
    };
    let nodes = sweep.nodes();
    let vals = exec::map_slice(&nodes, |&x| -> Result<f64> {
        let (pc_x, ls_x) = match axis {
            ErrorAxis::Delta(_) => (*pc, ls.with_delta(x)?),
            ErrorAxis::Omega(_) => (pc.with_omega(x), *ls),
        };
        let low = gamma_e12_direct(so, &pc_x, f_t, &ls_x, false)?.value_mhz;
        if !(low > 0.0) {
            return Err(Error::UndefinedRatio {
                delta_mev: ls_x.delta_mev,
            });
        }
        let fin = gamma_e12_finite_t_on(so, &pc_x, f_t, &ls_x, t, false)?.value_mhz;
        Ok((fin - low).abs() / low)
    });
    GridFunction::new(
        sweep.lo,
        sweep.step,
        vals.into_iter().collect::<Result<_>>()?,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifetimePoint {
    pub temperature_k: f64,
    pub tau_ns: f64,
    pub sigma_ns: f64,
    pub spin: SpinClass,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LifetimeSeries {
    points: Vec<LifetimePoint>,
}

pub const LIFETIME_HEADER: [&str; 4] = ["temperature_K", "tau_ns", "sigma_ns", "spin_class"];

impl LifetimeSeries {
    pub fn new(points: Vec<LifetimePoint>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !(p.temperature_k >= 0.0 && p.tau_ns > 0.0 && p.sigma_ns > 0.0) {
                return Err(Error::param(
                    "lifetime series",
                    format!("point {i}: temperature, tau and sigma must be positive"),
                ));
            }
        }
        Ok(LifetimeSeries { points })
    }

    pub fn points(&self) -> &[LifetimePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn of_class(&self, spin: SpinClass) -> LifetimeSeries {
        LifetimeSeries {
            points: self
                .points
                .iter()
                .filter(|p| p.spin == spin)
                .copied()
                .collect(),
        }
    }

    pub fn parse_csv(path: &Path, text: &str) -> Result<Self> {
        let rows = io::read_records(path, text, &LIFETIME_HEADER)?;
        let mut pts = Vec::with_capacity(rows.len());
        for (line, r) in &rows {
            let spin = r[3].parse::<SpinClass>().map_err(|reason| Error::Parse {
                path: path.to_path_buf(),
                line: *line,
                reason,
            })?;
            let p = LifetimePoint {
                temperature_k: io::parse_f64(path, *line, &r[0], LIFETIME_HEADER[0])?,
                tau_ns: io::parse_f64(path, *line, &r[1], LIFETIME_HEADER[1])?,
                sigma_ns: io::parse_f64(path, *line, &r[2], LIFETIME_HEADER[2])?,
                spin,
            };
            LifetimeSeries::new(vec![p]).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: *line,
                reason: e.to_string(),
            })?;
            pts.push(p);
        }
        LifetimeSeries::new(pts)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        LifetimeSeries::parse_csv(path, &io::read_to_string(path)?)
    }

    pub fn to_csv(&self) -> String {
        let mut s = LIFETIME_HEADER.join(",") + "\n";
        for p in &self.points {
            s.push_str(&format!(
                "{},{},{},{}\n",
                p.temperature_k, p.tau_ns, p.sigma_ns, p.spin
            ));
        }
        s
    }
}

/// Result of [`fit_mott_seitz`].
#[derive(Debug, Clone, PartialEq)]
pub struct MottSeitzFit {
    pub s: f64,
    pub delta_e_ev: f64,
    pub sigma_s: f64,
    pub sigma_delta_e_ev: f64,
    /// Covariance of `(ln s, ΔE)`.
    pub covariance: [[f64; 2]; 2],
    pub chi2: f64,
    pub dof: usize,
    pub iterations: usize,
    /// `τ_model − τ_data` per point, ns.
    pub residuals: Vec<f64>,
}

impl MottSeitzFit {
    pub fn params(&self, epsilon: f64) -> Result<HighTempParams> {
        HighTempParams::new(self.s, self.delta_e_ev, epsilon)
    }
}

/// `τ(T)` in ns for `1/τ = 1/τ0 + 2π·s·Γ_Rad·e^{−ΔE/k_BT}`.
pub fn mott_seitz_lifetime(
    t_k: f64,
    ln_s: f64,
    delta_e_ev: f64,
    g_rad_mhz: f64,
    tau0_ns: f64,
) -> f64 {
    1.0 / (1.0 / tau0_ns + activated_rate(t_k, ln_s, delta_e_ev, g_rad_mhz))
}

/// Activated decay rate in ns⁻¹.
fn activated_rate(t_k: f64, ln_s: f64, delta_e_ev: f64, g_rad_mhz: f64) -> f64 {
    if t_k == 0.0 {
        return 0.0;
    }
    let kt = units::K_B_MEV_PER_K * t_k;
    2.0 * std::f64::consts::PI
        * 1e-3
        * g_rad_mhz
        * (ln_s - delta_e_ev * units::MEV_PER_EV / kt).exp()
}

/// Levenberg–Marquardt fit of `(s, ΔE)` to `m_s = 0` lifetimes, anchored to
/// the low-temperature lifetime `tau0_ns`.
pub fn fit_mott_seitz(
    data: &LifetimeSeries,
    g_rad: &RateResult,
    tau0_ns: f64,
) -> Result<MottSeitzFit> {
    let pts: Vec<LifetimePoint> = data.of_class(SpinClass::Ms0).points;
    if pts.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: pts.len(),
        });
    }
    let gr = g_rad.value_mhz;
    if !(gr > 0.0 && tau0_ns > 0.0) {
        return Err(Error::param(
            "mott-seitz",
            "radiative rate and tau0 must be positive",
        ));
    }
    let turned_on: Vec<&LifetimePoint> = pts
        .iter()
        .filter(|p| tau0_ns - p.tau_ns > 2.0 * p.sigma_ns)
        .collect();
    if turned_on.len() < 2 {
        return Err(Error::Unidentifiable(format!(
            "ΔE unidentifiable: only {} point(s) fall below tau0 = {tau0_ns} ns by more than 2σ",
            turned_on.len()
        )));
    }

    // Arrhenius start from the hottest (up to three) turned-on points.
    let mut hot = turned_on.clone();
    hot.sort_by(|a, b| a.temperature_k.total_cmp(&b.temperature_k));
    let hot = &hot[hot.len().saturating_sub(3)..];
    let xs: Vec<f64> = hot
        .iter()
        .map(|p| 1.0 / (units::K_B_MEV_PER_K * p.temperature_k))
        .collect();
    let ys: Vec<f64> = hot
        .iter()
        .map(|p| (1.0 / p.tau_ns - 1.0 / tau0_ns).ln())
        .collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let mut de = -sxy / sxx / units::MEV_PER_EV;
    if !(de > 0.0 && de.is_finite()) {
        de = 0.5;
    }
    let last = hot[hot.len() - 1];
    let kt = units::K_B_MEV_PER_K * last.temperature_k;
    let excess = 1.0 / last.tau_ns - 1.0 / tau0_ns;
    let mut ln_s =
        (excess / (2.0 * std::f64::consts::PI * 1e-3 * gr)).ln() + de * units::MEV_PER_EV / kt;

    let eval = |ln_s: f64, de: f64| -> (Vec<f64>, Vec<[f64; 2]>, f64) {
        let mut r = Vec::with_capacity(pts.len());
        let mut j = Vec::with_capacity(pts.len());
        let mut cost = 0.0;
        for p in &pts {
            let b = activated_rate(p.temperature_k, ln_s, de, gr);
            let tau = 1.0 / (1.0 / tau0_ns + b);
            let ri = (tau - p.tau_ns) / p.sigma_ns;
            let kt = units::K_B_MEV_PER_K * p.temperature_k;
            let d_lns = -tau * tau * b / p.sigma_ns;
            let d_de = tau * tau * b * units::MEV_PER_EV / kt / p.sigma_ns;
            cost += ri * ri;
            r.push(ri);
            j.push([d_lns, d_de]);
        }
        (r, j, cost)
    };

    let normal = |r: &[f64], j: &[[f64; 2]]| {
        let mut a = [[0.0; 2]; 2];
        let mut g = [0.0; 2];
        for (ri, ji) in r.iter().zip(j) {
            for p in 0..2 {
                g[p] += ji[p] * ri;
                for q in 0..2 {
                    a[p][q] += ji[p] * ji[q];
                }
            }
        }
        (a, g)
    };

    let (mut r, mut j, mut cost) = eval(ln_s, de);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    for it in 0..500 {
        iterations = it + 1;
        let (a, g) = normal(&r, &j);
        let m = [
            [a[0][0] * (1.0 + lambda), a[0][1]],
            [a[1][0], a[1][1] * (1.0 + lambda)],
        ];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let step = [
            -(m[1][1] * g[0] - m[0][1] * g[1]) / det,
            -(-m[1][0] * g[0] + m[0][0] * g[1]) / det,
        ];
        let (nl, nd) = (ln_s + step[0], de + step[1]);
        let (nr, nj, ncost) = eval(nl, nd);
        if ncost.is_finite() && ncost <= cost {
            let small = step[0].abs() < 1e-13 * (1.0 + ln_s.abs())
                && step[1].abs() < 1e-13 * (1.0 + de.abs());
            let flat = cost - ncost <= 1e-15 * (1.0 + cost);
            ln_s = nl;
            de = nd;
            r = nr;
            j = nj;
            cost = ncost;
            lambda = (lambda * 0.3).max(1e-12);
            if small || (flat && lambda <= 1e-9) {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    if !(de > 0.0 && ln_s.is_finite()) {
        return Err(Error::FitFailed(format!(
            "activation energy {de} eV is not positive"
        )));
    }
    let (a, _) = normal(&r, &j);
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if !(det > 0.0) {
        return Err(Error::Unidentifiable(
            "ΔE unidentifiable: singular normal matrix".into(),
        ));
    }
    let cov = [
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ];
    let s = ln_s.exp();
    let residuals = pts
        .iter()
        .map(|p| mott_seitz_lifetime(p.temperature_k, ln_s, de, gr, tau0_ns) - p.tau_ns)
        .collect();
    Ok(MottSeitzFit {
        s,
        delta_e_ev: de,
        sigma_s: s * cov[0][0].sqrt(),
        sigma_delta_e_ev: cov[1][1].sqrt(),
        covariance: cov,
        chi2: cost,
        dof: pts.len() - 2,
        iterations,
        residuals,
    })
}

/// Everything needed to predict lifetimes versus temperature.
#[derive(Debug, Clone)]
pub struct LifetimeModel<'a> {
    pub so: SpinOrbit,
    pub pc: PhononCoupling,
    pub psb: &'a PsbModel,
    pub ls: LevelSpacings,
    pub g_rad: RateResult,
    /// Activated channel; `epsilon` is taken from the sweep list.
    pub ht: HighTempParams,
    pub singlet_path: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifetimeRow {
    pub temperature_k: f64,
    pub spin: SpinClass,
    pub epsilon: f64,
    pub tau_ns: f64,
    pub gamma_isc_mhz: f64,
    pub gamma_ht_mhz: f64,
}

pub const LIFETIME_CURVE_HEADER: [&str; 6] = [
    "temperature_K",
    "spin_class",
    "epsilon",
    "tau_ns",
    "gamma_isc_MHz",
    "gamma_ht_MHz",
];

pub fn lifetime_rows_to_csv(rows: &[LifetimeRow]) -> String {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.temperature_k.to_string(),
                r.spin.to_string(),
                r.epsilon.to_string(),
                r.tau_ns.to_string(),
                r.gamma_isc_mhz.to_string(),
                r.gamma_ht_mhz.to_string(),
            ]
        })
        .collect();
    io::table_to_csv(&LIFETIME_CURVE_HEADER, &rows)
}

pub fn parse_lifetime_rows(path: &Path, text: &str) -> Result<Vec<LifetimeRow>> {
    let rows = io::read_records(path, text, &LIFETIME_CURVE_HEADER)?;
    let h = LIFETIME_CURVE_HEADER;
    let mut out = Vec::with_capacity(rows.len());
    for (line, r) in &rows {
        let spin = r[1].parse::<SpinClass>().map_err(|reason| Error::Parse {
            path: path.to_path_buf(),
            line: *line,
            reason,
        })?;
        out.push(LifetimeRow {
            temperature_k: io::parse_f64(path, *line, &r[0], h[0])?,
            spin,
            epsilon: io::parse_f64(path, *line, &r[2], h[2])?,
            tau_ns: io::parse_f64(path, *line, &r[3], h[3])?,
            gamma_isc_mhz: io::parse_f64(path, *line, &r[4], h[4])?,
            gamma_ht_mhz: io::parse_f64(path, *line, &r[5], h[5])?,
        });
    }
    Ok(out)
}

/// ISC rate at temperature `t` from the finite-temperature overlap.
pub fn gamma_isc_at(m: &LifetimeModel<'_>, t: Temperature) -> Result<RateResult> {
    let f_t = m.psb.overlap(t)?;
    let a1 = gamma_a1(&m.so, &f_t, m.ls.delta_mev)?;
    let e12 = gamma_e12_finite_t_on(&m.so, &m.pc, &f_t, &m.ls, t, m.singlet_path)?;
    Ok(isc_average(&a1, &e12))
}

/// `τ(T)` for each temperature, spin class and `ε`, ordered by temperature,
/// then spin class, then `ε`.
pub fn lifetime_curves(
    m: &LifetimeModel<'_>,
    temps_k: &[f64],
    epsilons: &[f64],
) -> Result<Vec<LifetimeRow>> {
    let per_t = exec::map_slice(temps_k, |&tk| -> Result<Vec<LifetimeRow>> {
        let t = Temperature::kelvin(tk)?;
        let isc = gamma_isc_at(m, t)?;
        let ht = rates::gamma_ht(&m.ht, &m.g_rad, t);
        let mut rows = Vec::with_capacity(2 * epsilons.len());
        for spin in [SpinClass::Ms0, SpinClass::Ms1] {
            for &eps in epsilons {
                rows.push(LifetimeRow {
                    temperature_k: tk,
                    spin,
                    epsilon: eps,
                    tau_ns: rates::lifetime(&m.g_rad, &isc, &ht, eps, spin)?,
                    gamma_isc_mhz: isc.value_mhz,
                    gamma_ht_mhz: ht.value_mhz,
                });
            }
        }
        Ok(rows)
    });
    let mut out = Vec::new();
    for rows in per_t {
        out.extend(rows?);
    }
    Ok(out)
}

/// `−dΓ_ISC/dΔ` split into its two contributions, MHz/meV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IscSensitivity {
    pub total: f64,
    pub a1_part: f64,
    pub e12_part: f64,
}

/// Central difference of the low-temperature `Γ_ISC(Δ)` with half-step
/// `h_mev`; positive when the rate grows as the gap shrinks.
pub fn isc_sensitivity_with(
    so: &SpinOrbit,
    pc: &PhononCoupling,
    f: &GridFunction,
    ls: &LevelSpacings,
    singlet_path: bool,
    h_mev: f64,
) -> Result<IscSensitivity> {
    let d = ls.delta_mev;
    for x in [d - h_mev, d + h_mev] {
        if !(x > f.omega_min() && x < f.omega_max() && f.sample(x) > 0.0) {
            return Err(Error::OutsideSupport { delta_mev: d });
        }
    }
    let parts = |x: f64| -> Result<(f64, f64)> {
        let ls_x = ls.with_delta(x)?;
        let a1 = gamma_a1(so, f, x)?.value_mhz;
        let e12 = gamma_e12_direct(so, pc, f, &ls_x, singlet_path)?.value_mhz;
        Ok((a1, e12))
    };
    let (a_lo, e_lo) = parts(d - h_mev)?;
    let (a_hi, e_hi) = parts(d + h_mev)?;
    let a1_part = (a_lo - a_hi) / (2.0 * h_mev) / 4.0;
    let e12_part = 2.0 * (e_lo - e_hi) / (2.0 * h_mev) / 4.0;
    Ok(IscSensitivity {
        total: a1_part + e12_part,
        a1_part,
        e12_part,
    })
}

/// [`isc_sensitivity_with`] at the default 2 meV step.
pub fn isc_sensitivity(
    so: &SpinOrbit,
    pc: &PhononCoupling,
    f: &GridFunction,
    ls: &LevelSpacings,
    singlet_path: bool,
) -> Result<IscSensitivity> {
    isc_sensitivity_with(so, pc, f, ls, singlet_path, 2.0)
}
