//! Intersystem-crossing rates, orbital averaging, the thermally activated
//! channel and fluorescence lifetimes.
//!
//! Rates are evaluated as energies `ℏΓ` in meV and reported as `Γ/2π` in
//! MHz. Overlap functions passed in are physically scaled (meV⁻¹).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gridfn::GridFunction;
use crate::interval::Band;
use crate::psb::{omega_times_occupation, PsbModel};
use crate::units::{self, Temperature};

/// Step of the phonon-energy grid used for the `Γ_E1,2` integrals, meV.
pub const SPECTRAL_STEP_MEV: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinOrbit {
    /// Axial coupling `ℏλ∥`, meV.
    pub lambda_par_mev: f64,
    /// `λ⊥/λ∥` with its confidence band.
    pub ratio_perp: Band,
}

impl SpinOrbit {
    pub fn new(lambda_par_mev: f64, ratio_perp: Band) -> Result<Self> {
        if !(lambda_par_mev > 0.0 && lambda_par_mev.is_finite()) {
            return Err(Error::param(
                "lambda_par",
                format!("must be positive, got {lambda_par_mev}"),
            ));
        }
        if !(ratio_perp.lo >= 0.0) {
            return Err(Error::param("lambda_ratio", "must be non-negative"));
        }
        Ok(SpinOrbit {
            lambda_par_mev,
            ratio_perp,
        })
    }

    pub fn from_ghz(lambda_par_ghz: f64, ratio_perp: Band) -> Result<Self> {
        SpinOrbit::new(units::ghz_to_mev(lambda_par_ghz), ratio_perp)
    }

    /// `ℏλ⊥` at the central ratio, meV.
    pub fn lambda_perp_mev(&self) -> f64 {
        self.ratio_perp.value * self.lambda_par_mev
    }

    /// Multipliers of a `λ⊥²` rate at the band edges.
    fn square_factors(&self) -> (f64, f64) {
        let r = self.ratio_perp;
        if r.value == 0.0 {
            return (0.0, 0.0);
        }
        ((r.lo / r.value).powi(2), (r.hi / r.value).powi(2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhononCoupling {
    /// `η` as quoted, MHz·meV⁻³ (the factor 2π is implied).
    pub eta: Band,
    /// Acoustic cutoff `Ω`, meV.
    pub omega_mev: f64,
}

impl PhononCoupling {
    pub fn new(eta: Band, omega_mev: f64) -> Result<Self> {
        if !(eta.lo >= 0.0) {
            return Err(Error::param("eta", "must be non-negative"));
        }
        if !(omega_mev >= 0.0) {
            return Err(Error::param(
                "omega",
                format!("must be non-negative, got {omega_mev}"),
            ));
        }
        Ok(PhononCoupling { eta, omega_mev })
    }

    pub fn with_omega(&self, omega_mev: f64) -> Self {
        PhononCoupling { omega_mev, ..*self }
    }

    /// `ℏη` in meV⁻².
    pub fn eta_internal(&self) -> f64 {
        units::eta_to_internal(self.eta.value)
    }

    fn factors(&self) -> (f64, f64) {
        let e = self.eta;
        if e.value == 0.0 {
            return (0.0, 0.0);
        }
        (e.lo / e.value, e.hi / e.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSpacings {
    pub delta_mev: f64,
    pub delta_prime_mev: f64,
}

impl LevelSpacings {
    pub fn new(delta_mev: f64, delta_prime_mev: f64) -> Result<Self> {
        if !(delta_mev > 0.0 && delta_mev.is_finite()) {
            return Err(Error::param(
                "delta",
                format!("must be positive, got {delta_mev}"),
            ));
        }
        if !(delta_prime_mev > 0.0) {
            return Err(Error::param(
                "delta_prime",
                format!("must be positive, got {delta_prime_mev}"),
            ));
        }
        Ok(LevelSpacings {
            delta_mev,
            delta_prime_mev,
        })
    }

    pub fn with_delta(&self, delta_mev: f64) -> Result<Self> {
        LevelSpacings::new(delta_mev, self.delta_prime_mev)
    }

    /// `2/(Δ+Δ′)`, the interference term of the singlet path.
    fn interference(&self) -> f64 {
        if self.delta_prime_mev.is_infinite() {
            0.0
        } else {
            2.0 / (self.delta_mev + self.delta_prime_mev)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateWarning {
    /// The overlap function vanishes at the requested gap.
    OutsideSupport,
}

/// A rate `Γ/2π` in MHz with an optional band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    pub value_mhz: f64,
    pub band: Option<(f64, f64)>,
    pub warning: Option<RateWarning>,
}

impl RateResult {
    pub fn exact(value_mhz: f64) -> Self {
        RateResult {
            value_mhz,
            band: None,
            warning: None,
        }
    }

    pub fn with_band(value_mhz: f64, lo: f64, hi: f64) -> Self {
        RateResult {
            value_mhz,
            band: Some((lo.min(hi), lo.max(hi))),
            warning: None,
        }
    }

    pub fn from_band(b: Band) -> Self {
        RateResult::with_band(b.value, b.lo, b.hi)
    }

    pub fn lo(&self) -> f64 {
        self.band.map_or(self.value_mhz, |b| b.0)
    }

    pub fn hi(&self) -> f64 {
        self.band.map_or(self.value_mhz, |b| b.1)
    }

    fn scaled_band(value_mhz: f64, lo_factor: f64, hi_factor: f64) -> Self {
        RateResult::with_band(value_mhz, value_mhz * lo_factor, value_mhz * hi_factor)
    }
}

/// `Γ_A1 = 4π·λ⊥²·F(Δ)`.
pub fn gamma_a1(so: &SpinOrbit, f: &GridFunction, delta_mev: f64) -> Result<RateResult> {
    if !(delta_mev > 0.0) {
        return Err(Error::param(
            "delta",
            format!("must be positive, got {delta_mev}"),
        ));
    }
    let fd = f.sample(delta_mev);
    let lp = so.lambda_perp_mev();
    let value = units::mev_to_mhz(4.0 * std::f64::consts::PI * lp * lp * fd);
    let (lo, hi) = so.square_factors();
    let mut r = RateResult::scaled_band(value, lo, hi);
    if fd <= 0.0 {
        r.warning = Some(RateWarning::OutsideSupport);
    }
    Ok(r)
}

/// `∫₀^{min(Δ,Ω)} ω·g(ω)·F(Δ−ω) dω` where `g` is the singlet-path factor.
fn low_t_integral(
    pc: &PhononCoupling,
    f: &GridFunction,
    ls: &LevelSpacings,
    singlet_path: bool,
) -> Result<f64> {
    let top = ls.delta_mev.min(pc.omega_mev);
    if !(top > 0.0) {
        return Ok(0.0);
    }
    let c = if singlet_path { ls.interference() } else { 0.0 };
    let g = GridFunction::spanning(0.0, top, SPECTRAL_STEP_MEV, |w| {
        let p = 1.0 - c * w;
        w * p * p * f.sample(ls.delta_mev - w)
    })?;
    Ok(g.integral())
}

/// `Γ_E1,2` from `8λ⊥²η·∫ω·F(Δ−ω)dω`, defined even where `F(Δ) = 0`.
pub fn gamma_e12_direct(
    so: &SpinOrbit,
    pc: &PhononCoupling,
    f: &GridFunction,
    ls: &LevelSpacings,
    singlet_path: bool,
) -> Result<RateResult> {
    let integral = low_t_integral(pc, f, ls, singlet_path)?;
    let lp = so.lambda_perp_mev();
    let value = units::mev_to_mhz(8.0 * lp * lp * pc.eta_internal() * integral);
    let (sl, sh) = so.square_factors();
    let (el, eh) = pc.factors();
    Ok(RateResult::scaled_band(value, sl * el, sh * eh))
}

/// Low-temperature `Γ_E1,2 = (2/π)·η·Γ_A1·∫ω·F(Δ−ω)/F(Δ) dω`, optionally with
/// the interfering singlet path. Fails when `F(Δ) = 0`.
pub fn gamma_e12_low_t(
    so: &SpinOrbit,
    pc: &PhononCoupling,
    f: &GridFunction,
    ls: &LevelSpacings,
    singlet_path: bool,
) -> Result<RateResult> {
    if !(f.sample(ls.delta_mev) > 0.0) {
        return Err(Error::UndefinedRatio {
            delta_mev: ls.delta_mev,
        });
    }
    gamma_e12_direct(so, pc, f, ls, singlet_path)
}

/// `Γ_E1,2/Γ_A1 = (2/π)·ℏη·∫ω·F(Δ−ω) dω / F(Δ)`; independent of `λ⊥`.
pub fn ratio_e12_a1(
    pc: &PhononCoupling,
    f: &GridFunction,
    ls: &LevelSpacings,
    singlet_path: bool,
) -> Result<f64> {
    let fd = f.sample(ls.delta_mev);
    if !(fd > 0.0) {
        return Err(Error::UndefinedRatio {
            delta_mev: ls.delta_mev,
        });
    }
    let integral = low_t_integral(pc, f, ls, singlet_path)?;
    Ok(2.0 / std::f64::consts::PI * pc.eta_internal() * integral / fd)
}

/// Phonon-energy resolved `Γ̃_E1,2(ω)` in MHz/meV on `[0, Ω]`.
#[derive(Debug, Clone)]
pub struct E12Spectrum {
    /// Phonon emission branch, `[n+1]·F(Δ−ω,T)`.
    pub emission: GridFunction,
    /// Phonon absorption branch, `n·F(Δ+ω,T)`.
    pub absorption: GridFunction,
    pub total: GridFunction,
}

/// Spectral decomposition of the finite-temperature rate on a given
/// `F(·,T)`.
pub fn gamma_e12_spectral_on(
    so: &SpinOrbit,
    pc: &PhononCoupling,
    f_t: &GridFunction,
    ls: &LevelSpacings,
    t: Temperature,
    singlet_path: bool,
) -> Result<E12Spectrum> {
    if !(pc.omega_mev > 0.0) {
        return Err(Error::param("omega", "spectral decomposition needs Ω > 0"));
    }
    let lp = so.lambda_perp_mev();
    let pref = units::mev_to_mhz(8.0 * lp * lp * pc.eta_internal());
    let c = if singlet_path { ls.interference() } else { 0.0 };
    let d = ls.delta_mev;
    let emission = GridFunction::spanning(0.0, pc.omega_mev, SPECTRAL_STEP_MEV, |w| {
        let p = 1.0 - c * w;
        let nw = omega_times_occupation(w, t);
        pref * p * p * (w + nw) * f_t.sample(d - w)
    })?;
    let absorption = GridFunction::spanning(0.0, pc.omega_mev, SPECTRAL_STEP_MEV, |w| {
        let p = 1.0 + c * w;
        pref * p * p * omega_times_occupation(w, t) * f_t.sample(d + w)
    })?;
    let total = emission.add_scaled(&absorption, 1.0)?;
    Ok(E12Spectrum {
        emission,
        absorption,
        total,
    })
}

pub fn gamma_e12_spectral(
    so: &SpinOrbit,
    pc: &PhononCoupling,
    psb: &PsbModel,
    ls: &LevelSpacings,
    t: Temperature,
    singlet_path: bool,
) -> Result<E12Spectrum> {
    gamma_e12_spectral_on(so, pc, &psb.overlap(t)?, ls, t, singlet_path)
}

/// Finite-temperature `Γ_E1,2 = 8λ⊥²η·∫₀^Ω ω{[n+1]F(Δ−ω,T) + n·F(Δ+ω,T)}dω`
/// on a precomputed `F(·,T)`.
pub fn gamma_e12_finite_t_on(
    so: &SpinOrbit,
    pc: &PhononCoupling,
    f_t: &GridFunction,
    ls: &LevelSpacings,
    t: Temperature,
    singlet_path: bool,
) -> Result<RateResult> {
    if !(pc.omega_mev > 0.0) {
        return Ok(RateResult::with_band(0.0, 0.0, 0.0));
    }
    let spectrum = gamma_e12_spectral_on(so, pc, f_t, ls, t, singlet_path)?;
    let value = spectrum.total.integral();
    let (sl, sh) = so.square_factors();
    let (el, eh) = pc.factors();
    Ok(RateResult::scaled_band(value, sl * el, sh * eh))
}

pub fn gamma_e12_finite_t(
    so: &SpinOrbit,
    pc: &PhononCoupling,
    psb: &PsbModel,
    ls: &LevelSpacings,
    t: Temperature,
    singlet_path: bool,
) -> Result<RateResult> {
    gamma_e12_finite_t_on(so, pc, &psb.overlap(t)?, ls, t, singlet_path)
}

/// Orbitally averaged `Γ_ISC = (Γ_A1 + 2Γ_E1,2)/4`.
pub fn isc_average(g_a1: &RateResult, g_e12: &RateResult) -> RateResult {
    let v = (g_a1.value_mhz + 2.0 * g_e12.value_mhz) / 4.0;
    let mut r = RateResult::with_band(
        v,
        (g_a1.lo() + 2.0 * g_e12.lo()) / 4.0,
        (g_a1.hi() + 2.0 * g_e12.hi()) / 4.0,
    );
    r.warning = g_a1.warning.or(g_e12.warning);
    r
}

/// Mott–Seitz parameters of the thermally activated decay channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighTempParams {
    pub s: f64,
    pub delta_e_ev: f64,
    /// Coupling of the channel to the `|m_s| = 1` states.
    pub epsilon: f64,
}

impl HighTempParams {
    pub fn new(s: f64, delta_e_ev: f64, epsilon: f64) -> Result<Self> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::param("s", format!("must be non-negative, got {s}")));
        }
        if !(delta_e_ev > 0.0) {
            return Err(Error::param(
                "delta_e",
                format!("must be positive, got {delta_e_ev}"),
            ));
        }
        if !(epsilon >= 0.0) {
            return Err(Error::param(
                "epsilon",
                format!("must be non-negative, got {epsilon}"),
            ));
        }
        Ok(HighTempParams {
            s,
            delta_e_ev,
            epsilon,
        })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        HighTempParams { epsilon, ..*self }
    }
}

/// `Γ_HT = s·Γ_Rad·e^{−ΔE/k_BT}`, zero at `T = 0`.
pub fn gamma_ht(ht: &HighTempParams, g_rad: &RateResult, t: Temperature) -> RateResult {
    if t.is_zero() {
        return RateResult::with_band(0.0, 0.0, 0.0);
    }
    let boltz = (-ht.delta_e_ev * units::MEV_PER_EV / t.thermal_energy_mev()).exp();
    let k = ht.s * boltz;
    RateResult::with_band(g_rad.value_mhz * k, g_rad.lo() * k, g_rad.hi() * k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpinClass {
    Ms0,
    Ms1,
}

impl fmt::Display for SpinClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpinClass::Ms0 => "ms0",
            SpinClass::Ms1 => "ms1",
        })
    }
}

impl FromStr for SpinClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ms0" => Ok(SpinClass::Ms0),
            "ms1" => Ok(SpinClass::Ms1),
            other => Err(format!(
                "unknown spin class `{other}` (expected ms0 or ms1)"
            )),
        }
    }
}

/// Fluorescence lifetime in ns. `m_s = 0` decays radiatively and through
/// the activated channel; `|m_s| = 1` adds ISC and `ε·Γ_HT`.
pub fn lifetime(
    g_rad: &RateResult,
    g_isc: &RateResult,
    g_ht: &RateResult,
    epsilon: f64,
    ms: SpinClass,
) -> Result<f64> {
    let total = match ms {
        SpinClass::Ms0 => g_rad.value_mhz + g_ht.value_mhz,
        SpinClass::Ms1 => g_rad.value_mhz + g_isc.value_mhz + epsilon * g_ht.value_mhz,
    };
    if total < 0.0 || !total.is_finite() {
        return Err(Error::param(
            "rates",
            format!("total decay rate {total} MHz is invalid"),
        ));
    }
    if total == 0.0 {
        return Err(Error::InfiniteLifetime);
    }
    Ok(units::lifetime_ns(total))
}
