//! Phonon-induced orbital mixing within the excited-state doublet.
//!
//! The two-phonon Raman rate is
//! `Γ_Mix = (64/π)·α(Δ_xy/k_BT)·(ℏη)²·(k_BT)⁵`, and the one-phonon rate
//! between the strain-split branches is `4ℏη·[n(Δ_xy)+1]·Δ_xy³`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::gridfn::GridFunction;
use crate::io;
use crate::psb::omega_times_occupation;
use crate::quad;
use crate::rates::RateResult;
use crate::units::{self, Temperature};

/// Upper limit of the α integral in units of `k_BT`.
const ALPHA_UPPER: f64 = 80.0;
/// Spectral integrals run to this many `k_BT`.
const SPECTRAL_SPAN_KT: f64 = 40.0;

/// `α(x_Δ) = ∫₀^∞ x⁴/(eˣ−1)·(1/(e^{x+x_Δ}−1) + 1) dx`.
pub fn alpha_const(x_delta: f64) -> Result<f64> {
    if !(x_delta >= 0.0) {
        return Err(Error::param(
            "x_delta",
            format!("must be non-negative, got {x_delta}"),
        ));
    }
    let integrand = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        let bose = 1.0 / x.exp_m1();
        let upper = 1.0 / (x + x_delta).exp_m1();
        x.powi(4) * bose * (upper + 1.0)
    };
    quad::integrate(integrand, 0.0, ALPHA_UPPER, 1e-9)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingParams {
    /// `η` as quoted, MHz·meV⁻³.
    pub eta_mhz_per_mev3: f64,
    /// Strain splitting `Δ_xy`, meV.
    pub delta_xy_mev: f64,
    pub t: Temperature,
}

impl MixingParams {
    pub fn new(eta_mhz_per_mev3: f64, delta_xy_mev: f64, t: Temperature) -> Result<Self> {
        if !(eta_mhz_per_mev3 >= 0.0) {
            return Err(Error::param(
                "eta",
                format!("must be non-negative, got {eta_mhz_per_mev3}"),
            ));
        }
        if !(delta_xy_mev >= 0.0) {
            return Err(Error::param(
                "delta_xy",
                format!("must be non-negative, got {delta_xy_mev}"),
            ));
        }
        Ok(MixingParams {
            eta_mhz_per_mev3,
            delta_xy_mev,
            t,
        })
    }

    fn eta_internal(&self) -> f64 {
        units::eta_to_internal(self.eta_mhz_per_mev3)
    }

    fn require_positive_t(&self) -> Result<f64> {
        if self.t.is_zero() {
            return Err(Error::param("temperature", "mixing rates need T > 0"));
        }
        Ok(self.t.thermal_energy_mev())
    }
}

/// Closed-form two-phonon mixing rate.
pub fn gamma_mix(mp: &MixingParams) -> Result<RateResult> {
    let kt = mp.require_positive_t()?;
    let alpha = alpha_const(mp.delta_xy_mev / kt)?;
    let e = mp.eta_internal();
    let rate = 64.0 / std::f64::consts::PI * alpha * e * e * kt.powi(5);
    Ok(RateResult::exact(units::mev_to_mhz(rate)))
}

/// `Γ̃_Mix(ω) = (64/π)·(ℏη)²·ω⁴·n(ω)·[n(ω+Δ_xy)+1]` in MHz/meV on
/// `[0, 40·k_BT]`.
pub fn gamma_mix_spectral(mp: &MixingParams) -> Result<GridFunction> {
    let kt = mp.require_positive_t()?;
    let e = mp.eta_internal();
    let pref = units::mev_to_mhz(64.0 / std::f64::consts::PI * e * e);
    let d = mp.delta_xy_mev;
    GridFunction::spanning(0.0, SPECTRAL_SPAN_KT * kt, kt / 400.0, |w| {
        if w <= 0.0 {
            return 0.0;
        }
        let wn = omega_times_occupation(w, mp.t);
        let upper = 1.0 / ((w + d) / kt).exp_m1() + 1.0;
        pref * w.powi(3) * wn * upper
    })
}

/// One-phonon mixing between the strain-split branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnePhononMixing {
    /// Downhill rate with phonon emission, `4ℏη[n+1]Δ³`.
    pub emission: RateResult,
    /// Uphill rate with phonon absorption, `4ℏη·n·Δ³`.
    pub absorption: RateResult,
    /// High-temperature form `4ℏη·k_BT·Δ²`.
    pub approximation: RateResult,
}

pub fn gamma_mix_one_phonon(mp: &MixingParams) -> Result<OnePhononMixing> {
    let d = mp.delta_xy_mev;
    let e = mp.eta_internal();
    // n·Δ³ = (nΔ)·Δ², finite as Δ → 0.
    let n_d3 = omega_times_occupation(d, mp.t) * d * d;
    let to = |x: f64| RateResult::exact(units::mev_to_mhz(4.0 * e * x));
    Ok(OnePhononMixing {
        emission: to(n_d3 + d.powi(3)),
        absorption: to(n_d3),
        approximation: to(mp.t.thermal_energy_mev() * d * d),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixPoint {
    pub temperature_k: f64,
    pub gamma_mix_mhz: f64,
    pub sigma_mhz: f64,
}

/// Measured mixing rates versus temperature.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MixSeries {
    points: Vec<MixPoint>,
}

pub const MIX_HEADER: [&str; 3] = ["temperature_K", "gamma_mix_MHz", "sigma_MHz"];

impl MixSeries {
    pub fn new(points: Vec<MixPoint>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !(p.sigma_mhz > 0.0) {
                return Err(Error::param(
                    "sigma",
                    format!("point {i}: sigma must be positive"),
                ));
            }
            if !(p.temperature_k > 0.0) {
                return Err(Error::param(
                    "temperature",
                    format!("point {i}: must be positive"),
                ));
            }
            if i > 0 && p.temperature_k <= points[i - 1].temperature_k {
                return Err(Error::param(
                    "temperature",
                    format!("point {i}: temperatures must increase"),
                ));
            }
        }
        Ok(MixSeries { points })
    }

    pub fn points(&self) -> &[MixPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn parse_csv(path: &Path, text: &str) -> Result<Self> {
        let rows = io::read_records(path, text, &MIX_HEADER)?;
        let mut pts = Vec::with_capacity(rows.len());
        for (line, r) in &rows {
            pts.push(MixPoint {
                temperature_k: io::parse_f64(path, *line, &r[0], MIX_HEADER[0])?,
                gamma_mix_mhz: io::parse_f64(path, *line, &r[1], MIX_HEADER[1])?,
                sigma_mhz: io::parse_f64(path, *line, &r[2], MIX_HEADER[2])?,
            });
        }
        MixSeries::new(pts).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            reason: e.to_string(),
        })
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        MixSeries::parse_csv(path, &io::read_to_string(path)?)
    }

    pub fn to_csv(&self) -> String {
        let mut s = MIX_HEADER.join(",") + "\n";
        for p in &self.points {
            s.push_str(&format!(
                "{},{},{}\n",
                p.temperature_k, p.gamma_mix_mhz, p.sigma_mhz
            ));
        }
        s
    }
}

/// Fitted coupling with its 1σ uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaFit {
    pub eta_mhz_per_mev3: f64,
    pub sigma: f64,
    pub chi2: f64,
    pub dof: usize,
}

/// `Γ_Mix/η²` at temperature `t`, MHz per (MHz·meV⁻³)².
fn mix_per_eta_sq(t_k: f64, delta_xy_mev: f64) -> Result<f64> {
    let t = Temperature::kelvin(t_k)?;
    gamma_mix(&MixingParams::new(1.0, delta_xy_mev, t)?).map(|r| r.value_mhz)
}

/// Weighted least squares for `q = η²` in `Γ_i = q·g(T_i)`, with exact
/// `α(T_i)` per point.
pub fn extract_eta(data: &MixSeries, delta_xy_mev: f64) -> Result<EtaFit> {
    if data.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: data.len(),
        });
    }
    let g: Vec<f64> = data
        .points
        .iter()
        .map(|p| mix_per_eta_sq(p.temperature_k, delta_xy_mev))
        .collect::<Result<_>>()?;
    let (mut sgg, mut sgy) = (0.0, 0.0);
    for (p, gi) in data.points.iter().zip(&g) {
        let w = 1.0 / (p.sigma_mhz * p.sigma_mhz);
        sgg += w * gi * gi;
        sgy += w * gi * p.gamma_mix_mhz;
    }
    let q = sgy / sgg;
    if !(q > 0.0) {
        return Err(Error::FitFailed(format!(
            "fitted eta^2 = {q:e} is not positive; data inconsistent with the T^5 model"
        )));
    }
    let sigma_q = 1.0 / sgg.sqrt();
    let eta = q.sqrt();
    let chi2 = data
        .points
        .iter()
        .zip(&g)
        .map(|(p, gi)| ((p.gamma_mix_mhz - q * gi) / p.sigma_mhz).powi(2))
        .sum();
    Ok(EtaFit {
        eta_mhz_per_mev3: eta,
        sigma: sigma_q / (2.0 * eta),
        chi2,
        dof: data.len() - 1,
    })
}

/// Noise-free series from the model, for tests and demos.
pub fn synthetic_series(
    eta: f64,
    delta_xy_mev: f64,
    temps_k: &[f64],
    rel_sigma: f64,
) -> Result<MixSeries> {
    let pts = temps_k
        .iter()
        .map(|&t| {
            let g = eta * eta * mix_per_eta_sq(t, delta_xy_mev)?;
            Ok(MixPoint {
                temperature_k: t,
                gamma_mix_mhz: g,
                sigma_mhz: rel_sigma * g,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    MixSeries::new(pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_limits() {
        let z4 = std::f64::consts::PI.powi(4) / 90.0;
        assert!((alpha_const(0.0).unwrap() / (24.0 * z4) - 1.0).abs() < 1e-6);
        assert!((alpha_const(1e3).unwrap() / 24.886_266_1 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn mixing_rate_at_5k_is_tens_of_khz() {
        let mp = MixingParams::new(
            44.0,
            units::ghz_to_mev(3.9),
            Temperature::kelvin(5.0).unwrap(),
        )
        .unwrap();
        let g = gamma_mix(&mp).unwrap().value_mhz;
        assert!(g > 0.05 && g < 0.08, "{g}");
    }

    #[test]
    fn zero_temperature_rejected() {
        let mp = MixingParams::new(44.0, 0.01, Temperature::ZERO).unwrap();
        assert!(gamma_mix(&mp).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let s = synthetic_series(44.0, 0.016, &[4.0, 6.0, 8.0], 0.03).unwrap();
        let back = MixSeries::parse_csv(Path::new("m"), &s.to_csv()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn series_validation() {
        let p = |t| MixPoint {
            temperature_k: t,
            gamma_mix_mhz: 1.0,
            sigma_mhz: 0.1,
        };
        assert!(MixSeries::new(vec![p(5.0), p(4.0)]).is_err());
    }
}
