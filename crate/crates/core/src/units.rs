//! Internal unit system.
//!
//! ℏ = 1 and every energy is in meV. A rate Γ is carried internally as the
//! energy ℏΓ; user-facing rates are ordinary frequencies Γ/2π in MHz, so the
//! conversion is E = h·ν with 1 meV ↔ 241.79892 GHz.

use crate::error::{Error, Result};

/// Boltzmann constant in meV/K.
pub const K_B_MEV_PER_K: f64 = 0.086_173_33;

/// Ordinary frequency corresponding to 1 meV, in GHz.
pub const GHZ_PER_MEV: f64 = 241.798_92;

/// Ordinary frequency corresponding to 1 meV, in MHz.
pub const MHZ_PER_MEV: f64 = GHZ_PER_MEV * 1.0e3;

pub const MEV_PER_EV: f64 = 1.0e3;

/// `Γ/2π` in MHz to the internal energy `ℏΓ` in meV.
pub fn mhz_to_mev(rate_mhz: f64) -> f64 {
    rate_mhz / MHZ_PER_MEV
}

/// Internal energy `ℏΓ` (meV) to `Γ/2π` in MHz.
pub fn mev_to_mhz(energy_mev: f64) -> f64 {
    energy_mev * MHZ_PER_MEV
}

pub fn ghz_to_mev(freq_ghz: f64) -> f64 {
    freq_ghz / GHZ_PER_MEV
}

pub fn mev_to_ghz(energy_mev: f64) -> f64 {
    energy_mev * GHZ_PER_MEV
}

/// Phonon coupling `η` quoted as `2π × value` MHz·meV⁻³ to the internal
/// `ℏη` in meV⁻².
pub fn eta_to_internal(eta_mhz_per_mev3: f64) -> f64 {
    eta_mhz_per_mev3 / MHZ_PER_MEV
}

pub fn eta_from_internal(eta_internal: f64) -> f64 {
    eta_internal * MHZ_PER_MEV
}

/// Lifetime in ns of a total decay rate given as `Γ/2π` in MHz.
pub fn lifetime_ns(total_rate_mhz: f64) -> f64 {
    1.0e3 / (2.0 * std::f64::consts::PI * total_rate_mhz)
}

/// Inverse of [`lifetime_ns`].
pub fn rate_mhz_from_lifetime(tau_ns: f64) -> f64 {
    1.0e3 / (2.0 * std::f64::consts::PI * tau_ns)
}

/// Absolute temperature in kelvin.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Temperature(f64);

impl Temperature {
    pub const ZERO: Temperature = Temperature(0.0);

    pub fn kelvin(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::param(
                "temperature",
                format!("{value} K is not a non-negative finite temperature"),
            ));
        }
        Ok(Temperature(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Thermal energy `k_B·T` in meV.
    pub fn thermal_energy_mev(self) -> f64 {
        K_B_MEV_PER_K * self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_orbit_conversion() {
        // 5.33 GHz axial spin-orbit.
        assert!((ghz_to_mev(5.33) - 0.022_044).abs() < 1e-6);
    }

    #[test]
    fn strain_splitting_conversion() {
        assert!((ghz_to_mev(3.9) - 0.016_130).abs() < 1e-6);
        assert!((ghz_to_mev(18.0) - 0.074_442).abs() < 1e-6);
    }

    #[test]
    fn thermal_energy_at_5k() {
        let t = Temperature::kelvin(5.0).unwrap();
        assert!((t.thermal_energy_mev() - 0.430_866_65).abs() < 1e-9);
        // 104 GHz in energy.
        assert!((ghz_to_mev(104.0) - t.thermal_energy_mev()).abs() < 2e-3);
    }

    #[test]
    fn rate_round_trips() {
        for &r in &[1e-6, 0.013, 16.0, 13.2, 4.4e4] {
            let back = mev_to_mhz(mhz_to_mev(r));
            assert!(((back - r) / r).abs() < 1e-12);
            let eta = eta_from_internal(eta_to_internal(r));
            assert!(((eta - r) / r).abs() < 1e-12);
            assert!(((rate_mhz_from_lifetime(lifetime_ns(r)) - r) / r).abs() < 1e-12);
        }
    }

    #[test]
    fn radiative_lifetime() {
        assert!((lifetime_ns(13.2) - 12.057).abs() < 1e-3);
    }

    #[test]
    fn rejects_negative_temperature() {
        assert!(Temperature::kelvin(-1.0).is_err());
        assert!(Temperature::kelvin(f64::NAN).is_err());
    }
}
