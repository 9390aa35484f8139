//! Regenerates `data/reference_psb_f0.csv`, the reference low-temperature
//! sideband shipped with the crate.
//!
//! The one-phonon density is a three-Gaussian model with a cubic onset,
//! capped at 200 meV. The overlap function is its Poisson series at
//! `S0 = 3.49`, scaled so that `Γ_A1/2π = 16.0 MHz` at `Δ = 392 meV` with
//! `λ⊥/λ∥ = 1.2`.
//!
//! Usage: `cargo run -p nvisc --example reference_psb [OUTPUT]`

use std::path::PathBuf;

use nvisc::gridfn::GridFunction;
use nvisc::interval::Band;
use nvisc::psb::{poisson_series, required_terms};
use nvisc::rates::{gamma_a1, SpinOrbit};

const STEP: f64 = 0.25;
const S0: f64 = 3.49;
const CAP: f64 = 200.0;
const SPAN: f64 = 800.0;
/// (weight, centre meV, width meV)
const COMPONENTS: [(f64, f64, f64); 3] =
    [(0.12, 40.0, 8.0), (0.58, 64.0, 11.0), (0.15, 85.0, 10.0)];

fn one_phonon() -> nvisc::error::Result<GridFunction> {
    let raw = GridFunction::from_fn(0.0, CAP, STEP, |w| {
        let onset = 1.0 - (-(w / 25.0).powi(3)).exp();
        let peaks: f64 = COMPONENTS
            .iter()
            .map(|&(a, mu, s)| a * (-(w - mu).powi(2) / (2.0 * s * s)).exp() / s)
            .sum();
        onset * peaks
    })?;
    let mass: f64 = raw.values().iter().sum::<f64>() * STEP;
    raw.scale(1.0 / mass)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/reference_psb_f0.csv")
        });
    let f = one_phonon()?;
    let shape = poisson_series(&f, S0, required_terms(S0), (0.0, SPAN))?;
    let so = SpinOrbit::from_ghz(5.33, Band::exact(1.2))?;
    let unit = gamma_a1(&so, &shape, 392.0)?.value_mhz;
    let amplitude = 16.0 / unit;
    let f0 = shape.scale(amplitude)?;

    let mut text = String::new();
    text.push_str("# Reference low-temperature vibrational overlap function F(omega), meV^-1.\n");
    text.push_str("# Reconstructed model spectrum (not a measurement); see README.\n");
    text.push_str(&format!("# S0 = {S0}, amplitude = {amplitude}\n"));
    text.push_str("omega_meV,value\n");
    for (w, v) in f0.nodes() {
        text.push_str(&format!("{w},{v:.11e}\n"));
    }
    std::fs::write(&out, text)?;
    println!(
        "wrote {} ({} samples, amplitude {amplitude:.6})",
        out.display(),
        f0.len()
    );
    Ok(())
}
