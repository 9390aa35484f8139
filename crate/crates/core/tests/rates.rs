//! Rate formulas: scaling laws, closed forms on flat overlaps, limits.

use nvisc::error::Error;
use nvisc::gridfn::GridFunction;
use nvisc::interval::Band;
use nvisc::rates::{
    gamma_a1, gamma_e12_direct, gamma_e12_finite_t_on, gamma_e12_low_t, gamma_e12_spectral_on,
    gamma_ht, isc_average, lifetime, ratio_e12_a1, HighTempParams, LevelSpacings, PhononCoupling,
    RateResult, SpinClass, SpinOrbit,
};
use nvisc::units::{self, Temperature};
use proptest::prelude::*;

const FLAT: f64 = 0.01;

fn kelvin(t: f64) -> Temperature {
    Temperature::kelvin(t).unwrap()
}

fn so(ratio: f64) -> SpinOrbit {
    SpinOrbit::from_ghz(5.33, Band::symmetric(ratio, ratio / 6.0).unwrap()).unwrap()
}

fn pc(eta: f64, omega: f64) -> PhononCoupling {
    PhononCoupling::new(Band::new(eta, 0.9 * eta, 1.1 * eta).unwrap(), omega).unwrap()
}

fn ls(delta: f64) -> LevelSpacings {
    LevelSpacings::new(delta, 1190.0).unwrap()
}

fn flat() -> GridFunction {
    GridFunction::from_fn(0.0, 900.0, 0.25, |_| FLAT).unwrap()
}

fn bumpy() -> GridFunction {
    GridFunction::from_fn(0.0, 900.0, 0.25, |w| {
        (1.0 - (-(w / 30.0).powi(2)).exp())
            * (0.004 + 0.003 * (w / 47.0).sin().powi(2))
            * (-w / 600.0).exp()
    })
    .unwrap()
}

/// `∫₀^Ω ω·n(ω) dω = (k_BT)²·[π²/6 − Σ_k e^{−kx}(1 + kx)/k²]`, `x = Ω/k_BT`.
fn omega_n_integral(omega: f64, t: Temperature) -> f64 {
    let kt = t.thermal_energy_mev();
    let x = omega / kt;
    let tail: f64 = (1..400)
        .map(|k| {
            let kx = k as f64 * x;
            (-kx).exp() * (1.0 + kx) / (k * k) as f64
        })
        .sum();
    kt * kt * (std::f64::consts::PI.powi(2) / 6.0 - tail)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn a1_scales_with_coupling_squared_and_overlap(r in 0.5..2.0f64, k in 0.1..5.0f64, c in 0.1..10.0f64,
                                                   delta in 20.0..600.0f64) {
        let f = bumpy();
        let base = gamma_a1(&so(r), &f, delta).unwrap().value_mhz;
        let by_so = gamma_a1(&so(k * r), &f, delta).unwrap().value_mhz;
        let by_f = gamma_a1(&so(r), &f.scale(c).unwrap(), delta).unwrap().value_mhz;
        prop_assert!((by_so / base - k * k).abs() < 1e-12 * k * k);
        prop_assert!((by_f / base - c).abs() < 1e-12 * c);
    }

    #[test]
    fn e12_scales_with_eta_and_ratio_is_coupling_free(r in 0.5..2.0f64, eta in 5.0..100.0f64, k in 0.1..5.0f64,
                                                      delta in 150.0..600.0f64, omega in 10.0..120.0f64,
                                                      flag in any::<bool>()) {
        let f = bumpy();
        let a = gamma_e12_low_t(&so(r), &pc(eta, omega), &f, &ls(delta), flag).unwrap().value_mhz;
        let b = gamma_e12_low_t(&so(r), &pc(k * eta, omega), &f, &ls(delta), flag).unwrap().value_mhz;
        prop_assert!((b / a - k).abs() < 1e-12 * k);
        let ratio = ratio_e12_a1(&pc(eta, omega), &f, &ls(delta), flag).unwrap();
        let a1 = gamma_a1(&so(r), &f, delta).unwrap().value_mhz;
        prop_assert!((a / a1 / ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn e12_grows_with_cutoff(delta in 150.0..600.0f64, o1 in 5.0..100.0f64, d in 0.5..40.0f64, flag in any::<bool>()) {
        let f = bumpy();
        let lo = gamma_e12_low_t(&so(1.2), &pc(44.0, o1), &f, &ls(delta), flag).unwrap().value_mhz;
        let hi = gamma_e12_low_t(&so(1.2), &pc(44.0, o1 + d), &f, &ls(delta), flag).unwrap().value_mhz;
        prop_assert!(hi > lo);
    }

    #[test]
    fn bands_bracket_values(r in 0.5..2.0f64, delta in 150.0..600.0f64, t in 0.0..700.0f64) {
        let f = bumpy();
        let a1 = gamma_a1(&so(r), &f, delta).unwrap();
        let e = gamma_e12_finite_t_on(&so(r), &pc(44.0, 85.0), &f, &ls(delta), kelvin(t), true).unwrap();
        for g in [a1, e, isc_average(&a1, &e)] {
            prop_assert!(g.lo() <= g.value_mhz && g.value_mhz <= g.hi());
        }
    }
}

#[test]
fn flat_overlap_closed_forms() {
    let (delta, omega, eta) = (392.0, 85.0, 44.0);
    let lp = units::ghz_to_mev(1.2 * 5.33);
    let pref = 8.0 * lp * lp * units::eta_to_internal(eta) * FLAT * units::MHZ_PER_MEV;
    let off = gamma_e12_direct(&so(1.2), &pc(eta, omega), &flat(), &ls(delta), false).unwrap();
    assert!((off.value_mhz / (pref * omega * omega / 2.0) - 1.0).abs() < 1e-9);
    // ∫ω(1 − cω)² = Ω²/2 − 2cΩ³/3 + c²Ω⁴/4.
    let c = 2.0 / (delta + 1190.0);
    let poly = omega.powi(2) / 2.0 - 2.0 * c * omega.powi(3) / 3.0 + c * c * omega.powi(4) / 4.0;
    // The trapezoid rule on the cubic leaves exactly h²/12·[g′(Ω) − g′(0)].
    let h = 0.01;
    let dg = |w: f64| (1.0 - c * w) * (1.0 - 3.0 * c * w);
    let trapezoid = poly + h * h / 12.0 * (dg(omega) - dg(0.0));
    let on = gamma_e12_direct(&so(1.2), &pc(eta, omega), &flat(), &ls(delta), true).unwrap();
    assert!((on.value_mhz / (pref * trapezoid) - 1.0).abs() < 1e-12);
    assert!((on.value_mhz / (pref * poly) - 1.0).abs() < 2e-9);
}

#[test]
fn finite_temperature_flat_overlap_matches_series() {
    // Flat F: ∫ω(2n+1) = Ω²/2 + 2∫ω·n.
    let (delta, omega, eta) = (392.0, 85.0, 44.0);
    let lp = units::ghz_to_mev(1.2 * 5.33);
    let pref = 8.0 * lp * lp * units::eta_to_internal(eta) * FLAT * units::MHZ_PER_MEV;
    for t in [5.0, 50.0, 300.0, 700.0] {
        let t = kelvin(t);
        let want = pref * (omega * omega / 2.0 + 2.0 * omega_n_integral(omega, t));
        let got = gamma_e12_finite_t_on(&so(1.2), &pc(eta, omega), &flat(), &ls(delta), t, false)
            .unwrap();
        assert!(
            (got.value_mhz / want - 1.0).abs() < 1e-7,
            "T {:?}: {} vs {want}",
            t,
            got.value_mhz
        );
    }
}

#[test]
fn spectrum_integrates_to_rate() {
    let f = bumpy();
    for (t, flag) in [(5.0, false), (300.0, true), (700.0, true)] {
        let t = kelvin(t);
        let spectrum =
            gamma_e12_spectral_on(&so(1.2), &pc(44.0, 85.0), &f, &ls(392.0), t, flag).unwrap();
        let rate = gamma_e12_finite_t_on(&so(1.2), &pc(44.0, 85.0), &f, &ls(392.0), t, flag)
            .unwrap()
            .value_mhz;
        let sum = spectrum.emission.integral() + spectrum.absorption.integral();
        assert!((spectrum.total.integral() / rate - 1.0).abs() < 1e-9);
        assert!((sum / rate - 1.0).abs() < 1e-9);
    }
}

#[test]
fn absorption_vanishes_at_zero_temperature() {
    let spectrum = gamma_e12_spectral_on(
        &so(1.2),
        &pc(44.0, 85.0),
        &bumpy(),
        &ls(392.0),
        Temperature::ZERO,
        true,
    )
    .unwrap();
    assert!(spectrum.absorption.values().iter().all(|&v| v == 0.0));
    let low = gamma_e12_low_t(&so(1.2), &pc(44.0, 85.0), &bumpy(), &ls(392.0), true)
        .unwrap()
        .value_mhz;
    assert!((spectrum.total.integral() / low - 1.0).abs() < 1e-12);
}

#[test]
fn emission_dominates_at_low_temperature() {
    let spectrum = gamma_e12_spectral_on(
        &so(1.2),
        &pc(44.0, 85.0),
        &bumpy(),
        &ls(392.0),
        kelvin(5.0),
        false,
    )
    .unwrap();
    for (w, e) in spectrum.emission.nodes().filter(|&(w, _)| w > 5.0) {
        assert!(spectrum.absorption.sample(w) < 1e-3 * e);
    }
}

#[test]
fn singlet_path_vanishes_for_distant_level() {
    let far = LevelSpacings::new(392.0, f64::INFINITY).unwrap();
    let on = gamma_e12_low_t(&so(1.2), &pc(44.0, 85.0), &bumpy(), &far, true).unwrap();
    let off = gamma_e12_low_t(&so(1.2), &pc(44.0, 85.0), &bumpy(), &far, false).unwrap();
    assert_eq!(on.value_mhz, off.value_mhz);
}

#[test]
fn undefined_ratio_outside_support() {
    let f = GridFunction::from_fn(0.0, 300.0, 0.25, |_| FLAT).unwrap();
    assert!(matches!(
        ratio_e12_a1(&pc(44.0, 85.0), &f, &ls(392.0), false),
        Err(Error::UndefinedRatio { .. })
    ));
    // The direct form stays defined: F(Δ−ω) reaches back into the support.
    let direct = gamma_e12_direct(&so(1.2), &pc(44.0, 100.0), &f, &ls(392.0), false).unwrap();
    assert!(direct.value_mhz > 0.0);
}

#[test]
fn activated_channel_and_lifetimes() {
    let ht = HighTempParams::new(5.8e7, 0.94, 0.5).unwrap();
    let rad = RateResult::exact(13.2);
    let isc = RateResult::exact(8.0);
    let mut last = 0.0;
    for t in [100.0, 300.0, 500.0, 700.0] {
        let g = gamma_ht(&ht, &rad, kelvin(t)).value_mhz;
        assert!(g > last);
        last = g;
        let g_ht = RateResult::exact(g);
        let t0 = lifetime(&rad, &isc, &g_ht, 0.0, SpinClass::Ms0).unwrap();
        assert!((t0 - units::lifetime_ns(13.2 + g)).abs() < 1e-12);
        // ε = 0 decouples |m_s| = 1 from the activated channel.
        let t1 = lifetime(&rad, &isc, &g_ht, 0.0, SpinClass::Ms1).unwrap();
        assert!((t1 - units::lifetime_ns(21.2)).abs() < 1e-12);
        let t1e = lifetime(&rad, &isc, &g_ht, 0.5, SpinClass::Ms1).unwrap();
        assert!((t1e - units::lifetime_ns(21.2 + 0.5 * g)).abs() < 1e-12);
    }
}
