//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! | # | Criterion | Tolerance |
//! |---|-----------|-----------|
//! | 1 | α limits against 24ζ(4), 24ζ(5) | 1e-6 relative |
//! | 2 | T⁵ ratio Γ_Mix(2T)/Γ_Mix(T), T ∈ [2, 30] K | [31.84, 32.16] |
//! | 3 | Poisson comb line weights | 1e-6 per line |
//! | 4 | Detailed balance, sideband normalization | 1e-10, 1e-6 |
//! | 5 | Δ′→∞, T→0 (at 1 mK) limits, deconvolution round trip | 1e-12, 1e-9, 1e-4 L1 |
//! | 6 | Low-temperature error at 5 K | < 1 % |
//! | 7 | One-phonon mixing at 18 GHz, 5 K | 0.5 MHz ± 25 % |
//! | 8 | Low-temperature lifetimes | 0.5 ns, 0.3 ns |
//! | 9 | η and Mott–Seitz fit recovery | 2σ noisy, exact noiseless |
//! | 10 | Δ interval and low-Δ exclusion | ± 25 meV |
//! | 11 | Ω interval | ± 10 meV |
//! | 12 | Singlet-path correction | 15 % ± 5 pp |
//! | 13 | ISC sensitivity | [0.05, 0.25] MHz/meV |
//! | 14 | Lifetime curve through ms0 error bars | within 1σ |
//!
//! Criteria 10–14 run on the shipped reference tables in `data/`.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use nvisc::inference::{
    fit_mott_seitz, infer_delta, infer_omega, isc_sensitivity, lifetime_curves, lowt_error_map_on,
    mott_seitz_lifetime, ErrorAxis, LifetimeModel, LifetimePoint, LifetimeSeries, Sweep,
};
use nvisc::interval::Band;
use nvisc::mixing::{
    alpha_const, extract_eta, gamma_mix, gamma_mix_one_phonon, synthetic_series, MixPoint,
    MixSeries, MixingParams,
};
use nvisc::psb::synthetic::{spike, TwoGaussian};
use nvisc::psb::{extract_one_phonon, required_terms, thermal_one_phonon, PsbModel};
use nvisc::rates::{
    gamma_e12_finite_t_on, gamma_e12_low_t, lifetime, HighTempParams, LevelSpacings,
    PhononCoupling, RateResult, SpinClass, SpinOrbit,
};
use nvisc::units::{self, Temperature};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

const SEED: u64 = 0x5eed_2024;
const LAMBDA_PAR_GHZ: f64 = 5.33;
const G_RAD_MHZ: f64 = 13.2;
const TAU0_NS: f64 = 12.0;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn kelvin(t: f64) -> Temperature {
    Temperature::kelvin(t).expect("valid temperature")
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    format!("error: {err}")
}

/// ζ(s) by direct summation with an Euler–Maclaurin tail.
fn zeta(s: f64) -> f64 {
    let n = 1000;
    let head: f64 = (1..n).map(|k| (k as f64).powf(-s)).sum();
    let nf = n as f64;
    head + nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s) + s / 12.0 * nf.powf(-s - 1.0)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn spin_orbit() -> SpinOrbit {
    SpinOrbit::from_ghz(LAMBDA_PAR_GHZ, Band::new(1.2, 1.0, 1.4).unwrap()).unwrap()
}

fn coupling() -> PhononCoupling {
    PhononCoupling::new(Band::new(44.0, 41.6, 46.4).unwrap(), 85.0).unwrap()
}

fn spacings() -> LevelSpacings {
    LevelSpacings::new(392.0, 1190.0).unwrap()
}

fn random_spectrum(rng: &mut ChaCha8Rng) -> TwoGaussian {
    TwoGaussian {
        weight: rng.random_range(0.2..0.8),
        mean1: rng.random_range(30.0..60.0),
        sigma1: rng.random_range(5.0..10.0),
        mean2: rng.random_range(60.0..110.0),
        sigma2: rng.random_range(6.0..14.0),
    }
}

fn c01_alpha() -> Check {
    let z4 = 24.0 * zeta(4.0);
    let z5 = 24.0 * zeta(5.0);
    let a0 = alpha_const(0.0).map_err(e)?;
    let ainf = alpha_const(1e3).map_err(e)?;
    let (r0, rinf) = (rel(a0, z4), rel(ainf, z5));
    ensure(
        r0 < 1e-6 && rinf < 1e-6,
        format!("α(0) = {a0:.7} (rel {r0:.1e}), α(∞) = {ainf:.7} (rel {rinf:.1e})"),
    )
}

fn c02_t5() -> Check {
    let mut worst: (f64, f64) = (f64::INFINITY, f64::NEG_INFINITY);
    for tk in 2..=30 {
        let g = |t: f64| {
            gamma_mix(&MixingParams::new(44.0, 0.01613, kelvin(t)).unwrap())
                .map(|r| r.value_mhz)
                .map_err(e)
        };
        let r = g(2.0 * tk as f64)? / g(tk as f64)?;
        worst = (worst.0.min(r), worst.1.max(r));
    }
    ensure(
        worst.0 >= 31.84 && worst.1 <= 32.16,
        format!("ratio range [{:.4}, {:.4}]", worst.0, worst.1),
    )
}

fn c03_poisson_comb() -> Check {
    let (w0, s0, h) = (64.0, 3.49, 0.25);
    let m = PsbModel::from_one_phonon(spike(w0, h, 200.0).map_err(e)?, s0).map_err(e)?;
    let f = m
        .thermal_overlap(Temperature::ZERO, required_terms(s0))
        .map_err(e)?;
    let mut worst: f64 = 0.0;
    let mut weight = (-s0).exp();
    for i in 1..=18 {
        weight *= s0 / i as f64;
        let got = f.sample(i as f64 * w0) * h;
        worst = worst.max((got - weight).abs());
    }
    ensure(
        worst < 1e-6,
        format!("max line error {worst:.1e} over 18 lines"),
    )
}

fn c04_balance_normalization() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut balance, mut norm): (f64, f64) = (0.0, 0.0);
    for _ in 0..10 {
        let g = random_spectrum(&mut rng);
        let t = kelvin(rng.random_range(0.0..700.0));
        let s0 = rng.random_range(0.5..4.0);
        let f = g.one_phonon(0.25, 200.0).map_err(e)?;
        let f1 = thermal_one_phonon(&f, t).map_err(e)?;
        let kt = t.thermal_energy_mev();
        let scale = f1.max_value();
        for (w, v) in f1.nodes().filter(|&(w, _)| w > 0.0) {
            let err = (f1.sample(-w) - (-w / kt).exp() * v).abs() / scale;
            balance = balance.max(err);
        }
        // Wide enough to hold the anti-Stokes tail at 700 K.
        let m = PsbModel::from_one_phonon(f, s0)
            .map_err(e)?
            .with_window(-3000.0, 4000.0);
        let s = m.huang_rhys(t).map_err(e)?;
        let ft = m.thermal_overlap(t, required_terms(s)).map_err(e)?;
        norm = norm.max((ft.integral() - (1.0 - (-s).exp())).abs());
    }
    ensure(
        balance < 1e-10 && norm < 1e-6,
        format!("detailed balance {balance:.1e}, normalization {norm:.1e} over 10 draws"),
    )
}

fn c05_limits() -> Check {
    let so = spin_orbit();
    let pc = coupling();
    let m = PsbModel::from_manifest(&data("reference_psb.manifest")).map_err(e)?;
    let ls_far = LevelSpacings::new(392.0, 1e16).map_err(e)?;
    let on = gamma_e12_low_t(&so, &pc, &m.f0, &ls_far, true)
        .map_err(e)?
        .value_mhz;
    let off = gamma_e12_low_t(&so, &pc, &m.f0, &ls_far, false)
        .map_err(e)?
        .value_mhz;
    let r_prime = rel(on, off);

    // The 0.01 meV quadrature resolves ω·n(ω) only once k_BT ≪ 0.01 meV.
    let ls = spacings();
    let mut trail = Vec::new();
    let mut r_t = f64::NAN;
    for tk in [1.0, 0.1, 0.01, 0.001] {
        let t = kelvin(tk);
        let f_t = m.overlap(t).map_err(e)?;
        let fin = gamma_e12_finite_t_on(&so, &pc, &f_t, &ls, t, false)
            .map_err(e)?
            .value_mhz;
        let low = gamma_e12_low_t(&so, &pc, &f_t, &ls, false)
            .map_err(e)?
            .value_mhz;
        r_t = rel(fin, low);
        trail.push(format!("{tk} K {r_t:.1e}"));
    }

    let g = TwoGaussian {
        weight: 0.4,
        mean1: 40.0,
        sigma1: 7.0,
        mean2: 66.0,
        sigma2: 10.0,
    };
    let f0 = g.overlap(3.49, 0.25, 1000.0).map_err(e)?;
    let f = extract_one_phonon(&f0, 3.49).map_err(e)?;
    let l1 = f.l1_distance(&g.one_phonon(0.25, 200.0).map_err(e)?);

    ensure(
        r_prime < 1e-12 && r_t < 1e-9 && l1 <= 1e-4,
        format!(
            "Δ′→∞ rel {r_prime:.1e}, T→0 rel [{}], round trip L1 {l1:.1e}",
            trail.join(", ")
        ),
    )
}

fn c06_lowt_error() -> Check {
    let so = spin_orbit();
    let m = PsbModel::from_manifest(&data("reference_psb.manifest")).map_err(e)?;
    let t = kelvin(5.0);
    let f_t = m.overlap(t).map_err(e)?;
    let mut worst: f64 = 0.0;
    for omega in [74.0, 78.0, 82.0, 85.0, 89.0, 93.0] {
        let pc = coupling().with_omega(omega);
        let map = lowt_error_map_on(
            &so,
            &pc,
            &f_t,
            &spacings(),
            t,
            ErrorAxis::Delta(Sweep::new(344.0, 430.0, 2.0).unwrap()),
        )
        .map_err(e)?;
        worst = worst.max(map.max_value());
    }
    ensure(worst < 0.01, format!("max error {:.3} %", 100.0 * worst))
}

fn c07_one_phonon_mixing() -> Check {
    let mp = MixingParams::new(44.0, units::ghz_to_mev(18.0), kelvin(5.0)).map_err(e)?;
    let g = gamma_mix_one_phonon(&mp).map_err(e)?.emission.value_mhz;
    ensure((g - 0.5).abs() <= 0.125, format!("Γ = {g:.4} MHz"))
}

fn c08_lifetimes() -> Check {
    let g_rad = RateResult::exact(G_RAD_MHZ);
    let zero = RateResult::exact(0.0);
    let isc = RateResult::exact(8.0);
    let t0 = lifetime(&g_rad, &isc, &zero, 0.0, SpinClass::Ms0).map_err(e)?;
    let t1 = lifetime(&g_rad, &isc, &zero, 0.0, SpinClass::Ms1).map_err(e)?;
    let oracle1 = 1e3 / (2.0 * std::f64::consts::PI * (G_RAD_MHZ + 8.0));
    ensure(
        (t0 - 12.0).abs() <= 0.5 && (t1 - oracle1).abs() <= 0.3 && (t1 - 7.51).abs() <= 0.3,
        format!("ms0 {t0:.2} ns, ms1 {t1:.2} ns"),
    )
}

fn c09_fit_recovery() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (eta, dxy) = (44.0, 0.01613);
    let temps: Vec<f64> = (0..12).map(|i| 4.0 + 2.0 * i as f64).collect();
    let clean = synthetic_series(eta, dxy, &temps, 0.03).map_err(e)?;
    let exact = extract_eta(&clean, dxy).map_err(e)?;
    let noisy = MixSeries::new(
        clean
            .points()
            .iter()
            .map(|p| MixPoint {
                gamma_mix_mhz: p.gamma_mix_mhz
                    + Normal::new(0.0, p.sigma_mhz).unwrap().sample(&mut rng),
                ..*p
            })
            .collect(),
    )
    .map_err(e)?;
    let fit = extract_eta(&noisy, dxy).map_err(e)?;
    let eta_exact = rel(exact.eta_mhz_per_mev3, eta);
    let eta_z = (fit.eta_mhz_per_mev3 - eta).abs() / fit.sigma;

    let (s, de): (f64, f64) = (5.8e7, 0.94);
    let ms_temps: Vec<f64> = (0..17).map(|i| 300.0 + 25.0 * i as f64).collect();
    let series = |noise: bool, rng: &mut ChaCha8Rng| {
        let pts = ms_temps
            .iter()
            .map(|&t| {
                let tau = mott_seitz_lifetime(t, s.ln(), de, G_RAD_MHZ, TAU0_NS);
                let sigma = 0.03 * tau;
                let dev = if noise {
                    Normal::new(0.0, sigma).unwrap().sample(rng)
                } else {
                    0.0
                };
                LifetimePoint {
                    temperature_k: t,
                    tau_ns: tau + dev,
                    sigma_ns: sigma,
                    spin: SpinClass::Ms0,
                }
            })
            .collect();
        LifetimeSeries::new(pts)
    };
    let g_rad = RateResult::exact(G_RAD_MHZ);
    let ms_exact =
        fit_mott_seitz(&series(false, &mut rng).map_err(e)?, &g_rad, TAU0_NS).map_err(e)?;
    let ms_noisy =
        fit_mott_seitz(&series(true, &mut rng).map_err(e)?, &g_rad, TAU0_NS).map_err(e)?;
    let de_exact = rel(ms_exact.delta_e_ev, de);
    let s_exact = rel(ms_exact.s, s);
    let de_z = (ms_noisy.delta_e_ev - de).abs() / ms_noisy.sigma_delta_e_ev;
    let s_z = (ms_noisy.s.ln() - s.ln()).abs() / ms_noisy.covariance[0][0].sqrt();

    ensure(
        eta_exact < 1e-9
            && s_exact < 1e-6
            && de_exact < 1e-9
            && eta_z <= 2.0
            && de_z <= 2.0
            && s_z <= 2.0,
        format!(
            "noiseless rel η {eta_exact:.1e}, ΔE {de_exact:.1e}, s {s_exact:.1e}; \
             noisy η {:.2}±{:.2} ({eta_z:.2}σ), ΔE {:.3}±{:.3} eV ({de_z:.2}σ), ln s {s_z:.2}σ",
            fit.eta_mhz_per_mev3, fit.sigma, ms_noisy.delta_e_ev, ms_noisy.sigma_delta_e_ev
        ),
    )
}

fn c10_delta() -> Check {
    let m = PsbModel::from_manifest(&data("reference_psb.manifest")).map_err(e)?;
    let d = infer_delta(
        &spin_orbit(),
        &m.f0,
        &Band::symmetric(16.0, 0.6).unwrap(),
        148.0,
    )
    .map_err(e)?;
    let main = d
        .intervals
        .iter()
        .find(|i| i.lo < 430.0 && i.hi > 344.0)
        .copied()
        .ok_or_else(|| format!("no interval near [344, 430]: {:.1}", d.intervals))?;
    let main_ok = (main.lo - 344.0).abs() <= 25.0 && (main.hi - 430.0).abs() <= 25.0;
    let low = d
        .unfiltered
        .iter()
        .find(|i| i.hi < 148.0 && i.lo - 25.0 <= 43.0 && i.hi + 25.0 >= 43.0);
    let removed = d.intervals.iter().all(|i| i.lo >= 148.0);
    ensure(
        main_ok && low.is_some() && removed,
        format!(
            "filtered {:.1}, low-Δ region {} removed",
            d.intervals,
            low.map_or("none".to_string(), |i| format!("{i:.1}"))
        ),
    )
}

fn c11_omega() -> Check {
    let m = PsbModel::from_manifest(&data("reference_psb.manifest")).map_err(e)?;
    let om = infer_omega(
        &coupling(),
        &m.f0,
        &spacings(),
        &Band::new(0.5, 0.45, 0.55).unwrap(),
        &Sweep::new(344.0, 430.0, 1.0).unwrap(),
        true,
    )
    .map_err(e)?;
    let hull = om.set.hull().ok_or_else(|| "empty Ω set".to_string())?;
    let ok = hull.lo <= 93.0
        && hull.hi >= 74.0
        && (hull.lo - 74.0).abs() <= 10.0
        && (hull.hi - 93.0).abs() <= 10.0;
    ensure(ok, format!("Ω set {:.1}", om.set))
}

fn c12_correction() -> Check {
    let m = PsbModel::from_manifest(&data("reference_psb.manifest")).map_err(e)?;
    let (so, pc, ls) = (spin_orbit(), coupling(), spacings());
    let on = gamma_e12_low_t(&so, &pc, &m.f0, &ls, true)
        .map_err(e)?
        .value_mhz;
    let off = gamma_e12_low_t(&so, &pc, &m.f0, &ls, false)
        .map_err(e)?
        .value_mhz;
    let pct = 100.0 * (1.0 - on / off);
    ensure(
        (pct - 15.0).abs() <= 5.0,
        format!("downward shift {pct:.2} %"),
    )
}

fn c13_sensitivity() -> Check {
    let m = PsbModel::from_manifest(&data("reference_psb.manifest")).map_err(e)?;
    let s = isc_sensitivity(&spin_orbit(), &coupling(), &m.f0, &spacings(), true).map_err(e)?;
    ensure(
        (0.05..=0.25).contains(&s.total),
        format!("−dΓ_ISC/dΔ = {:.4} MHz/meV", s.total),
    )
}

fn c14_lifetime_curve() -> Check {
    let m = PsbModel::from_manifest(&data("reference_psb.manifest")).map_err(e)?;
    let table = LifetimeSeries::read_csv(&data("reference_lifetimes.csv")).map_err(e)?;
    let g_rad = RateResult::exact(G_RAD_MHZ);
    let fit = fit_mott_seitz(&table, &g_rad, TAU0_NS).map_err(e)?;
    let model = LifetimeModel {
        so: spin_orbit(),
        pc: coupling(),
        psb: &m,
        ls: spacings(),
        g_rad,
        ht: HighTempParams::new(fit.s, fit.delta_e_ev, 0.0).map_err(e)?,
        singlet_path: true,
    };
    let ms0 = table.of_class(SpinClass::Ms0);
    let temps: Vec<f64> = ms0
        .points()
        .iter()
        .map(|p| p.temperature_k)
        .filter(|t| (295.0..=700.0).contains(t))
        .collect();
    let rows = lifetime_curves(&model, &temps, &[0.0]).map_err(e)?;
    let mut worst: f64 = 0.0;
    for p in ms0.points() {
        let row = rows
            .iter()
            .find(|r| r.spin == SpinClass::Ms0 && r.temperature_k == p.temperature_k)
            .ok_or_else(|| format!("no model row at {} K", p.temperature_k))?;
        worst = worst.max((row.tau_ns - p.tau_ns).abs() / p.sigma_ns);
    }
    ensure(
        worst <= 1.0,
        format!(
            "fit s = {:.2e}, ΔE = {:.3} eV; worst deviation {worst:.2}σ over {} points",
            fit.s,
            fit.delta_e_ev,
            ms0.len()
        ),
    )
}

fn main() -> ExitCode {
    let checks: [Criterion; 14] = [
        ("alpha constant limits", c01_alpha),
        ("T^5 mixing law", c02_t5),
        ("Poisson comb weights", c03_poisson_comb),
        (
            "detailed balance and normalization",
            c04_balance_normalization,
        ),
        ("limit reductions and round trip", c05_limits),
        ("low-temperature error at 5 K", c06_lowt_error),
        ("one-phonon mixing at 18 GHz", c07_one_phonon_mixing),
        ("low-temperature lifetimes", c08_lifetimes),
        ("fit recovery", c09_fit_recovery),
        ("gap interval", c10_delta),
        ("cutoff interval", c11_omega),
        ("singlet-path correction", c12_correction),
        ("ISC sensitivity", c13_sensitivity),
        ("lifetime curve through error bars", c14_lifetime_curve),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{tag} #{:02} {name}: {detail} [{:.2}s]",
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        checks.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
