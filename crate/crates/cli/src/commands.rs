//! One function per subcommand. Each builds a [`Report`] and never touches
//! the filesystem beyond reading its inputs.

use clap::ValueEnum;
use nvisc::exec;
use nvisc::gridfn::GridFunction;
use nvisc::inference::{self, ErrorAxis, LifetimeModel, LifetimeSeries, Sweep, LIFETIME_HEADER};
use nvisc::interval::Band;
use nvisc::io;
use nvisc::mixing::{self, MixSeries, MixingParams};
use nvisc::psb::{self, DeconvolutionOptions, PsbModel};
use nvisc::rates::{
    self, HighTempParams, LevelSpacings, PhononCoupling, RateResult, RateWarning, SpinClass,
    SpinOrbit,
};
use nvisc::units::{self, Temperature};

use crate::config::{Banded, Range, RunConfig};
use crate::error::{core, CliError};
use crate::output::{banded, sig, Report};

type R<T> = Result<T, CliError>;

/// Resolved configuration plus command-line overrides.
pub struct Ctx {
    pub cfg: RunConfig,
    /// Resample the reference sideband to this step before deconvolution.
    pub grid_step_mev: Option<f64>,
}

fn band(b: Banded, op: &'static str) -> R<Band> {
    Band::new(b.value, b.lo, b.hi).map_err(core(op))
}

fn sweep(r: Range, op: &'static str) -> R<Sweep> {
    Sweep::new(r.lo, r.hi, r.step).map_err(core(op))
}

fn kelvin(t: f64) -> R<Temperature> {
    Temperature::kelvin(t).map_err(core("temperature"))
}

fn row(fields: &[f64]) -> Vec<String> {
    fields.iter().map(f64::to_string).collect()
}

fn rate_line(name: &str, r: &RateResult) -> String {
    let mut s = match r.band {
        Some((lo, hi)) => format!("{name} = {} MHz", banded(r.value_mhz, lo, hi)),
        None => format!("{name} = {} MHz", sig(r.value_mhz)),
    };
    if r.warning == Some(RateWarning::OutsideSupport) {
        s.push_str(" (overlap vanishes at delta)");
    }
    s
}

impl Ctx {
    pub fn report(&self, command: &str) -> Report {
        let mut r = Report::new(command);
        r.inputs = self
            .cfg
            .echo
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect();
        if let Some(h) = self.grid_step_mev {
            r.inputs.push(("grid_step_mev".into(), h.to_string()));
        }
        r.inputs
            .push(("parallel".into(), exec::is_parallel().to_string()));
        r
    }

    fn so(&self) -> R<SpinOrbit> {
        let ratio = band(self.cfg.lambda_ratio, "spin-orbit")?;
        SpinOrbit::from_ghz(self.cfg.lambda_par_ghz, ratio).map_err(core("spin-orbit"))
    }

    fn pc(&self) -> R<PhononCoupling> {
        let eta = band(self.cfg.eta_mhz_per_mev3, "phonon coupling")?;
        PhononCoupling::new(eta, self.cfg.omega_mev).map_err(core("phonon coupling"))
    }

    fn ls(&self) -> R<LevelSpacings> {
        LevelSpacings::new(self.cfg.delta_mev, self.cfg.delta_prime_mev)
            .map_err(core("level spacings"))
    }

    fn t(&self) -> R<Temperature> {
        kelvin(self.cfg.temperature_k)
    }

    fn g_rad(&self) -> RateResult {
        let g = self.cfg.g_rad_mhz;
        RateResult::with_band(g.value, g.lo, g.hi)
    }

    fn ht(&self) -> R<HighTempParams> {
        HighTempParams::new(self.cfg.mott_seitz_s, self.cfg.mott_seitz_delta_e_ev, 0.0)
            .map_err(core("activated channel"))
    }

    fn mixing(&self, t: Temperature, eta: f64) -> R<MixingParams> {
        MixingParams::new(eta, units::ghz_to_mev(self.cfg.delta_xy_ghz), t)
            .map_err(core("mixing parameters"))
    }

    fn psb(&self) -> R<PsbModel> {
        let m = PsbModel::from_manifest(&self.cfg.psb_manifest).map_err(core("load PSB model"))?;
        let Some(h) = self.grid_step_mev else {
            return Ok(m);
        };
        let f0 = m.f0.resample(h).map_err(core("resample PSB"))?;
        Ok(PsbModel::from_f0(f0, m.s0)
            .map_err(core("deconvolve PSB"))?
            .with_window(m.window.0, m.window.1)
            .with_omega_limit(m.omega_limit_mev))
    }

    fn overlap(&self, m: &PsbModel, t: Temperature) -> R<GridFunction> {
        m.overlap(t).map_err(core("thermal overlap"))
    }
}

pub fn psb_build(ctx: &Ctx) -> R<Report> {
    let mut rep = ctx.report("psb-build");
    let m = ctx.psb()?;
    let t = ctx.t()?;
    let f = ctx.overlap(&m, t)?;
    let s = m.huang_rhys(t).map_err(core("Huang-Rhys factor"))?;
    rep.result(format!("S0 = {}", sig(m.s0)));
    rep.result(format!("S(T) = {} at T = {} K", sig(s), t.value()));
    rep.result(format!("integral F(T) = {}", sig(f.integral())));
    rep.result(format!("mean of F(T) = {} meV", sig(f.mean())));
    rep.result(format!("peak of F(T) at {} meV", sig(f.argmax())));
    rep.file("overlap.csv", io::grid_to_csv(&f));
    Ok(rep)
}

pub fn deconvolve(ctx: &Ctx) -> R<Report> {
    let mut rep = ctx.report("deconvolve");
    let m = ctx.psb()?;
    let opts = DeconvolutionOptions {
        support_cap_mev: m.omega_limit_mev,
        ..DeconvolutionOptions::default()
    };
    let d = psb::extract_one_phonon_with(&m.f0, m.s0, &opts).map_err(core("deconvolve PSB"))?;
    rep.result(format!("S0 = {}", sig(m.s0)));
    rep.result(format!("amplitude = {}", sig(d.amplitude)));
    rep.result(format!("iterations = {}", d.iterations));
    rep.result(format!("L1 residual = {}", sig(d.residual)));
    rep.result(format!("integral F1 = {}", sig(d.f.integral())));
    rep.result(format!("mean phonon energy = {} meV", sig(d.f.mean())));
    rep.file("one_phonon.csv", io::grid_to_csv(&d.f));
    Ok(rep)
}

pub fn rate_a1(ctx: &Ctx) -> R<Report> {
    let mut rep = ctx.report("rate-a1");
    let m = ctx.psb()?;
    let d = ctx.cfg.delta_mev;
    let r = rates::gamma_a1(&ctx.so()?, &m.f0, d).map_err(core("Gamma_A1"))?;
    rep.result(rate_line("Gamma_A1/2pi", &r));
    rep.result(format!("F0(delta) = {} 1/meV", sig(m.f0.sample(d))));
    rep.file(
        "rate_a1.csv",
        io::table_to_csv(
            &["delta_meV", "gamma_a1_MHz", "lo_MHz", "hi_MHz"],
            &[row(&[d, r.value_mhz, r.lo(), r.hi()])],
        ),
    );
    Ok(rep)
}

pub fn rate_e12(ctx: &Ctx) -> R<Report> {
    let mut rep = ctx.report("rate-e12");
    let m = ctx.psb()?;
    let (so, pc, ls, t) = (ctx.so()?, ctx.pc()?, ctx.ls()?, ctx.t()?);
    let flag = ctx.cfg.singlet_path;
    let low = rates::gamma_e12_low_t(&so, &pc, &m.f0, &ls, flag).map_err(core("Gamma_E12"))?;
    let f_t = ctx.overlap(&m, t)?;
    let spectrum = rates::gamma_e12_spectral_on(&so, &pc, &f_t, &ls, t, flag)
        .map_err(core("Gamma_E12 spectrum"))?;
    let fin =
        rates::gamma_e12_finite_t_on(&so, &pc, &f_t, &ls, t, flag).map_err(core("Gamma_E12"))?;
    rep.result(rate_line("Gamma_E12/2pi (low T)", &low));
    rep.result(rate_line(
        &format!("Gamma_E12/2pi (T = {} K)", t.value()),
        &fin,
    ));
    rep.result(format!(
        "emission share = {}",
        sig(spectrum.emission.integral() / spectrum.total.integral())
    ));
    let rows: Vec<Vec<String>> = (0..spectrum.total.len())
        .map(|i| {
            row(&[
                spectrum.total.omega(i),
                spectrum.emission.values()[i],
                spectrum.absorption.values()[i],
                spectrum.total.values()[i],
            ])
        })
        .collect();
    rep.file(
        "e12_spectrum.csv",
        io::table_to_csv(
            &[
                "omega_meV",
                "emission_MHz_per_meV",
                "absorption_MHz_per_meV",
                "total_MHz_per_meV",
            ],
            &rows,
        ),
    );
    Ok(rep)
}

pub fn ratio(ctx: &Ctx) -> R<Report> {
    let mut rep = ctx.report("ratio");
    let m = ctx.psb()?;
    let (pc, ls) = (ctx.pc()?, ctx.ls()?);
    let flag = ctx.cfg.singlet_path;
    let r = rates::ratio_e12_a1(&pc, &m.f0, &ls, flag).map_err(core("ratio"))?;
    let max = inference::max_ratio(&pc, &m.f0, &ls, flag).map_err(core("ratio"))?;
    let target = band(ctx.cfg.ratio_target, "ratio target")?;
    rep.result(format!("Gamma_E12/Gamma_A1 = {}", sig(r)));
    rep.result(format!("ratio with unlimited cutoff = {}", sig(max)));
    rep.result(format!(
        "within target [{}, {}] = {}",
        sig(target.lo),
        sig(target.hi),
        target.contains(r)
    ));
    let curve =
        inference::ratio_vs_omega(&pc, &m.f0, &ls, flag).map_err(core("ratio versus cutoff"))?;
    rep.file("ratio_vs_omega.csv", io::grid_to_csv(&curve));
    Ok(rep)
}

fn eta_band_rates(ctx: &Ctx, t: Temperature) -> R<RateResult> {
    let e = ctx.cfg.eta_mhz_per_mev3;
    let at = |eta: f64| -> R<f64> {
        Ok(mixing::gamma_mix(&ctx.mixing(t, eta)?)
            .map_err(core("Gamma_Mix"))?
            .value_mhz)
    };
    Ok(RateResult::with_band(at(e.value)?, at(e.lo)?, at(e.hi)?))
}

pub fn mix(ctx: &Ctx) -> R<Report> {
    let mut rep = ctx.report("mix");
    let t = ctx.t()?;
    let g = eta_band_rates(ctx, t)?;
    let one = mixing::gamma_mix_one_phonon(&ctx.mixing(t, ctx.cfg.eta_mhz_per_mev3.value)?)
        .map_err(core("one-phonon mixing"))?;
    rep.result(rate_line(
        &format!("Gamma_Mix/2pi (T = {} K)", t.value()),
        &g,
    ));
    rep.result(rate_line("one-phonon emission/2pi", &one.emission));
    rep.result(rate_line("one-phonon absorption/2pi", &one.absorption));
    let temps = sweep(ctx.cfg.mix_sweep, "mix sweep")?.nodes();
    let rows = exec::map_slice(&temps, |&tk| -> R<Vec<String>> {
        let r = eta_band_rates(ctx, kelvin(tk)?)?;
        Ok(row(&[tk, r.value_mhz, r.lo(), r.hi()]))
    });
    let rows: Vec<Vec<String>> = rows.into_iter().collect::<R<_>>()?;
    rep.file(
        "mix_vs_T.csv",
        io::table_to_csv(
            &["temperature_K", "gamma_mix_MHz", "lo_MHz", "hi_MHz"],
            &rows,
        ),
    );
    Ok(rep)
}

pub fn mix_spectral(ctx: &Ctx) -> R<Report> {
    let mut rep = ctx.report("mix-spectral");
    let t = ctx.t()?;
    let mp = ctx.mixing(t, ctx.cfg.eta_mhz_per_mev3.value)?;
    let spectrum = mixing::gamma_mix_spectral(&mp).map_err(core("Gamma_Mix spectrum"))?;
    let closed = mixing::gamma_mix(&mp).map_err(core("Gamma_Mix"))?.value_mhz;
    let integral = spectrum.integral();
    rep.result(format!("integral of spectrum = {} MHz", sig(integral)));
    rep.result(format!("closed form = {} MHz", sig(closed)));
    rep.result(format!(
        "relative difference = {}",
        sig((integral - closed).abs() / closed)
    ));
    rep.result(format!(
        "peak at {} k_B T",
        sig(spectrum.argmax() / t.thermal_energy_mev())
    ));
    rep.file("mix_spectrum.csv", io::grid_to_csv(&spectrum));
    Ok(rep)
}

pub fn extract_eta(ctx: &Ctx) -> R<Report> {
    let mut rep = ctx.report("extract-eta");
    let path =
        ctx.cfg.mix_data.as_ref().ok_or_else(|| {
            CliError::Usage("extract-eta needs `mix_data_path` in the config".into())
        })?;
    let data = MixSeries::read_csv(path).map_err(core("read mixing data"))?;
    let dxy = units::ghz_to_mev(ctx.cfg.delta_xy_ghz);
    let fit = mixing::extract_eta(&data, dxy).map_err(core("fit eta"))?;
    rep.result(format!(
        "eta = {} +/- {} MHz/meV^3",
        sig(fit.eta_mhz_per_mev3),
        sig(fit.sigma)
    ));
    rep.result(format!("chi2 = {} on {} dof", sig(fit.chi2), fit.dof));
    let mut rows = Vec::with_capacity(data.len());
    for p in data.points() {
        let mp = ctx.mixing(kelvin(p.temperature_k)?, fit.eta_mhz_per_mev3)?;
        let model = mixing::gamma_mix(&mp).map_err(core("Gamma_Mix"))?.value_mhz;
        rows.push(row(&[
            p.temperature_k,
            p.gamma_mix_mhz,
            p.sigma_mhz,
            model,
            (p.gamma_mix_mhz - model) / p.sigma_mhz,
        ]));
    }
    rep.file(
        "eta_fit.csv",
        io::table_to_csv(
            &[
                "temperature_K",
                "gamma_mix_MHz",
                "sigma_MHz",
                "model_MHz",
                "residual_sigma",
            ],
            &rows,
        ),
    );
    Ok(rep)
}

pub fn infer_delta(ctx: &Ctx) -> R<Report> {
    let mut rep = ctx.report("infer-delta");
    let m = ctx.psb()?;
    let target = band(ctx.cfg.gamma_a1_target_mhz, "Gamma_A1 target")?;
    let floor = ctx.cfg.exclusion_floor_mev;
    let s = sweep(ctx.cfg.delta_sweep, "delta sweep")?;
    let inf = inference::infer_delta_with(&ctx.so()?, &m.f0, &target, floor, &s)
        .map_err(core("infer delta"))?;
    rep.result(format!("delta intervals = {:.1} meV", inf.intervals));
    rep.result(format!(
        "before exclusion floor {} meV = {:.1} meV",
        floor, inf.unfiltered
    ));
    if inf.intervals.is_empty() {
        rep.empty = Some(format!(
            "no gap in the sweep reproduces Gamma_A1/2pi in [{}, {}] MHz above {} meV",
            target.lo, target.hi, floor
        ));
    }
    rep.file("delta_intervals.csv", io::intervals_to_csv(&inf.intervals));
    let rows: Vec<Vec<String>> = (0..inf.central.len())
        .map(|i| {
            row(&[
                inf.central.omega(i),
                inf.lower.values()[i],
                inf.central.values()[i],
                inf.upper.values()[i],
            ])
        })
        .collect();
    rep.file(
        "gamma_a1_vs_delta.csv",
        io::table_to_csv(
            &["delta_meV", "lower_MHz", "central_MHz", "upper_MHz"],
            &rows,
        ),
    );
    Ok(rep)
}

pub fn infer_omega(ctx: &Ctx) -> R<Report> {
    let mut rep = ctx.report("infer-omega");
    let m = ctx.psb()?;
    let (pc, ls) = (ctx.pc()?, ctx.ls()?);
    let flag = ctx.cfg.singlet_path;
    let target = band(ctx.cfg.ratio_target, "ratio target")?;
    let deltas = sweep(ctx.cfg.omega_search_deltas, "omega search")?;
    let inf = inference::infer_omega(&pc, &m.f0, &ls, &target, &deltas, flag)
        .map_err(core("infer omega"))?;
    let boundary = inference::ratio_exclusion_boundary(
        &pc,
        &m.f0,
        &ls,
        target.lo,
        &sweep(ctx.cfg.delta_sweep, "delta sweep")?,
        flag,
    )
    .map_err(core("ratio exclusion"))?;
    rep.result(format!("omega intervals = {:.1} meV", inf.set));
    rep.result(format!("largest reachable ratio = {}", sig(inf.max_ratio)));
    rep.result(match boundary {
        Some(b) => format!(
            "ratio {} first reachable at delta = {} meV",
            target.lo,
            sig(b)
        ),
        None => format!("ratio {} unreachable over the delta sweep", target.lo),
    });
    if inf.set.is_empty() {
        rep.empty = Some(format!(
            "no cutoff reaches a ratio in [{}, {}] for delta in [{}, {}] meV",
            target.lo, target.hi, deltas.lo, deltas.hi
        ));
    }
    rep.file("omega_intervals.csv", io::intervals_to_csv(&inf.set));
    let rows: Vec<Vec<String>> = inf
        .per_delta
        .iter()
        .filter_map(|(d, i)| i.map(|i| row(&[*d, i.lo, i.hi])))
        .collect();
    rep.file(
        "omega_per_delta.csv",
        io::table_to_csv(&["delta_meV", "omega_lo_meV", "omega_hi_meV"], &rows),
    );
    Ok(rep)
}

pub fn lowt_error(ctx: &Ctx) -> R<Report> {
    let mut rep = ctx.report("lowt-error");
    let m = ctx.psb()?;
    let (so, pc, ls, t) = (ctx.so()?, ctx.pc()?, ctx.ls()?, ctx.t()?);
    let f_t = ctx.overlap(&m, t)?;
    let axes = [
        (
            "delta",
            ErrorAxis::Delta(sweep(ctx.cfg.omega_search_deltas, "omega search")?),
        ),
        (
            "omega",
            ErrorAxis::Omega(sweep(ctx.cfg.lowt_omegas, "low-T omega sweep")?),
        ),
    ];
    for (name, axis) in axes {
        let map = inference::lowt_error_map_on(&so, &pc, &f_t, &ls, t, axis)
            .map_err(core("low-T error map"))?;
        let worst = map.values().iter().cloned().fold(0.0, f64::max);
        rep.result(format!(
            "max relative error along {name} = {} ({} %)",
            sig(worst),
            sig(100.0 * worst)
        ));
        let rows: Vec<Vec<String>> = map.nodes().map(|(x, v)| row(&[x, v])).collect();
        let header = [format!("{name}_meV"), "relative_error".into()];
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        rep.file(
            &format!("lowt_error_{name}.csv"),
            io::table_to_csv(&header, &rows),
        );
    }
    Ok(rep)
}

fn lifetime_model<'a>(ctx: &Ctx, psb: &'a PsbModel) -> R<LifetimeModel<'a>> {
    Ok(LifetimeModel {
        so: ctx.so()?,
        pc: ctx.pc()?,
        psb,
        ls: ctx.ls()?,
        g_rad: ctx.g_rad(),
        ht: ctx.ht()?,
        singlet_path: ctx.cfg.singlet_path,
    })
}

pub fn lifetime(ctx: &Ctx) -> R<Report> {
    let mut rep = ctx.report("lifetime");
    let m = ctx.psb()?;
    let model = lifetime_model(ctx, &m)?;
    let rows = inference::lifetime_curves(&model, &[ctx.cfg.temperature_k], &ctx.cfg.epsilons)
        .map_err(core("lifetime"))?;
    if let Some(r) = rows.first() {
        rep.result(format!("Gamma_ISC/2pi = {} MHz", sig(r.gamma_isc_mhz)));
        rep.result(format!("Gamma_HT/2pi = {} MHz", sig(r.gamma_ht_mhz)));
    }
    for r in &rows {
        rep.result(format!(
            "tau({}, epsilon = {}) = {} ns",
            r.spin,
            r.epsilon,
            sig(r.tau_ns)
        ));
    }
    rep.file("lifetime.csv", inference::lifetime_rows_to_csv(&rows));
    Ok(rep)
}

pub fn fit_mott_seitz(ctx: &Ctx) -> R<Report> {
    let mut rep = ctx.report("fit-mott-seitz");
    let path = ctx.cfg.lifetime_data.as_ref().ok_or_else(|| {
        CliError::Usage("fit-mott-seitz needs `lifetime_data_path` in the config".into())
    })?;
    let data = LifetimeSeries::read_csv(path).map_err(core("read lifetime data"))?;
    let fit = inference::fit_mott_seitz(&data, &ctx.g_rad(), ctx.cfg.tau0_ns)
        .map_err(core("Mott-Seitz fit"))?;
    rep.result(format!("s = {} +/- {}", sig(fit.s), sig(fit.sigma_s)));
    rep.result(format!(
        "delta_E = {} +/- {} eV",
        sig(fit.delta_e_ev),
        sig(fit.sigma_delta_e_ev)
    ));
    rep.result(format!("chi2 = {} on {} dof", sig(fit.chi2), fit.dof));
    rep.result(format!("iterations = {}", fit.iterations));
    let pts = data.of_class(SpinClass::Ms0);
    let rows: Vec<Vec<String>> = pts
        .points()
        .iter()
        .zip(&fit.residuals)
        .map(|(p, res)| row(&[p.temperature_k, p.tau_ns, p.sigma_ns, p.tau_ns + res, *res]))
        .collect();
    rep.file(
        "mott_seitz_fit.csv",
        io::table_to_csv(
            &[
                LIFETIME_HEADER[0],
                LIFETIME_HEADER[1],
                LIFETIME_HEADER[2],
                "tau_model_ns",
                "residual_ns",
            ],
            &rows,
        ),
    );
    Ok(rep)
}

pub fn sensitivity(ctx: &Ctx) -> R<Report> {
    let mut rep = ctx.report("sensitivity");
    let m = ctx.psb()?;
    let s = inference::isc_sensitivity(
        &ctx.so()?,
        &ctx.pc()?,
        &m.f0,
        &ctx.ls()?,
        ctx.cfg.singlet_path,
    )
    .map_err(core("ISC sensitivity"))?;
    rep.result(format!("-dGamma_ISC/ddelta = {} MHz/meV", sig(s.total)));
    rep.result(format!("A1 contribution = {} MHz/meV", sig(s.a1_part)));
    rep.result(format!("E1,2 contribution = {} MHz/meV", sig(s.e12_part)));
    rep.file(
        "sensitivity.csv",
        io::table_to_csv(
            &[
                "delta_meV",
                "total_MHz_per_meV",
                "a1_MHz_per_meV",
                "e12_MHz_per_meV",
            ],
            &[row(&[ctx.cfg.delta_mev, s.total, s.a1_part, s.e12_part])],
        ),
    );
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    #[value(name = "T")]
    Temperature,
    #[value(name = "delta")]
    Delta,
    #[value(name = "omega")]
    Omega,
}

impl Axis {
    fn label(self) -> &'static str {
        match self {
            Axis::Temperature => "T",
            Axis::Delta => "delta",
            Axis::Omega => "omega",
        }
    }

    fn column(self) -> &'static str {
        match self {
            Axis::Temperature => "temperature_K",
            Axis::Delta => "delta_meV",
            Axis::Omega => "omega_meV",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Lifetime,
    RateA1,
    RateE12,
    Ratio,
    Mix,
}

impl Target {
    fn stem(self) -> &'static str {
        match self {
            Target::Lifetime => "lifetime",
            Target::RateA1 => "rate_a1",
            Target::RateE12 => "rate_e12",
            Target::Ratio => "ratio",
            Target::Mix => "mix",
        }
    }
}

pub struct SweepArgs {
    pub axis: Axis,
    pub from: f64,
    pub to: f64,
    pub step: f64,
    pub target: Target,
}

/// Rate band at one sweep point.
fn point(ctx: &Ctx, m: &PsbModel, axis: Axis, target: Target, x: f64) -> R<RateResult> {
    let (so, mut pc, mut ls) = (ctx.so()?, ctx.pc()?, ctx.ls()?);
    let flag = ctx.cfg.singlet_path;
    let mut t = ctx.t()?;
    match axis {
        Axis::Temperature => t = kelvin(x)?,
        Axis::Delta => ls = ls.with_delta(x).map_err(core("sweep"))?,
        Axis::Omega => pc = pc.with_omega(x),
    }
    let low_t = axis != Axis::Temperature;
    match target {
        Target::RateA1 if low_t => {
            rates::gamma_a1(&so, &m.f0, ls.delta_mev).map_err(core("Gamma_A1"))
        }
        Target::RateA1 => {
            rates::gamma_a1(&so, &ctx.overlap(m, t)?, ls.delta_mev).map_err(core("Gamma_A1"))
        }
        Target::RateE12 if low_t => {
            rates::gamma_e12_direct(&so, &pc, &m.f0, &ls, flag).map_err(core("Gamma_E12"))
        }
        Target::RateE12 => {
            rates::gamma_e12_finite_t_on(&so, &pc, &ctx.overlap(m, t)?, &ls, t, flag)
                .map_err(core("Gamma_E12"))
        }
        Target::Ratio => rates::ratio_e12_a1(&pc, &m.f0, &ls, flag)
            .map(RateResult::exact)
            .map_err(core("ratio")),
        Target::Mix => eta_band_rates(ctx, t),
        Target::Lifetime => unreachable!("handled by lifetime_curves"),
    }
}

pub fn sweep_cmd(ctx: &Ctx, args: &SweepArgs) -> R<Report> {
    use Axis::*;
    use Target::*;
    let ok = matches!(
        (args.axis, args.target),
        (Temperature, Lifetime | RateA1 | RateE12 | Mix)
            | (Delta, RateA1 | RateE12 | Ratio)
            | (Omega, RateE12 | Ratio)
    );
    if !ok {
        return Err(CliError::Usage(format!(
            "sweep: target `{}` cannot be swept along `{}`",
            args.target.stem(),
            args.axis.label()
        )));
    }
    let mut rep = ctx.report("sweep");
    for (k, v) in [
        ("sweep_axis", args.axis.label().to_string()),
        ("sweep_from", args.from.to_string()),
        ("sweep_to", args.to.to_string()),
        ("sweep_step", args.step.to_string()),
        ("sweep_target", args.target.stem().to_string()),
    ] {
        rep.inputs.push((k.into(), v));
    }
    let nodes = Sweep::new(args.from, args.to, args.step)
        .map_err(|e| CliError::Usage(format!("sweep: {e}")))?
        .nodes();
    let m = ctx.psb()?;
    let name = format!("{}_vs_{}.csv", args.target.stem(), args.axis.label());
    if args.target == Lifetime {
        let model = lifetime_model(ctx, &m)?;
        let rows = inference::lifetime_curves(&model, &nodes, &ctx.cfg.epsilons)
            .map_err(core("lifetime sweep"))?;
        for spin in [SpinClass::Ms0, SpinClass::Ms1] {
            let taus: Vec<f64> = rows
                .iter()
                .filter(|r| r.spin == spin)
                .map(|r| r.tau_ns)
                .collect();
            let lo = taus.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = taus.iter().cloned().fold(0.0, f64::max);
            rep.result(format!("tau({spin}) spans [{}, {}] ns", sig(lo), sig(hi)));
        }
        rep.result(format!("rows = {}", rows.len()));
        rep.file(&name, inference::lifetime_rows_to_csv(&rows));
        return Ok(rep);
    }
    let vals = exec::map_slice(&nodes, |&x| point(ctx, &m, args.axis, args.target, x));
    let vals: Vec<RateResult> = vals.into_iter().collect::<R<_>>()?;
    let rows: Vec<Vec<String>> = nodes
        .iter()
        .zip(&vals)
        .map(|(x, r)| row(&[*x, r.value_mhz, r.lo(), r.hi()]))
        .collect();
    let (value_col, lo_col, hi_col) = if args.target == Ratio {
        ("ratio", "lo", "hi")
    } else {
        ("value_MHz", "lo_MHz", "hi_MHz")
    };
    let values: Vec<f64> = vals.iter().map(|r| r.value_mhz).collect();
    rep.result(format!(
        "{} points; {} from {} to {}",
        nodes.len(),
        value_col,
        sig(values[0]),
        sig(values[values.len() - 1])
    ));
    rep.file(
        &name,
        io::table_to_csv(&[args.axis.column(), value_col, lo_col, hi_col], &rows),
    );
    Ok(rep)
}
