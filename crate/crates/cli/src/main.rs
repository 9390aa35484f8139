//! `nvisc`: rates, inferences and lifetimes from a flat run config.
//!
//! Exit codes: 0 success, 2 config or input error, 3 numerical failure,
//! 4 inference with an empty admissible set.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Axis, Ctx, SweepArgs, Target};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "nvisc", version, about = "Intersystem crossing rate models")]
struct Cli {
    /// Run configuration (`key = value`, unit-suffixed keys).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Resample the reference sideband to this step before deconvolution.
    #[arg(long, global = true, value_name = "MEV")]
    grid_step: Option<f64>,

    /// Do not echo the summary to stdout.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Finite-temperature overlap function F(omega, T).
    PsbBuild,
    /// One-phonon density from the low-temperature sideband.
    Deconvolve,
    /// Gamma_A1 at the configured gap.
    RateA1,
    /// Gamma_E12 at low and finite temperature, with its phonon spectrum.
    RateE12,
    /// Gamma_E12/Gamma_A1 and its dependence on the cutoff.
    Ratio,
    /// Two-phonon mixing rate and its temperature dependence.
    Mix,
    /// Phonon-energy resolved mixing rate.
    MixSpectral,
    /// Fit eta to measured mixing rates.
    ExtractEta,
    /// Gap values consistent with the measured Gamma_A1.
    InferDelta,
    /// Cutoff values consistent with the measured ratio.
    InferOmega,
    /// Error of the low-temperature approximation.
    LowtError,
    /// Lifetimes at the configured temperature.
    Lifetime,
    /// Fit the activated channel to measured lifetimes.
    FitMottSeitz,
    /// Sensitivity of Gamma_ISC to the gap.
    Sensitivity,
    /// Sweep one axis and tabulate a target.
    Sweep {
        #[arg(long, value_enum)]
        axis: Axis,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        step: f64,
        #[arg(value_enum)]
        target: Target,
    },
}

fn run(cli: &Cli) -> Result<output::Report, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config PATH is required".into()))?;
    if let Some(h) = cli.grid_step {
        if !(h > 0.0 && h.is_finite()) {
            return Err(CliError::Usage(format!(
                "--grid-step must be positive, got {h}"
            )));
        }
    }
    let ctx = Ctx {
        cfg: config::read_config(path)?,
        grid_step_mev: cli.grid_step,
    };
    match &cli.command {
        Command::PsbBuild => commands::psb_build(&ctx),
        Command::Deconvolve => commands::deconvolve(&ctx),
        Command::RateA1 => commands::rate_a1(&ctx),
        Command::RateE12 => commands::rate_e12(&ctx),
        Command::Ratio => commands::ratio(&ctx),
        Command::Mix => commands::mix(&ctx),
        Command::MixSpectral => commands::mix_spectral(&ctx),
        Command::ExtractEta => commands::extract_eta(&ctx),
        Command::InferDelta => commands::infer_delta(&ctx),
        Command::InferOmega => commands::infer_omega(&ctx),
        Command::LowtError => commands::lowt_error(&ctx),
        Command::Lifetime => commands::lifetime(&ctx),
        Command::FitMottSeitz => commands::fit_mott_seitz(&ctx),
        Command::Sensitivity => commands::sensitivity(&ctx),
        Command::Sweep {
            axis,
            from,
            to,
            step,
            target,
        } => commands::sweep_cmd(
            &ctx,
            &SweepArgs {
                axis: *axis,
                from: *from,
                to: *to,
                step: *step,
                target: *target,
            },
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|rep| {
        rep.write(&cli.out)?;
        if !cli.quiet {
            print!("{}", rep.summary());
        }
        match rep.empty {
            Some(detail) => Err(CliError::Empty {
                op: "inference",
                detail,
            }),
            None => Ok(()),
        }
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
