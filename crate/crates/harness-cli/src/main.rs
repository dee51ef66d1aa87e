use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use harness_cli::experiment::Overrides;
use harness_cli::figures::{FigOptions, Figure};
use harness_cli::Outcome;

#[derive(Parser)]
#[command(
    name = "sppm-vr",
    version,
    about = "Stochastic proximal point methods with variance reduction: \
             generate problems, run experiments, verify guarantees, \
             estimate constants, reproduce the reference figures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic saddle instance and write it with metadata
    Generate {
        /// Experiment config providing an inline problem spec
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the generator seed
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a configured experiment and write per-algorithm CSV traces
    Run {
        /// Experiment config (problem, algorithms, budget)
        #[arg(long)]
        config: PathBuf,
        /// Override the base seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the trial count
        #[arg(long)]
        trials: Option<usize>,
        /// Override the iteration count
        #[arg(long)]
        iters: Option<u64>,
        /// Stop early at this squared error (single-trial runs only)
        #[arg(long)]
        target_error: Option<f64>,
    },
    /// Reproduce the reference figure data as CSV
    Reproduce {
        /// Which figure to reproduce
        #[arg(value_enum)]
        figure: FigureArg,
        /// Instance and trajectory seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the iteration budget (fig1) or cap (fig2)
        #[arg(long)]
        iters: Option<u64>,
        /// Override the trial count (fig1 only)
        #[arg(long)]
        trials: Option<usize>,
        /// Override the target squared error (fig2 only)
        #[arg(long)]
        target_error: Option<f64>,
    },
    /// Check the contraction guarantees; exit code 2 on any violation
    Verify {
        /// Experiment config naming the problem to check
        #[arg(long)]
        config: Option<PathBuf>,
        /// Generator seed for the default instance
        #[arg(long)]
        seed: Option<u64>,
        /// Trajectory steps per method (every 2nd state is checked)
        #[arg(long)]
        iters: Option<u64>,
    },
    /// Estimate instance constants and per-method tunings
    Estimate {
        /// Experiment config naming the problem to measure
        #[arg(long)]
        config: Option<PathBuf>,
        /// Generator seed for the default instance
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the report into this directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FigureArg {
    Fig1,
    Fig2,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code: u8 = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Generate { config, seed, out } => {
            harness_cli::generate::cmd_generate(config.as_deref(), seed, &out)
        }
        Command::Run {
            config,
            seed,
            out,
            trials,
            iters,
            target_error,
        } => harness_cli::experiment::cmd_run(
            &config,
            &Overrides {
                seed,
                out,
                trials,
                iters,
                target_error,
            },
        ),
        Command::Reproduce {
            figure,
            seed,
            out,
            iters,
            trials,
            target_error,
        } => harness_cli::figures::cmd_reproduce(
            match figure {
                FigureArg::Fig1 => Figure::Fig1,
                FigureArg::Fig2 => Figure::Fig2,
            },
            &FigOptions {
                seed,
                out,
                iters,
                trials,
                target_error,
            },
        ),
        Command::Verify {
            config,
            seed,
            iters,
        } => harness_cli::checks::cmd_verify(config.as_deref(), seed, iters),
        Command::Estimate { config, seed, out } => {
            harness_cli::constants::cmd_estimate(config.as_deref(), seed, out.as_deref())
        }
    }
}
