use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use survcp::config::{parse_ratios, Method, ModelKind, RunConfig, SimulateConfig};
use survcp::csvio::read_survival_csv;
use survcp::experiment::{run_simulation, run_splits};
use survcp::report;

/// Two-sided conformal prediction for right-censored survival data.
#[derive(Parser)]
#[command(name = "survcp", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthetic simulation study with latent ground truth.
    Simulate {
        /// Training + calibration sample size per replication.
        #[arg(long, default_value_t = 400)]
        n: usize,
        /// Target censoring rate; the censoring parameter is resolved to hit it.
        #[arg(long, default_value_t = 0.3)]
        censoring_rate: f64,
        /// Total miscoverage budget.
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        /// Fraction of alpha spent on the two-sided branch.
        #[arg(long, default_value_t = 0.5)]
        alpha_split: f64,
        /// Conditional CDF model for the non-conformity scores.
        #[arg(long, value_enum, default_value_t = ModelKind::WeibullAft)]
        model: ModelKind,
        #[arg(long, value_enum, default_value_t = Method::TwoSided)]
        method: Method,
        /// Number of replications.
        #[arg(long, default_value_t = 100)]
        reps: usize,
        /// Fresh test points per replication.
        #[arg(long, default_value_t = 100)]
        n_test: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for report.json and table.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Repeated-split evaluation of a CSV dataset.
    Run {
        /// CSV file with `time` and `event` columns; other numeric columns
        /// are covariates.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha_split: f64,
        #[arg(long, value_enum, default_value_t = ModelKind::Cox)]
        model: ModelKind,
        #[arg(long, value_enum, default_value_t = Method::TwoSided)]
        method: Method,
        /// Number of random splits.
        #[arg(long, default_value_t = 100)]
        splits: usize,
        /// Train,calibration,test fractions.
        #[arg(long, default_value = "0.4,0.4,0.2")]
        ratios: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for report.json and predictions.csv.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(survcp::error_exit_code(&err) as u8)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::Simulate {
            n,
            censoring_rate,
            alpha,
            alpha_split,
            model,
            method,
            reps,
            n_test,
            seed,
            out,
        } => {
            let cfg = SimulateConfig {
                n,
                n_test,
                replications: reps,
                censoring_rate,
                alpha,
                alpha_split,
                train_fraction: 0.5,
                model,
                method,
                seed,
            };
            let result = run_simulation(&cfg)?;
            let rep = report::simulate_report(&cfg, &result);
            report::write_simulate_report(&out, &rep)?;
            println!("wrote {}", out.join("report.json").display());
            Ok(())
        }
        Cmd::Run {
            data,
            alpha,
            alpha_split,
            model,
            method,
            splits,
            ratios,
            seed,
            out,
        } => {
            let cfg = RunConfig {
                alpha,
                alpha_split,
                model,
                method,
                splits,
                ratios: parse_ratios(&ratios)?,
                seed,
            };
            let (dataset, covariates) = read_survival_csv(&data)?;
            let result = run_splits(&cfg, &dataset)?;
            let rep = report::run_report(
                &cfg,
                dataset.n(),
                covariates,
                result.twosided.as_deref(),
                result.scp.as_deref(),
            );
            report::write_run_report(&out, &rep, result.twosided.as_deref(), result.scp.as_deref())?;
            println!("wrote {}", out.join("report.json").display());
            Ok(())
        }
    }
}
