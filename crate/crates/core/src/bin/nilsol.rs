//! Command-line interface over the report runners. Exit codes: 0 success,
//! 2 invalid input, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nilsol::report::{self, RunOptions};

#[derive(Parser)]
#[command(
    name = "nilsol",
    version,
    about = "Left-invariant Randers metrics on nilpotent Lie groups: \
             curvature, structural checks, soliton fits, Ricci flow"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Model file (JSON).
    path: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Include wall-clock timing in the report; breaks byte-for-byte
    /// determinism of the output.
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Clone)]
struct SampleArgs {
    /// Number of sampled directions.
    #[arg(long, default_value_t = 32)]
    samples: usize,
    /// Seed for the deterministic direction sampler.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone)]
struct Point(Vec<f64>);

fn parse_point(s: &str) -> Result<Point, String> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad coordinate '{p}': {e}"))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Point)
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a model and print its structural classification.
    Check {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Norms, fundamental tensors, sprays and curvatures at sampled
    /// directions.
    Curvature {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sampling: SampleArgs,
        /// Base point in exponential coordinates, comma separated.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        at: Option<Point>,
    },
    /// Semialgebraic Ricci-soliton fit and classification.
    Soliton {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sampling: SampleArgs,
        /// Proceed even when the drift is not Killing.
        #[arg(long)]
        force: bool,
    },
    /// Integrate the Ricci flow of the identity inner product.
    Flow {
        #[command(flatten)]
        common: CommonArgs,
        /// Flow horizon.
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Volume-normalized flow.
        #[arg(long)]
        normalized: bool,
        /// Also write the trajectory as CSV to this path.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Aggregate report: check, curvature, soliton and flow sections.
    Report {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sampling: SampleArgs,
        /// Flow horizon.
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Volume-normalized flow.
        #[arg(long)]
        normalized: bool,
        /// Proceed even when the drift is not Killing.
        #[arg(long)]
        force: bool,
    },
}

fn thread_count() -> usize {
    std::env::var("NILSOL_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&t| t >= 1)
        .unwrap_or(1)
}

fn base_options(common: &CommonArgs) -> RunOptions {
    RunOptions {
        timing: common.timing,
        threads: thread_count(),
        ..RunOptions::default()
    }
}

fn emit(common: &CommonArgs, text: &str) -> nilsol::Result<()> {
    match &common.output {
        Some(p) => std::fs::write(p, text)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> nilsol::Result<()> {
    match cli.cmd {
        Cmd::Check { common } => {
            let opts = base_options(&common);
            let text = report::to_json(&report::run_check(&common.path, &opts)?);
            emit(&common, &text)
        }
        Cmd::Curvature {
            common,
            sampling,
            at,
        } => {
            let opts = RunOptions {
                samples: sampling.samples,
                seed: sampling.seed,
                at: at.map(|p| p.0),
                ..base_options(&common)
            };
            let text = report::to_json(&report::run_curvature(&common.path, &opts)?);
            emit(&common, &text)
        }
        Cmd::Soliton {
            common,
            sampling,
            force,
        } => {
            let opts = RunOptions {
                samples: sampling.samples,
                seed: sampling.seed,
                force,
                ..base_options(&common)
            };
            let text = report::to_json(&report::run_soliton(&common.path, &opts)?);
            emit(&common, &text)
        }
        Cmd::Flow {
            common,
            t,
            normalized,
            trajectory,
        } => {
            let opts = RunOptions {
                t_end: t,
                normalized,
                ..base_options(&common)
            };
            let text = report::to_json(&report::run_flow(&common.path, &opts)?);
            if let Some(csv_path) = trajectory {
                let m = nilsol::model::read_model(&common.path)?;
                let s = m.to_structure()?;
                let kind = if normalized {
                    nilsol::flow::FlowKind::Normalized
                } else {
                    nilsol::flow::FlowKind::Unnormalized
                };
                let traj = nilsol::flow::integrate(
                    s.algebra(),
                    s.metric_identity(),
                    kind,
                    t,
                    &nilsol::flow::StepControl::default(),
                )?;
                std::fs::write(csv_path, traj.to_csv())?;
            }
            emit(&common, &text)
        }
        Cmd::Report {
            common,
            sampling,
            t,
            normalized,
            force,
        } => {
            let opts = RunOptions {
                samples: sampling.samples,
                seed: sampling.seed,
                t_end: t,
                normalized,
                force,
                ..base_options(&common)
            };
            let text = report::to_json(&report::run_full(&common.path, &opts)?);
            emit(&common, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}
