use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use goldstein::harness::{load_trace_csv, run_experiment, save_plot, ExperimentConfig, XAxis, YAxis};
use goldstein::Error;

#[derive(Parser)]
#[command(name = "goldstein", version, about = "Goldstein-subgradient descent experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Plot CSV traces as a log-y SVG chart.
    Plot {
        #[arg(long, num_args = 1.., required = true)]
        trace: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "dist")]
        y: YAxis,
        #[arg(long, value_enum, default_value = "calls")]
        x: XAxis,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in oracle-agreement and invariant checks.
    Selftest,
}

fn fail(e: &Error) -> ExitCode {
    let body = serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
    eprintln!("{body}");
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let summary = ExperimentConfig::load(&config).and_then(|cfg| run_experiment(&cfg));
            match summary {
                Ok(s) => {
                    println!("{}", serde_json::to_string_pretty(&s).expect("summary serializes"));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Plot { trace, y, x, out } => {
            let loaded: Result<Vec<_>, Error> = trace
                .iter()
                .map(|p| {
                    let label = p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
                    load_trace_csv(p).map(|t| (label, t))
                })
                .collect();
            match loaded.and_then(|ts| save_plot(&ts, y, x, &out)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(&e),
            }
        }
        Command::Selftest => {
            let checks = goldstein::selftest::run();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().all(|c| c.passed) {
                ExitCode::SUCCESS
            } else {
                let failed: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
                let body = serde_json::json!({ "error": { "kind": "selftest", "failed": failed } });
                eprintln!("{body}");
                ExitCode::FAILURE
            }
        }
    }
}
