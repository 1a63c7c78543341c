use std::path::PathBuf;
use std::process::ExitCode;

use adgt::harness::config::run_experiment;
use adgt::harness::rates::fit_rate;
use adgt::harness::trace::Trace;
use adgt::harness::verify::verify_suite;
use clap::{Parser, Subcommand};

/// Number of worker threads for `verify`; defaults to all cores.
const THREADS_ENV: &str = "ADGT_THREADS";

#[derive(Parser)]
#[command(name = "adgt", version, about = "Duality-gap certified first-order methods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the verification suite.
    Verify {
        /// Comma-separated tags (dominance, chain, rates, bregman, continuous, equivalence, mutation, all).
        #[arg(long, value_delimiter = ',')]
        filter: Vec<String>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Fit a convergence rate to the G column of a trace.
    Rates {
        #[arg(long)]
        trace: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(n) = std::env::var(THREADS_ENV) {
        match n.parse::<usize>() {
            Ok(n) => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            Err(_) => {
                eprintln!("{THREADS_ENV} must be a positive integer");
                return ExitCode::from(3);
            }
        }
    }
    match cli.command {
        Command::Run { config } => {
            let (code, res) = run_experiment(&config);
            match res {
                Ok(r) => println!("{}", serde_json::to_string_pretty(&r.summary).expect("summary serializes")),
                Err(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(code as u8)
        }
        Command::Verify { filter, json } => match verify_suite(&filter) {
            Ok(report) => {
                if json {
                    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
                } else {
                    for l in &report.lines {
                        println!("{}", l.render());
                    }
                }
                if report.ok() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(3)
            }
        },
        Command::Rates { trace } => {
            let text = match std::fs::read_to_string(&trace) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {}: {e}", trace.display());
                    return ExitCode::from(3);
                }
            };
            let parsed = match Trace::parse(&text) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(3);
                }
            };
            let pts: Vec<(f64, f64)> = parsed.rows.iter().map(|r| (r.x(), r.gap)).collect();
            match fit_rate(&pts) {
                Ok(f) => {
                    println!("{}", serde_json::to_string_pretty(&f).expect("fit serializes"));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
