//! `qvib` — generate, decompose, group, estimate, verify and report on
//! sum-over-products vibrational Hamiltonians.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qvib", version, about = "Qubitization resource estimation for vibrational Hamiltonians")]
struct Cli {
    /// JSON run configuration; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every stochastic step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Primary output path of the command.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the machine-readable summary on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Embed a generation timestamp in reports (off by default so reruns are
    /// byte-identical).
    #[arg(long, global = true)]
    stamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic coupled-oscillator model (schema sop-v1).
    Gen {
        #[arg(long, default_value_t = 4)]
        modes: usize,
        #[arg(long, default_value_t = 4)]
        modals: usize,
        /// Model family: uncoupled, bilinear, random or lowrank.
        #[arg(long, default_value = "random")]
        preset: String,
        /// Coupling order for random/lowrank presets (2 or 3).
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Monomials per coupling (random preset).
        #[arg(long, default_value_t = 3)]
        terms: usize,
        /// Coupling coefficient scale.
        #[arg(long, default_value_t = 0.05)]
        amplitude: f64,
        /// Comma-separated per-mode frequencies (uncoupled/bilinear presets).
        #[arg(long)]
        frequencies: Option<String>,
    },
    /// Compress the coupling tensors of a model (writes sop-v1 + decomp-v1).
    Decompose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        eps_t: Option<f64>,
        #[arg(long)]
        eps_lr: Option<f64>,
        /// Skip the Tucker stage for couplings of order >= 3.
        #[arg(long)]
        no_tucker: bool,
        /// Where to write the decomposition report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Partition couplings into disjoint groups (schema groups-v1).
    Group {
        #[arg(long)]
        input: PathBuf,
        /// naive, greedy or exact.
        #[arg(long)]
        algorithm: Option<String>,
        #[arg(long)]
        weighted: Option<bool>,
        #[arg(long)]
        representation: Option<String>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Phase-estimation resource estimate (schema cost-v1).
    Estimate {
        #[arg(long)]
        input: PathBuf,
        /// groups-v1 plan for parallel encoding.
        #[arg(long)]
        grouping: Option<PathBuf>,
        /// Estimate all three representations instead of the configured one.
        #[arg(long)]
        all_reps: bool,
        #[arg(long)]
        representation: Option<String>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        c_lcu: Option<f64>,
        /// standard or selectswap.
        #[arg(long)]
        lookup: Option<String>,
        /// 1 = clean-only look-ups, 2 = dirty allowed.
        #[arg(long)]
        lookup_a: Option<u64>,
        #[arg(long)]
        lambda_c: Option<u64>,
        #[arg(long)]
        lambda_u: Option<u64>,
        #[arg(long)]
        seconds_per_toffoli: Option<f64>,
    },
    /// Sweep low-rank thresholds, checking error control against the exact
    /// oracle (schema verify-v1; nonzero exit if a check fails).
    Verify {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated thresholds, swept in the given order.
        #[arg(long, default_value = "1e-4,1e-5,1e-6,1e-7,1e-8")]
        eps_lr_list: String,
        #[arg(long)]
        eps_t: Option<f64>,
        #[arg(long)]
        representation: Option<String>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Where to write the CSV table.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Dump the exact spectrum of the input model as CSV.
        #[arg(long)]
        eigenvalues: Option<PathBuf>,
    },
    /// Merge prior outputs into one summary (schema summary-v1) plus CSV.
    Report {
        #[arg(long, value_delimiter = ',')]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => code,
        Err(err) => {
            let obj = serde_json::json!({
                "error": { "message": format!("{err:#}") }
            });
            println!("{obj}");
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
