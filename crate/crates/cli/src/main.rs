// SPDX-License-Identifier: Apache-2.0

//! `qsopt`: generate, prune, audit and apply circuit transformations.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "qsopt", version, about = "Superoptimizer for quantum circuits over arbitrary gate sets")]
struct Cli {
    /// More log output; repeat for debug level.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build an ECC set with representative-based generation.
    Generate(GenerateArgs),
    /// Remove redundant classes and members from an ECC set.
    Prune(PruneArgs),
    /// Re-verify every class of an ECC set.
    Verify(VerifyArgs),
    /// Transpile, decompose Toffolis and merge rotations in a QASM circuit.
    Preprocess(PreprocessArgs),
    /// Search for a cheaper equivalent circuit.
    Optimize(OptimizeArgs),
    /// Print the counts of an ECC set.
    Stats(StatsArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendArg {
    Smt,
    Algebraic,
}

#[derive(Args, Debug, Serialize)]
pub struct SolverArgs {
    /// Equivalence backend.
    #[arg(long, value_enum, default_value = "smt")]
    pub backend: BackendArg,
    /// Per-query solver timeout.
    #[arg(long, default_value = "30s", value_parser = humantime::parse_duration)]
    #[serde(serialize_with = "ser_duration")]
    pub solver_timeout: Duration,
    /// Write every solver query into this directory.
    #[arg(long)]
    pub dump_smt: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct GenerateArgs {
    /// Built-in gate set name, `name[G1,G2]` for a subset, or a JSON file.
    #[arg(long, default_value = "nam")]
    pub gateset: String,
    /// Maximum number of gates per circuit.
    #[arg(long)]
    pub n: usize,
    /// Number of qubits.
    #[arg(long)]
    pub q: usize,
    /// Number of symbolic parameters.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Allowed argument expressions; defaults to every `p_i`, `2p_i` and
    /// `p_i+p_j`.
    #[arg(long, value_delimiter = ',')]
    pub exprs: Option<Vec<String>>,
    /// Let a parameter occur more than once per circuit.
    #[arg(long)]
    pub multi_use: bool,
    #[arg(long, default_value_t = qsopt_core::fingerprint::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = qsopt_core::fingerprint::DEFAULT_E_MAX)]
    pub e_max: f64,
    /// Run both pruning passes before writing.
    #[arg(long)]
    pub prune: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct PruneArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "simplify,common")]
    pub passes: Vec<String>,
    /// Gate set, when the file's own name does not resolve.
    #[arg(long)]
    pub gateset: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub eccs: PathBuf,
    #[arg(long)]
    pub gateset: Option<String>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct PreprocessArgs {
    /// Target gate set: nam, ibm or rigetti.
    #[arg(long, default_value = "nam")]
    pub gateset: String,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Passes to run; they always execute in the order toffoli, transpile,
    /// merge, rigetti.
    #[arg(long, value_delimiter = ',', default_value = "transpile,toffoli,merge")]
    pub passes: Vec<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub eccs: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1.0001)]
    pub gamma: f64,
    #[arg(long, default_value = "60s", value_parser = humantime::parse_duration)]
    #[serde(serialize_with = "ser_duration")]
    pub timeout: Duration,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Break cost ties randomly (seeded) instead of first-in first-out.
    #[arg(long)]
    pub shuffle_ties: bool,
    /// Stop once a circuit with at most this many gates is found.
    #[arg(long)]
    pub stop_at_cost: Option<usize>,
    #[arg(long)]
    pub gateset: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct StatsArgs {
    pub eccs: PathBuf,
    #[arg(long)]
    pub gateset: Option<String>,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

fn ser_duration<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&humantime::format_duration(*d).to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.cmd {
        Command::Generate(a) => commands::generate(a),
        Command::Prune(a) => commands::prune(a),
        Command::Verify(a) => commands::verify(a),
        Command::Preprocess(a) => commands::preprocess(a),
        Command::Optimize(a) => commands::optimize(a),
        Command::Stats(a) => commands::stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
