//! `micprob` command-line interface.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::output::CliError;

#[derive(Parser, Debug)]
#[command(name = "micprob", version, about = "Quantum states, channels and dynamics as MIC-POVM probability vectors")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Numerical tolerance for validation and physicality checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Master seed for every randomized procedure.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Worker threads for scans (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Frame construction and validation.
    #[command(subcommand)]
    Frame(FrameCmd),
    /// States as probability vectors.
    #[command(subcommand)]
    State(StateCmd),
    /// Channels as pseudostochastic matrices.
    #[command(subcommand)]
    Channel(ChannelCmd),
    /// Measurements and observables.
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// Generators and time evolution.
    #[command(subcommand, name = "dyn")]
    Dyn(DynCmd),
    /// Negativity and critical decoherence times of the spin models.
    #[command(subcommand)]
    Classicality(ClassicalityCmd),
    /// Qubit circuits in probability space.
    #[command(subcommand)]
    Circuit(CircuitCmd),
}

#[derive(Subcommand, Debug)]
pub enum FrameCmd {
    /// Writes the SIC frame of dimension 2 or 3.
    BuildSic {
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Checks that a frame file is a valid MIC-POVM.
    Validate { file: PathBuf },
    /// Product frame of two frame files.
    Tensor { a: PathBuf, b: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum StateCmd {
    /// Density matrix to frame probabilities.
    ToProb { file: PathBuf },
    /// Frame probabilities to density matrix.
    FromProb { file: PathBuf },
    /// Physicality of a probability vector (or density matrix).
    Check { file: PathBuf },
    /// Purity Tr(ρ²).
    Purity { file: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum ChannelCmd {
    /// Kraus operators to a pseudostochastic matrix.
    ToPstoch { file: PathBuf },
    /// Applies a channel to a state.
    Apply { channel: PathBuf, state: PathBuf },
    /// Complete positivity through the Choi probability vector.
    Check { file: PathBuf },
    /// Choi probability vector.
    Choi { file: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum MeasureCmd {
    /// Outcome distribution q = M p.
    Probs { measurement: PathBuf, state: PathBuf },
    /// Positivity of every reconstructed effect.
    Check { measurement: PathBuf },
    /// Mean value of an observable.
    Mean { measurement: PathBuf, state: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum DynCmd {
    /// Generator matrix of a model.
    Generator { model: PathBuf },
    /// p(t) = exp(Lt) p(0).
    Evolve {
        model: PathBuf,
        state: PathBuf,
        #[arg(long)]
        t: f64,
    },
    /// GKSL validity of a model or of a raw generator matrix.
    CheckGenerator { file: PathBuf },
    /// Hamiltonian part of a generator.
    ProjectUnitary { file: PathBuf },
    /// Tabulated qubit maps and generators in the tetrahedral frame.
    Table {
        #[arg(long)]
        name: commands::TableName,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
    },
}

#[derive(Args, Debug, Clone)]
pub struct SearchOpts {
    #[arg(long)]
    pub kind: micprob::classicality::DecoherenceKind,
    #[arg(long, default_value = "mic")]
    pub family: micprob::classicality::PovmFamily,
    /// Nelder–Mead restarts per negativity minimization.
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Bisection width for τ_crit.
    #[arg(long, default_value_t = 0.005)]
    pub tau_tol: f64,
    /// Negativities at or below this count as zero.
    #[arg(long, default_value_t = 1e-6)]
    pub zero_tol: f64,
}

#[derive(Subcommand, Debug)]
pub enum ClassicalityCmd {
    /// Minimal negativity at fixed τ.
    Negativity {
        #[command(flatten)]
        search: SearchOpts,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long)]
        tau: f64,
    },
    /// Critical decoherence time at one θ.
    TauCrit {
        #[command(flatten)]
        search: SearchOpts,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
    },
    /// τ_crit over a θ grid written as CSV.
    Scan {
        #[command(flatten)]
        search: SearchOpts,
        /// Grid as start:stop:count, both ends included.
        #[arg(long, default_value = "0:3.141592653589793:16")]
        theta_grid: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum CircuitCmd {
    /// Runs a circuit file and reports read-out probabilities and sampled counts.
    Run {
        program: PathBuf,
        #[arg(long, default_value_t = 0)]
        shots: usize,
        /// CSV of the register vector after every step.
        #[arg(long)]
        emit_trace: Option<PathBuf>,
    },
    /// Probability-space matrix of a library gate as CSV.
    GateTable {
        #[arg(long)]
        gate: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code())
        }
    }
}

impl From<micprob::Error> for CliError {
    fn from(e: micprob::Error) -> Self {
        CliError::Core(e)
    }
}
