//! Command-line front end. Exit codes: 0 when every check passes, 1 when
//! checks ran and failed, 2 on input or usage errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod run;

#[derive(Parser)]
#[command(
    name = "dissenc",
    version,
    about = "Synthesize, verify, and simulate dissipative encoders for stabilizer codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize an encoder plan from a code and write it as JSON.
    Synthesize(SynthesizeArgs),
    /// Run the check battery on a plan or code and write a report.
    Verify(VerifyArgs),
    /// Step the encoder on a chosen input and tabulate its progress.
    Simulate(SimulateArgs),
    /// Build a torus encoder, check it, and report the parallel schedule.
    Toric(ToricArgs),
}

#[derive(Args)]
pub struct SynthesizeArgs {
    /// Code source: a JSON file, a builtin name, `builtin:NAME`, or `toric:L`.
    #[arg(long)]
    pub code: String,
    /// Write the synthesized plan JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Plan file produced by `synthesize`.
    #[arg(long, conflicts_with = "code")]
    pub plan: Option<PathBuf>,
    /// Code source to synthesize and verify in one go.
    #[arg(long)]
    pub code: Option<String>,
    /// Write the verification report JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Channel-level tolerance override.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Seed for orderings and probe states.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Check the listed order only; skips the order-robustness battery
    /// and accepts plans that are only legal as sequences.
    #[arg(long)]
    pub ordered: bool,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Plan file produced by `synthesize`.
    #[arg(long, conflicts_with = "code")]
    pub plan: Option<PathBuf>,
    /// Code source to synthesize and simulate in one go.
    #[arg(long)]
    pub code: Option<String>,
    /// Upload preparation, one symbol per logical qubit from {0 1 + - i j}.
    #[arg(long)]
    pub input: Option<String>,
    /// Force the dense backend.
    #[arg(long, conflicts_with = "tableau")]
    pub dense: bool,
    /// Force the sign-tracked tableau backend.
    #[arg(long)]
    pub tableau: bool,
    /// Continuous-time mode: evolve exp(t(Phi - id)) over a time grid.
    #[arg(long)]
    pub cde: bool,
    /// Comma-separated times for --cde; defaults to 0..=50.
    #[arg(long)]
    pub t_grid: Option<String>,
    /// Write the final dense state here (raw complex array plus sidecar).
    #[arg(long)]
    pub dump_state: Option<PathBuf>,
    /// Seed for the tableau sampling fallback.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct ToricArgs {
    /// Torus side length, at least 2.
    #[arg(long = "L")]
    pub l: usize,
    /// Force the dense battery (fits at L = 2 only).
    #[arg(long, conflicts_with = "tableau")]
    pub dense: bool,
    /// Force the tableau battery.
    #[arg(long)]
    pub tableau: bool,
    /// Write the lattice bundle JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for randomized gauge states.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Channel-level tolerance override.
    #[arg(long)]
    pub tol: Option<f64>,
}

fn main() -> ExitCode {
    // Die quietly when the read end of a pipe goes away, as under `head`.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Synthesize(args) => run::synthesize(&args),
        Command::Verify(args) => run::verify(&args),
        Command::Simulate(args) => run::simulate(&args),
        Command::Toric(args) => run::toric(&args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
