mod commands;
mod parse;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Pre/postselection simulator: weak values, loss and pointer sweeps,
/// state design and verification suites.
#[derive(Debug, Parser)]
#[command(name = "postsel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Weak values of the path projectors of a scenario.
    WeakValues(WeakValuesArgs),
    /// Loss or pointer-strength sweep.
    Sweep(SweepArgs),
    /// Synthesize pre/postselected states from target weak values.
    Design(DesignArgs),
    /// Run a verification suite.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct WeakValuesArgs {
    /// Built-in name (three-box-intro, three-box-experimental, hardy) or a
    /// scenario file.
    #[arg(long, default_value = "three-box-intro")]
    pub scenario: String,
    /// Joint weak values of the composite basis projectors.
    #[arg(long)]
    pub joint: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMode {
    Loss,
    Pointer,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value = "three-box-intro")]
    pub scenario: String,
    #[arg(long, value_enum)]
    pub mode: SweepMode,
    /// Lossy paths, 1-based and comma-separated (loss mode).
    #[arg(long)]
    pub paths: Option<String>,
    /// Marked path, 1-based (pointer mode).
    #[arg(long)]
    pub path: Option<usize>,
    /// `start:stop:step` or a comma-separated list. Transmissions in loss
    /// mode, strengths G in pointer mode.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = postsel::counting::DEFAULT_TRIALS)]
    pub trials: u64,
    #[arg(long, env = "POSTSEL_SEED")]
    pub seed: Option<u64>,
    /// Interferometer visibility in [0, 1]; overrides the scenario value.
    #[arg(long)]
    pub visibility: Option<f64>,
    /// Append `loss = 1 - T` to the loss CSV.
    #[arg(long)]
    pub loss_column: bool,
    /// Pointer mode: draw detector counts instead of exact probabilities.
    #[arg(long)]
    pub sampled: bool,
    /// Pointer mode extrapolation: `linear` or `even:<degree>`.
    #[arg(long, default_value = "even:3")]
    pub fit: String,
    /// CSV output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Comma-separated complex targets, e.g. `1,-1,1` or `0.5+0.5i,0.5-0.5i`.
    #[arg(long, allow_hyphen_values = true)]
    pub targets: String,
    #[arg(long, default_value = "designed")]
    pub name: String,
    /// Scenario file output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// oracle, negation, sumrule, appendix or hardy.
    pub suite: String,
    /// Rotation angles for the appendix suite.
    #[arg(long, value_delimiter = ',')]
    pub phi: Vec<f64>,
    /// Random circuits for the oracle suite.
    #[arg(long, default_value_t = postsel::checks::DEFAULT_CIRCUITS)]
    pub circuits: usize,
    #[arg(long, env = "POSTSEL_SEED")]
    pub seed: Option<u64>,
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::WeakValues(a) => commands::weak_values(&args, &a),
        Command::Sweep(a) => commands::sweep(&args, &a),
        Command::Design(a) => commands::design(&args, &a),
        Command::Check(a) => commands::check(&args, &a),
    };
    match result {
        Ok(report) => {
            print!("{}", report.to_json());
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<commands::Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
