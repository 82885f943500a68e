//! `edsf`: generate oracles and datasets, train DSF/EDSF models, run the
//! verification suite and welfare experiments.
//!
//! Exit status is 0 on success, 1 on invalid input or any other error and 2
//! when a checked property fails.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "edsf",
    version,
    about = "Deep and extended deep submodular functions"
)]
pub struct Cli {
    /// Directory receiving every output file.
    #[arg(long, global = true, env = "EDSF_OUT_DIR", default_value = "edsf-out")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate an oracle and a labelled dataset.
    Gen(GenArgs),
    /// Train DSF or EDSF models on a dataset.
    Train(TrainArgs),
    /// Mean L1 error of a saved model on a dataset.
    Eval(EvalArgs),
    /// Run the property suite on random instances.
    Verify(VerifyArgs),
    /// Social welfare experiments.
    Welfare(WelfareArgs),
    /// Plot data (loss curve, truth vs predicted) for a training run.
    Report(ReportArgs),
    /// Exact EDSF for a small oracle, checked on every subset.
    Construct(ConstructArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[command(subcommand)]
    pub kind: GenKind,
}

#[derive(Subcommand, Debug)]
pub enum GenKind {
    /// Random coverage function with unit weights.
    Coverage {
        #[arg(long, default_value_t = 16)]
        items: usize,
        #[arg(long, default_value_t = 100)]
        universe: usize,
        /// Probability that an item covers a universe element.
        #[arg(long, default_value_t = 0.3)]
        p: f64,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Modified cut function of an Erdos-Renyi graph.
    Cut {
        #[arg(long, default_value_t = 50)]
        vertices: usize,
        /// Edge probability.
        #[arg(long, default_value_t = 0.2)]
        p: f64,
        #[command(flatten)]
        data: DataArgs,
    },
}

#[derive(Args, Debug)]
pub struct DataArgs {
    #[arg(long, default_value_t = 1024)]
    pub samples: usize,
    /// Probability that a sampled subset contains each item.
    #[arg(long, default_value_t = 0.5)]
    pub inclusion_p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Precision {
    F32,
    F64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModelArg {
    Dsf,
    Edsf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ActivationArg {
    Identity,
    MinCap,
    Sqrt,
    Log1p,
}

/// Overrides for a training configuration; unset flags keep the file or
/// default value.
#[derive(Args, Debug, Default)]
pub struct TrainOverrides {
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long = "lr")]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub widths: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub activation: Option<ActivationArg>,
    /// Cap of the `min_cap` activation; implies `--activation min-cap`.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Fraction of samples used for training.
    #[arg(long)]
    pub split: Option<f64>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Dataset in JSON lines.
    #[arg(long)]
    pub data: PathBuf,
    /// Training configuration file (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: TrainOverrides,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Independent trials with derived seeds.
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, value_enum, default_value = "f32")]
    pub precision: Precision,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub functions: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Add a DSF with a negated weight; the submodularity check must fail.
    #[arg(long)]
    pub inject_bug: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MethodArg {
    /// Gradient ascent on learned valuations.
    Ga,
    /// Gradient ascent on exact encodings of the true valuations.
    #[value(name = "gaexact")]
    GaExact,
    /// Continuous greedy on the true valuations.
    Cg,
    /// Exhaustive search.
    Brute,
}

#[derive(Args, Debug)]
pub struct WelfareArgs {
    /// Welfare setup file (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ga")]
    pub method: MethodArg,
    #[arg(long)]
    pub users: Option<usize>,
    #[arg(long)]
    pub items: Option<usize>,
    #[arg(long)]
    pub universe: Option<usize>,
    /// Coverage membership probability per user, comma separated; a single
    /// value applies to every user. Defaults to 0.1,0.3,0.5.
    #[arg(long, value_delimiter = ',')]
    pub probs: Option<Vec<f64>>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Samples per user when learning valuations.
    #[arg(long)]
    pub samples: Option<usize>,
    #[command(flatten)]
    pub train: TrainOverrides,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub ga_steps: Option<usize>,
    #[arg(long)]
    pub cg_steps: Option<usize>,
    #[arg(long)]
    pub cg_samples: Option<usize>,
    /// Saved valuation models, one per user, for `--method ga` with `--oracles`.
    #[arg(long, value_delimiter = ',')]
    pub models: Vec<PathBuf>,
    /// Oracle files, one per user; replaces generated instances.
    #[arg(long, value_delimiter = ',')]
    pub oracles: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "f32")]
    pub precision: Precision,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Directory written by `train`.
    #[arg(long)]
    pub run: PathBuf,
    /// Model file; defaults to `model.json` in the run directory.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Defaults to `train.jsonl` in the run directory.
    #[arg(long)]
    pub train_data: Option<PathBuf>,
    /// Defaults to `test.jsonl` in the run directory.
    #[arg(long)]
    pub test_data: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ConstructMode {
    /// Min over `g_A` gadgets; needs a submodular oracle.
    Submodular,
    /// Min over `g_B` gadgets; needs a monotone oracle.
    Monotone,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    /// Oracle file written by `gen`.
    #[arg(long)]
    pub oracle: PathBuf,
    #[arg(long, value_enum, default_value = "submodular")]
    pub mode: ConstructMode,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(&cli) {
        Ok(commands::Outcome::Success) => ExitCode::SUCCESS,
        Ok(commands::Outcome::PropertyFailure) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
