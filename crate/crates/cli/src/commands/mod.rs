//! Subcommand implementations. Each one opens a run manifest in the output
//! directory before doing any work and completes it after the last write.

mod construct;
mod eval;
mod gen;
mod report;
mod train;
mod verify;
mod welfare;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use edsf_core::dsf::Activation;
use edsf_core::learn::{ModelKind, SampleDataset, TrainConfig};
use edsf_core::setfn::{CoverageSpec, GraphSpec, SetFunction};
use edsf_core::SetModel;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{ActivationArg, Cli, Command, ModelArg, TrainOverrides};

pub enum Outcome {
    Success,
    /// A checked property failed; maps to exit status 2.
    PropertyFailure,
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let out = cli.out_dir.as_path();
    match &cli.command {
        Command::Gen(a) => gen::run(out, a),
        Command::Train(a) => train::run(out, a),
        Command::Eval(a) => eval::run(out, a),
        Command::Verify(a) => verify::run(out, a),
        Command::Welfare(a) => welfare::run(out, a),
        Command::Report(a) => report::run(out, a),
        Command::Construct(a) => construct::run(out, a),
    }
}

/// On-disk oracle, tagged by family.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", content = "spec", rename_all = "snake_case")]
pub enum OracleFile {
    Coverage(CoverageSpec<f64>),
    Cut(GraphSpec),
}

impl OracleFile {
    pub fn as_set_function(&self) -> &dyn SetFunction<f64> {
        match self {
            OracleFile::Coverage(c) => c,
            OracleFile::Cut(g) => g,
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(BufReader::new(f))
        .with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn read_dataset(path: &Path) -> Result<SampleDataset<f64>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    SampleDataset::read_jsonl(BufReader::new(f))
        .with_context(|| format!("reading {}", path.display()))
}

pub fn write_dataset(path: &Path, ds: &SampleDataset<f64>) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(f);
    ds.write_jsonl(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_model(path: &Path) -> Result<SetModel<f64>> {
    read_json(path)
}

/// Applies command-line overrides on top of a file or default configuration.
pub fn apply_overrides(cfg: &mut TrainConfig, o: &TrainOverrides) -> Result<()> {
    if let Some(m) = o.model {
        cfg.model = match m {
            ModelArg::Dsf => ModelKind::Dsf,
            ModelArg::Edsf => ModelKind::Edsf,
        };
    }
    if let Some(r) = o.r {
        cfg.r = r;
    }
    if let Some(e) = o.epochs {
        cfg.epochs = e;
    }
    if let Some(lr) = o.learning_rate {
        cfg.learning_rate = lr;
    }
    if let Some(b) = o.batch_size {
        cfg.batch_size = b;
    }
    if let Some(w) = &o.widths {
        cfg.layer_widths = w.clone();
    }
    if let Some(s) = o.split {
        cfg.split_ratio = s;
    }
    match (o.activation, o.alpha) {
        (Some(ActivationArg::MinCap) | None, Some(alpha)) => {
            cfg.activation = Activation::MinCap { alpha }
        }
        (Some(ActivationArg::MinCap), None) => {
            if !matches!(cfg.activation, Activation::MinCap { .. }) {
                bail!("--activation min-cap needs --alpha");
            }
        }
        (Some(_), Some(_)) => bail!("--alpha only applies to the min-cap activation"),
        (Some(ActivationArg::Identity), None) => cfg.activation = Activation::Identity,
        (Some(ActivationArg::Sqrt), None) => cfg.activation = Activation::Sqrt,
        (Some(ActivationArg::Log1p), None) => cfg.activation = Activation::Log1p,
        (None, None) => {}
    }
    cfg.validate()?;
    Ok(())
}

pub fn load_train_config(path: Option<&Path>, o: &TrainOverrides) -> Result<TrainConfig> {
    let mut cfg = match path {
        Some(p) => read_json(p)?,
        None => TrainConfig::default(),
    };
    apply_overrides(&mut cfg, o)?;
    Ok(cfg)
}
