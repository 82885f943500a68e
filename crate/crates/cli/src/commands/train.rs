use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use edsf_core::experiment::{run_learning_on, LearnRun, Summary};
use edsf_core::rng::derive_seed;
use edsf_core::Scalar;
use serde_json::json;

use super::{load_train_config, read_dataset, write_dataset, write_json, Outcome};
use crate::manifest::RunManifest;
use crate::{Precision, TrainArgs};

pub fn run(out: &Path, args: &TrainArgs) -> Result<Outcome> {
    let mut cfg = load_train_config(args.config.as_deref(), &args.overrides)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let data = read_dataset(&args.data)?;
    let config = json!({
        "data": args.data,
        "trials": args.trials,
        "precision": format!("{:?}", args.precision).to_lowercase(),
        "train": cfg,
    });
    let mut m = RunManifest::begin(out, "train", config)?;
    let mut train_l1 = Vec::with_capacity(args.trials);
    let mut test_l1 = Vec::with_capacity(args.trials);
    for t in 0..args.trials {
        let seed = derive_seed(cfg.seed, t as u64);
        let prefix = if args.trials == 1 {
            String::new()
        } else {
            format!("trial_{t:03}/")
        };
        if !prefix.is_empty() {
            fs::create_dir_all(out.join(&prefix))?;
        }
        let (tr, te) = match args.precision {
            Precision::F32 => save_trial(
                &mut m,
                &prefix,
                &run_learning_on::<f32>(&data.cast(), &cfg, seed)?,
            )?,
            Precision::F64 => {
                save_trial(&mut m, &prefix, &run_learning_on::<f64>(&data, &cfg, seed)?)?
            }
        };
        println!("trial {t}: seed {seed} train L1 {tr:.4} test L1 {te:.4}");
        train_l1.push(tr);
        test_l1.push(te);
    }
    let summary = json!({"train_l1": Summary::of(&train_l1), "test_l1": Summary::of(&test_l1)});
    if args.trials > 1 {
        write_json(&m.output("summary.json"), &summary)?;
        let s = Summary::of(&test_l1).expect("at least one trial");
        println!(
            "test L1 over {} trials: mean {:.4} std {:.4}",
            s.n, s.mean, s.std
        );
    }
    m.set_summary(summary);
    m.complete()?;
    Ok(Outcome::Success)
}

/// Writes the model, per-epoch losses, final errors and both splits.
fn save_trial<T: Scalar>(
    m: &mut RunManifest,
    prefix: &str,
    run: &LearnRun<T>,
) -> Result<(f64, f64)> {
    write_json(&m.output(&format!("{prefix}model.json")), &run.model)?;
    let path = m.output(&format!("{prefix}metrics.csv"));
    let mut w =
        csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["epoch", "train_loss"])?;
    for (e, l) in run.metrics.epoch_loss.iter().enumerate() {
        w.write_record([(e + 1).to_string(), l.to_string()])?;
    }
    w.flush()?;
    let test_l1 = run.metrics.test_l1.unwrap_or(f64::NAN);
    write_json(
        &m.output(&format!("{prefix}summary.json")),
        &json!({
            "seed": run.seed,
            "train_l1": run.metrics.train_l1,
            "test_l1": test_l1,
            "epochs": run.metrics.epoch_loss.len(),
            "component_activity": run.metrics.component_activity,
        }),
    )?;
    write_dataset(
        &m.output(&format!("{prefix}train.jsonl")),
        &run.train_set.cast(),
    )?;
    write_dataset(
        &m.output(&format!("{prefix}test.jsonl")),
        &run.test_set.cast(),
    )?;
    Ok((run.metrics.train_l1, test_l1))
}
