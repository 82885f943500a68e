use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use edsf_core::learn::{predict, SampleDataset};
use edsf_core::SetModel;
use serde_json::json;

use super::{read_dataset, read_model, Outcome};
use crate::manifest::RunManifest;
use crate::ReportArgs;

pub fn run(out: &Path, args: &ReportArgs) -> Result<Outcome> {
    let file = |name: &str| -> PathBuf { args.run.join(name) };
    let model = read_model(&args.model.clone().unwrap_or_else(|| file("model.json")))?;
    let train = read_dataset(
        &args
            .train_data
            .clone()
            .unwrap_or_else(|| file("train.jsonl")),
    )?;
    let test = read_dataset(&args.test_data.clone().unwrap_or_else(|| file("test.jsonl")))?;
    let metrics = file("metrics.csv");

    let mut m = RunManifest::begin(out, "report", json!({"run": args.run}))?;
    let epochs = if metrics.exists() {
        let mut r = csv::Reader::from_path(&metrics)
            .with_context(|| format!("opening {}", metrics.display()))?;
        let mut w = csv::Writer::from_path(m.output("loss.csv"))?;
        w.write_record(["epoch", "loss"])?;
        let mut count = 0usize;
        for rec in r.records() {
            let rec = rec?;
            w.write_record([&rec[0], &rec[1]])?;
            count += 1;
        }
        w.flush()?;
        Some(count)
    } else {
        None
    };
    let train_l1 = truth_vs_predicted(&m.output("train_truth_vs_predicted.csv"), &model, &train)?;
    let test_l1 = truth_vs_predicted(&m.output("test_truth_vs_predicted.csv"), &model, &test)?;
    m.set_summary(json!({
        "epochs": epochs,
        "train_rows": train.len(),
        "test_rows": test.len(),
        "train_l1": train_l1,
        "test_l1": test_l1,
    }));
    m.complete()?;
    println!(
        "wrote plot data for {} train and {} test rows to {}",
        train.len(),
        test.len(),
        out.display()
    );
    Ok(Outcome::Success)
}

/// One `(truth, predicted)` row per sample; returns the mean L1.
fn truth_vs_predicted(path: &Path, model: &SetModel<f64>, ds: &SampleDataset<f64>) -> Result<f64> {
    let preds = predict(model, ds)?;
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["truth", "predicted"])?;
    let mut l1 = 0.0;
    for (t, p) in ds.targets().iter().zip(&preds) {
        w.write_record([t.to_string(), p.to_string()])?;
        l1 += (t - p).abs();
    }
    w.flush()?;
    Ok(l1 / ds.len() as f64)
}
