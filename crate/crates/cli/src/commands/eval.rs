use std::path::Path;

use anyhow::Result;
use edsf_core::learn::evaluate;
use serde_json::json;

use super::{read_dataset, read_model, write_json, Outcome};
use crate::manifest::RunManifest;
use crate::EvalArgs;

pub fn run(out: &Path, args: &EvalArgs) -> Result<Outcome> {
    let model = read_model(&args.model)?;
    let data = read_dataset(&args.data)?;
    let l1 = evaluate(&model, &data)?;
    let mut m = RunManifest::begin(out, "eval", json!({"model": args.model, "data": args.data}))?;
    let summary = json!({"kind": model.kind(), "samples": data.len(), "mean_l1": l1});
    write_json(&m.output("eval.json"), &summary)?;
    m.set_summary(summary);
    m.complete()?;
    println!("mean L1 {l1} over {} samples", data.len());
    Ok(Outcome::Success)
}
