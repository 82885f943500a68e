use std::path::Path;

use anyhow::Result;
use edsf_core::edsf::{build_edsf_from_monotone, build_edsf_from_submodular};
use edsf_core::SetModel;
use serde_json::json;

use super::{read_json, write_json, OracleFile, Outcome};
use crate::manifest::RunManifest;
use crate::{ConstructArgs, ConstructMode};

pub fn run(out: &Path, args: &ConstructArgs) -> Result<Outcome> {
    let oracle: OracleFile = read_json(&args.oracle)?;
    let f = oracle.as_set_function();
    let (model, report) = match args.mode {
        ConstructMode::Submodular => build_edsf_from_submodular::<f64, _>(f)?,
        ConstructMode::Monotone => build_edsf_from_monotone::<f64, _>(f)?,
    };
    let mode = format!("{:?}", args.mode).to_lowercase();
    let mut m = RunManifest::begin(
        out,
        "construct",
        json!({"oracle": args.oracle, "mode": mode}),
    )?;
    write_json(&m.output("model.json"), &SetModel::Edsf(model))?;
    write_json(&m.output("construction.json"), &report)?;
    m.set_summary(serde_json::to_value(&report)?);
    m.complete()?;
    println!(
        "n {} components {} max abs error {:e}",
        report.n, report.r, report.max_abs_error
    );
    Ok(Outcome::Success)
}
