use std::path::Path;

use anyhow::Result;
use edsf_core::verify::{run_verification, Status, VerifyConfig};
use serde_json::json;

use super::{read_json, write_json, Outcome};
use crate::manifest::RunManifest;
use crate::VerifyArgs;

pub fn run(out: &Path, args: &VerifyArgs) -> Result<Outcome> {
    let mut cfg: VerifyConfig = match &args.config {
        Some(p) => read_json(p)?,
        None => VerifyConfig::default(),
    };
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(f) = args.functions {
        cfg.functions = f;
    }
    if let Some(s) = args.samples {
        cfg.samples = s;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.inject_bug |= args.inject_bug;

    let mut m = RunManifest::begin(out, "verify", serde_json::to_value(&cfg)?)?;
    let report = run_verification(&cfg)?;
    write_json(&m.output("verify.json"), &report)?;

    let width = report
        .results
        .iter()
        .map(|r| r.name.len())
        .max()
        .unwrap_or(8);
    println!(
        "{:<width$}  {:<7}  {:>9}  detail",
        "property", "status", "instances"
    );
    for r in &report.results {
        let status = match r.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        };
        println!(
            "{:<width$}  {:<7}  {:>9}  {}",
            r.name, status, r.instances, r.detail
        );
        if let Some(w) = &r.witness {
            println!("{:<width$}  witness: {w}", "");
        }
    }
    let failed: Vec<&str> = report
        .results
        .iter()
        .filter(|r| r.status == Status::Fail)
        .map(|r| r.name.as_str())
        .collect();
    m.set_summary(json!({"all_passed": report.all_passed(), "failed": failed}));
    m.complete()?;
    Ok(if report.all_passed() {
        Outcome::Success
    } else {
        Outcome::PropertyFailure
    })
}
