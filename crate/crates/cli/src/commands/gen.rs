use std::path::Path;

use anyhow::Result;
use edsf_core::learn::gen_dataset;
use edsf_core::rng::derive_seed;
use edsf_core::setfn::{gen_erdos_renyi, gen_random_coverage};
use serde_json::json;

use super::{write_dataset, write_json, OracleFile, Outcome};
use crate::manifest::RunManifest;
use crate::{DataArgs, GenArgs, GenKind};

/// Oracle and dataset seeds are derived from the root seed on separate
/// streams, matching the learning pipeline.
const ORACLE_STREAM: u64 = 0;
const DATASET_STREAM: u64 = 1;

pub fn run(out: &Path, args: &GenArgs) -> Result<Outcome> {
    let (config, data) = match &args.kind {
        GenKind::Coverage {
            items,
            universe,
            p,
            data,
        } => (
            json!({"kind": "coverage", "items": items, "universe": universe, "p": p,
                   "samples": data.samples, "inclusion_p": data.inclusion_p, "seed": data.seed}),
            data,
        ),
        GenKind::Cut { vertices, p, data } => (
            json!({"kind": "cut", "vertices": vertices, "p": p,
                   "samples": data.samples, "inclusion_p": data.inclusion_p, "seed": data.seed}),
            data,
        ),
    };
    let DataArgs {
        samples,
        inclusion_p,
        seed,
    } = *data;
    let oracle_seed = derive_seed(seed, ORACLE_STREAM);
    // validate everything before the manifest exists
    let oracle = match &args.kind {
        GenKind::Coverage {
            items, universe, p, ..
        } => OracleFile::Coverage(gen_random_coverage(*items, *universe, *p, oracle_seed)?),
        GenKind::Cut { vertices, p, .. } => {
            OracleFile::Cut(gen_erdos_renyi(*vertices, *p, oracle_seed)?)
        }
    };
    let ds = gen_dataset(
        oracle.as_set_function(),
        samples,
        inclusion_p,
        derive_seed(seed, DATASET_STREAM),
    )?;

    let mut m = RunManifest::begin(out, "gen", config)?;
    write_json(&m.output("oracle.json"), &oracle)?;
    write_dataset(&m.output("dataset.jsonl"), &ds)?;
    let targets = ds.targets();
    let mean = targets.iter().sum::<f64>() / targets.len().max(1) as f64;
    m.set_summary(json!({"n": ds.n(), "samples": ds.len(), "target_mean": mean}));
    m.complete()?;
    println!(
        "wrote {} samples over {} items to {}",
        ds.len(),
        ds.n(),
        out.display()
    );
    Ok(Outcome::Success)
}
