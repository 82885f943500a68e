use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use edsf_core::dsf::DsfNetwork;
use edsf_core::experiment::{
    run_welfare_trial, welfare_seed, Summary, WelfareMethod, WelfareSetup, WelfareTrial,
};
use edsf_core::rng::derive_seed;
use edsf_core::setfn::SetFunction;
use edsf_core::welfare::{
    brute_force_optimal, continuous_greedy, efficiency, gradient_ascent, round_allocation,
    social_welfare_discrete, RoundMode, BRUTE_FORCE_MAX_ASSIGNMENTS,
};
use edsf_core::SetModel;
use serde_json::json;

use super::{apply_overrides, read_json, read_model, OracleFile, Outcome};
use crate::manifest::RunManifest;
use crate::{MethodArg, Precision, WelfareArgs};

/// Rounding stream below a trial seed; the generated trials use the same one.
const ROUND_STREAM: u64 = 4;
const CG_STREAM: u64 = 5;

fn method_of(m: MethodArg) -> WelfareMethod {
    match m {
        MethodArg::Ga => WelfareMethod::Ga,
        MethodArg::GaExact => WelfareMethod::GaExact,
        MethodArg::Cg => WelfareMethod::Cg,
        MethodArg::Brute => WelfareMethod::Brute,
    }
}

fn load_setup(args: &WelfareArgs) -> Result<WelfareSetup> {
    let mut setup: WelfareSetup = match &args.config {
        Some(p) => read_json(p)?,
        None => WelfareSetup::default(),
    };
    if let Some(u) = args.users {
        setup.users = u;
    }
    if let Some(i) = args.items {
        setup.items = i;
    }
    if let Some(u) = args.universe {
        setup.universe = u;
    }
    if let Some(p) = &args.probs {
        setup.probs = p.clone();
    }
    if let Some(s) = args.samples {
        setup.samples = s;
    }
    if let Some(e) = args.eta {
        setup.ga.eta = e;
    }
    if let Some(s) = args.ga_steps {
        setup.ga.steps = s;
    }
    if let Some(s) = args.cg_steps {
        setup.cg.steps = s;
    }
    if let Some(s) = args.cg_samples {
        setup.cg.samples = s;
    }
    apply_overrides(&mut setup.train, &args.train)?;
    Ok(setup)
}

pub fn run(out: &Path, args: &WelfareArgs) -> Result<Outcome> {
    let setup = load_setup(args)?;
    let method = method_of(args.method);
    let from_files = !args.oracles.is_empty();
    if !from_files && !args.models.is_empty() {
        bail!("--models needs --oracles to score the allocation");
    }
    if !from_files && args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let config = json!({
        "method": method.name(),
        "trials": args.trials,
        "seed": args.seed,
        "precision": format!("{:?}", args.precision).to_lowercase(),
        "models": args.models,
        "oracles": args.oracles,
        "setup": setup,
    });
    let mut m = RunManifest::begin(out, "welfare", config)?;
    let trials_path = m.output("trials.jsonl");
    let mut sink = BufWriter::new(
        File::create(&trials_path)
            .with_context(|| format!("creating {}", trials_path.display()))?,
    );
    let mut all = Vec::new();
    if from_files {
        let t = file_trial(args, &setup, method)?;
        writeln!(sink, "{}", serde_json::to_string(&t)?)?;
        all.push(t);
    } else {
        for trial in 0..args.trials {
            let seed = welfare_seed(args.seed, trial);
            let t = match args.precision {
                Precision::F32 => run_welfare_trial::<f32>(&setup, method, trial, seed)?,
                Precision::F64 => run_welfare_trial::<f64>(&setup, method, trial, seed)?,
            };
            println!(
                "trial {trial}: welfare {:.3} optimum {} efficiency {}",
                t.predicted_sw,
                fmt_opt(t.optimal_sw),
                fmt_opt(t.efficiency.map(|e| 100.0 * e)),
            );
            writeln!(sink, "{}", serde_json::to_string(&t)?)?;
            sink.flush()?;
            all.push(t);
        }
    }
    sink.flush()?;
    drop(sink);
    let row = aggregate(&all);
    write_aggregate(&m.output("aggregate.csv"), &row)?;
    m.set_summary(serde_json::to_value(&row)?);
    m.complete()?;
    Ok(Outcome::Success)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.3}"))
}

#[derive(serde::Serialize)]
struct AggregateRow {
    method: String,
    trials: usize,
    predicted_sw: Option<Summary>,
    optimal_sw: Option<Summary>,
    efficiency: Option<Summary>,
    argmax_sw: Option<Summary>,
}

/// Mean and spread over trials, mirroring the Average row of a welfare table.
fn aggregate(trials: &[WelfareTrial]) -> AggregateRow {
    let collect = |f: &dyn Fn(&WelfareTrial) -> Option<f64>| -> Option<Summary> {
        let v: Vec<f64> = trials.iter().filter_map(f).collect();
        Summary::of(&v)
    };
    AggregateRow {
        method: trials.first().map(|t| t.method.clone()).unwrap_or_default(),
        trials: trials.len(),
        predicted_sw: collect(&|t| Some(t.predicted_sw)),
        optimal_sw: collect(&|t| t.optimal_sw),
        efficiency: collect(&|t| t.efficiency),
        argmax_sw: collect(&|t| t.argmax_sw),
    }
}

fn write_aggregate(path: &Path, r: &AggregateRow) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record([
        "method",
        "trials",
        "predicted_sw_mean",
        "predicted_sw_std",
        "optimal_sw_mean",
        "efficiency_mean",
        "efficiency_std",
        "argmax_sw_mean",
    ])?;
    let cell = |s: &Option<Summary>, std: bool| {
        s.as_ref().map_or_else(String::new, |s| {
            if std { s.std } else { s.mean }.to_string()
        })
    };
    w.write_record([
        r.method.clone(),
        r.trials.to_string(),
        cell(&r.predicted_sw, false),
        cell(&r.predicted_sw, true),
        cell(&r.optimal_sw, false),
        cell(&r.efficiency, false),
        cell(&r.efficiency, true),
        cell(&r.argmax_sw, false),
    ])?;
    w.flush()?;
    Ok(())
}

/// One allocation for valuations read from disk. Learned models drive
/// gradient ascent; the oracles score every method.
fn file_trial(
    args: &WelfareArgs,
    setup: &WelfareSetup,
    method: WelfareMethod,
) -> Result<WelfareTrial> {
    let oracles: Vec<OracleFile> = args
        .oracles
        .iter()
        .map(|p| read_json(p))
        .collect::<Result<_>>()?;
    let fns: Vec<&dyn SetFunction<f64>> = oracles.iter().map(|o| o.as_set_function()).collect();
    let items = fns[0].ground_size();
    if fns.iter().any(|f| f.ground_size() != items) {
        bail!("all oracles must share one ground set");
    }
    let users = fns.len() as u64;
    let optimal = match users.checked_pow(items as u32) {
        Some(c) if c <= BRUTE_FORCE_MAX_ASSIGNMENTS => Some(brute_force_optimal(&fns)?),
        _ => None,
    };
    let seed = args.seed;
    let mut argmax_sw = None;
    let (assignment, predicted) = match method {
        WelfareMethod::Brute => optimal
            .clone()
            .context("too many assignments for exhaustive search")?,
        WelfareMethod::Cg => {
            let r = continuous_greedy(&fns, &setup.cg, derive_seed(seed, CG_STREAM))?;
            (r.assignment, r.welfare)
        }
        WelfareMethod::Ga | WelfareMethod::GaExact => {
            let models: Vec<SetModel<f64>> = if method == WelfareMethod::Ga {
                if args.models.len() != oracles.len() {
                    bail!(
                        "--models needs one file per oracle, got {} for {}",
                        args.models.len(),
                        oracles.len()
                    );
                }
                args.models
                    .iter()
                    .map(|p| read_model(p))
                    .collect::<Result<_>>()?
            } else {
                oracles
                    .iter()
                    .map(|o| match o {
                        OracleFile::Coverage(c) => Ok(SetModel::Dsf(DsfNetwork::from_coverage(c)?)),
                        OracleFile::Cut(_) => {
                            bail!("exact encodings exist only for coverage oracles")
                        }
                    })
                    .collect::<Result<_>>()?
            };
            if models.iter().any(|m| m.input_dim() != items) {
                bail!("models and oracles disagree on the number of items");
            }
            let res = gradient_ascent(&models, &setup.ga)?;
            let sampled = round_allocation(
                &res.allocation,
                RoundMode::Sample,
                derive_seed(seed, ROUND_STREAM),
            );
            let argmax = round_allocation(&res.allocation, RoundMode::Argmax, 0);
            argmax_sw = Some(social_welfare_discrete(&fns, &argmax)?);
            let sw = social_welfare_discrete(&fns, &sampled)?;
            (sampled, sw)
        }
    };
    let optimal_sw = optimal.map(|(_, v)| v);
    let eff = match optimal_sw {
        Some(opt) if opt > 0.0 => Some(efficiency(predicted, opt)?),
        _ => None,
    };
    println!(
        "welfare {predicted:.3} optimum {} efficiency {}",
        fmt_opt(optimal_sw),
        fmt_opt(eff.map(|e| 100.0 * e))
    );
    Ok(WelfareTrial {
        method: method.name().into(),
        trial: 0,
        seed,
        predicted_sw: predicted,
        optimal_sw,
        efficiency: eff,
        assignment: assignment.owner().to_vec(),
        argmax_sw,
        model_test_l1: None,
    })
}
