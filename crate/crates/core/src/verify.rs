//! The property suite behind the `verify` command: exact constructions,
//! polytope identities, concavity audits and DSF submodularity, each on a
//! batch of seeded random instances.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dsf::{init_dsf, Activation, DsfLayer, DsfNetwork};
use crate::edsf::{
    build_edsf_from_monotone, build_edsf_from_submodular, build_ga, check_concavity,
    check_input_monotone, check_supergradient, EdsfModel, CONSTRUCTION_MAX_N,
};
use crate::error::{Error, Result};
use crate::polymatroid::{
    greedy_vertex, membership, verify_lemma_ga, verify_lemma_intersection, verify_lemma_min,
    PolymatroidOracle, LEMMA_CHECK_MAX_N,
};
use crate::rng::{derive_seed, seeded};
use crate::setfn::{
    check_monotone, check_submodular, gen_erdos_renyi, gen_random_coverage, gen_random_monotone,
    tabulate, FnOracle, ItemSubset, Modular, SetFunction, TabulatedFunction, Verdict,
    RANDOM_MONOTONE_MAX_N, SUBMODULAR_CHECK_MAX_N,
};

/// `g_A` gadgets checked per oracle when `2^n` is larger.
const MAX_GADGETS_PER_ORACLE: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub n: usize,
    /// Random oracles per property.
    pub functions: usize,
    /// Sampled points per polytope comparison and per audit.
    pub samples: usize,
    pub seed: u64,
    /// Adds a DSF with one negated weight to the submodularity check.
    pub inject_bug: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n: 4,
            functions: 50,
            samples: 10_000,
            seed: 1,
            inject_bug: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub status: Status,
    pub instances: usize,
    pub detail: String,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub results: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.status != Status::Fail)
    }
}

struct Row {
    name: &'static str,
    instances: usize,
    detail: String,
    failure: Option<String>,
}

impl Row {
    fn new(name: &'static str) -> Self {
        Row {
            name,
            instances: 0,
            detail: String::new(),
            failure: None,
        }
    }

    fn fail(&mut self, what: String) {
        if self.failure.is_none() {
            self.failure = Some(what);
        }
    }

    fn finish(self) -> PropertyResult {
        PropertyResult {
            name: self.name.into(),
            status: if self.failure.is_some() {
                Status::Fail
            } else {
                Status::Pass
            },
            instances: self.instances,
            detail: self.detail,
            witness: self.failure,
        }
    }
}

fn skipped(name: &str, why: String) -> PropertyResult {
    PropertyResult {
        name: name.into(),
        status: Status::Skipped,
        instances: 0,
        detail: why,
        witness: None,
    }
}

/// Structured oracles: modular, truncated cardinalities and a modified cut
/// function.
fn structured_oracles(n: usize, seed: u64) -> Result<Vec<(String, TabulatedFunction<f64>)>> {
    let mut rng = seeded(seed);
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..5.0)).collect();
    let mut out = vec![("modular".to_string(), tabulate(&Modular::new(w)?)?)];
    for k in 1..=n.min(3) {
        let f = FnOracle::new(n, move |s: ItemSubset| s.len().min(k) as f64);
        out.push((format!("min(|A|,{k})"), tabulate(&f)?));
    }
    let g = gen_erdos_renyi(n, 0.5, derive_seed(seed, 1))?;
    out.push(("cut".to_string(), tabulate(&g)?));
    Ok(out)
}

fn random_orders(n: usize, a: ItemSubset, rng: &mut crate::rng::Rng) -> Vec<usize> {
    let mut order: Vec<usize> = a.iter().collect();
    order.shuffle(rng);
    debug_assert!(order.iter().all(|&i| i < n));
    order
}

/// A DSF with a negated output weight on a capped node:
/// `f(A) = 2|A| - min(|A|, 1)`, which is supermodular at the empty set.
fn injected_bug(n: usize) -> Result<DsfNetwork<f64>> {
    let mut w1 = Array2::zeros((n + 1, n));
    let mut acts = vec![Activation::MinCap { alpha: 1.0 }];
    for j in 0..n {
        w1[[0, j]] = 1.0;
        w1[[j + 1, j]] = 2.0;
        acts.push(Activation::Identity);
    }
    let hidden = DsfLayer::new(w1, Array1::zeros(n + 1), acts)?;
    let mut out = DsfLayer::uniform(
        Array2::ones((1, n + 1)),
        Array1::zeros(1),
        Activation::Identity,
    )?;
    out.params_mut().0[[0, 0]] = -1.0;
    Ok(DsfNetwork::from_parts_unchecked(n, vec![hidden, out]))
}

/// Runs every property; a violated property is a `Fail` row, not an error.
pub fn run_verification(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let n = cfg.n;
    if n == 0 || n > CONSTRUCTION_MAX_N {
        return Err(Error::TooLarge {
            what: "verification suite",
            n,
            limit: CONSTRUCTION_MAX_N,
        });
    }
    if cfg.functions == 0 || cfg.samples == 0 {
        return Err(Error::InvalidParameter(
            "functions and samples must be >= 1".into(),
        ));
    }
    let root = cfg.seed;
    let coverage: Vec<TabulatedFunction<f64>> = (0..cfg.functions)
        .map(|i| {
            tabulate(&gen_random_coverage::<f64>(
                n,
                20,
                0.3,
                derive_seed(root, i as u64),
            )?)
        })
        .collect::<Result<_>>()?;
    let mut results = Vec::new();

    // exact representation of submodular functions
    let mut row = Row::new("exact_submodular");
    let mut worst = 0.0f64;
    let mut constructed = Vec::new();
    let structured = structured_oracles(n, derive_seed(root, 10_000))?;
    let labelled = coverage
        .iter()
        .enumerate()
        .map(|(i, f)| (format!("coverage #{i}"), f.clone()))
        .chain(structured);
    for (label, f) in labelled {
        row.instances += 1;
        match build_edsf_from_submodular(&f) {
            Ok((m, rep)) => {
                worst = worst.max(rep.max_abs_error);
                if constructed.len() < cfg.functions {
                    constructed.push(m);
                }
            }
            Err(e) => row.fail(format!("{label}: {e}")),
        }
    }
    row.detail = format!("max abs error {worst:e}");
    results.push(row.finish());

    // exact representation of monotone functions
    if n <= RANDOM_MONOTONE_MAX_N {
        let mut row = Row::new("exact_monotone");
        let mut worst = 0.0f64;
        for i in 0..cfg.functions {
            row.instances += 1;
            let f: TabulatedFunction<f64> =
                gen_random_monotone(n, derive_seed(root, 20_000 + i as u64))?;
            match build_edsf_from_monotone(&f) {
                Ok((_, rep)) => worst = worst.max(rep.max_abs_error),
                Err(e) => row.fail(format!("fixture #{i}: {e}")),
            }
        }
        row.detail = format!("max abs error {worst:e}");
        results.push(row.finish());
    } else {
        results.push(skipped(
            "exact_monotone",
            format!("n > {RANDOM_MONOTONE_MAX_N}"),
        ));
    }

    // greedy vertices attain f(A) inside P_f
    let mut rng = seeded(derive_seed(root, 30_000));
    let mut row = Row::new("greedy_vertex");
    for (i, f) in coverage.iter().enumerate() {
        let p = PolymatroidOracle::from_table(f.clone())?;
        for _ in 0..8 {
            row.instances += 1;
            let a = ItemSubset::new(n, rng.gen::<u64>() & ((1u64 << n) - 1))?;
            let order = random_orders(n, a, &mut rng);
            match greedy_vertex(f, a, &order) {
                Ok(x) => {
                    let xa: f64 = a.iter().map(|j| x[j]).sum();
                    if xa != f.value(a) || !membership(&p, &x)? {
                        row.fail(format!("coverage #{i}, A = {a:?}: x = {x:?}, x(A) = {xa}"));
                    }
                }
                Err(e) => row.fail(format!("coverage #{i}, A = {a:?}: {e}")),
            }
        }
    }
    results.push(row.finish());

    if n <= LEMMA_CHECK_MAX_N {
        let mut row = Row::new("lemma_ga");
        let mut points = 0;
        for (i, f) in coverage.iter().enumerate() {
            let mut sets: Vec<ItemSubset> = ItemSubset::all(n).collect();
            if sets.len() > MAX_GADGETS_PER_ORACLE {
                sets.shuffle(&mut rng);
                sets.truncate(MAX_GADGETS_PER_ORACLE);
            }
            for a in sets {
                row.instances += 1;
                let r = verify_lemma_ga(f, a, cfg.samples, derive_seed(root, 40_000 + i as u64))?;
                points += r.points;
                if let Verdict::Violated(w) = r.verdict {
                    row.fail(format!("coverage #{i}, A = {a:?}: {w:?}"));
                }
            }
        }
        row.detail = format!("{points} points");
        results.push(row.finish());

        let mut row = Row::new("lemma_intersection");
        let mut points = 0;
        for (i, f) in coverage.iter().enumerate() {
            row.instances += 1;
            let r =
                verify_lemma_intersection(f, cfg.samples, derive_seed(root, 50_000 + i as u64))?;
            points += r.points;
            if let Verdict::Violated(w) = r.verdict {
                row.fail(format!("coverage #{i}: {w:?}"));
            }
        }
        row.detail = format!("{points} points");
        results.push(row.finish());

        let mut row = Row::new("lemma_min");
        let mut points = 0;
        for (i, f) in coverage.iter().enumerate() {
            let g = &coverage[(i + 1) % coverage.len()];
            let family: Vec<TabulatedFunction<f64>> = ItemSubset::all(n)
                .skip(1)
                .take(MAX_GADGETS_PER_ORACLE)
                .map(|a| tabulate(&build_ga(f, a)?))
                .collect::<Result<_>>()?;
            for (label, fs) in [("pair", vec![f.clone(), g.clone()]), ("g_A family", family)] {
                row.instances += 1;
                let r = verify_lemma_min(&fs, cfg.samples, derive_seed(root, 60_000 + i as u64))?;
                points += r.points;
                if let Verdict::Violated(w) = r.verdict {
                    row.fail(format!("coverage #{i} {label}: {w:?}"));
                }
            }
        }
        row.detail = format!("{points} points");
        results.push(row.finish());
    } else {
        for name in ["lemma_ga", "lemma_intersection", "lemma_min"] {
            results.push(skipped(name, format!("n > {LEMMA_CHECK_MAX_N}")));
        }
    }

    results.extend(audit_rows(
        &constructed,
        cfg.samples,
        derive_seed(root, 70_000),
    )?);
    results.extend(dsf_rows(cfg, derive_seed(root, 80_000))?);
    Ok(VerifyReport {
        config: cfg.clone(),
        results,
    })
}

/// Concavity, input monotonicity and supergradient audits on the given
/// models, at most `samples` trials each.
pub fn audit_rows(
    models: &[EdsfModel<f64>],
    samples: usize,
    seed: u64,
) -> Result<Vec<PropertyResult>> {
    let mut conc = Row::new("concavity");
    let mut mono = Row::new("input_monotone");
    let mut sup = Row::new("supergradient");
    let sup_trials = samples.min(1_000);
    for (i, m) in models.iter().enumerate() {
        let s = derive_seed(seed, i as u64);
        let box_max = 2.0;
        conc.instances += 1;
        if let Verdict::Violated(w) = check_concavity(m, samples, box_max, s)? {
            conc.fail(format!("model #{i}: {w:?}"));
        }
        mono.instances += 1;
        if let Verdict::Violated(w) = check_input_monotone(m, samples, box_max, s)? {
            mono.fail(format!("model #{i}: {w:?}"));
        }
        sup.instances += 1;
        if let Verdict::Violated(w) = check_supergradient(m, sup_trials, box_max, s)? {
            sup.fail(format!("model #{i}: {w:?}"));
        }
    }
    conc.detail = format!("{samples} trials per model");
    mono.detail = format!("{samples} trials per model");
    sup.detail = format!("{sup_trials} trials per model");
    Ok(vec![conc.finish(), mono.finish(), sup.finish()])
}

fn dsf_rows(cfg: &VerifyConfig, seed: u64) -> Result<Vec<PropertyResult>> {
    let n = cfg.n;
    if n > SUBMODULAR_CHECK_MAX_N {
        return Ok(vec![skipped(
            "dsf_submodular",
            format!("n > {SUBMODULAR_CHECK_MAX_N}"),
        )]);
    }
    let acts = [
        Activation::MinCap { alpha: 0.5 },
        Activation::Sqrt,
        Activation::Log1p,
        Activation::Identity,
    ];
    let mut nets = Vec::new();
    for i in 0..cfg.functions {
        let act = acts[i % acts.len()];
        nets.push((
            format!("random #{i}"),
            init_dsf(&[n, 6, 4, 1], act, derive_seed(seed, i as u64))?,
        ));
    }
    if cfg.inject_bug {
        nets.push(("injected negated weight".to_string(), injected_bug(n)?));
    }
    let mut sub = Row::new("dsf_submodular");
    let mut mono = Row::new("dsf_monotone");
    for (label, net) in &nets {
        sub.instances += 1;
        mono.instances += 1;
        if let Verdict::Violated(w) = check_submodular(net)? {
            sub.fail(format!("{label}: {w:?}"));
        }
        if let Verdict::Violated(w) = check_monotone(net)? {
            mono.fail(format!("{label}: {w:?}"));
        }
    }
    Ok(vec![sub.finish(), mono.finish()])
}
