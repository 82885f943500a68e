//! Acceptance criteria C1 to C12, one PASS/FAIL line each.
//!
//! `cargo test -p edsf-core --release --test acceptance -- C1 C5` runs a
//! subset. The process exits 0 after printing every line unless
//! `EDSF_ACCEPTANCE_STRICT` is set, in which case any FAIL exits 1.

mod common;

use std::time::Instant;

use edsf_core::dsf::{init_dsf, Activation, DsfNetwork};
use edsf_core::edsf::{
    build_edsf_from_monotone, build_edsf_from_submodular, check_concavity, check_input_monotone,
};
use edsf_core::experiment::{
    run_learning, run_welfare_trial, welfare_seed, LearnSetup, OracleSpec, Summary, WelfareMethod,
    WelfareSetup,
};
use edsf_core::learn::{ModelKind, TrainConfig};
use edsf_core::polymatroid::{
    greedy_vertex, verify_lemma_ga, verify_lemma_intersection, verify_lemma_min,
};
use edsf_core::rng::{derive_seed, seeded};
use edsf_core::setfn::{
    check_monotone, check_submodular, gen_erdos_renyi, gen_random_coverage, gen_random_monotone,
    tabulate, FnOracle, GraphSpec, Modular, TabulatedFunction,
};
use edsf_core::welfare::simplex_project;
use edsf_core::{EdsfModel, ItemSubset, SetFunction, SetModel};
use rand::Rng;

const ROOT: u64 = 1;
const EXACT_TOL: f64 = 1e-9;

type Outcome = edsf_core::Result<(bool, String)>;

/// Models built or trained by earlier criteria, rescanned by C12.
#[derive(Default)]
struct Ctx {
    constructed: Vec<EdsfModel<f64>>,
    trained: Vec<SetModel<f64>>,
    /// Test L1 of the five r = 64 coverage runs, reused by C7.
    edsf_r64: Option<Vec<f64>>,
}

struct Criterion {
    id: &'static str,
    title: &'static str,
    run: fn(&mut Ctx) -> Outcome,
}

fn main() {
    let wanted: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .map(|a| a.to_uppercase())
        .collect();
    let criteria = [
        Criterion {
            id: "C1",
            title: "exact submodular representation",
            run: c1,
        },
        Criterion {
            id: "C2",
            title: "exact monotone representation",
            run: c2,
        },
        Criterion {
            id: "C3",
            title: "polymatroid lemmas and greedy vertices",
            run: c3,
        },
        Criterion {
            id: "C4",
            title: "concavity and input monotonicity audits",
            run: c4,
        },
        Criterion {
            id: "C5",
            title: "gradients match central differences",
            run: c5,
        },
        Criterion {
            id: "C6",
            title: "coverage learning, EDSF vs DSF",
            run: c6,
        },
        Criterion {
            id: "C7",
            title: "effect of the number of components",
            run: c7,
        },
        Criterion {
            id: "C8",
            title: "large coverage learning",
            run: c8,
        },
        Criterion {
            id: "C9",
            title: "welfare efficiency of learned valuations",
            run: c9,
        },
        Criterion {
            id: "C10",
            title: "gradient ascent vs continuous greedy",
            run: c10,
        },
        Criterion {
            id: "C11",
            title: "simplex projection",
            run: c11,
        },
        Criterion {
            id: "C12",
            title: "oracle and model monotonicity scans",
            run: c12,
        },
    ];
    let mut ctx = Ctx::default();
    let mut failed = Vec::new();
    let mut ran = 0;
    for c in &criteria {
        if !wanted.is_empty() && !wanted.iter().any(|w| w == c.id) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let (pass, detail) = match (c.run)(&mut ctx) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let secs = start.elapsed().as_secs_f64();
        let status = if pass { "PASS" } else { "FAIL" };
        println!("{status} {} {}: {detail} [{secs:.1}s]", c.id, c.title);
        if !pass {
            failed.push(c.id);
        }
    }
    println!(
        "acceptance: {}/{ran} passed{}",
        ran - failed.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failing: {}", failed.join(", "))
        }
    );
    if !failed.is_empty() && std::env::var_os("EDSF_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}

fn max_table_error(m: &EdsfModel<f64>, f: &dyn SetFunction<f64>) -> edsf_core::Result<f64> {
    let n = f.ground_size();
    let mut worst = 0f64;
    for s in ItemSubset::all(n) {
        worst = worst.max((m.eval_set(s)? - f.value(s)).abs());
    }
    Ok(worst)
}

fn submodular_fixtures() -> edsf_core::Result<Vec<TabulatedFunction<f64>>> {
    let mut out = Vec::new();
    for i in 0..50 {
        out.push(tabulate(&gen_random_coverage::<f64>(
            4,
            20,
            0.3,
            derive_seed(ROOT, i),
        )?)?);
    }
    for w in [[1.0, 2.0, 3.0, 4.0], [0.5, 0.0, 2.0, 1.5], [1.0; 4]] {
        out.push(tabulate(&Modular::new(w.to_vec())?)?);
    }
    for k in 1..=3 {
        out.push(tabulate(&FnOracle::new(4, move |s: ItemSubset| {
            s.len().min(k) as f64
        }))?);
    }
    for s in 0..3 {
        out.push(tabulate::<f64, _>(&gen_erdos_renyi(
            4,
            0.5,
            derive_seed(ROOT, 100 + s),
        )?)?);
    }
    let complete = GraphSpec::new(4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])?;
    out.push(tabulate::<f64, _>(&complete)?);
    Ok(out)
}

fn c1(ctx: &mut Ctx) -> Outcome {
    let start = Instant::now();
    let fixtures = submodular_fixtures()?;
    let mut worst = 0f64;
    for f in &fixtures {
        let (m, report) = build_edsf_from_submodular::<f64, _>(f)?;
        worst = worst.max(report.max_abs_error).max(max_table_error(&m, f)?);
        ctx.constructed.push(m);
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst <= EXACT_TOL && secs < 10.0,
        format!("{} oracles (50 coverage, 10 structured), max abs error {worst:e} <= 1e-9, {secs:.2}s < 10s", fixtures.len()),
    ))
}

fn c2(ctx: &mut Ctx) -> Outcome {
    let start = Instant::now();
    let mut worst = 0f64;
    for i in 0..50 {
        let f = gen_random_monotone::<f64>(4, derive_seed(ROOT, 200 + i))?;
        let (m, report) = build_edsf_from_monotone::<f64, _>(&f)?;
        worst = worst
            .max(report.max_abs_error)
            .max(max_table_error(&m, &f)?);
        ctx.constructed.push(m);
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst <= EXACT_TOL && secs < 10.0,
        format!("50 fixtures, max abs error {worst:e} <= 1e-9, {secs:.2}s < 10s"),
    ))
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, first);
            out.push(p);
        }
    }
    out
}

fn c3(_: &mut Ctx) -> Outcome {
    const SAMPLES: usize = 10_000;
    let start = Instant::now();
    let fs = (0..20)
        .map(|i| {
            tabulate(&gen_random_coverage::<f64>(
                4,
                20,
                0.3,
                derive_seed(ROOT, 300 + i),
            )?)
        })
        .collect::<edsf_core::Result<Vec<_>>>()?;
    let mut disagreements = Vec::new();
    let (mut points, mut vertices, mut prefix_misses) = (0usize, 0usize, 0usize);
    for (i, f) in fs.iter().enumerate() {
        let seed = derive_seed(ROOT, 400 + i as u64);
        for a in ItemSubset::all(4).filter(|a| !a.is_empty()) {
            let r = verify_lemma_ga(f, a, SAMPLES, derive_seed(seed, a.bits()))?;
            points += r.points;
            if !r.is_pass() {
                disagreements.push(format!("g_A oracle {i} A {a:?}"));
            }
            for order in permutations(&a.iter().collect::<Vec<_>>()) {
                // greedy_vertex itself rejects points outside P_f
                let x = greedy_vertex(f, a, &order)?;
                vertices += 1;
                let mut prefix = ItemSubset::empty(4)?;
                let mut sum = 0.0;
                for &j in &order {
                    prefix = prefix.with(j);
                    sum += x[j];
                    if sum != f.value(prefix) {
                        prefix_misses += 1;
                    }
                }
            }
        }
        let r = verify_lemma_intersection(f, SAMPLES, derive_seed(seed, 100))?;
        points += r.points;
        if !r.is_pass() {
            disagreements.push(format!("intersection oracle {i}"));
        }
        let pair = [f.clone(), fs[(i + 1) % fs.len()].clone()];
        let r = verify_lemma_min(&pair, SAMPLES, derive_seed(seed, 101))?;
        points += r.points;
        if !r.is_pass() {
            disagreements.push(format!("min oracle {i}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        disagreements.is_empty() && prefix_misses == 0 && secs < 60.0,
        format!(
            "{points} membership comparisons, {} disagreements {:?}; {vertices} greedy vertices in P_f with {prefix_misses} prefix mismatches; {secs:.1}s < 60s",
            disagreements.len(),
            disagreements.iter().take(3).collect::<Vec<_>>()
        ),
    ))
}

/// Small EDSFs trained on coverage data, in `f64`.
fn small_trained(count: u64) -> edsf_core::Result<Vec<SetModel<f64>>> {
    let setup = LearnSetup {
        oracle: OracleSpec::Coverage {
            n_items: 8,
            universe: 40,
            p: 0.3,
        },
        samples: 256,
        inclusion_p: 0.5,
        train: TrainConfig {
            model: ModelKind::Edsf,
            epochs: 300,
            learning_rate: 1e-2,
            batch_size: 32,
            r: 8,
            layer_widths: vec![16, 16],
            activation: Activation::MinCap { alpha: 95.0 },
            split_ratio: 0.8,
            seed: 0,
        },
    };
    (0..count)
        .map(|s| run_learning::<f64>(&setup, derive_seed(ROOT, 500 + s)).map(|r| r.model))
        .collect()
}

fn c4(ctx: &mut Ctx) -> Outcome {
    const TRIALS: usize = 10_000;
    let mut models: Vec<(String, EdsfModel<f64>)> = Vec::new();
    let constructed = if ctx.constructed.is_empty() {
        let fs = submodular_fixtures()?;
        fs.iter()
            .take(5)
            .map(|f| build_edsf_from_submodular::<f64, _>(f).map(|r| r.0))
            .collect::<edsf_core::Result<Vec<_>>>()?
    } else {
        ctx.constructed.iter().step_by(10).cloned().collect()
    };
    for (i, m) in constructed.into_iter().enumerate() {
        models.push((format!("constructed {i}"), m));
    }
    let trained = small_trained(3)?;
    for (i, m) in trained.iter().enumerate() {
        models.push((format!("trained {i}"), m.clone().into_edsf()));
    }
    ctx.trained.extend(trained);
    let mut failures = Vec::new();
    for (k, (name, m)) in models.iter().enumerate() {
        let seed = derive_seed(ROOT, 600 + k as u64);
        // inputs range over the unit box, where the relaxation lives
        if let Some(w) = check_concavity(m, TRIALS, 1.0, seed)?.witness() {
            failures.push(format!(
                "{name}: concavity mixed {} < chord {}",
                w.mixed, w.chord
            ));
        }
        if let Some(w) = check_input_monotone(m, TRIALS, 1.0, derive_seed(seed, 1))?.witness() {
            failures.push(format!(
                "{name}: monotonicity {} > {}",
                w.f_lower, w.f_upper
            ));
        }
    }
    Ok((
        failures.is_empty(),
        format!(
            "{} models x {TRIALS} trials each for concavity and monotonicity, margin 1e-9; {} violations {:?}",
            models.len(),
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    ))
}

fn c5(_: &mut Ctx) -> Outcome {
    const POINTS: usize = 1000;
    const H: f64 = 1e-5;
    const MARGIN: f64 = 1e-3;
    let mut rng = seeded(derive_seed(ROOT, 700));
    let acts = [
        Activation::MinCap { alpha: 0.5 },
        Activation::Sqrt,
        Activation::Log1p,
        Activation::Identity,
    ];
    let widths = [6, 5, 4, 1];
    let mut dsfs = Vec::new();
    let mut edsfs = Vec::new();
    for (k, act) in acts.iter().enumerate() {
        let net = init_dsf::<f64>(&widths, *act, derive_seed(ROOT, 710 + k as u64))?;
        dsfs.push(common::with_random_biases(&net, 0.01, 0.3, &mut rng));
        let comps = (0..3)
            .map(|c| {
                init_dsf::<f64>(&widths, *act, derive_seed(ROOT, 720 + 10 * k as u64 + c))
                    .map(|n| common::with_random_biases(&n, 0.01, 0.3, &mut rng))
            })
            .collect::<edsf_core::Result<Vec<DsfNetwork<f64>>>>()?;
        edsfs.push(EdsfModel::new(comps)?);
    }
    let (mut accepted, mut rejected, mut worst) = (0usize, 0usize, 0f64);
    while accepted < POINTS {
        let x: Vec<f64> = (0..widths[0]).map(|_| rng.gen_range(0.0..1.0)).collect();
        let k = accepted % (2 * acts.len());
        let (margin, err) = if k < acts.len() {
            let net = &dsfs[k];
            let m = common::dsf_kink_margin(net, &x);
            (
                m,
                if m >= MARGIN {
                    common::dsf_gradient_error(net, &x, H)
                } else {
                    0.0
                },
            )
        } else {
            let m = &edsfs[k - acts.len()];
            let margin = common::edsf_kink_margin(m, &x);
            (
                margin,
                if margin >= MARGIN {
                    common::edsf_gradient_error(m, &x, H)
                } else {
                    0.0
                },
            )
        };
        if margin < MARGIN {
            rejected += 1;
            if rejected > 100 * POINTS {
                return Ok((false, "could not find points away from kinks".into()));
            }
            continue;
        }
        worst = worst.max(err);
        accepted += 1;
    }
    Ok((
        worst <= 1e-4,
        format!("{POINTS} points over 4 DSFs and 4 EDSFs (h = 1e-5, {rejected} near-kink draws skipped), worst relative error {worst:.2e} <= 1e-4"),
    ))
}

fn learning_config(model: ModelKind, r: usize) -> TrainConfig {
    TrainConfig {
        model,
        epochs: 10_000,
        learning_rate: 1e-3,
        batch_size: 64,
        r,
        layer_widths: vec![64, 64, 64],
        activation: Activation::MinCap { alpha: 95.0 },
        split_ratio: 0.8,
        seed: 0,
    }
}

/// Test L1 of five seeded runs; trained models are kept for C12.
fn learning_runs(
    ctx: &mut Ctx,
    oracle: OracleSpec,
    cfg: TrainConfig,
) -> edsf_core::Result<Vec<f64>> {
    let setup = LearnSetup {
        oracle,
        samples: 1024,
        inclusion_p: 0.5,
        train: cfg,
    };
    let mut out = Vec::new();
    for seed in 1..=5 {
        let run = run_learning::<f32>(&setup, seed)?;
        out.push(run.metrics.test_l1.unwrap_or(f64::NAN));
        ctx.trained.push(run.model.cast());
    }
    Ok(out)
}

fn fmt_list(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.3}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn median(v: &[f64]) -> f64 {
    Summary::of(v).map_or(f64::NAN, |s| s.median)
}

fn c6(ctx: &mut Ctx) -> Outcome {
    let start = Instant::now();
    let oracle = OracleSpec::Coverage {
        n_items: 16,
        universe: 100,
        p: 0.3,
    };
    let edsf = learning_runs(ctx, oracle.clone(), learning_config(ModelKind::Edsf, 64))?;
    let dsf = learning_runs(ctx, oracle, learning_config(ModelKind::Dsf, 1))?;
    let (me, md) = (median(&edsf), median(&dsf));
    ctx.edsf_r64 = Some(edsf.clone());
    let mins = start.elapsed().as_secs_f64() / 60.0;
    Ok((
        me <= 3.0 && md >= 3.0 * me,
        format!(
            "median test L1 EDSF {me:.3} (<= 3.0) [{}], DSF {md:.3} (needs >= {:.3}) [{}], ratio {:.2}; {mins:.1} min",
            fmt_list(&edsf),
            3.0 * me,
            fmt_list(&dsf),
            md / me
        ),
    ))
}

fn c7(ctx: &mut Ctx) -> Outcome {
    let oracle = OracleSpec::Coverage {
        n_items: 16,
        universe: 100,
        p: 0.3,
    };
    let r64 = match ctx.edsf_r64.clone() {
        Some(v) => v,
        None => learning_runs(ctx, oracle.clone(), learning_config(ModelKind::Edsf, 64))?,
    };
    let r1 = learning_runs(ctx, oracle, learning_config(ModelKind::Edsf, 1))?;
    let (m64, m1) = (median(&r64), median(&r1));
    Ok((
        m1 >= 5.0 * m64,
        format!(
            "median test L1 r=1 {m1:.3} [{}], r=64 {m64:.3} [{}], ratio {:.2} (needs >= 5)",
            fmt_list(&r1),
            fmt_list(&r64),
            m1 / m64
        ),
    ))
}

fn c8(ctx: &mut Ctx) -> Outcome {
    let start = Instant::now();
    let oracle = OracleSpec::Coverage {
        n_items: 50,
        universe: 1000,
        p: 0.2,
    };
    let edsf = learning_runs(ctx, oracle.clone(), learning_config(ModelKind::Edsf, 64))?;
    let dsf = learning_runs(ctx, oracle, learning_config(ModelKind::Dsf, 1))?;
    let mean = |v: &[f64]| Summary::of(v).map_or(f64::NAN, |s| s.mean);
    let (me, md) = (mean(&edsf), mean(&dsf));
    let mins = start.elapsed().as_secs_f64() / 60.0;
    Ok((
        me <= 15.0 && md >= 3.0 * me,
        format!(
            "mean test L1 EDSF {me:.3} (<= 15) [{}], DSF {md:.3} (needs >= {:.3}) [{}], ratio {:.2}; {mins:.1} min",
            fmt_list(&edsf),
            3.0 * me,
            fmt_list(&dsf),
            md / me
        ),
    ))
}

/// Training setup for each user's valuation in the welfare experiments.
fn welfare_train(model: ModelKind) -> TrainConfig {
    TrainConfig {
        model,
        epochs: 1000,
        learning_rate: 1e-2,
        batch_size: 64,
        r: 8,
        layer_widths: vec![32, 32],
        activation: Activation::MinCap { alpha: 95.0 },
        split_ratio: 0.8,
        seed: 0,
    }
}

fn welfare_runs(
    setup: &WelfareSetup,
    method: WelfareMethod,
    trials: usize,
) -> edsf_core::Result<Vec<edsf_core::experiment::WelfareTrial>> {
    (0..trials)
        .map(|t| run_welfare_trial::<f32>(setup, method, t, welfare_seed(ROOT, t)))
        .collect()
}

fn c9(_: &mut Ctx) -> Outcome {
    let start = Instant::now();
    let base = WelfareSetup {
        users: 3,
        items: 8,
        universe: 50,
        probs: vec![0.1, 0.3, 0.5],
        ..Default::default()
    };
    let mean_eff = |model: ModelKind| -> edsf_core::Result<(f64, f64)> {
        let setup = WelfareSetup {
            train: welfare_train(model),
            ..base.clone()
        };
        let trials = welfare_runs(&setup, WelfareMethod::Ga, 10)?;
        let eff: Vec<f64> = trials.iter().filter_map(|t| t.efficiency).collect();
        let sw: Vec<f64> = trials.iter().map(|t| t.predicted_sw).collect();
        if eff.len() != trials.len() {
            return Err(edsf_core::Error::InvalidParameter(
                "a trial has no optimum".into(),
            ));
        }
        Ok((
            Summary::of(&eff).map_or(f64::NAN, |s| s.mean),
            Summary::of(&sw).map_or(f64::NAN, |s| s.mean),
        ))
    };
    let (edsf, edsf_sw) = mean_eff(ModelKind::Edsf)?;
    let (dsf, dsf_sw) = mean_eff(ModelKind::Dsf)?;
    let mins = start.elapsed().as_secs_f64() / 60.0;
    Ok((
        edsf >= 0.85 && edsf >= dsf,
        format!(
            "mean efficiency EDSF {:.2}% (mean SW {edsf_sw:.1}) vs DSF {:.2}% (mean SW {dsf_sw:.1}), needs >= 85% and >= DSF; {mins:.1} min",
            100.0 * edsf,
            100.0 * dsf
        ),
    ))
}

fn c10(_: &mut Ctx) -> Outcome {
    let setup = WelfareSetup {
        users: 3,
        items: 16,
        universe: 200,
        probs: vec![0.1, 0.3, 0.5],
        ..Default::default()
    };
    let mean_sw = |m: WelfareMethod| -> edsf_core::Result<f64> {
        let v: Vec<f64> = welfare_runs(&setup, m, 10)?
            .iter()
            .map(|t| t.predicted_sw)
            .collect();
        Ok(Summary::of(&v).map_or(f64::NAN, |s| s.mean))
    };
    let (ga, cg) = (
        mean_sw(WelfareMethod::GaExact)?,
        mean_sw(WelfareMethod::Cg)?,
    );
    let gap = (ga - cg).abs() / cg;
    Ok((
        gap <= 0.05,
        format!(
            "mean SW GA {ga:.2} vs CG {cg:.2} on 10 instances, gap {:.2}% <= 5%",
            100.0 * gap
        ),
    ))
}

/// Exhaustive active-set minimizer of `|w - v|` over the simplex: for each
/// support, the equality-constrained optimum, kept when it is feasible.
fn brute_projection(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let shift = (support.iter().map(|&i| v[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let mut w = vec![0.0; n];
        for &i in &support {
            w[i] = v[i] - shift;
        }
        if w.iter().any(|&x| x < 0.0) {
            continue;
        }
        let d: f64 = w.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, w));
        }
    }
    best.expect("the single-vertex supports always include a feasible point")
        .1
}

fn c11(_: &mut Ctx) -> Outcome {
    const KKT_TOL: f64 = 1e-12;
    let mut rng = seeded(derive_seed(ROOT, 1100));
    let (mut worst, mut kkt_worst) = (0f64, 0f64);
    for _ in 0..1000 {
        let n = rng.gen_range(2..=10);
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let w = simplex_project(&v);
        let b = brute_projection(&v);
        worst = w
            .iter()
            .zip(&b)
            .fold(worst, |m, (x, y)| m.max((x - y).abs()));
        // w_i = max(v_i - theta, 0) for one theta, and sum w = 1
        let theta = w
            .iter()
            .zip(&v)
            .filter(|(x, _)| **x > 0.0)
            .map(|(x, y)| y - x)
            .next()
            .unwrap_or(f64::NAN);
        let mut k = (w.iter().sum::<f64>() - 1.0).abs();
        for (x, y) in w.iter().zip(&v) {
            k = k.max((x - (y - theta).max(0.0)).abs());
            if *x < 0.0 {
                k = f64::INFINITY;
            }
        }
        kkt_worst = kkt_worst.max(k);
    }
    Ok((
        worst <= 1e-6 && kkt_worst <= KKT_TOL,
        format!("1000 vectors, dims 2-10: max deviation from active-set minimizer {worst:.1e} <= 1e-6, KKT residual {kkt_worst:.1e} <= 1e-12"),
    ))
}

/// Monotonicity scan of a model over every subset, evaluated in one batch.
fn model_is_monotone(m: &SetModel<f64>) -> edsf_core::Result<bool> {
    let n = m.input_dim();
    let sets: Vec<ItemSubset> = ItemSubset::all(n).collect();
    let vals = m.eval_sets(&sets)?;
    let table = FnOracle::new(n, move |s: ItemSubset| vals[s.bits() as usize]);
    Ok(check_monotone(&table)?.is_pass())
}

fn c12(ctx: &mut Ctx) -> Outcome {
    let mut oracles = 0usize;
    let mut bad = Vec::new();
    for n in 1..=8 {
        for (k, p) in [0.1, 0.3, 0.5].into_iter().enumerate() {
            for s in 0..3u64 {
                let seed = derive_seed(ROOT, 1200 + 100 * n as u64 + 10 * k as u64 + s);
                let cov = gen_random_coverage::<f64>(n, 30, p, seed)?;
                let cut = gen_erdos_renyi(n, [0.2, 0.5, 0.8][k], seed)?;
                for (name, f) in [("coverage", &cov as &dyn SetFunction<f64>), ("cut", &cut)] {
                    oracles += 1;
                    if !check_monotone(f)?.is_pass() || !check_submodular(f)?.is_pass() {
                        bad.push(format!("{name} n={n} p={p} seed={s}"));
                    }
                }
            }
        }
    }
    if ctx.constructed.is_empty() {
        for f in submodular_fixtures()?.iter().take(10) {
            ctx.constructed
                .push(build_edsf_from_submodular::<f64, _>(f)?.0);
        }
    }
    if ctx.trained.is_empty() {
        ctx.trained = small_trained(2)?;
    }
    let mut scanned = 0usize;
    let mut skipped = 0usize;
    let models = ctx
        .constructed
        .iter()
        .map(|m| SetModel::Edsf(m.clone()))
        .chain(ctx.trained.iter().cloned());
    for (i, m) in models.enumerate() {
        if m.input_dim() > 16 {
            skipped += 1;
            continue;
        }
        scanned += 1;
        if !model_is_monotone(&m)? {
            bad.push(format!("model {i}"));
        }
    }
    Ok((
        bad.is_empty(),
        format!(
            "{oracles} oracles monotone and submodular; {scanned} models scanned over all subsets ({skipped} with n > 16 skipped); {} failures {:?}",
            bad.len(),
            bad.iter().take(3).collect::<Vec<_>>()
        ),
    ))
}
