//! End-to-end pipelines shared by the command-line tool and the acceptance
//! suite. Every random choice derives from one root seed.

use serde::{Deserialize, Serialize};

use crate::dsf::DsfNetwork;
use crate::error::{Error, Result};
use crate::learn::{
    evaluate, gen_dataset, init_model, split, train, Metrics, SampleDataset, TrainConfig,
};
use crate::model::SetModel;
use crate::rng::derive_seed;
use crate::scalar::Scalar;
use crate::setfn::{gen_erdos_renyi, gen_random_coverage, CoverageSpec, GraphSpec, SetFunction};
use crate::welfare::{
    brute_force_optimal, continuous_greedy, efficiency, gradient_ascent, round_allocation,
    social_welfare_discrete, CgConfig, GaConfig, RoundMode, BRUTE_FORCE_MAX_ASSIGNMENTS,
};

/// Seed streams below one trial seed.
mod stream {
    pub const ORACLE: u64 = 0;
    pub const DATASET: u64 = 1;
    pub const SPLIT: u64 = 2;
    pub const INIT: u64 = 3;
    pub const ROUND: u64 = 4;
    pub const CG: u64 = 5;
}

/// Mean, sample standard deviation and median of a list of values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        Some(Summary {
            n,
            mean,
            std: var.sqrt(),
            median,
            min: sorted[0],
            max: sorted[n - 1],
        })
    }
}

/// Which oracle family generates the learning targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleSpec {
    Coverage {
        n_items: usize,
        universe: usize,
        p: f64,
    },
    Cut {
        vertices: usize,
        p: f64,
    },
}

/// A generated oracle.
#[derive(Clone, Debug, PartialEq)]
pub enum Oracle<T> {
    Coverage(CoverageSpec<T>),
    Cut(GraphSpec),
}

impl<T: Scalar> Oracle<T> {
    pub fn generate(spec: &OracleSpec, seed: u64) -> Result<Self> {
        Ok(match *spec {
            OracleSpec::Coverage {
                n_items,
                universe,
                p,
            } => Oracle::Coverage(gen_random_coverage(n_items, universe, p, seed)?),
            OracleSpec::Cut { vertices, p } => Oracle::Cut(gen_erdos_renyi(vertices, p, seed)?),
        })
    }

    pub fn as_set_function(&self) -> &dyn SetFunction<T> {
        match self {
            Oracle::Coverage(c) => c,
            Oracle::Cut(g) => g,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnSetup {
    pub oracle: OracleSpec,
    pub samples: usize,
    pub inclusion_p: f64,
    pub train: TrainConfig,
}

impl Default for LearnSetup {
    fn default() -> Self {
        LearnSetup {
            oracle: OracleSpec::Coverage {
                n_items: 16,
                universe: 100,
                p: 0.3,
            },
            samples: 1024,
            inclusion_p: 0.5,
            train: TrainConfig::default(),
        }
    }
}

/// Everything one learning trial produces.
#[derive(Clone, Debug)]
pub struct LearnRun<T> {
    pub seed: u64,
    /// The generating oracle, when the pipeline created it.
    pub oracle: Option<Oracle<T>>,
    pub train_set: SampleDataset<T>,
    pub test_set: SampleDataset<T>,
    pub model: SetModel<T>,
    pub metrics: Metrics,
}

/// Generates an oracle and a dataset from `seed`, then splits and trains.
pub fn run_learning<T: Scalar>(setup: &LearnSetup, seed: u64) -> Result<LearnRun<T>> {
    let oracle = Oracle::<T>::generate(&setup.oracle, derive_seed(seed, stream::ORACLE))?;
    let data = gen_dataset(
        oracle.as_set_function(),
        setup.samples,
        setup.inclusion_p,
        derive_seed(seed, stream::DATASET),
    )?;
    let mut run = train_on(&data, &setup.train, seed)?;
    run.oracle = Some(oracle);
    Ok(run)
}

/// Splits `data` and trains one model, with split and initialization seeds
/// derived from `seed`.
fn train_on<T: Scalar>(
    data: &SampleDataset<T>,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<LearnRun<T>> {
    let (train_set, test_set) = split(data, cfg.split_ratio, derive_seed(seed, stream::SPLIT))?;
    let cfg = TrainConfig {
        seed: derive_seed(seed, stream::INIT),
        ..cfg.clone()
    };
    let model = init_model::<T>(data.n(), &cfg)?;
    let mut out = train(model, &train_set, &cfg)?;
    out.metrics.test_l1 = Some(evaluate(&out.model, &test_set)?.to_f64_lossy());
    Ok(LearnRun {
        seed,
        oracle: None,
        train_set,
        test_set,
        model: out.model,
        metrics: out.metrics,
    })
}

/// Trains on an existing dataset.
pub fn run_learning_on<T: Scalar>(
    data: &SampleDataset<T>,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<LearnRun<T>> {
    train_on(data, cfg, seed)
}

/// How the welfare optimizer sees the users' valuations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WelfareMethod {
    /// Gradient ascent on models trained from samples of each valuation.
    Ga,
    /// Gradient ascent on the exact DSF encoding of each coverage oracle.
    GaExact,
    /// Continuous greedy on the oracles.
    Cg,
    /// Exhaustive search on the oracles.
    Brute,
}

impl WelfareMethod {
    pub fn name(self) -> &'static str {
        match self {
            WelfareMethod::Ga => "ga",
            WelfareMethod::GaExact => "gaexact",
            WelfareMethod::Cg => "cg",
            WelfareMethod::Brute => "brute",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WelfareSetup {
    pub users: usize,
    pub items: usize,
    pub universe: usize,
    /// Coverage membership probability of each user; a single entry applies
    /// to every user.
    pub probs: Vec<f64>,
    /// Samples per user for learned valuations.
    pub samples: usize,
    pub inclusion_p: f64,
    pub train: TrainConfig,
    pub ga: GaConfig,
    pub cg: CgConfig,
}

impl Default for WelfareSetup {
    fn default() -> Self {
        WelfareSetup {
            users: 3,
            items: 8,
            universe: 50,
            probs: vec![0.1, 0.3, 0.5],
            samples: 1024,
            inclusion_p: 0.5,
            train: TrainConfig::default(),
            ga: GaConfig::default(),
            cg: CgConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WelfareTrial {
    pub method: String,
    pub trial: usize,
    pub seed: u64,
    /// Welfare on the true valuations at the reported assignment.
    pub predicted_sw: f64,
    pub optimal_sw: Option<f64>,
    pub efficiency: Option<f64>,
    pub assignment: Vec<usize>,
    /// Welfare of the argmax rounding, for gradient ascent.
    pub argmax_sw: Option<f64>,
    /// Mean test L1 of the learned valuations, for learned gradient ascent.
    pub model_test_l1: Option<f64>,
}

/// The users' coverage valuations of one trial.
pub fn welfare_oracles<T: Scalar>(setup: &WelfareSetup, seed: u64) -> Result<Vec<CoverageSpec<T>>> {
    if setup.users == 0 || setup.items == 0 {
        return Err(Error::InvalidParameter(
            "need at least one user and one item".into(),
        ));
    }
    if setup.probs.len() != 1 && setup.probs.len() != setup.users {
        return Err(Error::InvalidParameter(format!(
            "{} probabilities for {} users; give one per user or a single shared value",
            setup.probs.len(),
            setup.users
        )));
    }
    (0..setup.users)
        .map(|u| {
            gen_random_coverage(
                setup.items,
                setup.universe,
                setup.probs[u.min(setup.probs.len() - 1)],
                derive_seed(derive_seed(seed, stream::ORACLE), u as u64),
            )
        })
        .collect()
}

/// One trial of `method` on the valuations generated from `seed`. Learned
/// models are trained in `T` and optimized in `f64`.
pub fn run_welfare_trial<T: Scalar>(
    setup: &WelfareSetup,
    method: WelfareMethod,
    trial: usize,
    seed: u64,
) -> Result<WelfareTrial> {
    let oracles = welfare_oracles::<f64>(setup, seed)?;
    let n = setup.users as u64;
    let optimal = if n
        .checked_pow(setup.items as u32)
        .is_some_and(|c| c <= BRUTE_FORCE_MAX_ASSIGNMENTS)
    {
        Some(brute_force_optimal(&oracles)?)
    } else {
        None
    };
    let round_seed = derive_seed(seed, stream::ROUND);
    let mut argmax_sw = None;
    let mut model_test_l1 = None;
    let (assignment, predicted) = match method {
        WelfareMethod::Brute => optimal.clone().ok_or_else(|| Error::TooLarge {
            what: "exhaustive welfare search",
            n: setup.items,
            limit: (BRUTE_FORCE_MAX_ASSIGNMENTS as f64).log(setup.users.max(2) as f64) as usize,
        })?,
        WelfareMethod::Cg => {
            let r = continuous_greedy(&oracles, &setup.cg, derive_seed(seed, stream::CG))?;
            (r.assignment, r.welfare)
        }
        WelfareMethod::Ga | WelfareMethod::GaExact => {
            let models: Vec<SetModel<f64>> = if method == WelfareMethod::GaExact {
                oracles
                    .iter()
                    .map(|c| DsfNetwork::from_coverage(c).map(SetModel::Dsf))
                    .collect::<Result<_>>()?
            } else {
                let mut losses = Vec::with_capacity(oracles.len());
                let mut models = Vec::with_capacity(oracles.len());
                for (u, c) in oracles.iter().enumerate() {
                    let c_t: CoverageSpec<T> = cast_coverage(c)?;
                    let user_seed = derive_seed(seed, 100 + u as u64);
                    let data = gen_dataset(
                        &c_t,
                        setup.samples,
                        setup.inclusion_p,
                        derive_seed(user_seed, stream::DATASET),
                    )?;
                    let run = train_on(&data, &setup.train, user_seed)?;
                    losses.push(run.metrics.test_l1.unwrap_or(f64::NAN));
                    models.push(run.model.cast::<f64>());
                }
                model_test_l1 = Summary::of(&losses).map(|s| s.mean);
                models
            };
            let res = gradient_ascent(&models, &setup.ga)?;
            let sampled = round_allocation(&res.allocation, RoundMode::Sample, round_seed);
            let argmax = round_allocation(&res.allocation, RoundMode::Argmax, round_seed);
            argmax_sw = Some(social_welfare_discrete(&oracles, &argmax)?);
            let sw = social_welfare_discrete(&oracles, &sampled)?;
            (sampled, sw)
        }
    };
    let optimal_sw = optimal.map(|(_, v)| v);
    let efficiency = match optimal_sw {
        Some(opt) if opt > 0.0 => Some(efficiency(predicted, opt)?),
        _ => None,
    };
    Ok(WelfareTrial {
        method: method.name().into(),
        trial,
        seed,
        predicted_sw: predicted,
        optimal_sw,
        efficiency,
        assignment: assignment.owner().to_vec(),
        argmax_sw,
        model_test_l1,
    })
}

fn cast_coverage<T: Scalar>(c: &CoverageSpec<f64>) -> Result<CoverageSpec<T>> {
    CoverageSpec::new(
        c.universe_size(),
        c.membership().to_vec(),
        c.weights().iter().map(|&w| T::of(w)).collect(),
    )
}

/// Seed of welfare trial `trial`.
pub fn welfare_seed(root: u64, trial: usize) -> u64 {
    derive_seed(derive_seed(root, 1_000), trial as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsf::Activation;
    use crate::learn::ModelKind;

    fn tiny_train() -> TrainConfig {
        TrainConfig {
            model: ModelKind::Edsf,
            epochs: 30,
            learning_rate: 1e-2,
            batch_size: 32,
            r: 2,
            layer_widths: vec![8],
            activation: Activation::MinCap { alpha: 95.0 },
            split_ratio: 0.8,
            seed: 0,
        }
    }

    #[test]
    fn summary_statistics() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 10.0]).unwrap();
        assert_eq!(
            (s.n, s.mean, s.median, s.min, s.max),
            (4, 4.0, 2.5, 1.0, 10.0)
        );
        assert!((s.std - 4.0825).abs() < 1e-4);
        assert_eq!(Summary::of(&[]), None);
        assert_eq!(Summary::of(&[2.0]).unwrap().std, 0.0);
    }

    #[test]
    fn learning_pipeline_is_reproducible() {
        let setup = LearnSetup {
            oracle: OracleSpec::Coverage {
                n_items: 6,
                universe: 20,
                p: 0.3,
            },
            samples: 64,
            train: tiny_train(),
            ..Default::default()
        };
        let a = run_learning::<f64>(&setup, 5).unwrap();
        let b = run_learning::<f64>(&setup, 5).unwrap();
        assert_eq!(a.metrics.epoch_loss, b.metrics.epoch_loss);
        assert_eq!((a.train_set.len(), a.test_set.len()), (51, 13));
        assert!(a.metrics.test_l1.is_some());
        let cut = LearnSetup {
            oracle: OracleSpec::Cut {
                vertices: 7,
                p: 0.4,
            },
            ..setup
        };
        assert!(run_learning::<f32>(&cut, 1).is_ok());
    }

    #[test]
    fn welfare_methods_are_consistent() {
        let setup = WelfareSetup {
            items: 5,
            universe: 20,
            samples: 64,
            train: tiny_train(),
            ..Default::default()
        };
        let brute = run_welfare_trial::<f64>(&setup, WelfareMethod::Brute, 0, 7).unwrap();
        assert_eq!(brute.efficiency, Some(1.0));
        for m in [WelfareMethod::Ga, WelfareMethod::GaExact, WelfareMethod::Cg] {
            let t = run_welfare_trial::<f32>(&setup, m, 0, 7).unwrap();
            assert_eq!(t.optimal_sw, brute.optimal_sw);
            assert!(t.efficiency.unwrap() <= 1.0 + 1e-12);
            assert_eq!(t.assignment.len(), 5);
        }
        let big = WelfareSetup {
            items: 16,
            ..setup.clone()
        };
        let t = run_welfare_trial::<f64>(&big, WelfareMethod::Cg, 0, 1).unwrap();
        assert_eq!(t.optimal_sw, None);
        assert!(run_welfare_trial::<f64>(&big, WelfareMethod::Brute, 0, 1).is_err());
        let mismatched = WelfareSetup {
            probs: vec![0.1, 0.2],
            ..setup.clone()
        };
        assert!(run_welfare_trial::<f64>(&mismatched, WelfareMethod::Cg, 0, 1).is_err());
        let shared = WelfareSetup {
            probs: vec![0.3],
            ..setup
        };
        assert!(run_welfare_trial::<f64>(&shared, WelfareMethod::Cg, 0, 1).is_ok());
    }

    #[test]
    fn setups_serialize_with_defaults() {
        let s: WelfareSetup = serde_json::from_str(r#"{"items":6,"ga":{"eta":0.1}}"#).unwrap();
        assert_eq!((s.items, s.users, s.ga.eta, s.ga.steps), (6, 3, 0.1, 500));
        let l: LearnSetup =
            serde_json::from_str(r#"{"oracle":{"kind":"cut","vertices":9,"p":0.2}}"#).unwrap();
        assert_eq!(
            l.oracle,
            OracleSpec::Cut {
                vertices: 9,
                p: 0.2
            }
        );
    }
}
