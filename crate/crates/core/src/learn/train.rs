//! Mini-batch training of DSF and EDSF models on the mean L1 loss with Adam
//! steps followed by clamping every parameter to be non-negative.

use std::time::Instant;

use ndarray::{Array1, Array2, Axis, Zip};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{indicator_rows, SampleDataset};
use crate::dsf::{init_dsf, Activation, DsfNetwork, Gradients};
use crate::edsf::EdsfModel;
use crate::error::{Error, Result};
use crate::model::SetModel;
use crate::rng;
use crate::scalar::Scalar;
use crate::setfn::{check_monotone, FnOracle, ItemSubset, Verdict, MONOTONE_CHECK_MAX_N};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
/// Seed stream for the per-epoch shuffles; component `k` uses stream `k`.
const SHUFFLE_STREAM: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Dsf,
    Edsf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub model: ModelKind,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Number of component DSFs; ignored for a single DSF.
    pub r: usize,
    /// Hidden layer widths; the input and the single output are implied.
    pub layer_widths: Vec<usize>,
    /// Shared by every hidden node; the output node is linear.
    pub activation: Activation<f64>,
    pub split_ratio: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            model: ModelKind::Edsf,
            epochs: 10_000,
            learning_rate: 1e-3,
            batch_size: 64,
            r: 64,
            layer_widths: vec![64, 64, 64],
            activation: Activation::MinCap { alpha: 95.0 },
            split_ratio: 0.8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// `epochs = 0` is accepted and leaves the model unchanged.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return bad(format!(
                "split_ratio must lie in (0, 1), got {}",
                self.split_ratio
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        if self.r == 0 {
            return bad("r must be >= 1".into());
        }
        if self.layer_widths.contains(&0) {
            return bad("layer widths must be positive".into());
        }
        self.activation.validate()
    }

    /// Number of component networks the configured model has.
    pub fn components(&self) -> usize {
        match self.model {
            ModelKind::Dsf => 1,
            ModelKind::Edsf => self.r,
        }
    }
}

/// Fresh model for a ground set of size `n`: component `k` is initialized
/// from `derive_seed(cfg.seed, k)`.
pub fn init_model<T: Scalar>(n: usize, cfg: &TrainConfig) -> Result<SetModel<T>> {
    cfg.validate()?;
    let mut widths = Vec::with_capacity(cfg.layer_widths.len() + 2);
    widths.push(n);
    widths.extend_from_slice(&cfg.layer_widths);
    widths.push(1);
    let act = cfg.activation.cast::<T>();
    let comps = (0..cfg.components())
        .map(|k| init_dsf(&widths, act, rng::derive_seed(cfg.seed, k as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(match cfg.model {
        ModelKind::Dsf => SetModel::Dsf(comps.into_iter().next().expect("one component")),
        ModelKind::Edsf => SetModel::Edsf(EdsfModel::new(comps)?),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Mean L1 over each epoch's batches, measured before each step.
    pub epoch_loss: Vec<f64>,
    /// Mean L1 on the training set after the last epoch.
    pub train_l1: f64,
    pub test_l1: Option<f64>,
    /// How many training samples each component is the minimum for.
    pub component_activity: Vec<usize>,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<T> {
    pub model: SetModel<T>,
    pub metrics: Metrics,
}

struct Adam<T> {
    m: Vec<Gradients<T>>,
    v: Vec<Gradients<T>>,
    t: i32,
}

impl<T: Scalar> Adam<T> {
    fn new(comps: &[DsfNetwork<T>]) -> Self {
        let zeros = || comps.iter().map(Gradients::zeros_like).collect();
        Adam {
            m: zeros(),
            v: zeros(),
            t: 0,
        }
    }

    /// One Adam step on component `k` with the time step shared by all
    /// components, then clamping to the non-negative orthant.
    fn step(&mut self, k: usize, net: &mut DsfNetwork<T>, g: &Gradients<T>, lr: f64) {
        let t = self.t;
        let c1 = T::of(1.0 - BETA1.powi(t));
        let c2 = T::of(1.0 - BETA2.powi(t));
        let (b1, b2) = (T::of(BETA1), T::of(BETA2));
        let (one, lr, eps) = (T::one(), T::of(lr), T::of(ADAM_EPS));
        let tiny = T::min_positive_value();
        let flush = |x: T| if x.abs() < tiny { T::zero() } else { x };
        let update = |p: &mut T, &g: &T, m: &mut T, v: &mut T| {
            // moments of idle parameters decay geometrically; keeping them out
            // of the subnormal range keeps every step at full speed
            *m = flush(b1 * *m + (one - b1) * g);
            *v = flush(b2 * *v + (one - b2) * g * g);
            let step = lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            *p = (*p - step).max(T::zero());
        };
        let (m, v) = (&mut self.m[k], &mut self.v[k]);
        for (l, layer) in net.layers_mut().iter_mut().enumerate() {
            let (w, b) = layer.params_mut();
            Zip::from(w)
                .and(&g.weights[l])
                .and(&mut m.weights[l])
                .and(&mut v.weights[l])
                .for_each(update);
            Zip::from(b)
                .and(&g.biases[l])
                .and(&mut m.biases[l])
                .and(&mut v.biases[l])
                .for_each(update);
        }
    }
}

/// Row-wise minimum over component outputs with the lowest index on ties.
fn argmin_rows<T: Scalar>(outs: &[Array1<T>]) -> (Array1<T>, Vec<usize>) {
    let rows = outs[0].len();
    let mut vals = outs[0].clone();
    let mut arg = vec![0; rows];
    for (k, o) in outs.iter().enumerate().skip(1) {
        for i in 0..rows {
            if o[i] < vals[i] {
                vals[i] = o[i];
                arg[i] = k;
            }
        }
    }
    (vals, arg)
}

fn predict_rows<T: Scalar>(comps: &[DsfNetwork<T>], x: &Array2<T>) -> (Array1<T>, Vec<usize>) {
    let outs: Vec<Array1<T>> = comps
        .iter()
        .map(|c| c.value_batch_unchecked(x.view()))
        .collect();
    argmin_rows(&outs)
}

fn l1_against<T: Scalar>(pred: &Array1<T>, y: &Array1<T>) -> f64 {
    let total: f64 = pred
        .iter()
        .zip(y)
        .map(|(p, t)| (p.to_f64_lossy() - t.to_f64_lossy()).abs())
        .sum();
    total / pred.len().max(1) as f64
}

/// Trains `model` on `data`. The model keeps its kind; an EDSF is updated
/// through the component that attains the minimum on each sample.
pub fn train<T: Scalar>(
    model: SetModel<T>,
    data: &SampleDataset<T>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    cfg.validate()?;
    if model.input_dim() != data.n() {
        return Err(Error::Dimension {
            expected: model.input_dim(),
            got: data.n(),
        });
    }
    if data.is_empty() {
        return Err(Error::Dataset("cannot train on an empty dataset".into()));
    }
    if !model.is_nonneg() {
        return Err(Error::InvalidNetwork(
            "initial model has negative parameters".into(),
        ));
    }
    let started = Instant::now();
    let kind = model.kind();
    let mut comps = model.into_edsf().into_components();
    let r = comps.len();
    let x_all = data.features();
    let y_all = data.target_array();
    let mut adam = Adam::new(&comps);
    let mut grads: Vec<Gradients<T>> = comps.iter().map(Gradients::zeros_like).collect();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut shuffle_rng = rng::seeded(rng::derive_seed(cfg.seed, SHUFFLE_STREAM));
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let x = x_all.select(Axis(0), batch);
            let y = y_all.select(Axis(0), batch);
            let caches: Vec<_> = comps
                .iter()
                .map(|c| c.forward_batch_unchecked(x.view()))
                .collect();
            let outs: Vec<Array1<T>> = caches.iter().map(|c| c.output().clone()).collect();
            let (pred, arg) = argmin_rows(&outs);
            total += l1_against(&pred, &y) * batch.len() as f64;

            let scale = T::one() / T::of_usize(batch.len());
            let mut rows: Vec<Vec<usize>> = vec![Vec::new(); r];
            for (i, &k) in arg.iter().enumerate() {
                rows[k].push(i);
            }
            adam.t += 1;
            for k in 0..r {
                // inactive components still take a step with zero gradient so
                // their moment estimates decay like every other parameter
                grads[k].fill_zero();
                if !rows[k].is_empty() {
                    let d_out: Array1<T> = rows[k]
                        .iter()
                        .map(|&i| sign(pred[i] - y[i]) * scale)
                        .collect();
                    let sub = caches[k].select_rows(&rows[k]);
                    comps[k].backward_batch_unchecked(&sub, d_out.view(), &mut grads[k], false);
                }
                adam.step(k, &mut comps[k], &grads[k], cfg.learning_rate);
            }
        }
        let loss = total / data.len() as f64;
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch, loss });
        }
        if let Some(k) = comps.iter().position(|c| !c.is_nonneg()) {
            return Err(Error::InvalidNetwork(format!(
                "component {k} left the non-negative orthant at epoch {epoch}"
            )));
        }
        epoch_loss.push(loss);
    }

    let (pred, arg) = predict_rows(&comps, &x_all);
    let train_l1 = l1_against(&pred, &y_all);
    if !train_l1.is_finite() {
        return Err(Error::Diverged {
            epoch: cfg.epochs,
            loss: train_l1,
        });
    }
    let mut component_activity = vec![0; r];
    for k in arg {
        component_activity[k] += 1;
    }
    if data.n() <= MONOTONE_CHECK_MAX_N {
        monotone_scan(&comps, data.n())?;
    }
    let model = if kind == "dsf" {
        SetModel::Dsf(comps.pop().expect("one component"))
    } else {
        SetModel::Edsf(EdsfModel::new(comps)?)
    };
    Ok(TrainOutcome {
        model,
        metrics: Metrics {
            epoch_loss,
            train_l1,
            test_l1: None,
            component_activity,
            seconds: started.elapsed().as_secs_f64(),
        },
    })
}

fn sign<T: Scalar>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// Single-element-extension scan of the trained model over all subsets.
fn monotone_scan<T: Scalar>(comps: &[DsfNetwork<T>], n: usize) -> Result<()> {
    let sets: Vec<ItemSubset> = ItemSubset::all(n).collect();
    let (vals, _) = predict_rows(comps, &indicator_rows(n, &sets));
    let table = FnOracle::new(n, move |s: ItemSubset| vals[s.bits() as usize]);
    match check_monotone(&table)? {
        Verdict::Pass => Ok(()),
        Verdict::Violated(w) => Err(w.into()),
    }
}
