//! Supervised learning of set functions from `(subset, value)` samples.

mod train;

pub use train::{init_model, train, Metrics, ModelKind, TrainConfig, TrainOutcome};

use std::io::{BufRead, Write};

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::InputFunction;
use crate::rng;
use crate::scalar::Scalar;
use crate::setfn::{ItemSubset, SetFunction};

/// Labelled subsets of a ground set of size `n`; all targets are finite and
/// non-negative.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleDataset<T> {
    n: usize,
    sets: Vec<ItemSubset>,
    targets: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct SampleLine<T> {
    x: Vec<u8>,
    y: T,
}

impl<T: Scalar> SampleDataset<T> {
    pub fn new(n: usize, sets: Vec<ItemSubset>, targets: Vec<T>) -> Result<Self> {
        if sets.len() != targets.len() {
            return Err(Error::Dataset(format!(
                "{} subsets but {} targets",
                sets.len(),
                targets.len()
            )));
        }
        if let Some(s) = sets.iter().find(|s| s.n() != n) {
            return Err(Error::Dimension {
                expected: n,
                got: s.n(),
            });
        }
        if let Some((i, y)) = targets
            .iter()
            .enumerate()
            .find(|(_, y)| !(**y >= T::zero() && y.is_finite()))
        {
            return Err(Error::Dataset(format!(
                "target {i} is {y}, expected finite and >= 0"
            )));
        }
        Ok(SampleDataset { n, sets, targets })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[ItemSubset] {
        &self.sets
    }

    pub fn targets(&self) -> &[T] {
        &self.targets
    }

    /// Samples at the given positions, in order.
    pub fn subset(&self, idx: &[usize]) -> Self {
        SampleDataset {
            n: self.n,
            sets: idx.iter().map(|&i| self.sets[i]).collect(),
            targets: idx.iter().map(|&i| self.targets[i]).collect(),
        }
    }

    /// Indicator rows of the sampled subsets.
    pub fn features(&self) -> Array2<T> {
        indicator_rows(self.n, &self.sets)
    }

    pub fn target_array(&self) -> Array1<T> {
        Array1::from(self.targets.clone())
    }

    pub fn cast<U: Scalar>(&self) -> SampleDataset<U> {
        SampleDataset {
            n: self.n,
            sets: self.sets.clone(),
            targets: self
                .targets
                .iter()
                .map(|y| U::of(y.to_f64_lossy()))
                .collect(),
        }
    }

    /// One `{"x":[0,1,..],"y":..}` object per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for (s, &y) in self.sets.iter().zip(&self.targets) {
            let line = SampleLine {
                x: (0..self.n).map(|i| s.contains(i) as u8).collect(),
                y,
            };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut n = None;
        let mut sets = Vec::new();
        let mut targets = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let s: SampleLine<T> = serde_json::from_str(&line)?;
            let len = *n.get_or_insert(s.x.len());
            if s.x.len() != len {
                return Err(Error::Dataset(format!(
                    "line {}: indicator has length {}, expected {len}",
                    lineno + 1,
                    s.x.len()
                )));
            }
            let x: Vec<T> = s.x.iter().map(|&b| T::of(b as f64)).collect();
            let set = ItemSubset::from_indicator(&x)
                .map_err(|e| Error::Dataset(format!("line {}: {e}", lineno + 1)))?;
            sets.push(set);
            targets.push(s.y);
        }
        let n = n.ok_or_else(|| Error::Dataset("no samples".into()))?;
        Self::new(n, sets, targets)
    }
}

pub(crate) fn indicator_rows<T: Scalar>(n: usize, sets: &[ItemSubset]) -> Array2<T> {
    let mut x = Array2::zeros((sets.len(), n));
    for (mut row, s) in x.rows_mut().into_iter().zip(sets) {
        for i in s.iter() {
            row[i] = T::one();
        }
    }
    x
}

/// `d` subsets with i.i.d. inclusion probability `inclusion_p`, labelled by
/// `f`.
pub fn gen_dataset<T, F>(f: &F, d: usize, inclusion_p: f64, seed: u64) -> Result<SampleDataset<T>>
where
    T: Scalar,
    F: SetFunction<T> + ?Sized,
{
    if !(inclusion_p > 0.0 && inclusion_p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "inclusion probability must lie in (0, 1), got {inclusion_p}"
        )));
    }
    let n = f.ground_size();
    let mut rng = rng::seeded(seed);
    let mut sets = Vec::with_capacity(d);
    for _ in 0..d {
        let mut s = ItemSubset::empty(n)?;
        for i in 0..n {
            if rand::Rng::gen_bool(&mut rng, inclusion_p) {
                s = s.with(i);
            }
        }
        sets.push(s);
    }
    let targets = sets.iter().map(|&s| f.value(s)).collect();
    SampleDataset::new(n, sets, targets)
}

/// Shuffles and splits with `train = floor(len * ratio)`.
pub fn split<T: Scalar>(
    ds: &SampleDataset<T>,
    ratio: f64,
    seed: u64,
) -> Result<(SampleDataset<T>, SampleDataset<T>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let n_train = (ds.len() as f64 * ratio).floor() as usize;
    if n_train == 0 || n_train == ds.len() {
        return Err(Error::Dataset(format!(
            "{} samples cannot be split with ratio {ratio}",
            ds.len()
        )));
    }
    let mut idx: Vec<usize> = (0..ds.len()).collect();
    idx.shuffle(&mut rng::seeded(seed));
    Ok((ds.subset(&idx[..n_train]), ds.subset(&idx[n_train..])))
}

pub fn l1_loss<T: Scalar>(pred: T, target: T) -> T {
    (pred - target).abs()
}

/// Mean of `|pred - target|`; zero for empty input.
pub fn mean_l1<T: Scalar>(preds: &[T], targets: &[T]) -> T {
    if preds.is_empty() {
        return T::zero();
    }
    let total: T = preds
        .iter()
        .zip(targets)
        .map(|(&p, &t)| l1_loss(p, t))
        .sum();
    total / T::of_usize(preds.len())
}

/// Mean L1 error of `model` on `ds`.
pub fn evaluate<T, M>(model: &M, ds: &SampleDataset<T>) -> Result<T>
where
    T: Scalar,
    M: InputFunction<T> + ?Sized,
{
    if ds.is_empty() {
        return Err(Error::Dataset("cannot evaluate on an empty dataset".into()));
    }
    if model.input_dim() != ds.n() {
        return Err(Error::Dimension {
            expected: model.input_dim(),
            got: ds.n(),
        });
    }
    let preds = model.value_rows(ds.features().view())?;
    Ok(mean_l1(preds.as_slice().expect("contiguous"), ds.targets()))
}

/// Model predictions on every sample of `ds`, in order.
pub fn predict<T, M>(model: &M, ds: &SampleDataset<T>) -> Result<Vec<T>>
where
    T: Scalar,
    M: InputFunction<T> + ?Sized,
{
    if model.input_dim() != ds.n() {
        return Err(Error::Dimension {
            expected: model.input_dim(),
            got: ds.n(),
        });
    }
    Ok(model.value_rows(ds.features().view())?.to_vec())
}
