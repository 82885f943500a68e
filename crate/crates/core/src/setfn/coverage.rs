use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{ItemSubset, SetFunction, MAX_ITEMS};
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

/// Weighted coverage function: `c(B)` is the total weight of the universe
/// elements covered by the union of the sets indexed by `B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawCoverage<T>",
    into = "RawCoverage<T>",
    bound = "T: Scalar"
)]
pub struct CoverageSpec<T> {
    n_items: usize,
    universe_size: usize,
    membership: Vec<Vec<usize>>,
    weights: Vec<T>,
    /// per-item universe bitsets, `ceil(universe_size / 64)` words each
    cover: Vec<Vec<u64>>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawCoverage<T> {
    n_items: usize,
    universe_size: usize,
    membership: Vec<Vec<usize>>,
    weights: Vec<T>,
}

impl<T: Scalar> TryFrom<RawCoverage<T>> for CoverageSpec<T> {
    type Error = Error;
    fn try_from(r: RawCoverage<T>) -> Result<Self> {
        if r.n_items != r.membership.len() {
            return Err(Error::InvalidParameter(format!(
                "n_items = {} but membership has {} entries",
                r.n_items,
                r.membership.len()
            )));
        }
        CoverageSpec::new(r.universe_size, r.membership, r.weights)
    }
}

impl<T: Scalar> From<CoverageSpec<T>> for RawCoverage<T> {
    fn from(c: CoverageSpec<T>) -> Self {
        RawCoverage {
            n_items: c.n_items,
            universe_size: c.universe_size,
            membership: c.membership,
            weights: c.weights,
        }
    }
}

/// Distribution of universe-element weights for generated coverage functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightDist {
    /// Every element weighs 1.
    Unit,
    Uniform {
        low: f64,
        high: f64,
    },
}

impl<T: Scalar> CoverageSpec<T> {
    pub fn new(universe_size: usize, membership: Vec<Vec<usize>>, weights: Vec<T>) -> Result<Self> {
        let n_items = membership.len();
        if n_items == 0 || n_items > MAX_ITEMS {
            return Err(Error::InvalidParameter(format!(
                "coverage needs 1..={MAX_ITEMS} items, got {n_items}"
            )));
        }
        if universe_size == 0 {
            return Err(Error::InvalidParameter("universe must be non-empty".into()));
        }
        if weights.len() != universe_size {
            return Err(Error::Dimension {
                expected: universe_size,
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidParameter(
                "coverage weights must be finite and non-negative".into(),
            ));
        }
        let words = universe_size.div_ceil(64);
        let mut cover = vec![vec![0u64; words]; n_items];
        for (item, elems) in membership.iter().enumerate() {
            for &u in elems {
                if u >= universe_size {
                    return Err(Error::InvalidParameter(format!(
                        "item {item} covers {u}, outside universe of size {universe_size}"
                    )));
                }
                cover[item][u / 64] |= 1 << (u % 64);
            }
        }
        Ok(Self {
            n_items,
            universe_size,
            membership,
            weights,
            cover,
        })
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn membership(&self) -> &[Vec<usize>] {
        &self.membership
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Universe elements covered by at least one item.
    pub fn covered_elements(&self) -> Vec<usize> {
        let all = ItemSubset::from_raw(self.n_items, super::low_mask(self.n_items));
        self.covered_by(all)
    }

    fn union_words(&self, set: ItemSubset) -> Vec<u64> {
        let mut acc = vec![0u64; self.universe_size.div_ceil(64)];
        for i in set.iter() {
            for (a, c) in acc.iter_mut().zip(&self.cover[i]) {
                *a |= c;
            }
        }
        acc
    }

    pub fn covered_by(&self, set: ItemSubset) -> Vec<usize> {
        let acc = self.union_words(set);
        let mut out = Vec::new();
        for (w, &word) in acc.iter().enumerate() {
            let mut rest = word;
            while rest != 0 {
                out.push(w * 64 + rest.trailing_zeros() as usize);
                rest &= rest - 1;
            }
        }
        out
    }
}

impl<T: Scalar> SetFunction<T> for CoverageSpec<T> {
    fn ground_size(&self) -> usize {
        self.n_items
    }

    fn value(&self, set: ItemSubset) -> T {
        let acc = self.union_words(set);
        let mut total = T::zero();
        for (w, &word) in acc.iter().enumerate() {
            let mut rest = word;
            while rest != 0 {
                total += self.weights[w * 64 + rest.trailing_zeros() as usize];
                rest &= rest - 1;
            }
        }
        total
    }
}

/// Random coverage function with i.i.d. Bernoulli(`p`) memberships and unit
/// weights.
pub fn gen_random_coverage<T: Scalar>(
    n_items: usize,
    universe_size: usize,
    p: f64,
    seed: u64,
) -> Result<CoverageSpec<T>> {
    gen_random_coverage_with(n_items, universe_size, p, WeightDist::Unit, seed)
}

pub fn gen_random_coverage_with<T: Scalar>(
    n_items: usize,
    universe_size: usize,
    p: f64,
    weights: WeightDist,
    seed: u64,
) -> Result<CoverageSpec<T>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "membership probability must lie in (0, 1), got {p}"
        )));
    }
    if let WeightDist::Uniform { low, high } = weights {
        if !(low >= 0.0 && high >= low && high.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "invalid weight range [{low}, {high}]"
            )));
        }
    }
    let mut rng = rng::seeded(seed);
    let membership: Vec<Vec<usize>> = (0..n_items)
        .map(|_| (0..universe_size).filter(|_| rng.gen_bool(p)).collect())
        .collect();
    let weights = match weights {
        WeightDist::Unit => vec![T::one(); universe_size],
        WeightDist::Uniform { low, high } => (0..universe_size)
            .map(|_| T::of(low + (high - low) * rng.gen::<f64>()))
            .collect(),
    };
    CoverageSpec::new(universe_size, membership, weights)
}
