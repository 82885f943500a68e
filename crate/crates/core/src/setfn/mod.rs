//! Ground-set subsets and set-function oracles.
//!
//! Subsets are bitmasks over items `0..n` with `n <= 64`. Exhaustive paths
//! (tabulation, property checks, constructions) impose tighter limits.

mod check;
mod coverage;
mod cut;
mod tabulated;

pub use check::{
    check_monotone, check_submodular, check_submodular_local, MonotoneViolation,
    SubmodularViolation, Verdict, LOCAL_SUBMODULAR_CHECK_MAX_N, MONOTONE_CHECK_MAX_N,
    SUBMODULAR_CHECK_MAX_N,
};
pub use coverage::{gen_random_coverage, gen_random_coverage_with, CoverageSpec, WeightDist};
pub use cut::{gen_erdos_renyi, GraphSpec};
pub use tabulated::{
    gen_random_monotone, tabulate, TabulatedFunction, RANDOM_MONOTONE_MAX_N, TABULATE_MAX_N,
};

use std::fmt;
use std::marker::PhantomData;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAX_ITEMS: usize = 64;

/// A subset of the ground set `{0, .., n-1}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemSubset {
    n: usize,
    bits: u64,
}

#[inline]
fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl ItemSubset {
    pub fn new(n: usize, bits: u64) -> Result<Self> {
        if n == 0 || n > MAX_ITEMS {
            return Err(Error::InvalidParameter(format!(
                "ground-set size must be in 1..={MAX_ITEMS}, got {n}"
            )));
        }
        if bits & !low_mask(n) != 0 {
            return Err(Error::InvalidParameter(format!(
                "mask {bits:#b} has bits outside the ground set of size {n}"
            )));
        }
        Ok(Self { n, bits })
    }

    /// Unchecked constructor for hot enumeration loops. `bits` must fit in `n`.
    #[inline]
    pub(crate) fn from_raw(n: usize, bits: u64) -> Self {
        debug_assert!((1..=MAX_ITEMS).contains(&n) && bits & !low_mask(n) == 0);
        Self { n, bits }
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    pub fn full(n: usize) -> Result<Self> {
        Self::new(n, low_mask(n))
    }

    pub fn from_items(n: usize, items: &[usize]) -> Result<Self> {
        let mut bits = 0u64;
        for &i in items {
            if i >= n {
                return Err(Error::InvalidParameter(format!(
                    "item {i} outside ground set of size {n}"
                )));
            }
            bits |= 1 << i;
        }
        Self::new(n, bits)
    }

    /// Builds a subset from a 0/1 indicator vector.
    pub fn from_indicator<T: Scalar>(x: &[T]) -> Result<Self> {
        if x.is_empty() || x.len() > MAX_ITEMS {
            return Err(Error::InvalidParameter(format!(
                "indicator length must be in 1..={MAX_ITEMS}, got {}",
                x.len()
            )));
        }
        let mut bits = 0u64;
        for (i, &v) in x.iter().enumerate() {
            if v == T::one() {
                bits |= 1 << i;
            } else if v != T::zero() {
                return Err(Error::InvalidParameter(format!(
                    "indicator entry {i} is {v}, expected 0 or 1"
                )));
            }
        }
        Self::new(x.len(), bits)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.n && self.bits >> i & 1 == 1
    }

    #[inline]
    pub fn with(&self, i: usize) -> Self {
        debug_assert!(i < self.n);
        Self::from_raw(self.n, self.bits | 1 << i)
    }

    #[inline]
    pub fn without(&self, i: usize) -> Self {
        Self::from_raw(self.n, self.bits & !(1 << i))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    #[inline]
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_raw(self.n, self.bits | other.bits)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self::from_raw(self.n, self.bits & other.bits)
    }

    pub fn difference(&self, other: &Self) -> Self {
        Self::from_raw(self.n, self.bits & !other.bits)
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> {
        let mut rest = self.bits;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    pub fn indicator<T: Scalar>(&self) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                if self.contains(i) {
                    T::one()
                } else {
                    T::zero()
                }
            })
            .collect()
    }

    /// All `2^n` subsets in mask order. Only sensible for small `n`.
    pub fn all(n: usize) -> impl Iterator<Item = ItemSubset> {
        assert!((1..64).contains(&n), "enumeration needs 1 <= n < 64");
        (0..1u64 << n).map(move |b| ItemSubset::from_raw(n, b))
    }
}

impl fmt::Debug for ItemSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A set function `f : 2^S -> R` on a ground set of fixed size.
pub trait SetFunction<T: Scalar>: Send + Sync {
    fn ground_size(&self) -> usize;

    /// Evaluates `f`. The caller guarantees `set.n() == self.ground_size()`.
    fn value(&self, set: ItemSubset) -> T;

    fn eval(&self, set: ItemSubset) -> Result<T> {
        if set.n() != self.ground_size() {
            return Err(Error::Dimension {
                expected: self.ground_size(),
                got: set.n(),
            });
        }
        Ok(self.value(set))
    }
}

impl<T: Scalar, F: SetFunction<T> + ?Sized> SetFunction<T> for &F {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn value(&self, set: ItemSubset) -> T {
        (**self).value(set)
    }
}

impl<T: Scalar, F: SetFunction<T> + ?Sized> SetFunction<T> for Box<F> {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn value(&self, set: ItemSubset) -> T {
        (**self).value(set)
    }
}

/// `m(A) = sum of per-item weights`.
#[derive(Clone, Debug, PartialEq)]
pub struct Modular<T> {
    pub weights: Vec<T>,
}

impl<T: Scalar> Modular<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() || weights.len() > MAX_ITEMS {
            return Err(Error::InvalidParameter(format!(
                "modular function needs 1..={MAX_ITEMS} items"
            )));
        }
        if weights.iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidParameter(
                "modular weights must be finite and non-negative".into(),
            ));
        }
        Ok(Self { weights })
    }
}

impl<T: Scalar> SetFunction<T> for Modular<T> {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }
    fn value(&self, set: ItemSubset) -> T {
        set.iter().map(|i| self.weights[i]).sum()
    }
}

/// Adapts a closure into an oracle.
pub struct FnOracle<T, F> {
    n: usize,
    f: F,
    _scalar: PhantomData<fn() -> T>,
}

impl<T: Scalar, F: Fn(ItemSubset) -> T + Send + Sync> FnOracle<T, F> {
    pub fn new(n: usize, f: F) -> Self {
        Self {
            n,
            f,
            _scalar: PhantomData,
        }
    }
}

impl<T: Scalar, F: Fn(ItemSubset) -> T + Send + Sync> SetFunction<T> for FnOracle<T, F> {
    fn ground_size(&self) -> usize {
        self.n
    }
    fn value(&self, set: ItemSubset) -> T {
        (self.f)(set)
    }
}

/// `f(A) - f(empty)`; preserves monotonicity and submodularity.
pub struct Normalized<F> {
    inner: F,
}

impl<F> Normalized<F> {
    pub fn new(inner: F) -> Self {
        Self { inner }
    }
}

impl<T: Scalar, F: SetFunction<T>> SetFunction<T> for Normalized<F> {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }
    fn value(&self, set: ItemSubset) -> T {
        let empty = ItemSubset::from_raw(set.n(), 0);
        self.inner.value(set) - self.inner.value(empty)
    }
}
