use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{ItemSubset, SetFunction};
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

pub const TABULATE_MAX_N: usize = 24;
pub const RANDOM_MONOTONE_MAX_N: usize = 10;

/// A set function stored as `2^n` values in mask order (mask 0 first).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable<T>", into = "RawTable<T>", bound = "T: Scalar")]
pub struct TabulatedFunction<T> {
    n: usize,
    values: Vec<T>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawTable<T> {
    n: usize,
    values: Vec<T>,
}

impl<T: Scalar> TryFrom<RawTable<T>> for TabulatedFunction<T> {
    type Error = Error;
    fn try_from(r: RawTable<T>) -> Result<Self> {
        TabulatedFunction::new(r.n, r.values)
    }
}

impl<T: Scalar> From<TabulatedFunction<T>> for RawTable<T> {
    fn from(t: TabulatedFunction<T>) -> Self {
        RawTable {
            n: t.n,
            values: t.values,
        }
    }
}

impl<T: Scalar> TabulatedFunction<T> {
    /// Requires exactly `2^n` finite non-negative values with `values[0] == 0`.
    pub fn new(n: usize, values: Vec<T>) -> Result<Self> {
        if n == 0 || n > TABULATE_MAX_N {
            return Err(Error::TooLarge {
                what: "tabulation",
                n,
                limit: TABULATE_MAX_N,
            });
        }
        if values.len() != 1 << n {
            return Err(Error::Dimension {
                expected: 1 << n,
                got: values.len(),
            });
        }
        if values[0] != T::zero() {
            return Err(Error::NotNormalized(values[0].to_f64_lossy()));
        }
        if let Some(v) = values
            .iter()
            .find(|v| !(**v >= T::zero()) || !v.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "tabulated values must be finite and non-negative, found {v}"
            )));
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn at(&self, mask: u64) -> T {
        self.values[mask as usize]
    }

    /// `f(S)` for the full ground set.
    pub fn full_value(&self) -> T {
        *self.values.last().expect("table is non-empty")
    }

    /// `f({j})` for every item.
    pub fn singletons(&self) -> Vec<T> {
        (0..self.n).map(|j| self.values[1 << j]).collect()
    }

    /// Pointwise minimum of several tables on the same ground set.
    pub fn pointwise_min(tables: &[TabulatedFunction<T>]) -> Result<Self> {
        let first = tables
            .first()
            .ok_or_else(|| Error::InvalidParameter("need at least one table".into()))?;
        if let Some(t) = tables.iter().find(|t| t.n != first.n) {
            return Err(Error::Dimension {
                expected: first.n,
                got: t.n,
            });
        }
        let values = (0..first.values.len())
            .map(|i| {
                tables
                    .iter()
                    .map(|t| t.values[i])
                    .fold(T::infinity(), T::min)
            })
            .collect();
        Self::new(first.n, values)
    }

    /// Elementwise cast to another scalar type.
    pub fn cast<U: Scalar>(&self) -> TabulatedFunction<U> {
        TabulatedFunction {
            n: self.n,
            values: self
                .values
                .iter()
                .map(|v| U::of(v.to_f64_lossy()))
                .collect(),
        }
    }
}

impl<T: Scalar> SetFunction<T> for TabulatedFunction<T> {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, set: ItemSubset) -> T {
        self.values[set.bits() as usize]
    }
}

/// Evaluates `f` on every subset. Rejects functions with `f(empty) != 0`.
pub fn tabulate<T, F>(f: &F) -> Result<TabulatedFunction<T>>
where
    T: Scalar,
    F: SetFunction<T> + ?Sized,
{
    let n = f.ground_size();
    if n > TABULATE_MAX_N {
        return Err(Error::TooLarge {
            what: "tabulation",
            n,
            limit: TABULATE_MAX_N,
        });
    }
    TabulatedFunction::new(n, super::check::value_table(f))
}

/// Random normalized monotone function `f(A) = max over B ⊆ A of u_B` with
/// `u_B ~ Uniform[0, 1)` i.i.d. and `u_empty = 0`. Generally not submodular.
pub fn gen_random_monotone<T: Scalar>(n: usize, seed: u64) -> Result<TabulatedFunction<T>> {
    if n == 0 || n > RANDOM_MONOTONE_MAX_N {
        return Err(Error::TooLarge {
            what: "random monotone fixture",
            n,
            limit: RANDOM_MONOTONE_MAX_N,
        });
    }
    let mut rng = rng::seeded(seed);
    let size = 1usize << n;
    let mut values = vec![T::zero(); size];
    for v in values.iter_mut().skip(1) {
        *v = T::of(rng.gen::<f64>());
    }
    // masks ascend, so every A \ {v} is final before A
    for mask in 1..size {
        let mut best = values[mask];
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros();
            best = best.max(values[mask & !(1 << v)]);
            rest &= rest - 1;
        }
        values[mask] = best;
    }
    TabulatedFunction::new(n, values)
}
