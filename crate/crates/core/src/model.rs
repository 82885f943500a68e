//! Models that map non-negative input vectors to a value: a single DSF or an
//! EDSF, plus the batch-evaluation trait the audits and optimizers share.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dsf::DsfNetwork;
use crate::edsf::EdsfModel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::setfn::{ItemSubset, SetFunction};

/// A function on the non-negative orthant that can be evaluated in batches
/// and differentiated with respect to its input.
pub trait InputFunction<T: Scalar>: Send + Sync {
    fn input_dim(&self) -> usize;

    /// Values for every row of `x`. Rows must be non-negative.
    fn value_rows(&self, x: ArrayView2<T>) -> Result<Array1<T>>;

    /// Value and a supergradient with respect to the input at `x`.
    fn value_and_input_grad(&self, x: &[T]) -> Result<(T, Vec<T>)>;
}

impl<T: Scalar> InputFunction<T> for DsfNetwork<T> {
    fn input_dim(&self) -> usize {
        DsfNetwork::input_dim(self)
    }

    fn value_rows(&self, x: ArrayView2<T>) -> Result<Array1<T>> {
        self.value_batch(x)
    }

    fn value_and_input_grad(&self, x: &[T]) -> Result<(T, Vec<T>)> {
        let (v, cache) = self.forward(x)?;
        let (_, dx) = self.backward(&cache)?;
        Ok((v, dx))
    }
}

/// Either kind of learned or constructed valuation.
#[derive(Clone, Debug, PartialEq)]
pub enum SetModel<T> {
    Dsf(DsfNetwork<T>),
    Edsf(EdsfModel<T>),
}

impl<T: Scalar> SetModel<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            SetModel::Dsf(_) => "dsf",
            SetModel::Edsf(_) => "edsf",
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            SetModel::Dsf(n) => n.input_dim(),
            SetModel::Edsf(m) => m.input_dim(),
        }
    }

    /// Component networks; a DSF is a single component.
    pub fn components(&self) -> &[DsfNetwork<T>] {
        match self {
            SetModel::Dsf(n) => std::slice::from_ref(n),
            SetModel::Edsf(m) => m.components(),
        }
    }

    /// Views the model as a min over components (a DSF becomes `r = 1`).
    pub fn into_edsf(self) -> EdsfModel<T> {
        match self {
            SetModel::Dsf(n) => EdsfModel::new(vec![n]).expect("one valid component"),
            SetModel::Edsf(m) => m,
        }
    }

    pub fn cast<U: Scalar>(&self) -> SetModel<U> {
        match self {
            SetModel::Dsf(n) => SetModel::Dsf(n.cast()),
            SetModel::Edsf(m) => SetModel::Edsf(m.cast()),
        }
    }

    pub fn is_nonneg(&self) -> bool {
        self.components().iter().all(DsfNetwork::is_nonneg)
    }

    pub fn value(&self, x: &[T]) -> Result<T> {
        match self {
            SetModel::Dsf(n) => n.value(x),
            SetModel::Edsf(m) => m.forward(x).map(|(v, _)| v),
        }
    }

    pub fn eval_set(&self, set: ItemSubset) -> Result<T> {
        if set.n() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: set.n(),
            });
        }
        self.value(&set.indicator())
    }

    /// Values on the indicator vectors of many subsets at once.
    pub fn eval_sets(&self, sets: &[ItemSubset]) -> Result<Array1<T>> {
        let n = self.input_dim();
        let mut x = Array2::zeros((sets.len(), n));
        for (mut row, s) in x.rows_mut().into_iter().zip(sets) {
            if s.n() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: s.n(),
                });
            }
            for i in s.iter() {
                row[i] = T::one();
            }
        }
        self.value_rows(x.view())
    }
}

impl<T: Scalar> InputFunction<T> for SetModel<T> {
    fn input_dim(&self) -> usize {
        SetModel::input_dim(self)
    }

    fn value_rows(&self, x: ArrayView2<T>) -> Result<Array1<T>> {
        match self {
            SetModel::Dsf(n) => n.value_rows(x),
            SetModel::Edsf(m) => m.value_rows(x),
        }
    }

    fn value_and_input_grad(&self, x: &[T]) -> Result<(T, Vec<T>)> {
        match self {
            SetModel::Dsf(n) => n.value_and_input_grad(x),
            SetModel::Edsf(m) => m.value_and_input_grad(x),
        }
    }
}

impl<T: Scalar> SetFunction<T> for SetModel<T> {
    fn ground_size(&self) -> usize {
        self.input_dim()
    }

    fn value(&self, set: ItemSubset) -> T {
        match self {
            SetModel::Dsf(n) => SetFunction::value(n, set),
            SetModel::Edsf(m) => SetFunction::value(m, set),
        }
    }
}

impl<T: Scalar> From<DsfNetwork<T>> for SetModel<T> {
    fn from(n: DsfNetwork<T>) -> Self {
        SetModel::Dsf(n)
    }
}

impl<T: Scalar> From<EdsfModel<T>> for SetModel<T> {
    fn from(m: EdsfModel<T>) -> Self {
        SetModel::Edsf(m)
    }
}

impl<T: Scalar> Serialize for SetModel<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SetModel::Dsf(n) => n.serialize(s),
            SetModel::Edsf(m) => m.serialize(s),
        }
    }
}

impl<'de, T: Scalar> Deserialize<'de> for SetModel<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = serde_json::Value::deserialize(d)?;
        match v.get("kind").and_then(|k| k.as_str()) {
            Some("dsf") => serde_json::from_value(v)
                .map(SetModel::Dsf)
                .map_err(D::Error::custom),
            Some("edsf") => serde_json::from_value(v)
                .map(SetModel::Edsf)
                .map_err(D::Error::custom),
            other => Err(D::Error::custom(format!(
                "model kind must be \"dsf\" or \"edsf\", found {other:?}"
            ))),
        }
    }
}
