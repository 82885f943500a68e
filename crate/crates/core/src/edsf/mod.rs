//! Extended deep submodular functions: pointwise minima of DSFs.

mod audit;
mod construct;

pub use audit::{
    check_concavity, check_input_monotone, check_supergradient, ConcavityViolation,
    InputMonotoneViolation, SupergradientViolation,
};
pub use construct::{
    build_edsf_from_monotone, build_edsf_from_submodular, build_ga, build_gb_monotone,
    ConstructionReport, CONSTRUCTION_MAX_N,
};

use ndarray::{Array1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dsf::{DsfNetwork, Gradients};
use crate::error::{Error, Result};
use crate::model::InputFunction;
use crate::scalar::Scalar;
use crate::setfn::{ItemSubset, SetFunction};

/// `h(x) = min_i f_i(x)` over `r >= 1` component DSFs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEdsf<T>", into = "RawEdsf<T>", bound = "T: Scalar")]
pub struct EdsfModel<T> {
    components: Vec<DsfNetwork<T>>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawEdsf<T> {
    #[serde(default = "edsf_kind")]
    kind: String,
    dsfs: Vec<DsfNetwork<T>>,
}

fn edsf_kind() -> String {
    "edsf".into()
}

impl<T: Scalar> TryFrom<RawEdsf<T>> for EdsfModel<T> {
    type Error = Error;
    fn try_from(r: RawEdsf<T>) -> Result<Self> {
        if r.kind != "edsf" {
            return Err(Error::InvalidNetwork(format!(
                "expected kind \"edsf\", found \"{}\"",
                r.kind
            )));
        }
        EdsfModel::new(r.dsfs)
    }
}

impl<T: Scalar> From<EdsfModel<T>> for RawEdsf<T> {
    fn from(m: EdsfModel<T>) -> Self {
        RawEdsf {
            kind: edsf_kind(),
            dsfs: m.components,
        }
    }
}

/// Gradient of an EDSF at one point: only the minimizing component is
/// active, every other component's parameter gradient is zero.
#[derive(Clone, Debug)]
pub struct EdsfGradient<T> {
    pub value: T,
    pub active: usize,
    pub grads: Gradients<T>,
    pub input: Vec<T>,
}

impl<T: Scalar> EdsfModel<T> {
    pub fn new(components: Vec<DsfNetwork<T>>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidNetwork("an EDSF needs at least one DSF".into()))?;
        let n = first.input_dim();
        for (i, c) in components.iter().enumerate() {
            c.validate()?;
            if c.input_dim() != n {
                return Err(Error::InvalidNetwork(format!(
                    "component {i} has input_dim {} but component 0 has {n}",
                    c.input_dim()
                )));
            }
        }
        Ok(Self { components })
    }

    pub fn input_dim(&self) -> usize {
        self.components[0].input_dim()
    }

    pub fn r(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[DsfNetwork<T>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<DsfNetwork<T>> {
        self.components
    }

    pub fn cast<U: Scalar>(&self) -> EdsfModel<U> {
        EdsfModel {
            components: self.components.iter().map(DsfNetwork::cast).collect(),
        }
    }

    /// Minimum over components and the index attaining it (lowest index on
    /// ties).
    pub fn forward(&self, x: &[T]) -> Result<(T, usize)> {
        let mut best = (T::infinity(), 0);
        for (i, c) in self.components.iter().enumerate() {
            let v = c.value(x)?;
            if v < best.0 {
                best = (v, i);
            }
        }
        Ok(best)
    }

    /// Batched minimum and argmin per row.
    pub fn forward_rows(&self, x: ArrayView2<T>) -> Result<(Array1<T>, Vec<usize>)> {
        let mut best = Array1::from_elem(x.nrows(), T::infinity());
        let mut arg = vec![0usize; x.nrows()];
        for (i, c) in self.components.iter().enumerate() {
            let vals = if i == 0 {
                c.value_batch(x)?
            } else {
                c.value_batch_unchecked(x)
            };
            for (row, &v) in vals.iter().enumerate() {
                if v < best[row] {
                    best[row] = v;
                    arg[row] = i;
                }
            }
        }
        Ok((best, arg))
    }

    /// Parameter and input gradients of the active (argmin) component.
    pub fn backward(&self, x: &[T]) -> Result<EdsfGradient<T>> {
        let (value, active) = self.forward(x)?;
        let net = &self.components[active];
        let (_, cache) = net.forward(x)?;
        let (grads, input) = net.backward(&cache)?;
        Ok(EdsfGradient {
            value,
            active,
            grads,
            input,
        })
    }

    pub fn eval_set(&self, set: ItemSubset) -> Result<T> {
        if set.n() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: set.n(),
            });
        }
        self.forward(&set.indicator()).map(|(v, _)| v)
    }
}

impl<T: Scalar> InputFunction<T> for EdsfModel<T> {
    fn input_dim(&self) -> usize {
        EdsfModel::input_dim(self)
    }

    fn value_rows(&self, x: ArrayView2<T>) -> Result<Array1<T>> {
        self.forward_rows(x).map(|(v, _)| v)
    }

    fn value_and_input_grad(&self, x: &[T]) -> Result<(T, Vec<T>)> {
        let g = self.backward(x)?;
        Ok((g.value, g.input))
    }
}

impl<T: Scalar> SetFunction<T> for EdsfModel<T> {
    fn ground_size(&self) -> usize {
        self.input_dim()
    }

    fn value(&self, set: ItemSubset) -> T {
        self.components
            .iter()
            .map(|c| SetFunction::value(c, set))
            .fold(T::infinity(), T::min)
    }
}
