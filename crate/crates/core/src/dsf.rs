//! Deep submodular function networks.
//!
//! A network is a stack of layers computing `h_v = phi_v(sum_u w_uv x_u) + b_v`
//! with non-negative weights and biases and normalized, non-decreasing,
//! concave activations. Restricted to 0/1 inputs it is a monotone submodular
//! set function; on the non-negative orthant it is concave and monotone.
//!
//! Evaluation is batched: rows of the input matrix are samples. Gradients
//! come from a hand-written backward pass over the cached pre-activations.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;
use crate::setfn::{CoverageSpec, ItemSubset, SetFunction};

/// Node activation. All variants satisfy `phi(0) = 0` and are non-decreasing
/// and concave on `x >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum Activation<T> {
    Identity,
    /// `min(x, alpha)`
    MinCap {
        alpha: T,
    },
    Sqrt,
    Log1p,
}

impl<T: Scalar> Activation<T> {
    pub fn min_cap(alpha: T) -> Result<Self> {
        let a = Activation::MinCap { alpha };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Activation::MinCap { alpha } if !(alpha >= T::zero()) || !alpha.is_finite() => {
                Err(Error::InvalidNetwork(format!(
                    "min_cap alpha must be finite and >= 0, got {alpha}"
                )))
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn apply(&self, z: T) -> T {
        match *self {
            Activation::Identity => z,
            Activation::MinCap { alpha } => z.min(alpha),
            Activation::Sqrt => z.max(T::zero()).sqrt(),
            Activation::Log1p => z.max(T::zero()).ln_1p(),
        }
    }

    /// Right derivative. At the `min_cap` kink this is 0 (the flat side);
    /// the unbounded slope of `sqrt` at 0 is clamped at `z = epsilon`.
    #[inline]
    pub fn derivative(&self, z: T) -> T {
        match *self {
            Activation::Identity => T::one(),
            Activation::MinCap { alpha } => {
                if z < alpha {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Sqrt => {
                let two = T::one() + T::one();
                T::one() / (two * z.max(T::epsilon()).sqrt())
            }
            Activation::Log1p => T::one() / (T::one() + z.max(T::zero())),
        }
    }

    /// Distance from `z` to the nearest point where the derivative jumps or
    /// blows up, or `None` for smooth activations.
    pub fn kink_distance(&self, z: T) -> Option<T> {
        match *self {
            Activation::MinCap { alpha } => Some((z - alpha).abs()),
            Activation::Sqrt => Some(z.abs()),
            _ => None,
        }
    }

    pub fn cast<U: Scalar>(&self) -> Activation<U> {
        match *self {
            Activation::Identity => Activation::Identity,
            Activation::MinCap { alpha } => Activation::MinCap {
                alpha: U::of(alpha.to_f64_lossy()),
            },
            Activation::Sqrt => Activation::Sqrt,
            Activation::Log1p => Activation::Log1p,
        }
    }
}

/// One fully connected layer; `weights` is `out_dim x in_dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLayer<T>", into = "RawLayer<T>", bound = "T: Scalar")]
pub struct DsfLayer<T> {
    weights: Array2<T>,
    biases: Array1<T>,
    activations: Vec<Activation<T>>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged, bound = "T: Scalar")]
enum RawActivations<T> {
    Shared(Activation<T>),
    PerNode(Vec<Activation<T>>),
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawLayer<T> {
    w: Vec<Vec<T>>,
    b: Vec<T>,
    act: RawActivations<T>,
}

impl<T: Scalar> TryFrom<RawLayer<T>> for DsfLayer<T> {
    type Error = Error;
    fn try_from(r: RawLayer<T>) -> Result<Self> {
        let out_dim = r.w.len();
        let in_dim = r.w.first().map_or(0, Vec::len);
        if r.w.iter().any(|row| row.len() != in_dim) {
            return Err(Error::InvalidNetwork("ragged weight matrix".into()));
        }
        let flat: Vec<T> = r.w.into_iter().flatten().collect();
        let weights = Array2::from_shape_vec((out_dim, in_dim), flat)
            .map_err(|e| Error::InvalidNetwork(e.to_string()))?;
        let activations = match r.act {
            RawActivations::Shared(a) => vec![a; out_dim],
            RawActivations::PerNode(v) => v,
        };
        DsfLayer::new(weights, Array1::from(r.b), activations)
    }
}

impl<T: Scalar> From<DsfLayer<T>> for RawLayer<T> {
    fn from(l: DsfLayer<T>) -> Self {
        let act = match l.activations.first() {
            Some(first) if l.activations.iter().all(|a| a == first) => {
                RawActivations::Shared(*first)
            }
            _ => RawActivations::PerNode(l.activations.clone()),
        };
        RawLayer {
            w: l.weights.rows().into_iter().map(|r| r.to_vec()).collect(),
            b: l.biases.to_vec(),
            act,
        }
    }
}

impl<T: Scalar> DsfLayer<T> {
    pub fn new(
        weights: Array2<T>,
        biases: Array1<T>,
        activations: Vec<Activation<T>>,
    ) -> Result<Self> {
        let layer = Self {
            weights,
            biases,
            activations,
        };
        layer.validate()?;
        Ok(layer)
    }

    /// Same activation on every output node.
    pub fn uniform(
        weights: Array2<T>,
        biases: Array1<T>,
        activation: Activation<T>,
    ) -> Result<Self> {
        let out = weights.nrows();
        Self::new(weights, biases, vec![activation; out])
    }

    fn validate(&self) -> Result<()> {
        let (out, inp) = self.weights.dim();
        if out == 0 || inp == 0 {
            return Err(Error::InvalidNetwork(
                "layer dimensions must be >= 1".into(),
            ));
        }
        if self.biases.len() != out || self.activations.len() != out {
            return Err(Error::InvalidNetwork(format!(
                "layer has {out} outputs but {} biases and {} activations",
                self.biases.len(),
                self.activations.len()
            )));
        }
        if let Some(w) = self
            .weights
            .iter()
            .find(|w| !(**w >= T::zero()) || !w.is_finite())
        {
            return Err(Error::InvalidNetwork(format!(
                "weights must be finite and non-negative, found {w}"
            )));
        }
        if let Some(b) = self
            .biases
            .iter()
            .find(|b| !(**b >= T::zero()) || !b.is_finite())
        {
            return Err(Error::InvalidNetwork(format!(
                "biases must be finite and non-negative, found {b}"
            )));
        }
        self.activations.iter().try_for_each(Activation::validate)
    }

    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &Array2<T> {
        &self.weights
    }

    pub fn biases(&self) -> &Array1<T> {
        &self.biases
    }

    pub fn activations(&self) -> &[Activation<T>] {
        &self.activations
    }

    pub(crate) fn params_mut(&mut self) -> (&mut Array2<T>, &mut Array1<T>) {
        (&mut self.weights, &mut self.biases)
    }

    /// Pre-activations `x W^T` for a batch.
    fn pre_activation(&self, x: ArrayView2<T>) -> Array2<T> {
        x.dot(&self.weights.t())
    }

    /// The activation every node uses, if there is only one.
    fn shared_activation(&self) -> Option<Activation<T>> {
        let first = self.activations[0];
        self.activations
            .iter()
            .all(|a| *a == first)
            .then_some(first)
    }

    /// `phi(z) + b` for every row.
    fn activate(&self, z: &Array2<T>) -> Array2<T> {
        let mut h = z.clone();
        let b = self.biases.view().insert_axis(Axis(0));
        let zip = Zip::from(&mut h).and_broadcast(&b);
        match self.shared_activation() {
            // one match per layer instead of per element
            Some(Activation::Identity) => zip.for_each(|v, &b| *v += b),
            Some(Activation::MinCap { alpha }) => {
                zip.for_each(|v, &b| *v = if *v > alpha { alpha } else { *v } + b)
            }
            _ => {
                for mut row in h.rows_mut() {
                    for ((v, act), &b) in row.iter_mut().zip(&self.activations).zip(&self.biases) {
                        *v = act.apply(*v) + b;
                    }
                }
            }
        }
        h
    }

    /// `d <- d * phi'(z)` elementwise.
    fn scale_by_derivative(&self, d: &mut Array2<T>, z: &Array2<T>) {
        match self.shared_activation() {
            Some(Activation::Identity) => {}
            Some(Activation::MinCap { alpha }) => Zip::from(d)
                .and(z)
                .for_each(|d, &z| *d = if z < alpha { *d } else { T::zero() }),
            _ => {
                for (mut row, zrow) in d.rows_mut().into_iter().zip(z.rows()) {
                    for ((d, act), &z) in row.iter_mut().zip(&self.activations).zip(zrow.iter()) {
                        *d *= act.derivative(z);
                    }
                }
            }
        }
    }

    fn cast<U: Scalar>(&self) -> DsfLayer<U> {
        DsfLayer {
            weights: self.weights.mapv(|w| U::of(w.to_f64_lossy())),
            biases: self.biases.mapv(|b| U::of(b.to_f64_lossy())),
            activations: self.activations.iter().map(Activation::cast).collect(),
        }
    }
}

/// Layered DSF ending in a single output node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawNetwork<T>",
    into = "RawNetwork<T>",
    bound = "T: Scalar"
)]
pub struct DsfNetwork<T> {
    input_dim: usize,
    layers: Vec<DsfLayer<T>>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawNetwork<T> {
    #[serde(default = "dsf_kind")]
    kind: String,
    input_dim: usize,
    layers: Vec<DsfLayer<T>>,
}

fn dsf_kind() -> String {
    "dsf".into()
}

impl<T: Scalar> TryFrom<RawNetwork<T>> for DsfNetwork<T> {
    type Error = Error;
    fn try_from(r: RawNetwork<T>) -> Result<Self> {
        if r.kind != "dsf" {
            return Err(Error::InvalidNetwork(format!(
                "expected kind \"dsf\", found \"{}\"",
                r.kind
            )));
        }
        DsfNetwork::new(r.input_dim, r.layers)
    }
}

impl<T: Scalar> From<DsfNetwork<T>> for RawNetwork<T> {
    fn from(n: DsfNetwork<T>) -> Self {
        RawNetwork {
            kind: dsf_kind(),
            input_dim: n.input_dim,
            layers: n.layers,
        }
    }
}

/// Per-layer inputs and pre-activations of a batched forward pass.
#[derive(Clone, Debug)]
pub struct ForwardCache<T> {
    inputs: Vec<Array2<T>>,
    pre: Vec<Array2<T>>,
    output: Array1<T>,
}

impl<T: Scalar> ForwardCache<T> {
    pub fn output(&self) -> &Array1<T> {
        &self.output
    }

    pub fn batch_size(&self) -> usize {
        self.output.len()
    }

    /// Restricts the cache to a subset of rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            inputs: self
                .inputs
                .iter()
                .map(|a| a.select(Axis(0), rows))
                .collect(),
            pre: self.pre.iter().map(|a| a.select(Axis(0), rows)).collect(),
            output: self.output.select(Axis(0), rows),
        }
    }
}

/// Gradients with the same shapes as the network parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<T> {
    pub weights: Vec<Array2<T>>,
    pub biases: Vec<Array1<T>>,
}

impl<T: Scalar> Gradients<T> {
    pub fn zeros_like(net: &DsfNetwork<T>) -> Self {
        Self {
            weights: net
                .layers
                .iter()
                .map(|l| Array2::zeros(l.weights.dim()))
                .collect(),
            biases: net
                .layers
                .iter()
                .map(|l| Array1::zeros(l.biases.len()))
                .collect(),
        }
    }

    pub fn fill_zero(&mut self) {
        self.weights.iter_mut().for_each(|w| w.fill(T::zero()));
        self.biases.iter_mut().for_each(|b| b.fill(T::zero()));
    }

    pub fn max_abs(&self) -> T {
        self.weights
            .iter()
            .flat_map(|w| w.iter())
            .chain(self.biases.iter().flat_map(|b| b.iter()))
            .fold(T::zero(), |m, g| m.max(g.abs()))
    }
}

impl<T: Scalar> DsfNetwork<T> {
    pub fn new(input_dim: usize, layers: Vec<DsfLayer<T>>) -> Result<Self> {
        let net = Self { input_dim, layers };
        net.validate()?;
        Ok(net)
    }

    /// Skips validation; used to build deliberately invalid networks for
    /// mutation tests.
    pub(crate) fn from_parts_unchecked(input_dim: usize, layers: Vec<DsfLayer<T>>) -> Self {
        Self { input_dim, layers }
    }

    /// Checks dimension chaining, the single output and parameter signs.
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::InvalidNetwork("input_dim must be >= 1".into()));
        }
        let last = self
            .layers
            .last()
            .ok_or_else(|| Error::InvalidNetwork("network needs at least one layer".into()))?;
        let mut width = self.input_dim;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.validate()?;
            if layer.in_dim() != width {
                return Err(Error::InvalidNetwork(format!(
                    "layer {i} expects {} inputs but receives {width}",
                    layer.in_dim()
                )));
            }
            width = layer.out_dim();
        }
        if last.out_dim() != 1 {
            return Err(Error::InvalidNetwork(format!(
                "final layer must have one output, has {}",
                last.out_dim()
            )));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn layers(&self) -> &[DsfLayer<T>] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [DsfLayer<T>] {
        &mut self.layers
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn cast<U: Scalar>(&self) -> DsfNetwork<U> {
        DsfNetwork {
            input_dim: self.input_dim,
            layers: self.layers.iter().map(DsfLayer::cast).collect(),
        }
    }

    fn check_batch(&self, x: &ArrayView2<T>) -> Result<()> {
        if x.ncols() != self.input_dim {
            return Err(Error::Dimension {
                expected: self.input_dim,
                got: x.ncols(),
            });
        }
        for row in x.rows() {
            if let Some((index, v)) = row.iter().enumerate().find(|(_, v)| !(**v >= T::zero())) {
                return Err(Error::NegativeInput {
                    index,
                    value: v.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }

    /// Batched forward pass keeping what the backward pass needs.
    pub fn forward_batch(&self, x: ArrayView2<T>) -> Result<ForwardCache<T>> {
        self.check_batch(&x)?;
        Ok(self.forward_batch_unchecked(x))
    }

    pub(crate) fn forward_batch_unchecked(&self, x: ArrayView2<T>) -> ForwardCache<T> {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut h = x.to_owned();
        for layer in &self.layers {
            let z = layer.pre_activation(h.view());
            let next = layer.activate(&z);
            inputs.push(h);
            pre.push(z);
            h = next;
        }
        let output = h.column(0).to_owned();
        ForwardCache {
            inputs,
            pre,
            output,
        }
    }

    /// Outputs only, without keeping a cache.
    pub fn value_batch(&self, x: ArrayView2<T>) -> Result<Array1<T>> {
        self.check_batch(&x)?;
        Ok(self.value_batch_unchecked(x))
    }

    pub(crate) fn value_batch_unchecked(&self, x: ArrayView2<T>) -> Array1<T> {
        let mut h = x.to_owned();
        for layer in &self.layers {
            h = layer.activate(&layer.pre_activation(h.view()));
        }
        h.column(0).to_owned()
    }

    /// Single-sample forward pass.
    pub fn forward(&self, x: &[T]) -> Result<(T, ForwardCache<T>)> {
        let view = ArrayView2::from_shape((1, x.len()), x)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let cache = self.forward_batch(view)?;
        Ok((cache.output[0], cache))
    }

    pub fn value(&self, x: &[T]) -> Result<T> {
        self.forward(x).map(|(v, _)| v)
    }

    /// Evaluates the network on the 0/1 indicator of `set`.
    pub fn eval_set(&self, set: ItemSubset) -> Result<T> {
        if set.n() != self.input_dim {
            return Err(Error::Dimension {
                expected: self.input_dim,
                got: set.n(),
            });
        }
        self.value(&set.indicator())
    }

    /// Accumulates `sum_rows d_out[row] * d output[row] / d params` into
    /// `grads` and, if requested, returns `d output / d x` scaled by `d_out`
    /// for every row.
    pub fn backward_batch(
        &self,
        cache: &ForwardCache<T>,
        d_out: ArrayView1<T>,
        grads: &mut Gradients<T>,
        want_input_grad: bool,
    ) -> Result<Option<Array2<T>>> {
        if cache.pre.len() != self.layers.len() || d_out.len() != cache.batch_size() {
            return Err(Error::InvalidParameter(
                "forward cache does not match this network or upstream gradient".into(),
            ));
        }
        for (l, layer) in self.layers.iter().enumerate() {
            if cache.pre[l].ncols() != layer.out_dim() || cache.inputs[l].ncols() != layer.in_dim()
            {
                return Err(Error::InvalidParameter(format!(
                    "forward cache layer {l} has the wrong shape"
                )));
            }
            if grads.weights[l].dim() != layer.weights.dim() {
                return Err(Error::InvalidParameter(format!(
                    "gradient buffer layer {l} has the wrong shape"
                )));
            }
        }
        Ok(self.backward_batch_unchecked(cache, d_out, grads, want_input_grad))
    }

    pub(crate) fn backward_batch_unchecked(
        &self,
        cache: &ForwardCache<T>,
        d_out: ArrayView1<T>,
        grads: &mut Gradients<T>,
        want_input_grad: bool,
    ) -> Option<Array2<T>> {
        // delta = dL / d(layer output), batch x out
        let mut delta = d_out.to_owned().insert_axis(Axis(1));
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            grads.biases[l] += &delta.sum_axis(Axis(0));
            let mut dz = delta;
            layer.scale_by_derivative(&mut dz, &cache.pre[l]);
            general_mat_mul(
                T::one(),
                &dz.t(),
                &cache.inputs[l],
                T::one(),
                &mut grads.weights[l],
            );
            if l == 0 && !want_input_grad {
                return None;
            }
            delta = dz.dot(&layer.weights);
        }
        Some(delta)
    }

    /// Single-sample gradients of the output with respect to every parameter
    /// and the input.
    pub fn backward(&self, cache: &ForwardCache<T>) -> Result<(Gradients<T>, Vec<T>)> {
        if cache.batch_size() != 1 {
            return Err(Error::InvalidParameter(
                "single-sample backward needs a single-row cache".into(),
            ));
        }
        let mut grads = Gradients::zeros_like(self);
        let ones = Array1::from_elem(1, T::one());
        let dx = self
            .backward_batch(cache, ones.view(), &mut grads, true)?
            .expect("input gradient requested");
        Ok((grads, dx.row(0).to_vec()))
    }

    /// Smallest distance of any cached pre-activation to an activation kink,
    /// over all rows. `None` if the network has no kinked activations.
    pub fn kink_margin(&self, cache: &ForwardCache<T>) -> Option<T> {
        let mut margin: Option<T> = None;
        for (layer, z) in self.layers.iter().zip(&cache.pre) {
            for row in z.rows() {
                for (act, &zv) in layer.activations.iter().zip(row.iter()) {
                    if let Some(d) = act.kink_distance(zv) {
                        margin = Some(margin.map_or(d, |m: T| m.min(d)));
                    }
                }
            }
        }
        margin
    }

    /// Clamps every weight and bias to `max(., 0)`.
    pub fn project_nonneg(&mut self) {
        for layer in &mut self.layers {
            layer.weights.mapv_inplace(|w| w.max(T::zero()));
            layer.biases.mapv_inplace(|b| b.max(T::zero()));
        }
    }

    /// True when every parameter is finite and non-negative.
    pub fn is_nonneg(&self) -> bool {
        self.layers.iter().all(|l| {
            l.weights.iter().all(|w| *w >= T::zero() && w.is_finite())
                && l.biases.iter().all(|b| *b >= T::zero() && b.is_finite())
        })
    }

    /// Exact one-hidden-layer encoding of a coverage function: one
    /// `min(., 1)` node per covered universe element, output weights `w(u)`.
    pub fn from_coverage(spec: &CoverageSpec<T>) -> Result<Self> {
        let n = spec.n_items();
        let mut elems = spec.covered_elements();
        if elems.is_empty() {
            // nothing is covered; keep one dead node so the shape stays valid
            elems.push(0);
        }
        let mut w1 = Array2::zeros((elems.len(), n));
        for (item, covered) in spec.membership().iter().enumerate() {
            for &u in covered {
                if let Ok(row) = elems.binary_search(&u) {
                    w1[[row, item]] = T::one();
                }
            }
        }
        let w2 = Array2::from_shape_fn((1, elems.len()), |(_, r)| spec.weights()[elems[r]]);
        let hidden = DsfLayer::uniform(
            w1,
            Array1::zeros(elems.len()),
            Activation::MinCap { alpha: T::one() },
        )?;
        let out = DsfLayer::uniform(w2, Array1::zeros(1), Activation::Identity)?;
        Self::new(n, vec![hidden, out])
    }
}

impl<T: Scalar> SetFunction<T> for DsfNetwork<T> {
    fn ground_size(&self) -> usize {
        self.input_dim
    }

    fn value(&self, set: ItemSubset) -> T {
        let x = set.indicator::<T>();
        let view = ArrayView2::from_shape((1, x.len()), &x).expect("row vector");
        self.value_batch_unchecked(view)[0]
    }
}

/// Random network with layer widths `widths = [n, h_1, .., 1]`. Hidden layers
/// use `activation`, the output layer is a plain weighted sum. Weights are
/// drawn from `Uniform(0, 1 / in_dim)`, biases start at zero.
pub fn init_dsf<T: Scalar>(
    widths: &[usize],
    activation: Activation<T>,
    seed: u64,
) -> Result<DsfNetwork<T>> {
    if widths.len() < 2 {
        return Err(Error::InvalidParameter(
            "architecture needs an input width and at least one layer".into(),
        ));
    }
    if widths.contains(&0) {
        return Err(Error::InvalidParameter("layer widths must be >= 1".into()));
    }
    if *widths.last().unwrap() != 1 {
        return Err(Error::InvalidParameter(
            "architecture must end in a single output".into(),
        ));
    }
    activation.validate()?;
    let mut rng = rng::seeded(seed);
    let mut layers = Vec::with_capacity(widths.len() - 1);
    for (i, pair) in widths.windows(2).enumerate() {
        let (inp, out) = (pair[0], pair[1]);
        let scale = 1.0 / inp as f64;
        let w = Array2::from_shape_simple_fn((out, inp), || T::of(rng.gen::<f64>() * scale));
        let act = if i + 2 == widths.len() {
            Activation::Identity
        } else {
            activation
        };
        layers.push(DsfLayer::uniform(w, Array1::zeros(out), act)?);
    }
    DsfNetwork::new(widths[0], layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setfn::{check_monotone, check_submodular, gen_random_coverage};
    use ndarray::array;

    fn hand_net() -> DsfNetwork<f64> {
        // one hidden node: weights [0.5, 0.5], min(., 1); output weight 1
        let hidden = DsfLayer::uniform(
            array![[0.5, 0.5]],
            array![0.0],
            Activation::MinCap { alpha: 1.0 },
        )
        .unwrap();
        let out = DsfLayer::uniform(array![[1.0]], array![0.0], Activation::Identity).unwrap();
        DsfNetwork::new(2, vec![hidden, out]).unwrap()
    }

    #[test]
    fn hand_evaluation() {
        let net = hand_net();
        assert_eq!(net.value(&[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(net.value(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(net.value(&[4.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn forward_errors() {
        let net = hand_net();
        assert!(matches!(
            net.value(&[1.0, -0.1]),
            Err(Error::NegativeInput { index: 1, .. })
        ));
        assert!(matches!(net.value(&[1.0]), Err(Error::Dimension { .. })));
        assert!(net.eval_set(ItemSubset::full(3).unwrap()).is_err());
    }

    #[test]
    fn eval_set_matches_indicator_forward() {
        let net: DsfNetwork<f64> = init_dsf(&[4, 5, 1], Activation::Sqrt, 3).unwrap();
        for s in ItemSubset::all(4) {
            assert_eq!(net.eval_set(s).unwrap(), net.value(&s.indicator()).unwrap());
        }
        assert_eq!(net.eval_set(ItemSubset::empty(4).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn linear_node_gradients() {
        let w = 0.7;
        let layer = DsfLayer::uniform(array![[w]], array![0.0], Activation::Identity).unwrap();
        let net = DsfNetwork::new(1, vec![layer]).unwrap();
        let (_, cache) = net.forward(&[3.0]).unwrap();
        let (g, dx) = net.backward(&cache).unwrap();
        assert_eq!(g.weights[0][[0, 0]], 3.0);
        assert_eq!(g.biases[0][0], 1.0);
        assert_eq!(dx, vec![w]);
    }

    #[test]
    fn saturated_cap_blocks_upstream_gradients() {
        let net = hand_net();
        let (_, cache) = net.forward(&[3.0, 3.0]).unwrap();
        let (g, dx) = net.backward(&cache).unwrap();
        assert!(g.weights[0].iter().all(|&v| v == 0.0));
        assert_eq!(dx, vec![0.0, 0.0]);
        // the output weight still sees the capped activation
        assert_eq!(g.weights[1][[0, 0]], 1.0);
    }

    #[test]
    fn exact_kink_takes_flat_side() {
        let net = hand_net();
        let (_, cache) = net.forward(&[1.0, 1.0]).unwrap();
        assert_eq!(net.kink_margin(&cache), Some(0.0));
        let (_, dx) = net.backward(&cache).unwrap();
        assert_eq!(dx, vec![0.0, 0.0]);
    }

    #[test]
    fn init_properties() {
        let a: DsfNetwork<f64> =
            init_dsf(&[16, 64, 64, 64, 1], Activation::MinCap { alpha: 95.0 }, 5).unwrap();
        assert_eq!(a.layers().len(), 4);
        assert_eq!(a.layers()[3].activations()[0], Activation::Identity);
        assert!(a.layers()[0]
            .weights()
            .iter()
            .all(|&w| (0.0..1.0 / 16.0).contains(&w)));
        assert_eq!(
            a,
            init_dsf(&[16, 64, 64, 64, 1], Activation::MinCap { alpha: 95.0 }, 5).unwrap()
        );
        assert!(init_dsf::<f64>(&[], Activation::Identity, 0).is_err());
        assert!(init_dsf::<f64>(&[3], Activation::Identity, 0).is_err());
        assert!(init_dsf::<f64>(&[3, 0, 1], Activation::Identity, 0).is_err());
        assert!(init_dsf::<f64>(&[3, 2], Activation::Identity, 0).is_err());
    }

    #[test]
    fn single_linear_layer_is_modular() {
        let net: DsfNetwork<f64> = init_dsf(&[5, 1], Activation::Identity, 1).unwrap();
        let w = net.layers()[0].weights().row(0).to_vec();
        for s in ItemSubset::all(5) {
            let expect: f64 = s.iter().map(|i| w[i]).sum();
            assert!((net.eval_set(s).unwrap() - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn projection_clamps() {
        let mut net = hand_net();
        net.layers_mut()[0].params_mut().0[[0, 0]] = -0.3;
        assert!(!net.is_nonneg());
        net.project_nonneg();
        assert_eq!(net.layers()[0].weights()[[0, 0]], 0.0);
        let before = hand_net();
        let mut after = before.clone();
        after.project_nonneg();
        assert_eq!(before, after);
    }

    #[test]
    fn validation_rejects_bad_networks() {
        assert!(DsfLayer::uniform(array![[-1.0]], array![0.0], Activation::Identity).is_err());
        assert!(DsfLayer::uniform(array![[1.0]], array![-1.0], Activation::Identity).is_err());
        assert!(Activation::min_cap(-1.0).is_err());
        let l = DsfLayer::uniform(array![[1.0, 1.0]], array![0.0], Activation::Identity).unwrap();
        assert!(DsfNetwork::new(3, vec![l.clone()]).is_err());
        let wide = DsfLayer::uniform(array![[1.0], [1.0]], array![0.0, 0.0], Activation::Identity)
            .unwrap();
        assert!(DsfNetwork::new(1, vec![wide]).is_err());
        assert!(DsfNetwork::<f64>::new(1, vec![]).is_err());
    }

    #[test]
    fn coverage_encoding_is_exact() {
        for seed in 0..5 {
            let c: CoverageSpec<f64> = gen_random_coverage(6, 40, 0.2, seed).unwrap();
            let net = DsfNetwork::from_coverage(&c).unwrap();
            for s in ItemSubset::all(6) {
                assert_eq!(net.eval_set(s).unwrap(), c.value(s));
            }
        }
    }

    #[test]
    fn random_networks_are_monotone_submodular() {
        for seed in 0..6 {
            let net: DsfNetwork<f64> =
                init_dsf(&[7, 6, 4, 1], Activation::MinCap { alpha: 0.4 }, seed).unwrap();
            assert!(check_monotone(&net).unwrap().is_pass());
            assert!(check_submodular(&net).unwrap().is_pass());
        }
    }

    #[test]
    fn json_round_trip_and_shape() {
        let net: DsfNetwork<f64> =
            init_dsf(&[3, 2, 1], Activation::MinCap { alpha: 95.0 }, 2).unwrap();
        let js = serde_json::to_value(&net).unwrap();
        assert_eq!(js["kind"], "dsf");
        assert_eq!(js["input_dim"], 3);
        assert_eq!(
            js["layers"][0]["act"],
            serde_json::json!({"kind":"min_cap","alpha":95.0})
        );
        let back: DsfNetwork<f64> = serde_json::from_value(js.clone()).unwrap();
        assert_eq!(back, net);
        let mut bad = js;
        bad["layers"][0]["w"][0][0] = serde_json::json!(-0.5);
        assert!(serde_json::from_value::<DsfNetwork<f64>>(bad).is_err());
    }

    #[test]
    fn per_node_activations_serialize_as_list() {
        let l = DsfLayer::new(
            array![[1.0], [1.0]],
            array![0.0, 0.0],
            vec![Activation::MinCap { alpha: 2.0 }, Activation::Identity],
        )
        .unwrap();
        let js = serde_json::to_value(&l).unwrap();
        assert!(js["act"].is_array());
        assert_eq!(serde_json::from_value::<DsfLayer<f64>>(js).unwrap(), l);
    }

    #[test]
    fn f32_and_f64_agree() {
        let net: DsfNetwork<f64> = init_dsf(&[4, 8, 1], Activation::Log1p, 7).unwrap();
        let small: DsfNetwork<f32> = net.cast();
        for s in ItemSubset::all(4) {
            let a = net.eval_set(s).unwrap();
            let b = small.eval_set(s).unwrap() as f64;
            assert!((a - b).abs() < 1e-5);
        }
    }
}
