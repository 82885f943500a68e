//! Helpers shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use edsf_core::dsf::{DsfLayer, DsfNetwork, Gradients};
use edsf_core::EdsfModel;

/// `|a - b| / max(1, |a|, |b|)`: relative for large values, absolute near 0.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

/// Copy of `net` with weight `(layer, row, col)` shifted by `delta`.
pub fn shift_weight(
    net: &DsfNetwork<f64>,
    layer: usize,
    row: usize,
    col: usize,
    delta: f64,
) -> DsfNetwork<f64> {
    rebuild(net, layer, |w, _| w[[row, col]] += delta)
}

pub fn shift_bias(net: &DsfNetwork<f64>, layer: usize, row: usize, delta: f64) -> DsfNetwork<f64> {
    rebuild(net, layer, |_, b| b[row] += delta)
}

fn rebuild(
    net: &DsfNetwork<f64>,
    target: usize,
    edit: impl FnOnce(&mut ndarray::Array2<f64>, &mut ndarray::Array1<f64>),
) -> DsfNetwork<f64> {
    let mut edit = Some(edit);
    let layers = net
        .layers()
        .iter()
        .enumerate()
        .map(|(k, l)| {
            let mut w = l.weights().clone();
            let mut b = l.biases().clone();
            if k == target {
                (edit.take().expect("edited once"))(&mut w, &mut b);
            }
            DsfLayer::new(w, b, l.activations().to_vec())
                .expect("perturbation keeps parameters valid")
        })
        .collect();
    DsfNetwork::new(net.input_dim(), layers).expect("same shapes")
}

/// Worst relative error between `grads` and central differences of
/// `value` under perturbations of each parameter of `net`. Parameters below
/// `h` are skipped: the lower probe would leave the non-negative orthant.
fn parameter_error(
    net: &DsfNetwork<f64>,
    grads: &Gradients<f64>,
    h: f64,
    value: impl Fn(&DsfNetwork<f64>) -> f64,
) -> f64 {
    let mut worst = 0f64;
    for (k, l) in net.layers().iter().enumerate() {
        for ((i, j), &w) in l.weights().indexed_iter() {
            if w < h {
                continue;
            }
            let up = value(&shift_weight(net, k, i, j, h));
            let down = value(&shift_weight(net, k, i, j, -h));
            worst = worst.max(rel_err(grads.weights[k][[i, j]], (up - down) / (2.0 * h)));
        }
        for (i, &b) in l.biases().iter().enumerate() {
            if b < h {
                continue;
            }
            let up = value(&shift_bias(net, k, i, h));
            let down = value(&shift_bias(net, k, i, -h));
            worst = worst.max(rel_err(grads.biases[k][i], (up - down) / (2.0 * h)));
        }
    }
    worst
}

/// Worst relative error of a DSF's parameter and input gradients at `x`.
pub fn dsf_gradient_error(net: &DsfNetwork<f64>, x: &[f64], h: f64) -> f64 {
    let (_, cache) = net.forward(x).unwrap();
    let (grads, dx) = net.backward(&cache).unwrap();
    let worst = parameter_error(net, &grads, h, |n| n.value(x).unwrap());
    worst.max(input_gradient_error(|z| net.value(z).unwrap(), x, &dx, h))
}

/// Same check for an EDSF: the reported gradient of the active component,
/// differenced through the minimum, and the input gradient.
pub fn edsf_gradient_error(m: &EdsfModel<f64>, x: &[f64], h: f64) -> f64 {
    let g = m.backward(x).unwrap();
    let comps = m.components();
    let worst = parameter_error(&comps[g.active], &g.grads, h, |n| {
        let mut c = comps.to_vec();
        c[g.active] = n.clone();
        EdsfModel::new(c).unwrap().forward(x).unwrap().0
    });
    worst.max(input_gradient_error(
        |z| m.forward(z).unwrap().0,
        x,
        &g.input,
        h,
    ))
}

fn input_gradient_error(f: impl Fn(&[f64]) -> f64, x: &[f64], dx: &[f64], h: f64) -> f64 {
    let mut worst = 0f64;
    let mut z = x.to_vec();
    for i in 0..x.len() {
        if x[i] < h {
            continue;
        }
        z[i] = x[i] + h;
        let up = f(&z);
        z[i] = x[i] - h;
        let down = f(&z);
        z[i] = x[i];
        worst = worst.max(rel_err(dx[i], (up - down) / (2.0 * h)));
    }
    worst
}

/// Distance from `x` to the nearest kink of `net`: activation breakpoints.
pub fn dsf_kink_margin(net: &DsfNetwork<f64>, x: &[f64]) -> f64 {
    let (_, cache) = net.forward(x).unwrap();
    net.kink_margin(&cache).unwrap_or(f64::INFINITY)
}

/// Distance to the nearest EDSF kink: the active component's activation
/// breakpoints and the gap to the runner-up component.
pub fn edsf_kink_margin(m: &EdsfModel<f64>, x: &[f64]) -> f64 {
    let (best, active) = m.forward(x).unwrap();
    let gap = m
        .components()
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != active)
        .map(|(_, c)| c.value(x).unwrap() - best)
        .fold(f64::INFINITY, f64::min);
    gap.min(dsf_kink_margin(&m.components()[active], x))
}

/// Copy of `net` with every bias drawn from `Uniform(lo, hi)`.
pub fn with_random_biases(
    net: &DsfNetwork<f64>,
    lo: f64,
    hi: f64,
    rng: &mut impl rand::Rng,
) -> DsfNetwork<f64> {
    let layers = net
        .layers()
        .iter()
        .map(|l| {
            let b = l.biases().mapv(|_| rng.gen_range(lo..hi));
            DsfLayer::new(l.weights().clone(), b, l.activations().to_vec()).unwrap()
        })
        .collect();
    DsfNetwork::new(net.input_dim(), layers).unwrap()
}
