//! Exact EDSF representations of monotone (submodular) set functions.
//!
//! Each gadget is a two-layer DSF with a capped node over the coordinates of
//! a subset and an uncapped node over the rest, summed by the output node.
//! The minimum over all gadgets reproduces the source function on every
//! subset.

use ndarray::{array, Array1, Array2};
use serde::{Deserialize, Serialize};

use super::EdsfModel;
use crate::dsf::{Activation, DsfLayer, DsfNetwork};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::setfn::{
    check_monotone, check_submodular_local, tabulate, ItemSubset, SetFunction, TabulatedFunction,
    Verdict,
};

/// The constructions enumerate every subset.
pub const CONSTRUCTION_MAX_N: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub n: usize,
    pub r: usize,
    pub max_abs_error: f64,
}

/// Capped node with weight `in_weight` on the coordinates of `set` and cap
/// `cap`, plus an identity node with per-coordinate weights `out_weights` on
/// the complement.
fn gadget<T: Scalar>(
    set: ItemSubset,
    in_weight: T,
    cap: T,
    out_weights: &[T],
) -> Result<DsfNetwork<T>> {
    let n = set.n();
    let w = Array2::from_shape_fn((2, n), |(row, j)| match (row, set.contains(j)) {
        (0, true) => in_weight,
        (1, false) => out_weights[j],
        _ => T::zero(),
    });
    let hidden = DsfLayer::new(
        w,
        Array1::zeros(2),
        vec![Activation::MinCap { alpha: cap }, Activation::Identity],
    )?;
    let out = DsfLayer::uniform(
        array![[T::one(), T::one()]],
        Array1::zeros(1),
        Activation::Identity,
    )?;
    DsfNetwork::new(n, vec![hidden, out])
}

/// `g_A(B) = min(sum over A∩B of c_A, c_A) + sum over B\A of f({k})` with
/// `c_A = f(A)`.
pub fn build_ga<T: Scalar>(f: &TabulatedFunction<T>, a: ItemSubset) -> Result<DsfNetwork<T>> {
    if a.n() != f.n() {
        return Err(Error::Dimension {
            expected: f.n(),
            got: a.n(),
        });
    }
    let c_a = f.at(a.bits());
    gadget(a, c_a, c_a, &f.singletons())
}

/// `g_B(A) = min(sum over A∩B of f(B), f(B)) + |A\B| f(S)` for monotone `f`.
pub fn build_gb_monotone<T: Scalar>(
    f: &TabulatedFunction<T>,
    b: ItemSubset,
) -> Result<DsfNetwork<T>> {
    if b.n() != f.n() {
        return Err(Error::Dimension {
            expected: f.n(),
            got: b.n(),
        });
    }
    let top = f.full_value();
    if let Some((mask, v)) = f.values().iter().enumerate().find(|(_, v)| **v > top) {
        return Err(Error::NotMonotone {
            a: mask as u64,
            b: (1u64 << f.n()) - 1,
            fa: v.to_f64_lossy(),
            fb: top.to_f64_lossy(),
        });
    }
    let c_b = f.at(b.bits());
    gadget(b, c_b, c_b, &vec![top; f.n()])
}

fn prepare<T, F>(f: &F) -> Result<TabulatedFunction<T>>
where
    T: Scalar,
    F: SetFunction<T> + ?Sized,
{
    let n = f.ground_size();
    if n > CONSTRUCTION_MAX_N {
        return Err(Error::TooLarge {
            what: "exact EDSF construction",
            n,
            limit: CONSTRUCTION_MAX_N,
        });
    }
    let table = tabulate(f)?;
    if let Verdict::Violated(w) = check_monotone(&table)? {
        return Err(w.into());
    }
    Ok(table)
}

/// Evaluates the model on all `2^n` subsets and compares with the table.
fn verify<T: Scalar>(model: &EdsfModel<T>, table: &TabulatedFunction<T>) -> Result<f64> {
    let n = table.n();
    let sets: Vec<ItemSubset> = ItemSubset::all(n).collect();
    let mut x = Array2::<T>::zeros((sets.len(), n));
    for (mut row, s) in x.rows_mut().into_iter().zip(&sets) {
        for i in s.iter() {
            row[i] = T::one();
        }
    }
    let (vals, _) = model.forward_rows(x.view())?;
    Ok(vals
        .iter()
        .zip(table.values())
        .map(|(v, t)| (v.to_f64_lossy() - t.to_f64_lossy()).abs())
        .fold(0.0, f64::max))
}

fn finish<T: Scalar>(
    components: Vec<DsfNetwork<T>>,
    table: &TabulatedFunction<T>,
) -> Result<(EdsfModel<T>, ConstructionReport)> {
    let model = EdsfModel::new(components)?;
    let max_abs_error = verify(&model, table)?;
    if max_abs_error > T::check_tol().to_f64_lossy() {
        return Err(Error::Inexact(max_abs_error));
    }
    let report = ConstructionReport {
        n: table.n(),
        r: model.r(),
        max_abs_error,
    };
    Ok((model, report))
}

/// Min over `g_A` for every nonempty `A`. Requires `f` normalized,
/// monotone and submodular; the result is re-verified on every subset.
pub fn build_edsf_from_submodular<T, F>(f: &F) -> Result<(EdsfModel<T>, ConstructionReport)>
where
    T: Scalar,
    F: SetFunction<T> + ?Sized,
{
    let table = prepare(f)?;
    if let Verdict::Violated(w) = check_submodular_local(&table)? {
        return Err(w.into());
    }
    let components = ItemSubset::all(table.n())
        .skip(1)
        .map(|a| build_ga(&table, a))
        .collect::<Result<Vec<_>>>()?;
    finish(components, &table)
}

/// Min over `g_B` for every `B`, with out-of-`B` weights `f(S)`. Requires
/// only a normalized monotone `f`.
pub fn build_edsf_from_monotone<T, F>(f: &F) -> Result<(EdsfModel<T>, ConstructionReport)>
where
    T: Scalar,
    F: SetFunction<T> + ?Sized,
{
    let table = prepare(f)?;
    let components = ItemSubset::all(table.n())
        .map(|b| build_gb_monotone(&table, b))
        .collect::<Result<Vec<_>>>()?;
    finish(components, &table)
}
