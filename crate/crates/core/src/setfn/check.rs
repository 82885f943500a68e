//! Exhaustive property checkers for small ground sets.

use super::{ItemSubset, SetFunction};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MONOTONE_CHECK_MAX_N: usize = 16;
pub const SUBMODULAR_CHECK_MAX_N: usize = 12;
/// Limit for the pairwise (second-order) submodularity test.
pub const LOCAL_SUBMODULAR_CHECK_MAX_N: usize = 20;

/// Outcome of a property check: pass, or the first witness found.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict<W> {
    Pass,
    Violated(W),
}

impl<W> Verdict<W> {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Pass => None,
            Verdict::Violated(w) => Some(w),
        }
    }
}

/// `f(a) > f(b)` although `a` is `b` minus one element.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneViolation<T> {
    pub a: ItemSubset,
    pub b: ItemSubset,
    pub fa: T,
    pub fb: T,
}

impl<T: Scalar> From<MonotoneViolation<T>> for Error {
    fn from(w: MonotoneViolation<T>) -> Self {
        Error::NotMonotone {
            a: w.a.bits(),
            b: w.b.bits(),
            fa: w.fa.to_f64_lossy(),
            fb: w.fb.to_f64_lossy(),
        }
    }
}

/// `f(a + v) - f(a) < f(b + v) - f(b)` with `a ⊆ b`, `v ∉ b`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubmodularViolation<T> {
    pub a: ItemSubset,
    pub b: ItemSubset,
    pub v: usize,
    pub gain_a: T,
    pub gain_b: T,
}

impl<T: Scalar> From<SubmodularViolation<T>> for Error {
    fn from(w: SubmodularViolation<T>) -> Self {
        Error::NotSubmodular {
            a: w.a.bits(),
            b: w.b.bits(),
            v: w.v,
            gain_a: w.gain_a.to_f64_lossy(),
            gain_b: w.gain_b.to_f64_lossy(),
        }
    }
}

fn guard(what: &'static str, n: usize, limit: usize) -> Result<()> {
    if n > limit {
        Err(Error::TooLarge { what, n, limit })
    } else {
        Ok(())
    }
}

/// Raw value table without the normalization gate of `tabulate`.
pub(crate) fn value_table<T: Scalar, F: SetFunction<T> + ?Sized>(f: &F) -> Vec<T> {
    ItemSubset::all(f.ground_size())
        .map(|s| f.value(s))
        .collect()
}

/// Scans every single-element extension `A -> A + v`, which implies
/// monotonicity for all pairs by chaining.
pub fn check_monotone<T, F>(f: &F) -> Result<Verdict<MonotoneViolation<T>>>
where
    T: Scalar,
    F: SetFunction<T> + ?Sized,
{
    let n = f.ground_size();
    guard("monotonicity check", n, MONOTONE_CHECK_MAX_N)?;
    let table = value_table(f);
    let tol = T::check_tol();
    for a in 0..table.len() as u64 {
        for v in 0..n {
            if a >> v & 1 == 1 {
                continue;
            }
            let b = a | 1 << v;
            let (fa, fb) = (table[a as usize], table[b as usize]);
            if !(fa <= fb + tol) {
                return Ok(Verdict::Violated(MonotoneViolation {
                    a: ItemSubset::from_raw(n, a),
                    b: ItemSubset::from_raw(n, b),
                    fa,
                    fb,
                }));
            }
        }
    }
    Ok(Verdict::Pass)
}

/// Diminishing-returns scan over every triple `A ⊆ B`, `v ∉ B`.
pub fn check_submodular<T, F>(f: &F) -> Result<Verdict<SubmodularViolation<T>>>
where
    T: Scalar,
    F: SetFunction<T> + ?Sized,
{
    let n = f.ground_size();
    guard("submodularity check", n, SUBMODULAR_CHECK_MAX_N)?;
    let table = value_table(f);
    let tol = T::check_tol();
    let full = (1u64 << n) - 1;
    for b in 0..=full {
        // submasks of b in increasing order
        let mut a = 0u64;
        loop {
            for v in 0..n {
                if b >> v & 1 == 1 {
                    continue;
                }
                let gain_a = table[(a | 1 << v) as usize] - table[a as usize];
                let gain_b = table[(b | 1 << v) as usize] - table[b as usize];
                if !(gain_a + tol >= gain_b) {
                    return Ok(Verdict::Violated(SubmodularViolation {
                        a: ItemSubset::from_raw(n, a),
                        b: ItemSubset::from_raw(n, b),
                        v,
                        gain_a,
                        gain_b,
                    }));
                }
            }
            if a == b {
                break;
            }
            a = (a.wrapping_sub(b)) & b;
        }
    }
    Ok(Verdict::Pass)
}

/// Equivalent second-order test `f(A+u) + f(A+v) >= f(A+u+v) + f(A)` for
/// `u, v ∉ A`; `O(n^2 2^n)` instead of `O(n 3^n)`. Witnesses are reported as
/// the triple `(A, A + u, v)`.
pub fn check_submodular_local<T, F>(f: &F) -> Result<Verdict<SubmodularViolation<T>>>
where
    T: Scalar,
    F: SetFunction<T> + ?Sized,
{
    let n = f.ground_size();
    guard("local submodularity check", n, LOCAL_SUBMODULAR_CHECK_MAX_N)?;
    let table = value_table(f);
    let tol = T::check_tol();
    for a in 0..table.len() as u64 {
        for u in 0..n {
            if a >> u & 1 == 1 {
                continue;
            }
            let b = a | 1 << u;
            for v in 0..n {
                if v == u || a >> v & 1 == 1 {
                    continue;
                }
                let gain_a = table[(a | 1 << v) as usize] - table[a as usize];
                let gain_b = table[(b | 1 << v) as usize] - table[b as usize];
                if !(gain_a + tol >= gain_b) {
                    return Ok(Verdict::Violated(SubmodularViolation {
                        a: ItemSubset::from_raw(n, a),
                        b: ItemSubset::from_raw(n, b),
                        v,
                        gain_a,
                        gain_b,
                    }));
                }
            }
        }
    }
    Ok(Verdict::Pass)
}
