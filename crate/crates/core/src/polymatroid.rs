//! Brute-force polymatroid membership, greedy vertices and randomized checks
//! that pairs of polytope descriptions coincide.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::edsf::build_ga;
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;
use crate::setfn::{tabulate, ItemSubset, SetFunction, TabulatedFunction, Verdict};

/// Membership enumerates all `2^n` constraints.
pub const POLYMATROID_MAX_N: usize = 14;
/// Lemma checks tabulate one gadget per subset.
pub const LEMMA_CHECK_MAX_N: usize = 10;
/// Slack on every polytope constraint.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// `P_f = { x >= 0 : x(A) <= f(A) for all A }`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolymatroidOracle<T> {
    table: TabulatedFunction<T>,
}

impl<T: Scalar> PolymatroidOracle<T> {
    pub fn new<F: SetFunction<T> + ?Sized>(f: &F) -> Result<Self> {
        let n = f.ground_size();
        if n > POLYMATROID_MAX_N {
            return Err(Error::TooLarge {
                what: "polymatroid membership",
                n,
                limit: POLYMATROID_MAX_N,
            });
        }
        Ok(PolymatroidOracle {
            table: tabulate(f)?,
        })
    }

    pub fn from_table(table: TabulatedFunction<T>) -> Result<Self> {
        if table.n() > POLYMATROID_MAX_N {
            return Err(Error::TooLarge {
                what: "polymatroid membership",
                n: table.n(),
                limit: POLYMATROID_MAX_N,
            });
        }
        Ok(PolymatroidOracle { table })
    }

    pub fn n(&self) -> usize {
        self.table.n()
    }

    pub fn table(&self) -> &TabulatedFunction<T> {
        &self.table
    }
}

/// `L_A = { x >= 0 : x(A) <= c_A, x_j <= c_j for j not in A }`.
#[derive(Clone, Debug, PartialEq)]
pub struct LAPolytope<T> {
    a: ItemSubset,
    c_a: T,
    /// Indexed by item; entries inside `A` are unused and zero.
    c: Vec<T>,
}

impl<T: Scalar> LAPolytope<T> {
    pub fn new(a: ItemSubset, c_a: T, c: Vec<T>) -> Result<Self> {
        if c.len() != a.n() {
            return Err(Error::Dimension {
                expected: a.n(),
                got: c.len(),
            });
        }
        let bad = |v: T| !(v >= T::zero() && v.is_finite());
        if bad(c_a) || c.iter().enumerate().any(|(j, &v)| !a.contains(j) && bad(v)) {
            return Err(Error::InvalidParameter(
                "L_A bounds must be finite and non-negative".into(),
            ));
        }
        let c = c
            .into_iter()
            .enumerate()
            .map(|(j, v)| if a.contains(j) { T::zero() } else { v })
            .collect();
        Ok(LAPolytope { a, c_a, c })
    }

    /// `c_A = f(A)` and `c_j = f({j})`.
    pub fn from_table(f: &TabulatedFunction<T>, a: ItemSubset) -> Result<Self> {
        if a.n() != f.n() {
            return Err(Error::Dimension {
                expected: f.n(),
                got: a.n(),
            });
        }
        Self::new(a, f.at(a.bits()), f.singletons())
    }

    pub fn a(&self) -> ItemSubset {
        self.a
    }

    pub fn c_a(&self) -> T {
        self.c_a
    }

    pub fn c(&self) -> &[T] {
        &self.c
    }
}

fn check_dim<T>(n: usize, x: &[T]) -> Result<()> {
    if x.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: x.len(),
        });
    }
    Ok(())
}

/// `x(A)` for every mask `A`, by adding the lowest member to a smaller sum.
fn subset_sums<T: Scalar>(x: &[T]) -> Vec<T> {
    let mut sums = vec![T::zero(); 1 << x.len()];
    for mask in 1..sums.len() {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = sums[mask & (mask - 1)] + x[low];
    }
    sums
}

/// True iff `x >= 0` and `x(A) <= f(A) + 1e-9` for every `A`.
pub fn membership<T: Scalar>(p: &PolymatroidOracle<T>, x: &[T]) -> Result<bool> {
    check_dim(p.n(), x)?;
    if x.iter().any(|&v| !(v >= T::zero())) {
        return Ok(false);
    }
    let tol = T::of(MEMBERSHIP_TOL);
    Ok(subset_sums(x)
        .iter()
        .zip(p.table.values())
        .all(|(&s, &f)| s <= f + tol))
}

/// True iff `x >= 0`, `x(A) <= c_A + 1e-9` and `x_j <= c_j + 1e-9` off `A`.
pub fn la_membership<T: Scalar>(l: &LAPolytope<T>, x: &[T]) -> Result<bool> {
    check_dim(l.a.n(), x)?;
    if x.iter().any(|&v| !(v >= T::zero())) {
        return Ok(false);
    }
    let tol = T::of(MEMBERSHIP_TOL);
    let x_a: T = l.a.iter().map(|j| x[j]).sum();
    Ok(x_a <= l.c_a + tol && (0..x.len()).all(|j| l.a.contains(j) || x[j] <= l.c[j] + tol))
}

/// Marginal gains of `f` along `order`, zero off `A`. When `n` is within the
/// membership limit the result is checked to lie in `P_f`.
pub fn greedy_vertex<T, F>(f: &F, a: ItemSubset, order: &[usize]) -> Result<Vec<T>>
where
    T: Scalar,
    F: SetFunction<T> + ?Sized,
{
    let n = f.ground_size();
    if a.n() != n {
        return Err(Error::Dimension {
            expected: n,
            got: a.n(),
        });
    }
    let mut seen = ItemSubset::empty(n)?;
    for &i in order {
        if i >= n || !a.contains(i) || seen.contains(i) {
            return Err(Error::InvalidParameter(format!(
                "order {order:?} is not a permutation of {a:?}"
            )));
        }
        seen = seen.with(i);
    }
    if seen != a {
        return Err(Error::InvalidParameter(format!(
            "order {order:?} is not a permutation of {a:?}"
        )));
    }
    let mut x = vec![T::zero(); n];
    let mut prefix = ItemSubset::empty(n)?;
    let mut prev = f.value(prefix);
    for &i in order {
        prefix = prefix.with(i);
        let cur = f.value(prefix);
        x[i] = cur - prev;
        prev = cur;
    }
    if n <= POLYMATROID_MAX_N && !membership(&PolymatroidOracle::new(f)?, &x)? {
        return Err(Error::OutsidePolymatroid {
            x: x.iter().map(|v| v.to_f64_lossy()).collect(),
        });
    }
    Ok(x)
}

/// A point on which two descriptions of the same polytope disagree.
#[derive(Clone, Debug, PartialEq)]
pub struct MembershipDisagreement<T> {
    pub x: Vec<T>,
    pub left: bool,
    pub right: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaCheck<T> {
    /// Number of points on which both predicates were evaluated.
    pub points: usize,
    pub verdict: Verdict<MembershipDisagreement<T>>,
}

impl<T> LemmaCheck<T> {
    pub fn is_pass(&self) -> bool {
        self.verdict.is_pass()
    }
}

fn lemma_guard(n: usize) -> Result<()> {
    if n > LEMMA_CHECK_MAX_N {
        return Err(Error::TooLarge {
            what: "polytope equality check",
            n,
            limit: LEMMA_CHECK_MAX_N,
        });
    }
    Ok(())
}

/// Structured points: the origin, scaled axis points, greedy vertices of the
/// given tables over random orders and their scalings, then `samples`
/// uniform draws from `[0, box_max]^n`. Every second uniform draw uses the
/// smaller box `[0, box_max / n]^n` so both sides of the boundary are hit.
fn probe_points<T: Scalar>(
    tables: &[&TabulatedFunction<T>],
    axis: &[T],
    box_max: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<Vec<T>>> {
    let n = axis.len();
    let mut rng = rng::seeded(seed);
    let scales = [0.5, 1.0, 1.0 - 1e-6, 1.0 + 1e-6, 1.5];
    let mut pts = vec![vec![T::zero(); n]];
    for (j, &c) in axis.iter().enumerate() {
        for s in scales {
            let mut e = vec![T::zero(); n];
            e[j] = c * T::of(s);
            pts.push(e);
        }
    }
    let orders = (samples / 100).clamp(4, 64);
    let full = ItemSubset::full(n)?;
    for t in tables {
        for _ in 0..orders {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            // vertices of non-submodular tables are still valid probes
            let a = ItemSubset::from_raw(n, rng.gen::<u64>() & full.bits());
            for set in [full, a] {
                let ord: Vec<usize> = order.iter().copied().filter(|&i| set.contains(i)).collect();
                let v = marginal_gains(t, set, &ord);
                for s in scales {
                    pts.push(v.iter().map(|&c| c * T::of(s)).collect());
                }
            }
        }
    }
    for k in 0..samples {
        let hi = if k % 2 == 0 {
            box_max
        } else {
            box_max / n as f64
        };
        pts.push((0..n).map(|_| T::of(rng.gen::<f64>() * hi)).collect());
    }
    Ok(pts)
}

fn marginal_gains<T: Scalar>(f: &TabulatedFunction<T>, a: ItemSubset, order: &[usize]) -> Vec<T> {
    let mut x = vec![T::zero(); f.n()];
    let mut prefix = 0u64;
    for &i in order {
        let next = prefix | (1 << i);
        x[i] = f.at(next) - f.at(prefix);
        prefix = next;
    }
    debug_assert_eq!(prefix, a.bits());
    x
}

fn compare<T: Scalar>(
    pts: Vec<Vec<T>>,
    mut left: impl FnMut(&[T]) -> Result<bool>,
    mut right: impl FnMut(&[T]) -> Result<bool>,
) -> Result<LemmaCheck<T>> {
    let points = pts.len();
    for x in pts {
        let (l, r) = (left(&x)?, right(&x)?);
        if l != r {
            return Ok(LemmaCheck {
                points,
                verdict: Verdict::Violated(MembershipDisagreement {
                    x,
                    left: l,
                    right: r,
                }),
            });
        }
    }
    Ok(LemmaCheck {
        points,
        verdict: Verdict::Pass,
    })
}

fn box_for<T: Scalar>(tables: &[&TabulatedFunction<T>]) -> f64 {
    let top = tables
        .iter()
        .map(|t| t.full_value().to_f64_lossy())
        .fold(0.0, f64::max);
    1.5 * if top > 0.0 { top } else { 1.0 }
}

/// Compares `la_membership(L_A, x)` (left) with membership in the
/// polymatroid of the tabulated `g_A` gadget (right).
pub fn verify_lemma_ga<T: Scalar>(
    f: &TabulatedFunction<T>,
    a: ItemSubset,
    samples: usize,
    seed: u64,
) -> Result<LemmaCheck<T>> {
    lemma_guard(f.n())?;
    let l = LAPolytope::from_table(f, a)?;
    let g = tabulate(&build_ga(f, a)?)?;
    let p = PolymatroidOracle::from_table(g.clone())?;
    let mut axis = f.singletons();
    for j in a.iter() {
        axis[j] = l.c_a();
    }
    let pts = probe_points(&[f, &g], &axis, box_for(&[f]), samples, seed)?;
    compare(pts, |x| la_membership(&l, x), |x| membership(&p, x))
}

/// Compares membership in every `L_A` (left) with membership in `P_f`
/// (right).
pub fn verify_lemma_intersection<T: Scalar>(
    f: &TabulatedFunction<T>,
    samples: usize,
    seed: u64,
) -> Result<LemmaCheck<T>> {
    lemma_guard(f.n())?;
    let ls = ItemSubset::all(f.n())
        .map(|a| LAPolytope::from_table(f, a))
        .collect::<Result<Vec<_>>>()?;
    let p = PolymatroidOracle::from_table(f.clone())?;
    let pts = probe_points(&[f], &f.singletons(), box_for(&[f]), samples, seed)?;
    compare(
        pts,
        |x| {
            for l in &ls {
                if !la_membership(l, x)? {
                    return Ok(false);
                }
            }
            Ok(true)
        },
        |x| membership(&p, x),
    )
}

/// Compares membership in `P_h` for `h = min_i f_i` (left) with membership
/// in every `P_{f_i}` (right).
pub fn verify_lemma_min<T: Scalar>(
    fs: &[TabulatedFunction<T>],
    samples: usize,
    seed: u64,
) -> Result<LemmaCheck<T>> {
    let h = TabulatedFunction::pointwise_min(fs)?;
    lemma_guard(h.n())?;
    let ph = PolymatroidOracle::from_table(h.clone())?;
    let ps = fs
        .iter()
        .map(|f| PolymatroidOracle::from_table(f.clone()))
        .collect::<Result<Vec<_>>>()?;
    let mut tables: Vec<&TabulatedFunction<T>> = fs.iter().collect();
    tables.push(&h);
    let pts = probe_points(&tables, &h.singletons(), box_for(&tables), samples, seed)?;
    compare(
        pts,
        |x| membership(&ph, x),
        |x| {
            for p in &ps {
                if !membership(p, x)? {
                    return Ok(false);
                }
            }
            Ok(true)
        },
    )
}
