//! Social welfare maximization over partitions of items among users.
//!
//! The fractional relaxation feeds each user's row of an allocation matrix
//! to that user's concave valuation model; projected gradient ascent works
//! on the relaxation and sampling rounds the result to a partition.
//! Continuous greedy and exhaustive search serve as baselines on set
//! function oracles.

use ndarray::{Array2, Axis};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::InputFunction;
use crate::rng;
use crate::scalar::Scalar;
use crate::setfn::{tabulate, ItemSubset, SetFunction, TabulatedFunction, TABULATE_MAX_N};

/// Upper bound on `n_users ^ m_items` for exhaustive search.
pub const BRUTE_FORCE_MAX_ASSIGNMENTS: u64 = 10_000_000;

fn column_tol<T: Scalar>() -> T {
    T::of(1e-9).max(T::epsilon() * T::of(64.0))
}

/// `n_users x m_items` fractional allocation; every column lies on the
/// probability simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct AllocationMatrix<T> {
    a: Array2<T>,
}

impl<T: Scalar> AllocationMatrix<T> {
    pub fn new(a: Array2<T>) -> Result<Self> {
        let m = AllocationMatrix { a };
        m.validate()?;
        Ok(m)
    }

    /// Every item split evenly among the users.
    pub fn uniform(n_users: usize, m_items: usize) -> Result<Self> {
        if n_users == 0 || m_items == 0 {
            return Err(Error::InvalidAllocation(
                "need at least one user and one item".into(),
            ));
        }
        Ok(AllocationMatrix {
            a: Array2::from_elem((n_users, m_items), T::one() / T::of_usize(n_users)),
        })
    }

    pub fn from_assignment(asg: &Assignment) -> Self {
        let mut a = Array2::zeros((asg.n_users(), asg.m_items()));
        for (j, &i) in asg.owner().iter().enumerate() {
            a[[i, j]] = T::one();
        }
        AllocationMatrix { a }
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m) = self.a.dim();
        if n == 0 || m == 0 {
            return Err(Error::InvalidAllocation("empty allocation matrix".into()));
        }
        let tol = column_tol::<T>();
        for (j, col) in self.a.axis_iter(Axis(1)).enumerate() {
            if let Some(v) = col.iter().find(|&&v| !(v >= -tol && v <= T::one() + tol)) {
                return Err(Error::InvalidAllocation(format!(
                    "entry {v} in column {j} is outside [0, 1]"
                )));
            }
            let s: T = col.sum();
            if !((s - T::one()).abs() <= tol) {
                return Err(Error::InvalidAllocation(format!("column {j} sums to {s}")));
            }
        }
        Ok(())
    }

    pub fn n_users(&self) -> usize {
        self.a.nrows()
    }

    pub fn m_items(&self) -> usize {
        self.a.ncols()
    }

    pub fn matrix(&self) -> &Array2<T> {
        &self.a
    }
}

/// A partition of the items: `owner[j]` is the user receiving item `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    n_users: usize,
    owner: Vec<usize>,
}

impl Assignment {
    pub fn new(n_users: usize, owner: Vec<usize>) -> Result<Self> {
        if n_users == 0 {
            return Err(Error::InvalidAllocation("need at least one user".into()));
        }
        if let Some(&i) = owner.iter().find(|&&i| i >= n_users) {
            return Err(Error::InvalidAllocation(format!(
                "owner {i} out of range for {n_users} users"
            )));
        }
        Ok(Assignment { n_users, owner })
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn m_items(&self) -> usize {
        self.owner.len()
    }

    pub fn owner(&self) -> &[usize] {
        &self.owner
    }

    /// The item set `S_i` of every user.
    pub fn bundles(&self) -> Result<Vec<ItemSubset>> {
        let m = self.m_items();
        let mut out = vec![ItemSubset::empty(m)?; self.n_users];
        for (j, &i) in self.owner.iter().enumerate() {
            out[i] = out[i].with(j);
        }
        Ok(out)
    }
}

/// Euclidean projection onto `{w >= 0, sum w = 1}` by sorting and
/// thresholding: `w_i = max(v_i - theta, 0)`.
pub fn simplex_project<T: Scalar>(v: &[T]) -> Vec<T> {
    assert!(!v.is_empty(), "cannot project an empty vector");
    let mut u = v.to_vec();
    u.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite input"));
    let mut cum = T::zero();
    let mut theta = T::zero();
    for (k, &uk) in u.iter().enumerate() {
        cum += uk;
        let t = (cum - T::one()) / T::of_usize(k + 1);
        if uk - t > T::zero() {
            theta = t;
        }
    }
    let w: Vec<T> = v.iter().map(|&x| (x - theta).max(T::zero())).collect();
    debug_assert!({
        let s: T = w.iter().copied().sum();
        (s - T::one()).abs() <= column_tol::<T>() * T::of_usize(v.len())
    });
    w
}

fn check_models<T: Scalar, M: InputFunction<T>>(models: &[M], m_items: usize) -> Result<()> {
    if models.is_empty() {
        return Err(Error::InvalidAllocation(
            "need at least one valuation".into(),
        ));
    }
    if let Some(v) = models.iter().find(|v| v.input_dim() != m_items) {
        return Err(Error::Dimension {
            expected: m_items,
            got: v.input_dim(),
        });
    }
    Ok(())
}

/// `SW(a) = sum_i v_i(a_i)` and the matrix whose row `i` is a
/// supergradient of `v_i` at `a_i`.
pub fn social_welfare_fractional<T, M>(
    models: &[M],
    a: &AllocationMatrix<T>,
) -> Result<(T, Array2<T>)>
where
    T: Scalar,
    M: InputFunction<T>,
{
    check_models(models, a.m_items())?;
    if models.len() != a.n_users() {
        return Err(Error::Dimension {
            expected: models.len(),
            got: a.n_users(),
        });
    }
    let mut grad = Array2::zeros(a.a.dim());
    let mut total = T::zero();
    for (i, v) in models.iter().enumerate() {
        let row = a.a.row(i).to_vec();
        let (val, g) = v.value_and_input_grad(&row)?;
        total += val;
        grad.row_mut(i).assign(&ndarray::ArrayView1::from(&g));
    }
    Ok((total, grad))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub eta: f64,
    pub steps: usize,
    /// Stop once no entry moves by this much in one step.
    pub tol: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            eta: 0.05,
            steps: 500,
            tol: 1e-7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GaResult<T> {
    /// Iterate with the highest `SW`, earliest on ties.
    pub allocation: AllocationMatrix<T>,
    /// Index of `allocation` in `trajectory`.
    pub best_iteration: usize,
    /// Iterate after the final step.
    pub last: AllocationMatrix<T>,
    /// `SW` at the initial point and after every step.
    pub trajectory: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// Projected supergradient ascent on the relaxation, starting from the
/// projection of the zero matrix. Supergradient steps need not increase
/// `SW`, so the best iterate is returned alongside the last one.
pub fn gradient_ascent<T, M>(models: &[M], cfg: &GaConfig) -> Result<GaResult<T>>
where
    T: Scalar,
    M: InputFunction<T>,
{
    if !(cfg.eta > 0.0 && cfg.eta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "eta must be positive, got {}",
            cfg.eta
        )));
    }
    if !(cfg.tol >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be >= 0, got {}",
            cfg.tol
        )));
    }
    let m = models.first().map_or(0, |v| v.input_dim());
    check_models(models, m)?;
    let n = models.len();
    let mut alloc = project_columns(&Array2::zeros((n, m)))?;
    let (eta, tol) = (T::of(cfg.eta), T::of(cfg.tol));
    let (mut sw, mut grad) = social_welfare_fractional(models, &alloc)?;
    let mut trajectory = vec![sw];
    let (mut best, mut best_sw, mut best_iteration) = (alloc.clone(), sw, 0);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.steps {
        iterations += 1;
        let next = project_columns(&(&alloc.a + &(grad * eta)))?;
        let moved = (&next.a - &alloc.a)
            .iter()
            .fold(T::zero(), |acc, d| acc.max(d.abs()));
        alloc = next;
        (sw, grad) = social_welfare_fractional(models, &alloc)?;
        trajectory.push(sw);
        if sw > best_sw {
            (best, best_sw, best_iteration) = (alloc.clone(), sw, iterations);
        }
        if moved < tol {
            converged = true;
            break;
        }
    }
    Ok(GaResult {
        allocation: best,
        best_iteration,
        last: alloc,
        trajectory,
        iterations,
        converged,
    })
}

fn project_columns<T: Scalar>(a: &Array2<T>) -> Result<AllocationMatrix<T>> {
    let mut out = a.clone();
    for mut col in out.axis_iter_mut(Axis(1)) {
        let p = simplex_project(&col.to_vec());
        col.iter_mut().zip(p).for_each(|(c, v)| *c = v);
    }
    AllocationMatrix::new(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundMode {
    /// Draw each item's owner from its column.
    Sample,
    /// Largest column entry, lowest user index on ties.
    Argmax,
}

pub fn round_allocation<T: Scalar>(
    a: &AllocationMatrix<T>,
    mode: RoundMode,
    seed: u64,
) -> Assignment {
    let mut rng = rng::seeded(seed);
    let owner =
        a.a.axis_iter(Axis(1))
            .map(|col| match mode {
                RoundMode::Argmax => {
                    let mut best = 0;
                    for (i, &v) in col.iter().enumerate() {
                        if v > col[best] {
                            best = i;
                        }
                    }
                    best
                }
                RoundMode::Sample => {
                    let total: f64 = col.iter().map(|v| v.to_f64_lossy().max(0.0)).sum();
                    let u = rng.gen::<f64>() * total;
                    let mut acc = 0.0;
                    let mut pick = None;
                    for (i, &v) in col.iter().enumerate() {
                        let p = v.to_f64_lossy().max(0.0);
                        acc += p;
                        if p > 0.0 {
                            pick = Some(i);
                            if u < acc {
                                break;
                            }
                        }
                    }
                    pick.unwrap_or(0)
                }
            })
            .collect();
    Assignment {
        n_users: a.n_users(),
        owner,
    }
}

/// `sum_i v_i(S_i)` on the given oracles.
pub fn social_welfare_discrete<T, F>(valuations: &[F], asg: &Assignment) -> Result<T>
where
    T: Scalar,
    F: SetFunction<T>,
{
    if valuations.len() != asg.n_users() {
        return Err(Error::Dimension {
            expected: valuations.len(),
            got: asg.n_users(),
        });
    }
    let bundles = asg.bundles()?;
    let mut total = T::zero();
    for (v, b) in valuations.iter().zip(bundles) {
        total += v.eval(b)?;
    }
    Ok(total)
}

/// Exhaustive maximum over all owner vectors, ties resolved towards the
/// lexicographically smallest owner vector.
pub fn brute_force_optimal<T, F>(valuations: &[F]) -> Result<(Assignment, T)>
where
    T: Scalar,
    F: SetFunction<T>,
{
    let n = valuations.len();
    if n == 0 {
        return Err(Error::InvalidAllocation("need at least one user".into()));
    }
    let m = valuations[0].ground_size();
    if let Some(v) = valuations.iter().find(|v| v.ground_size() != m) {
        return Err(Error::Dimension {
            expected: m,
            got: v.ground_size(),
        });
    }
    let total = (n as u64).checked_pow(m as u32).unwrap_or(u64::MAX);
    if total > BRUTE_FORCE_MAX_ASSIGNMENTS || m > TABULATE_MAX_N {
        return Err(Error::TooLarge {
            what: "exhaustive welfare search",
            n: m,
            limit: (BRUTE_FORCE_MAX_ASSIGNMENTS as f64)
                .log(n.max(2) as f64)
                .floor() as usize,
        });
    }
    let tables: Vec<TabulatedFunction<T>> =
        valuations.iter().map(tabulate).collect::<Result<_>>()?;
    let mut owner = vec![0usize; m];
    let mut masks = vec![0u64; n];
    masks[0] = (1u64 << m) - 1;
    let value = |masks: &[u64]| -> T { tables.iter().zip(masks).map(|(t, &b)| t.at(b)).sum() };
    let mut best = (owner.clone(), value(&masks));
    // odometer over owner vectors with the last item varying fastest
    'outer: loop {
        let mut j = m;
        loop {
            if j == 0 {
                break 'outer;
            }
            j -= 1;
            let bit = 1u64 << j;
            masks[owner[j]] &= !bit;
            if owner[j] + 1 < n {
                owner[j] += 1;
                masks[owner[j]] |= bit;
                break;
            }
            owner[j] = 0;
            masks[0] |= bit;
        }
        let v = value(&masks);
        if v > best.1 {
            best = (owner.clone(), v);
        }
    }
    Ok((Assignment::new(n, best.0)?, best.1))
}

/// `achieved / optimal`.
pub fn efficiency(achieved: f64, optimal: f64) -> Result<f64> {
    if !(optimal > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "optimal welfare must be positive, got {optimal}"
        )));
    }
    Ok(achieved / optimal)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CgConfig {
    pub steps: usize,
    pub samples: usize,
}

impl Default for CgConfig {
    fn default() -> Self {
        CgConfig {
            steps: 100,
            samples: 32,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CgResult<T> {
    pub fractional: AllocationMatrix<T>,
    pub assignment: Assignment,
    pub welfare: T,
}

/// Continuous greedy on the multilinear extension. Each step estimates
/// `dF_i / dy_ij = E[f_i(R_i + j) - f_i(R_i - j)]` from `samples` draws of
/// `R_i ~ y_i`, moves `1 / steps` of every item towards its best user, and
/// the final columns are rounded by sampling.
pub fn continuous_greedy<T, F>(valuations: &[F], cfg: &CgConfig, seed: u64) -> Result<CgResult<T>>
where
    T: Scalar,
    F: SetFunction<T>,
{
    if cfg.steps == 0 || cfg.samples == 0 {
        return Err(Error::InvalidParameter(
            "steps and samples must be >= 1".into(),
        ));
    }
    let n = valuations.len();
    if n == 0 {
        return Err(Error::InvalidAllocation("need at least one user".into()));
    }
    let m = valuations[0].ground_size();
    if let Some(v) = valuations.iter().find(|v| v.ground_size() != m) {
        return Err(Error::Dimension {
            expected: m,
            got: v.ground_size(),
        });
    }
    let mut rng = rng::seeded(seed);
    let mut y = Array2::<f64>::zeros((n, m));
    let mut grad = Array2::<f64>::zeros((n, m));
    let dt = 1.0 / cfg.steps as f64;
    for _ in 0..cfg.steps {
        grad.fill(0.0);
        for (i, v) in valuations.iter().enumerate() {
            for _ in 0..cfg.samples {
                let mut r = ItemSubset::empty(m)?;
                for j in 0..m {
                    if rng.gen::<f64>() < y[[i, j]] {
                        r = r.with(j);
                    }
                }
                for j in 0..m {
                    let gain = v.value(r.with(j)) - v.value(r.without(j));
                    grad[[i, j]] += gain.to_f64_lossy();
                }
            }
        }
        for j in 0..m {
            let mut best = 0;
            for i in 1..n {
                if grad[[i, j]] > grad[[best, j]] {
                    best = i;
                }
            }
            y[[best, j]] += dt;
        }
    }
    for mut col in y.axis_iter_mut(Axis(1)) {
        let s = col.sum();
        col.mapv_inplace(|v| v / s);
    }
    let fractional = AllocationMatrix::new(y.mapv(T::of))?;
    let assignment = round_allocation(&fractional, RoundMode::Sample, rng::derive_seed(seed, 1));
    let welfare = social_welfare_discrete(valuations, &assignment)?;
    Ok(CgResult {
        fractional,
        assignment,
        welfare,
    })
}
