//! Sampling audits of concavity, input monotonicity and supergradients on
//! the non-negative orthant.

use ndarray::Array2;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::model::InputFunction;
use crate::rng;
use crate::scalar::Scalar;
use crate::setfn::Verdict;

const AUDIT_CHUNK: usize = 2048;

#[derive(Clone, Debug, PartialEq)]
pub struct ConcavityViolation<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub lambda: T,
    /// `f(lambda x + (1 - lambda) y)`
    pub mixed: T,
    /// `lambda f(x) + (1 - lambda) f(y)`
    pub chord: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InputMonotoneViolation<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    pub f_lower: T,
    pub f_upper: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupergradientViolation<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub fy: T,
    pub bound: T,
}

fn check_args(trials: usize, box_max: f64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if !(box_max > 0.0 && box_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "box_max must be positive, got {box_max}"
        )));
    }
    Ok(())
}

fn uniform_row<T: Scalar>(rng: &mut rng::Rng, n: usize, hi: f64) -> Vec<T> {
    (0..n).map(|_| T::of(rng.gen::<f64>() * hi)).collect()
}

/// Samples `x, y` uniformly from `[0, box_max]^n` and `lambda` from `[0, 1]`
/// and checks `f(lambda x + (1-lambda) y) >= lambda f(x) + (1-lambda) f(y) - tol`.
pub fn check_concavity<T, M>(
    model: &M,
    trials: usize,
    box_max: f64,
    seed: u64,
) -> Result<Verdict<ConcavityViolation<T>>>
where
    T: Scalar,
    M: InputFunction<T> + ?Sized,
{
    check_args(trials, box_max)?;
    let n = model.input_dim();
    let tol = T::check_tol();
    let mut rng = rng::seeded(seed);
    let mut done = 0;
    while done < trials {
        let k = AUDIT_CHUNK.min(trials - done);
        let mut pts = Array2::<T>::zeros((3 * k, n));
        let mut lambdas = Vec::with_capacity(k);
        for t in 0..k {
            let x: Vec<T> = uniform_row(&mut rng, n, box_max);
            let y: Vec<T> = uniform_row(&mut rng, n, box_max);
            let lam = T::of(rng.gen::<f64>());
            for j in 0..n {
                pts[[3 * t, j]] = x[j];
                pts[[3 * t + 1, j]] = y[j];
                pts[[3 * t + 2, j]] = lam * x[j] + (T::one() - lam) * y[j];
            }
            lambdas.push(lam);
        }
        let vals = model.value_rows(pts.view())?;
        for (t, &lam) in lambdas.iter().enumerate() {
            let (fx, fy, fm) = (vals[3 * t], vals[3 * t + 1], vals[3 * t + 2]);
            let chord = lam * fx + (T::one() - lam) * fy;
            if !(fm >= chord - tol) {
                return Ok(Verdict::Violated(ConcavityViolation {
                    x: pts.row(3 * t).to_vec(),
                    y: pts.row(3 * t + 1).to_vec(),
                    lambda: lam,
                    mixed: fm,
                    chord,
                }));
            }
        }
        done += k;
    }
    Ok(Verdict::Pass)
}

/// Samples `x` in the box and `x' = x + d` with `d >= 0` on a random subset
/// of coordinates, and checks `f(x) <= f(x') + 1e-12`.
pub fn check_input_monotone<T, M>(
    model: &M,
    trials: usize,
    box_max: f64,
    seed: u64,
) -> Result<Verdict<InputMonotoneViolation<T>>>
where
    T: Scalar,
    M: InputFunction<T> + ?Sized,
{
    check_args(trials, box_max)?;
    let n = model.input_dim();
    let tol = T::of(1e-12);
    let mut rng = rng::seeded(seed);
    let mut done = 0;
    while done < trials {
        let k = AUDIT_CHUNK.min(trials - done);
        let mut pts = Array2::<T>::zeros((2 * k, n));
        for t in 0..k {
            for j in 0..n {
                let x = T::of(rng.gen::<f64>() * box_max);
                let bump = if rng.gen_bool(0.5) {
                    T::of(rng.gen::<f64>() * box_max)
                } else {
                    T::zero()
                };
                pts[[2 * t, j]] = x;
                pts[[2 * t + 1, j]] = x + bump;
            }
        }
        let vals = model.value_rows(pts.view())?;
        for t in 0..k {
            let (lo, hi) = (vals[2 * t], vals[2 * t + 1]);
            if !(lo <= hi + tol) {
                return Ok(Verdict::Violated(InputMonotoneViolation {
                    lower: pts.row(2 * t).to_vec(),
                    upper: pts.row(2 * t + 1).to_vec(),
                    f_lower: lo,
                    f_upper: hi,
                }));
            }
        }
        done += k;
    }
    Ok(Verdict::Pass)
}

/// Checks `f(y) <= f(x) + <g_x, y - x> + 1e-7` for the input supergradient
/// `g_x` returned by the model at sampled pairs.
pub fn check_supergradient<T, M>(
    model: &M,
    trials: usize,
    box_max: f64,
    seed: u64,
) -> Result<Verdict<SupergradientViolation<T>>>
where
    T: Scalar,
    M: InputFunction<T> + ?Sized,
{
    check_args(trials, box_max)?;
    let n = model.input_dim();
    let tol = T::of(1e-7).max(T::check_tol());
    let mut rng = rng::seeded(seed);
    for _ in 0..trials {
        let x: Vec<T> = uniform_row(&mut rng, n, box_max);
        let y: Vec<T> = uniform_row(&mut rng, n, box_max);
        let (fx, g) = model.value_and_input_grad(&x)?;
        let (fy, _) = model.value_and_input_grad(&y)?;
        let lin: T = g
            .iter()
            .zip(y.iter().zip(&x))
            .map(|(&gi, (&yi, &xi))| gi * (yi - xi))
            .sum();
        let bound = fx + lin;
        if !(fy <= bound + tol) {
            return Ok(Verdict::Violated(SupergradientViolation {
                x,
                y,
                fy,
                bound,
            }));
        }
    }
    Ok(Verdict::Pass)
}
