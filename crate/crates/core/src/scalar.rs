//! The floating-point abstraction every model and oracle is generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar used for set-function values, network weights and allocations.
///
/// Implemented for `f32` and `f64`. `ndarray` dispatches matrix products on
/// both to its packed GEMM kernels, so training in `f32` is roughly twice as
/// fast as in `f64` while exactness checks stay in `f64`.
pub trait Scalar:
    Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + LinalgScalar
    + ScalarOperand
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Absolute slack for property checkers and membership predicates.
    fn check_tol() -> Self;

    /// Lossy conversion from `f64`, used for constants and RNG draws.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize is representable in every Scalar")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    #[inline]
    fn check_tol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    #[inline]
    fn check_tol() -> Self {
        1e-3
    }
}
