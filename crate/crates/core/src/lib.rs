//! Deep submodular functions (DSFs) and their extension to pointwise minima
//! of DSFs (EDSFs).
//!
//! A DSF maps a non-negative vector through layers of non-negative weights
//! and non-decreasing concave activations; on 0/1 indicators it is a
//! monotone submodular set function. An EDSF takes the minimum of several
//! DSFs and can represent every monotone set function exactly.
//!
//! The crate provides
//! - set-function oracles and exhaustive property checks ([`setfn`]),
//! - DSF and EDSF models with batched forward and backward passes ([`dsf`],
//!   [`edsf`], [`model`]),
//! - exact EDSF constructions and polymatroid checks ([`edsf`],
//!   [`polymatroid`]),
//! - supervised training on sampled subsets ([`learn`]),
//! - social welfare maximization by projected gradient ascent and baselines
//!   ([`welfare`]),
//! - pipelines and the verification suite used by the `edsf` binary
//!   ([`experiment`], [`verify`]).
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the precision.

// `!(x >= y)` is deliberate throughout: it rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dsf;
pub mod edsf;
pub mod error;
pub mod experiment;
pub mod learn;
pub mod model;
pub mod polymatroid;
pub mod rng;
pub mod scalar;
pub mod setfn;
pub mod verify;
pub mod welfare;

pub use dsf::{init_dsf, Activation, DsfLayer, DsfNetwork};
pub use edsf::EdsfModel;
pub use error::{Error, Result};
pub use model::{InputFunction, SetModel};
pub use scalar::Scalar;
pub use setfn::{ItemSubset, SetFunction};

pub type DsfNetworkF32 = DsfNetwork<f32>;
pub type DsfNetworkF64 = DsfNetwork<f64>;
pub type EdsfModelF32 = EdsfModel<f32>;
pub type EdsfModelF64 = EdsfModel<f64>;
pub type SetModelF32 = SetModel<f32>;
pub type SetModelF64 = SetModel<f64>;
