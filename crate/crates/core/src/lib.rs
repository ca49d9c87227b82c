//! Rank-one (decomposable) Volterra models and adaptive filters.
//!
//! A decomposable order-`K` kernel `w_1 ⊗ ... ⊗ w_K` turns the `O(M^K)`
//! Volterra output into a product of `K` FIR outputs, `O(KM)`. This crate
//! provides:
//!
//! * [`tensor`]: Kronecker products, rank-one and dense kernels, tensor norms.
//! * [`volterra`]: model evaluation over a delay line (decomposable, full,
//!   diagonal-truncated).
//! * [`estimation`]: exact Gaussian correlations, the MSE surface, block
//!   gradients and steepest descent.
//! * [`adaptive`]: stabilized SML-LMS / SML-TRUE-LMS and Volterra-family
//!   LMS baselines, step bound and MAX heuristics, operation counts.
//! * [`experiments`]: seeded ensemble simulations (identification,
//!   stability tables, steepest-descent comparison, ρ sweep, chaos sweep)
//!   with CSV output.

pub mod adaptive;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod tensor;
pub mod volterra;

pub use error::{Error, Result};
pub use estimation::{CorrelationSet, Plant};
pub use tensor::{DenseKernel, RankOneKernel};
pub use volterra::DelayLine;
