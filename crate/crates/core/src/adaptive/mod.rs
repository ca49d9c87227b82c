//! Online adaptive filters.
//!
//! [`SmlFilter`] adapts the factors of a decomposable kernel with the
//! stabilized LMS (`L = 1`) or TRUE-LMS (data window `L > 1`) recursion.
//! [`LinearInParamsFilter`] provides the Volterra-family LMS baselines.
//! The [`params`] helpers choose the step size and the MAX threshold, and
//! give closed-form per-step operation counts; [`ops::Counted`] measures
//! the actual counts.

mod baseline;
pub mod ops;
pub mod params;
mod sml;

pub use baseline::{BaselineVariant, LinearInParamsFilter};
pub use ops::OpCount;
pub use params::{
    max_threshold, operation_counts, step_bound, true_lms_max_threshold, Recursion,
};
pub use sml::{SmlFilter, StepOutput, WindowOutput};
