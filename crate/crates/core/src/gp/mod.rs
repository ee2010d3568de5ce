//! Exact GP regression over the joint design × environment space.

mod beta;
mod cholesky;
mod fit;
mod grid;
mod kernel;
mod posterior;

pub use beta::{beta, pointwise_bounds, BetaSchedule, PointwiseBounds};
pub use fit::{fit_hyperparameters, FitOutcome};
pub use grid::GridPosterior;
pub use kernel::{kernel_eval, KernelFamily, KernelSpec};
pub use posterior::{posterior_query, GpPosterior, Moments, Observation, FALLBACK_JITTER};

pub(crate) use cholesky::PackedCholesky;
