//! Mean-variance Bayesian optimization over a design variable `x` and an
//! uncontrollable environmental variable `w`.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the bottom fix it to `f64`.

// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod benchmarks;
pub mod error;
pub mod gp;
pub mod metrics;
pub mod risk;
mod scalar;
pub mod scenarios;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub(crate) use scalar::argmax_indexed;

pub type GpPosteriorF64 = gp::GpPosterior<f64>;
pub type GpPosteriorF32 = gp::GpPosterior<f32>;
pub type KernelSpecF64 = gp::KernelSpec<f64>;
pub type RiskBoundTableF64 = risk::RiskBoundTable<f64>;
pub type EnvDistributionF64 = risk::EnvDistribution<f64>;
pub type ProblemF64 = scenarios::Problem<f64>;
pub type ScenarioConfigF64 = scenarios::ScenarioConfig<f64>;
pub type TraceF64 = scenarios::Trace<f64>;
pub type GroundTruthF64 = metrics::GroundTruth<f64>;
