//! Baseline selection policies.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gp::GpPosterior;
use crate::risk::{EnvDistribution, RiskBoundTable};
use crate::{argmax_indexed, Scalar};

/// Uniformly random design index.
pub fn rs_select<R: Rng + ?Sized>(n_design: usize, rng: &mut R) -> Result<usize> {
    if n_design == 0 {
        return Err(Error::invalid("empty design set"));
    }
    Ok(rng.random_range(0..n_design))
}

/// Design point with the largest `Σ_w σ(x, w) p(w)`.
pub fn us_select<T: Scalar>(
    model: &GpPosterior<T>,
    p: &EnvDistribution<T>,
    design: &[Vec<T>],
) -> Result<usize> {
    let lattice: Vec<Vec<T>> = design
        .iter()
        .flat_map(|x| p.support().iter().map(move |w| [x.as_slice(), w.as_slice()].concat()))
        .collect();
    let sd: Vec<T> = model.query(&lattice)?.iter().map(|m| m.std_dev()).collect();
    us_select_from_std(&sd, design.len(), p.weights())
}

/// Same rule on a precomputed design-major table of standard deviations.
pub fn us_select_from_std<T: Scalar>(std_dev: &[T], n_design: usize, weights: &[T]) -> Result<usize> {
    let n_env = weights.len();
    if n_env == 0 || std_dev.len() != n_design * n_env {
        return Err(Error::invalid("standard deviation table does not match the grid"));
    }
    let scores = std_dev
        .chunks(n_env)
        .map(|row| row.iter().zip(weights).map(|(&s, &p)| s * p).sum::<T>())
        .enumerate();
    argmax_indexed(scores).ok_or_else(|| Error::invalid("empty design set"))
}

/// Maximizer of the F1 upper bound.
pub fn bqoucb_select<T: Scalar>(table: &RiskBoundTable<T>) -> Result<usize> {
    argmax_indexed(table.f1().iter().map(|b| b.upper).enumerate()).ok_or_else(|| Error::invalid("empty design set"))
}

/// Maximizer of the F2 upper bound.
pub fn bovo_select<T: Scalar>(table: &RiskBoundTable<T>) -> Result<usize> {
    argmax_indexed(table.f2().iter().map(|b| b.upper).enumerate()).ok_or_else(|| Error::invalid("empty design set"))
}
