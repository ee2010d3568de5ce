use crate::error::{Error, Result};
use crate::Scalar;

/// Default upper limit on the number of grid points.
pub const DEFAULT_GRID_CAP: usize = 1_000_000;

/// An evenly spaced grid over `[0, 1]^d` built for a continuous design space.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignGrid<T> {
    pub points: Vec<Vec<T>>,
    pub tau: T,
    pub segments: usize,
    /// Halved tolerances to use in the potential and uncertainty sets.
    pub epsilon_half: (T, T),
}

impl<T: Scalar> DesignGrid<T> {
    /// Nearest grid point to `x`, coordinatewise rounding.
    pub fn snap(&self, x: &[T]) -> Vec<T> {
        let s = T::lit(self.segments as f64);
        x.iter()
            .map(|&v| (v.max(T::zero()).min(T::one()) * s).round() / s)
            .collect()
    }
}

/// `τ = max{2 L d / ε1, 16 B̃ L d / ε2²}`.
pub fn grid_resolution<T: Scalar>(d: usize, epsilon: (T, T), lipschitz: T, deviation_bound: T) -> T {
    let d = T::lit(d as f64);
    let a = T::lit(2.0) * lipschitz * d / epsilon.0;
    let b = T::lit(16.0) * deviation_bound * lipschitz * d / (epsilon.1 * epsilon.1);
    a.max(b)
}

/// Grid with `⌈τ⌉` segments per dimension, so every point of `[0, 1]^d` lies
/// within L1 distance `d / τ` of a grid point.
pub fn discretize_design_space<T: Scalar>(
    d: usize,
    epsilon: (T, T),
    lipschitz: T,
    deviation_bound: T,
    cap: usize,
) -> Result<DesignGrid<T>> {
    if d == 0 {
        return Err(Error::invalid("design dimension must be positive"));
    }
    if !(lipschitz > T::zero() && deviation_bound > T::zero()) {
        return Err(Error::invalid("Lipschitz constant and deviation bound must be positive"));
    }
    if !(epsilon.0 > T::zero() && epsilon.1 > T::zero()) {
        return Err(Error::invalid("epsilon must be positive in both coordinates"));
    }
    let tau = grid_resolution(d, epsilon, lipschitz, deviation_bound);
    let segments_f = tau.ceil().as_f64();
    let too_big = Error::ResourceLimit {
        required: usize::MAX,
        cap,
    };
    if !segments_f.is_finite() || segments_f >= cap as f64 {
        return Err(too_big);
    }
    let segments = segments_f as usize;
    let per_dim = segments + 1;
    let total = (0..d).try_fold(1usize, |acc, _| acc.checked_mul(per_dim));
    let total = match total {
        Some(n) if n <= cap => n,
        Some(n) => return Err(Error::ResourceLimit { required: n, cap }),
        None => return Err(too_big),
    };

    let s = T::lit(segments as f64);
    let mut points = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        points.push(idx.iter().map(|&i| T::lit(i as f64) / s).collect());
        for slot in idx.iter_mut().rev() {
            *slot += 1;
            if *slot < per_dim {
                break;
            }
            *slot = 0;
        }
    }
    let half = T::lit(0.5);
    Ok(DesignGrid {
        points,
        tau,
        segments,
        epsilon_half: (epsilon.0 * half, epsilon.1 * half),
    })
}
