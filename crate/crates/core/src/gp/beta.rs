use crate::error::{Error, Result};
use crate::gp::posterior::{GpPosterior, Moments};
use crate::Scalar;

/// Parameters of the confidence-width multiplier
/// `β_t = (√(ln det(I + σ⁻² K_t) + 2 ln(divisor/δ)) + B)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSchedule<T> {
    pub rkhs_bound: T,
    pub delta: T,
    /// 1 for a standalone confidence bound, 3 when the bound is one of three
    /// events combined by a union bound.
    pub delta_divisor: u32,
}

impl<T: Scalar> BetaSchedule<T> {
    pub fn new(rkhs_bound: T, delta: T, delta_divisor: u32) -> Result<Self> {
        if !(rkhs_bound > T::zero()) || !rkhs_bound.is_finite() {
            return Err(Error::invalid(format!("RKHS bound must be positive, got {rkhs_bound}")));
        }
        if !(delta > T::zero() && delta < T::one()) {
            return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
        }
        if delta_divisor == 0 {
            return Err(Error::invalid("delta divisor must be a positive integer"));
        }
        Ok(Self {
            rkhs_bound,
            delta,
            delta_divisor,
        })
    }

    /// β for a given information term `ln det(I + σ⁻² K_t)`.
    pub fn value(&self, log_det_term: T) -> T {
        let confidence = T::lit(2.0) * (T::lit(self.delta_divisor as f64) / self.delta).ln();
        let root = (log_det_term.max(T::zero()) + confidence).max(T::zero()).sqrt();
        let b = root + self.rkhs_bound;
        b * b
    }
}

pub fn beta<T: Scalar>(model: &GpPosterior<T>, schedule: &BetaSchedule<T>) -> T {
    schedule.value(model.log_det_term())
}

/// Pointwise confidence bounds `[μ − β^{1/2} σ, μ + β^{1/2} σ]` over an
/// `n_design × n_env` lattice stored design-major (`index = i * n_env + j`).
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseBounds<T> {
    n_design: usize,
    n_env: usize,
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Scalar> PointwiseBounds<T> {
    pub fn new(n_design: usize, n_env: usize, lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        let n = n_design * n_env;
        if n == 0 {
            return Err(Error::invalid("bounds lattice is empty"));
        }
        if lower.len() != n || upper.len() != n {
            return Err(Error::invalid(format!(
                "expected {n} bounds, got {} lower and {} upper",
                lower.len(),
                upper.len()
            )));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::invalid("every lower bound must not exceed its upper bound"));
        }
        Ok(Self {
            n_design,
            n_env,
            lower,
            upper,
        })
    }

    /// Zero-width bounds equal to the given values.
    pub fn exact(n_design: usize, n_env: usize, values: Vec<T>) -> Result<Self> {
        Self::new(n_design, n_env, values.clone(), values)
    }

    pub fn from_moments(n_design: usize, n_env: usize, moments: &[Moments<T>], beta: T) -> Result<Self> {
        let means: Vec<T> = moments.iter().map(|m| m.mean).collect();
        let vars: Vec<T> = moments.iter().map(|m| m.variance).collect();
        Self::from_parts(n_design, n_env, &means, &vars, beta)
    }

    pub fn from_parts(n_design: usize, n_env: usize, mean: &[T], variance: &[T], beta: T) -> Result<Self> {
        if !(beta >= T::zero()) {
            return Err(Error::invalid(format!("beta must be nonnegative, got {beta}")));
        }
        if mean.len() != variance.len() {
            return Err(Error::invalid("mean and variance lengths differ"));
        }
        let scale = beta.sqrt();
        let (lower, upper) = mean
            .iter()
            .zip(variance)
            .map(|(&m, &v)| {
                let half = scale * v.max(T::zero()).sqrt();
                (m - half, m + half)
            })
            .unzip();
        Self::new(n_design, n_env, lower, upper)
    }

    pub fn n_design(&self) -> usize {
        self.n_design
    }

    pub fn n_env(&self) -> usize {
        self.n_env
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    #[inline]
    pub fn get(&self, design: usize, env: usize) -> (T, T) {
        let k = design * self.n_env + env;
        (self.lower[k], self.upper[k])
    }

    pub fn design_row(&self, design: usize) -> (&[T], &[T]) {
        let s = design * self.n_env;
        (&self.lower[s..s + self.n_env], &self.upper[s..s + self.n_env])
    }

    /// True when `values` (same layout) lies inside every interval.
    pub fn contains(&self, values: &[T]) -> bool {
        values.len() == self.lower.len()
            && values
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| l <= v && v <= u)
    }
}

/// Bounds for every lattice point, querying the model directly.
pub fn pointwise_bounds<T: Scalar>(
    model: &GpPosterior<T>,
    beta: T,
    lattice: &[Vec<T>],
    n_design: usize,
    n_env: usize,
) -> Result<PointwiseBounds<T>> {
    let moments = model.query(lattice)?;
    PointwiseBounds::from_moments(n_design, n_env, &moments, beta)
}
