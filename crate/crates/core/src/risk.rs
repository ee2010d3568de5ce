//! Interval calculus lifting pointwise bounds on `f(x, w)` to bounds on the
//! mean `F1(x) = E_w[f]` and the negative standard deviation
//! `F2(x) = −√V_w[f]`.

use crate::error::{Error, Result};
use crate::gp::PointwiseBounds;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lower: T,
    pub upper: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lower: T, upper: T) -> Self {
        Self { lower, upper }
    }

    pub fn width(&self) -> T {
        self.upper - self.lower
    }

    pub fn contains(&self, v: T) -> bool {
        self.lower <= v && v <= self.upper
    }
}

/// A probability mass function over a finite environment grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvDistribution<T> {
    support: Vec<Vec<T>>,
    weights: Vec<T>,
}

impl<T: Scalar> EnvDistribution<T> {
    pub fn new(support: Vec<Vec<T>>, weights: Vec<T>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::invalid("environment support is empty"));
        }
        if support.len() != weights.len() {
            return Err(Error::invalid(format!(
                "{} support points but {} weights",
                support.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        let total: T = weights.iter().copied().sum();
        if (total - T::one()).abs() > T::weight_tolerance(weights.len()) {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { support, weights })
    }

    /// Normalizes nonnegative masses into a distribution.
    pub fn from_masses(support: Vec<Vec<T>>, masses: Vec<T>) -> Result<Self> {
        let total: T = masses.iter().copied().sum();
        if !(total > T::zero()) || !total.is_finite() {
            return Err(Error::invalid("masses must have a positive finite total"));
        }
        Self::new(support, masses.into_iter().map(|m| m / total).collect())
    }

    pub fn uniform(support: Vec<Vec<T>>) -> Result<Self> {
        let n = support.len();
        Self::from_masses(support, vec![T::one(); n])
    }

    pub fn dirac(support: Vec<Vec<T>>, at: usize) -> Result<Self> {
        if at >= support.len() {
            return Err(Error::invalid("Dirac atom outside the support"));
        }
        let mut w = vec![T::zero(); support.len()];
        w[at] = T::one();
        Self::new(support, w)
    }

    pub fn support(&self) -> &[Vec<T>] {
        &self.support
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `E[values]` for values indexed like the support.
    pub fn expectation(&self, values: &[T]) -> T {
        values.iter().zip(&self.weights).map(|(&v, &p)| v * p).sum()
    }

    /// Replaces the weights, keeping the support.
    pub fn with_weights(&self, weights: Vec<T>) -> Result<Self> {
        Self::new(self.support.clone(), weights)
    }
}

/// Objective-bound intervals for every design point at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskBoundTable<T> {
    pub step: usize,
    f1: Vec<Interval<T>>,
    f2: Vec<Interval<T>>,
    scalarized: Option<(T, Vec<Interval<T>>)>,
}

impl<T: Scalar> RiskBoundTable<T> {
    pub fn from_intervals(step: usize, f1: Vec<Interval<T>>, f2: Vec<Interval<T>>) -> Result<Self> {
        if f1.len() != f2.len() {
            return Err(Error::invalid("F1 and F2 interval counts differ"));
        }
        Ok(Self {
            step,
            f1,
            f2,
            scalarized: None,
        })
    }

    /// F1 and F2 bounds from pointwise bounds and environment weights.
    pub fn compute(step: usize, pointwise: &PointwiseBounds<T>, p: &EnvDistribution<T>) -> Result<Self> {
        let f1 = mean_bounds(pointwise, p)?;
        let f2 = variance_bounds(pointwise, p)?;
        Self::from_intervals(step, f1, f2)
    }

    /// Attaches bounds on `G = α F1 + (1 − α) F2`.
    pub fn with_scalarization(mut self, alpha: T) -> Result<Self> {
        let g = scalarized_bounds(&self, alpha)?;
        self.scalarized = Some((alpha, g));
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.f1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f1.is_empty()
    }

    pub fn f1(&self) -> &[Interval<T>] {
        &self.f1
    }

    pub fn f2(&self) -> &[Interval<T>] {
        &self.f2
    }

    pub fn g(&self) -> Option<&[Interval<T>]> {
        self.scalarized.as_ref().map(|(_, g)| g.as_slice())
    }

    pub fn alpha(&self) -> Option<T> {
        self.scalarized.as_ref().map(|(a, _)| *a)
    }

    /// Optimistic objective vector `(u^{F1}, u^{F2})`.
    pub fn optimistic(&self, x: usize) -> (T, T) {
        (self.f1[x].upper, self.f2[x].upper)
    }

    /// Pessimistic objective vector `(l^{F1}, l^{F2})`.
    pub fn pessimistic(&self, x: usize) -> (T, T) {
        (self.f1[x].lower, self.f2[x].lower)
    }
}

fn check_weights<T: Scalar>(pointwise: &PointwiseBounds<T>, p: &EnvDistribution<T>) -> Result<()> {
    if pointwise.n_env() != p.len() {
        return Err(Error::invalid(format!(
            "bounds cover {} environment points but the distribution has {}",
            pointwise.n_env(),
            p.len()
        )));
    }
    Ok(())
}

/// `[Σ_w l(x,w) p(w), Σ_w u(x,w) p(w)]` for every design point.
pub fn mean_bounds<T: Scalar>(pointwise: &PointwiseBounds<T>, p: &EnvDistribution<T>) -> Result<Vec<Interval<T>>> {
    check_weights(pointwise, p)?;
    Ok((0..pointwise.n_design())
        .map(|x| {
            let (l, u) = pointwise.design_row(x);
            Interval::new(p.expectation(l), p.expectation(u))
        })
        .collect())
}

/// Bounds on `−√V_w[f(x, ·)]` for every design point.
///
/// With `l̃ = l − E[u]` and `ũ = u − E[l]`, each squared deviation lies in
/// `[l̃sq, ũsq]` where `l̃sq` is 0 if the interval straddles zero and
/// `min(l̃², ũ²)` otherwise, and `ũsq = max(l̃², ũ²)`.
pub fn variance_bounds<T: Scalar>(
    pointwise: &PointwiseBounds<T>,
    p: &EnvDistribution<T>,
) -> Result<Vec<Interval<T>>> {
    check_weights(pointwise, p)?;
    Ok((0..pointwise.n_design())
        .map(|x| {
            let (l, u) = pointwise.design_row(x);
            deviation_interval(l, u, p.weights())
        })
        .collect())
}

fn deviation_interval<T: Scalar>(l: &[T], u: &[T], weights: &[T]) -> Interval<T> {
    let mean_l: T = l.iter().zip(weights).map(|(&v, &p)| v * p).sum();
    let mean_u: T = u.iter().zip(weights).map(|(&v, &p)| v * p).sum();
    let mut low_sq = T::zero();
    let mut high_sq = T::zero();
    for ((&lw, &uw), &p) in l.iter().zip(u).zip(weights) {
        let lt = lw - mean_u;
        let ut = uw - mean_l;
        let (a, b) = (lt * lt, ut * ut);
        let lsq = if lt <= T::zero() && T::zero() <= ut { T::zero() } else { a.min(b) };
        low_sq += lsq * p;
        high_sq += a.max(b) * p;
    }
    Interval::new(-high_sq.sqrt(), -low_sq.sqrt())
}

/// `[α l^{F1} + (1−α) l^{F2}, α u^{F1} + (1−α) u^{F2}]`.
pub fn scalarized_bounds<T: Scalar>(table: &RiskBoundTable<T>, alpha: T) -> Result<Vec<Interval<T>>> {
    if !(alpha >= T::zero() && alpha <= T::one()) {
        return Err(Error::invalid(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let beta = T::one() - alpha;
    Ok(table
        .f1
        .iter()
        .zip(&table.f2)
        .map(|(a, b)| Interval::new(alpha * a.lower + beta * b.lower, alpha * a.upper + beta * b.upper))
        .collect())
}

/// Diagonal length of the F1 × F2 uncertainty rectangle at design point `x`.
pub fn rect_diameter<T: Scalar>(table: &RiskBoundTable<T>, x: usize) -> T {
    table.f1[x].width().hypot(table.f2[x].width())
}

/// Objective bounds in the noisy-input setting.
///
/// `pointwise` holds bounds of `f` at every `x + ξ` (design-major, one column
/// per ξ in the noise grid) and `noise` is the distribution of ξ. The calculus
/// is the same as for the environmental variable with `(x, w) ↦ x + ξ`.
pub fn noisy_input_bounds<T: Scalar>(
    step: usize,
    pointwise: &PointwiseBounds<T>,
    noise: &EnvDistribution<T>,
) -> Result<RiskBoundTable<T>> {
    if pointwise.n_env() != noise.len() {
        return Err(Error::invalid(format!(
            "perturbed-input grid has {} offsets per design point, noise distribution has {}",
            pointwise.n_env(),
            noise.len()
        )));
    }
    RiskBoundTable::compute(step, pointwise, noise)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> EnvDistribution<f64> {
        EnvDistribution::uniform(vec![vec![0.0], vec![1.0]]).unwrap()
    }

    #[test]
    fn distribution_validation() {
        assert!(EnvDistribution::new(vec![vec![0.0]], vec![0.5]).is_err());
        assert!(EnvDistribution::new(vec![vec![0.0], vec![1.0]], vec![1.5, -0.5]).is_err());
        assert!(EnvDistribution::<f64>::new(vec![], vec![]).is_err());
        assert!(EnvDistribution::new(vec![vec![0.0]], vec![1.0, 0.0]).is_err());
        let d = EnvDistribution::dirac(vec![vec![0.0], vec![1.0], vec![2.0]], 1).unwrap();
        assert_eq!(d.weights(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn mean_bounds_by_hand() {
        let pw = PointwiseBounds::new(1, 2, vec![0.0, 2.0], vec![1.0, 4.0]).unwrap();
        let b = mean_bounds(&pw, &two_point()).unwrap();
        assert_eq!(b[0], Interval::new(1.0, 2.5));
    }

    #[test]
    fn mean_bounds_dirac_and_exact() {
        let pw = PointwiseBounds::new(2, 3, vec![0.0, 1.0, 2.0, -1.0, -2.0, -3.0], vec![0.5, 1.5, 2.5, 0.0, 0.0, 0.0])
            .unwrap();
        let d = EnvDistribution::dirac(vec![vec![0.0], vec![1.0], vec![2.0]], 2).unwrap();
        let b = mean_bounds(&pw, &d).unwrap();
        assert_eq!(b[0], Interval::new(2.0, 2.5));
        assert_eq!(b[1], Interval::new(-3.0, 0.0));

        let exact = PointwiseBounds::exact(1, 2, vec![3.0, 5.0]).unwrap();
        let b = mean_bounds(&exact, &two_point()).unwrap();
        assert_eq!(b[0], Interval::new(4.0, 4.0));
    }

    #[test]
    fn variance_bounds_exact_inputs() {
        let pw = PointwiseBounds::exact(1, 2, vec![1.0, -1.0]).unwrap();
        let b = variance_bounds(&pw, &two_point()).unwrap();
        assert_eq!(b[0], Interval::new(-1.0, -1.0));

        let constant = PointwiseBounds::exact(1, 2, vec![0.7, 0.7]).unwrap();
        let b = variance_bounds(&constant, &two_point()).unwrap();
        assert_eq!(b[0].lower, 0.0);
        assert_eq!(b[0].upper, 0.0);
    }

    #[test]
    fn scalarized_by_hand() {
        let t = RiskBoundTable::from_intervals(0, vec![Interval::new(1.0, 2.0)], vec![Interval::new(-1.0, -0.5)]).unwrap();
        let g = scalarized_bounds(&t, 0.5).unwrap();
        assert_eq!(g[0], Interval::new(0.0, 0.75));
        assert_eq!(scalarized_bounds(&t, 1.0).unwrap(), t.f1().to_vec());
        assert_eq!(scalarized_bounds(&t, 0.0).unwrap(), t.f2().to_vec());
        assert!(scalarized_bounds(&t, 1.5).is_err());
        assert!(scalarized_bounds(&t, -0.1).is_err());
    }

    #[test]
    fn diameter() {
        let t = RiskBoundTable::from_intervals(
            0,
            vec![Interval::new(0.0, 3.0), Interval::new(1.0, 1.0)],
            vec![Interval::new(-4.0, 0.0), Interval::new(-2.0, -2.0)],
        )
        .unwrap();
        assert_eq!(rect_diameter(&t, 0), 5.0);
        assert_eq!(rect_diameter(&t, 1), 0.0);
    }

    #[test]
    fn grid_mismatch() {
        let pw = PointwiseBounds::exact(1, 3, vec![0.0; 3]).unwrap();
        assert!(mean_bounds(&pw, &two_point()).is_err());
        assert!(variance_bounds(&pw, &two_point()).is_err());
        assert!(noisy_input_bounds(0, &pw, &two_point()).is_err());
    }

    #[test]
    fn noisy_input_singleton_noise() {
        let pw = PointwiseBounds::new(2, 1, vec![0.1f64, -0.4], vec![0.6, 0.2]).unwrap();
        let noise = EnvDistribution::uniform(vec![vec![0.0]]).unwrap();
        let t = noisy_input_bounds(3, &pw, &noise).unwrap();
        assert_eq!(t.f1()[0], Interval::new(0.1, 0.6));
        assert_eq!(t.f1()[1], Interval::new(-0.4, 0.2));
        // A single offset has zero spread, but the bounds only know f up to
        // the pointwise width, so the lower F2 bound is minus that width.
        assert_eq!(t.f2()[0].upper, 0.0);
        assert!((t.f2()[0].lower + 0.5).abs() < 1e-12);
        assert!((t.f2()[1].lower + 0.6).abs() < 1e-12);
    }

    #[test]
    fn single_precision_calculus() {
        let pw = PointwiseBounds::exact(1, 2, vec![1.0f32, -1.0]).unwrap();
        let p = EnvDistribution::uniform(vec![vec![0.0f32], vec![1.0]]).unwrap();
        let t = RiskBoundTable::compute(0, &pw, &p).unwrap().with_scalarization(0.5).unwrap();
        assert_eq!(t.f2()[0], Interval::new(-1.0, -1.0));
        assert_eq!(t.g().unwrap()[0], Interval::new(-0.5, -0.5));
    }
}
