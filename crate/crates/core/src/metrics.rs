//! Exact objectives on finite grids and the performance measures built on them.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::risk::EnvDistribution;
use crate::scenarios::{eps_dominated, nondominated};
use crate::{argmax_indexed, Scalar};

/// Exact objective values and optima for one problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth<T> {
    pub f1: Vec<T>,
    pub f2: Vec<T>,
    pub g: Vec<T>,
    pub alpha: T,
    /// Maximizer of `G`.
    pub x_star: usize,
    /// True Pareto set, ascending.
    pub pareto: Vec<usize>,
    /// Constraint threshold and the F1 maximizer over `{F2 ≥ h}`, if any.
    pub threshold: Option<T>,
    pub constrained_opt: Option<usize>,
    pub reference: (T, T),
    /// Hypervolume of the true front with respect to `reference`.
    pub hv: T,
}

impl<T: Scalar> GroundTruth<T> {
    pub fn objectives(&self, x: usize) -> (T, T) {
        (self.f1[x], self.f2[x])
    }

    pub fn len(&self) -> usize {
        self.f1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f1.is_empty()
    }
}

/// `(E_w f, −√V_w f)` for every design row of a design-major value table.
pub fn exact_objectives<T: Scalar>(values: &[T], p: &EnvDistribution<T>) -> Result<(Vec<T>, Vec<T>)> {
    let m = p.len();
    if !values.len().is_multiple_of(m) {
        return Err(Error::invalid("value table does not match the environment grid"));
    }
    let mut f1 = Vec::with_capacity(values.len() / m);
    let mut f2 = Vec::with_capacity(values.len() / m);
    for row in values.chunks(m) {
        let mean = p.expectation(row);
        let var: T = row
            .iter()
            .zip(p.weights())
            .map(|(&v, &w)| (v - mean) * (v - mean) * w)
            .sum();
        f1.push(mean);
        f2.push(-var.max(T::zero()).sqrt());
    }
    Ok((f1, f2))
}

/// Exhaustive ground truth. `reference` defaults to the componentwise minimum
/// of `(F1, F2)` minus `1e-6`.
pub fn ground_truth<T: Scalar>(
    values: &[T],
    p: &EnvDistribution<T>,
    alpha: T,
    threshold: Option<T>,
    reference: Option<(T, T)>,
) -> Result<GroundTruth<T>> {
    if !(alpha >= T::zero() && alpha <= T::one()) {
        return Err(Error::invalid(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("value table contains non-finite entries"));
    }
    let (f1, f2) = exact_objectives(values, p)?;
    if f1.is_empty() {
        return Err(Error::invalid("empty design set"));
    }
    let g: Vec<T> = f1
        .iter()
        .zip(&f2)
        .map(|(&a, &b)| alpha * a + (T::one() - alpha) * b)
        .collect();
    let x_star = argmax_indexed(g.iter().copied().enumerate()).expect("nonempty");
    let vectors: Vec<(T, T)> = f1.iter().copied().zip(f2.iter().copied()).collect();
    let pareto = nondominated(&vectors);
    let constrained_opt = threshold.and_then(|h| {
        argmax_indexed(
            f1.iter()
                .zip(&f2)
                .enumerate()
                .filter(|(_, (_, &b))| b >= h)
                .map(|(i, (&a, _))| (i, a)),
        )
    });
    let reference = reference.unwrap_or_else(|| default_reference(&vectors));
    let front: Vec<(T, T)> = pareto.iter().map(|&i| vectors[i]).collect();
    if reference_dominates(&front, reference) {
        return Err(Error::invalid("reference point is not dominated by the true front"));
    }
    let hv = hypervolume(&front, reference);
    Ok(GroundTruth {
        f1,
        f2,
        g,
        alpha,
        x_star,
        pareto,
        threshold,
        constrained_opt,
        reference,
        hv,
    })
}

fn default_reference<T: Scalar>(vectors: &[(T, T)]) -> (T, T) {
    let shift = T::lit(1e-6);
    let lo = vectors.iter().fold((T::infinity(), T::infinity()), |acc, v| (acc.0.min(v.0), acc.1.min(v.1)));
    (lo.0 - shift, lo.1 - shift)
}

/// True when no front vector strictly exceeds the reference in both coordinates.
fn reference_dominates<T: Scalar>(front: &[(T, T)], reference: (T, T)) -> bool {
    !front.iter().any(|v| v.0 > reference.0 && v.1 > reference.1)
}

/// `G(x*) − G(x̂)`.
pub fn regret<T: Scalar>(truth: &GroundTruth<T>, recommended: usize) -> T {
    (truth.g[truth.x_star] - truth.g[recommended]).max(T::zero())
}

/// `F1(x*_cons) − F1(x̂)` for the constrained problem, when both exist.
pub fn constrained_regret<T: Scalar>(truth: &GroundTruth<T>, recommended: Option<usize>) -> Option<T> {
    let best = truth.constrained_opt?;
    let rec = recommended?;
    Some(truth.f1[best] - truth.f1[rec])
}

/// Area dominated by `points` and bounded below by `reference` (maximization).
/// Points not strictly above the reference in both coordinates contribute 0.
pub fn hypervolume<T: Scalar>(points: &[(T, T)], reference: (T, T)) -> T {
    let mut pts: Vec<(T, T)> = points
        .iter()
        .copied()
        .filter(|p| p.0 > reference.0 && p.1 > reference.1)
        .collect();
    pts.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal))
    });
    let mut area = T::zero();
    let mut floor = reference.1;
    for (x, y) in pts {
        if y > floor {
            area += (x - reference.0) * (y - floor);
            floor = y;
        }
    }
    area
}

/// `HV(F(Π)) − HV(F(Π̂))`, scoring the estimate with exact objective values.
pub fn hypervolume_gap<T: Scalar>(truth: &GroundTruth<T>, pareto_hat: &[usize]) -> Result<T> {
    if pareto_hat.iter().any(|&x| x >= truth.len()) {
        return Err(Error::invalid("estimated Pareto set contains an index outside the design grid"));
    }
    let front: Vec<(T, T)> = truth.pareto.iter().map(|&i| truth.objectives(i)).collect();
    if reference_dominates(&front, truth.reference) {
        return Err(Error::invalid("reference point is not dominated by the true front"));
    }
    let est: Vec<(T, T)> = pareto_hat.iter().map(|&i| truth.objectives(i)).collect();
    Ok((truth.hv - hypervolume(&est, truth.reference)).max(T::zero()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParetoViolation {
    /// `F(x) + ε` lies strictly below `F(by)` in both objectives.
    TooFarBelowFront { x: usize, by: usize },
    /// A true Pareto point is not ε-covered by any estimated point.
    NotCovered { pareto_point: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsilonCheck {
    pub passed: bool,
    pub violation: Option<ParetoViolation>,
}

/// Whether `pareto_hat` is an ε-accurate Pareto set on the finite grid.
pub fn epsilon_pareto_check<T: Scalar>(truth: &GroundTruth<T>, pareto_hat: &[usize], epsilon: (T, T)) -> EpsilonCheck {
    let fail = |v| EpsilonCheck {
        passed: false,
        violation: Some(v),
    };
    for &x in pareto_hat {
        let shifted = (truth.f1[x] + epsilon.0, truth.f2[x] + epsilon.1);
        // Every grid vector is weakly below some true Pareto vector, so only
        // the front needs scanning.
        for &other in &truth.pareto {
            let o = truth.objectives(other);
            if shifted.0 < o.0 && shifted.1 < o.1 {
                return fail(ParetoViolation::TooFarBelowFront { x, by: other });
            }
        }
    }
    for &p in &truth.pareto {
        let covered = pareto_hat
            .iter()
            .any(|&x| eps_dominated(truth.objectives(p), truth.objectives(x), epsilon));
        if !covered {
            return fail(ParetoViolation::NotCovered { pareto_point: p });
        }
    }
    EpsilonCheck {
        passed: true,
        violation: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> GroundTruth<f64> {
        let p = EnvDistribution::uniform(vec![vec![0.0], vec![1.0]]).unwrap();
        ground_truth(&[1.0, -1.0, 0.0, 0.0], &p, 0.5, Some(-0.5), None).unwrap()
    }

    #[test]
    fn hand_instance() {
        let t = two_by_two();
        assert_eq!(t.f1, vec![0.0, 0.0]);
        assert_eq!(t.f2, vec![-1.0, 0.0]);
        assert_eq!(t.pareto, vec![1]);
        assert_eq!(t.x_star, 1);
        assert_eq!(t.constrained_opt, Some(1));
        assert_eq!(regret(&t, 0), 0.5);
        assert_eq!(regret(&t, 1), 0.0);
    }

    #[test]
    fn constant_function() {
        let p = EnvDistribution::uniform(vec![vec![0.0], vec![1.0]]).unwrap();
        let t = ground_truth(&[2.0; 6], &p, 0.5, None, None).unwrap();
        assert!(t.f2.iter().all(|&v| v == 0.0));
        assert_eq!(t.pareto, vec![0, 1, 2]);
    }

    #[test]
    fn hypervolume_by_hand() {
        assert_eq!(hypervolume(&[(1.0, 1.0)], (0.0, 0.0)), 1.0);
        assert_eq!(hypervolume(&[(1.0, 0.5), (0.5, 1.0)], (0.0, 0.0)), 0.75);
        assert_eq!(hypervolume(&[(1.0, 0.5), (0.5, 1.0), (0.4, 0.4)], (0.0, 0.0)), 0.75);
        assert_eq!(hypervolume::<f64>(&[], (0.0, 0.0)), 0.0);
        assert_eq!(hypervolume(&[(-1.0, 2.0)], (0.0, 0.0)), 0.0);
    }

    #[test]
    fn gap_on_three_point_front() {
        let p = EnvDistribution::uniform(vec![vec![0.0]]).unwrap();
        // Single environment point: F2 ≡ 0, so build the front directly.
        let mut t = ground_truth(&[0.0, 0.0, 0.0], &p, 0.5, None, Some((-1.0, -4.0))).unwrap();
        t.f1 = vec![3.0, 2.0, 1.0];
        t.f2 = vec![-3.0, -2.0, -1.0];
        t.pareto = vec![0, 1, 2];
        t.hv = hypervolume(&[(3.0, -3.0), (2.0, -2.0), (1.0, -1.0)], t.reference);
        // Slabs of height 1 and widths 4, 3, 2 stacked by the sweep.
        assert_eq!(t.hv, 9.0);
        assert_eq!(hypervolume_gap(&t, &[0, 1, 2]).unwrap(), 0.0);
        assert_eq!(hypervolume_gap(&t, &[1]).unwrap(), 9.0 - 6.0);
        assert!(hypervolume_gap(&t, &[7]).is_err());
    }

    #[test]
    fn epsilon_check() {
        let p = EnvDistribution::uniform(vec![vec![0.0]]).unwrap();
        let mut t = ground_truth(&[0.0, 0.0, 0.0], &p, 0.5, None, Some((-10.0, -10.0))).unwrap();
        t.f1 = vec![3.0, 2.0, 0.0];
        t.f2 = vec![-3.0, -2.0, -3.5];
        t.pareto = vec![0, 1];
        assert!(epsilon_pareto_check(&t, &[0, 1], (0.0, 0.0)).passed);
        let missing = epsilon_pareto_check(&t, &[0], (0.5, 0.5));
        assert_eq!(missing.violation, Some(ParetoViolation::NotCovered { pareto_point: 1 }));
        assert!(epsilon_pareto_check(&t, &[0], (1.0, 1.0)).passed);
        let far = epsilon_pareto_check(&t, &[0, 1, 2], (0.5, 0.5));
        assert_eq!(far.violation, Some(ParetoViolation::TooFarBelowFront { x: 2, by: 1 }));
    }

    #[test]
    fn reference_must_be_dominated() {
        let p = EnvDistribution::uniform(vec![vec![0.0], vec![1.0]]).unwrap();
        assert!(ground_truth(&[1.0, -1.0, 0.0, 0.0], &p, 0.5, None, Some((5.0, 5.0))).is_err());
        assert!(ground_truth(&[1.0, -1.0], &p, 1.5, None, None).is_err());
    }
}
