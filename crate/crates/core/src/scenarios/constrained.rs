use crate::error::{Error, Result};
use crate::risk::{rect_diameter, RiskBoundTable};
use crate::{argmax_indexed, Scalar};

/// Sets tracked while maximizing F1 subject to `F2 ≥ h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedState<T> {
    pub step: usize,
    /// Points that may satisfy the constraint: `u^{F2} ≥ h − ε2`.
    pub m_cons: Vec<usize>,
    /// Points known to satisfy it: `l^{F2} ≥ h − ε2`.
    pub s_feasible: Vec<usize>,
    pub m_obj: Vec<usize>,
    /// `m_cons ∩ m_obj`, the selection domain.
    pub m_latent: Vec<usize>,
    pub threshold: T,
    pub epsilon: (T, T),
    pub terminated: bool,
    /// `argmax_{S} l^{F1}` whenever the feasible set is nonempty.
    pub recommendation: Option<usize>,
}

pub fn constrained_step<T: Scalar>(table: &RiskBoundTable<T>, h: T, epsilon: (T, T)) -> Result<ConstrainedState<T>> {
    if !(h < T::zero()) {
        return Err(Error::invalid(format!("threshold h must be negative, got {h}")));
    }
    if !(epsilon.0 >= T::zero() && epsilon.1 >= T::zero()) {
        return Err(Error::invalid("epsilon must be nonnegative"));
    }
    let n = table.len();
    let f1 = table.f1();
    let f2 = table.f2();
    let cut = h - epsilon.1;

    let m_cons: Vec<usize> = (0..n).filter(|&x| f2[x].upper >= cut).collect();
    let s_feasible: Vec<usize> = (0..n).filter(|&x| f2[x].lower >= cut).collect();
    let recommendation = argmax_indexed(s_feasible.iter().map(|&x| (x, f1[x].lower)));
    let m_obj: Vec<usize> = match recommendation {
        None => (0..n).collect(),
        Some(best) => {
            let bar = f1[best].lower - epsilon.0;
            (0..n).filter(|&x| f1[x].upper >= bar).collect()
        }
    };
    let m_latent: Vec<usize> = m_cons.iter().copied().filter(|x| m_obj.binary_search(x).is_ok()).collect();

    // The maximum over an empty set counts as 0.
    let widest = m_latent
        .iter()
        .map(|&x| rect_diameter(table, x))
        .fold(T::zero(), |a, b| a.max(b));
    let terminated = widest <= epsilon.0.min(epsilon.1);

    Ok(ConstrainedState {
        step: table.step,
        m_cons,
        s_feasible,
        m_obj,
        m_latent,
        threshold: h,
        epsilon,
        terminated,
        recommendation,
    })
}

/// Most uncertain point of the latent optimal set.
pub fn constrained_select<T: Scalar>(state: &ConstrainedState<T>, table: &RiskBoundTable<T>) -> Result<usize> {
    if state.terminated {
        return Err(Error::InvalidState("the constrained search has already terminated".into()));
    }
    argmax_indexed(state.m_latent.iter().map(|&x| (x, rect_diameter(table, x))))
        .ok_or_else(|| Error::InvalidState("latent optimal set is empty".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk::Interval;

    fn table(f1: &[(f64, f64)], f2: &[(f64, f64)]) -> RiskBoundTable<f64> {
        RiskBoundTable::from_intervals(
            0,
            f1.iter().map(|&(l, u)| Interval::new(l, u)).collect(),
            f2.iter().map(|&(l, u)| Interval::new(l, u)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn infeasible_everywhere_terminates_without_recommendation() {
        let t = table(&[(0.0, 1.0), (0.5, 2.0)], &[(-3.0, -2.0), (-4.0, -2.5)]);
        let s = constrained_step(&t, -1.0, (0.1, 0.1)).unwrap();
        assert!(s.m_cons.is_empty());
        assert!(s.m_latent.is_empty());
        assert!(s.terminated);
        assert_eq!(s.recommendation, None);
    }

    #[test]
    fn empty_feasible_set_keeps_all_objective_candidates() {
        let t = table(&[(0.0, 1.0), (0.5, 2.0), (0.1, 0.2)], &[(-3.0, -0.5), (-4.0, -2.5), (-2.0, -0.1)]);
        let s = constrained_step(&t, -1.0, (0.1, 0.1)).unwrap();
        assert!(s.s_feasible.is_empty());
        assert_eq!(s.m_obj, vec![0, 1, 2]);
        assert_eq!(s.m_latent, s.m_cons);
        assert_eq!(s.m_cons, vec![0, 2]);
        assert!(!s.terminated);
        assert_eq!(constrained_select(&s, &t).unwrap(), 0);
    }

    #[test]
    fn zero_width_picks_best_feasible() {
        let f1 = [1.0, 3.0, 2.0, 0.5];
        let f2 = [-0.5, -2.0, -0.8, -0.1];
        let t = table(
            &f1.iter().map(|&v| (v, v)).collect::<Vec<_>>(),
            &f2.iter().map(|&v| (v, v)).collect::<Vec<_>>(),
        );
        let s = constrained_step(&t, -1.0, (0.0, 0.0)).unwrap();
        assert_eq!(s.s_feasible, vec![0, 2, 3]);
        assert_eq!(s.recommendation, Some(2));
        assert!(s.terminated);
        assert!(matches!(constrained_select(&s, &t), Err(Error::InvalidState(_))));
    }

    #[test]
    fn rejects_nonnegative_threshold() {
        let t = table(&[(0.0, 1.0)], &[(-1.0, 0.0)]);
        assert!(constrained_step(&t, 0.0, (0.1, 0.1)).is_err());
        assert!(constrained_step(&t, 0.5, (0.1, 0.1)).is_err());
    }
}
