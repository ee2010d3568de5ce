use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::risk::{rect_diameter, RiskBoundTable};
use crate::{argmax_indexed, Scalar};

/// Reading of the strict relation `a ≺ b` used by the uncertainty set.
///
/// `AllCoordinates` requires `a_i < b_i` for both objectives. It is the
/// negation of "some coordinate of `b` is at most `a`", which is what the
/// termination guarantee relies on. `AnyCoordinate` requires only one strict
/// coordinate; with it two incomparable points almost always keep each other
/// uncertain, so the loop rarely terminates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StrictOrder {
    #[default]
    AllCoordinates,
    AnyCoordinate,
}

impl StrictOrder {
    pub fn holds<T: Scalar>(self, a: (T, T), b: (T, T)) -> bool {
        match self {
            StrictOrder::AllCoordinates => a.0 < b.0 && a.1 < b.1,
            StrictOrder::AnyCoordinate => a.0 < b.0 || a.1 < b.1,
        }
    }
}

/// `a ⪯ b`: no coordinate of `a` exceeds `b`.
#[inline]
pub fn weakly_dominated<T: Scalar>(a: (T, T), b: (T, T)) -> bool {
    a.0 <= b.0 && a.1 <= b.1
}

/// `a ⪯_ε b`: `a ⪯ b + ε`.
#[inline]
pub fn eps_dominated<T: Scalar>(a: (T, T), b: (T, T), eps: (T, T)) -> bool {
    a.0 <= b.0 + eps.0 && a.1 <= b.1 + eps.1
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoState<T> {
    pub step: usize,
    /// Estimated Pareto set, from pessimistic vectors. Sorted ascending.
    pub pareto_hat: Vec<usize>,
    /// Points outside the estimate that are not ε-dominated under optimism.
    pub potential: Vec<usize>,
    /// Points of the estimate whose membership is still undecided.
    pub uncertain: Vec<usize>,
    pub epsilon: (T, T),
    pub terminated: bool,
}

/// Indices not weakly dominated by any vector that differs from their own.
///
/// Runs in O(n log n): points are swept in decreasing first coordinate, and a
/// point is dominated iff some point with a strictly larger first coordinate
/// has a second coordinate at least as large, or a point with the same first
/// coordinate has a strictly larger second one.
pub fn nondominated<T: Scalar>(vectors: &[(T, T)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    order.sort_by(|&a, &b| {
        vectors[b]
            .0
            .partial_cmp(&vectors[a].0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| vectors[b].1.partial_cmp(&vectors[a].1).unwrap_or(Ordering::Equal))
    });
    let mut keep = Vec::new();
    let mut best_above = T::neg_infinity();
    let mut i = 0;
    while i < order.len() {
        let first = vectors[order[i]].0;
        let mut j = i;
        while j < order.len() && vectors[order[j]].0 == first {
            j += 1;
        }
        // Sorted by second coordinate descending within the group.
        let group_max = vectors[order[i]].1;
        for &idx in &order[i..j] {
            let second = vectors[idx].1;
            if second >= group_max && !(best_above >= second) {
                keep.push(idx);
            }
        }
        best_above = best_above.max(group_max);
        i = j;
    }
    keep.sort_unstable();
    keep
}

/// Estimated Pareto set, potential set and uncertainty set for one table.
pub fn estimate_pareto<T: Scalar>(table: &RiskBoundTable<T>, epsilon: (T, T)) -> Result<ParetoState<T>> {
    estimate_pareto_with(table, epsilon, StrictOrder::default())
}

pub fn estimate_pareto_with<T: Scalar>(
    table: &RiskBoundTable<T>,
    epsilon: (T, T),
    order: StrictOrder,
) -> Result<ParetoState<T>> {
    if !(epsilon.0 >= T::zero() && epsilon.1 >= T::zero()) {
        return Err(Error::invalid("epsilon must be nonnegative"));
    }
    let n = table.len();
    let pes: Vec<(T, T)> = (0..n).map(|x| table.pessimistic(x)).collect();
    let pareto_hat = nondominated(&pes);

    let mut in_hat = vec![false; n];
    for &x in &pareto_hat {
        in_hat[x] = true;
    }
    let potential = (0..n)
        .filter(|&x| !in_hat[x])
        .filter(|&x| {
            let opt = table.optimistic(x);
            pareto_hat.iter().all(|&p| !eps_dominated(opt, pes[p], epsilon))
        })
        .collect::<Vec<_>>();

    let uncertain = pareto_hat
        .iter()
        .copied()
        .filter(|&x| {
            let shifted = (pes[x].0 + epsilon.0, pes[x].1 + epsilon.1);
            pareto_hat
                .iter()
                .any(|&other| other != x && order.holds(shifted, table.optimistic(other)))
        })
        .collect::<Vec<_>>();

    let terminated = potential.is_empty() && uncertain.is_empty();
    Ok(ParetoState {
        step: table.step,
        pareto_hat,
        potential,
        uncertain,
        epsilon,
        terminated,
    })
}

/// Most uncertain point of `M ∪ Π̂` by rectangle diagonal.
pub fn mo_select<T: Scalar>(state: &ParetoState<T>, table: &RiskBoundTable<T>) -> Result<usize> {
    if state.terminated {
        return Err(Error::InvalidState("the Pareto search has already terminated".into()));
    }
    let mut candidates: Vec<usize> = state.pareto_hat.iter().chain(&state.potential).copied().collect();
    candidates.sort_unstable();
    argmax_indexed(candidates.iter().map(|&x| (x, rect_diameter(table, x))))
        .ok_or_else(|| Error::invalid("no candidate design points"))
}

pub fn mo_terminated<T>(state: &ParetoState<T>) -> bool {
    state.potential.is_empty() && state.uncertain.is_empty()
}
