use crate::error::{Error, Result};
use crate::risk::RiskBoundTable;
use crate::{argmax_indexed, Scalar};

/// How the multi-task recommendation compares past selections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RecommendationRule {
    /// Each past point is scored with the lower bound from the step it was
    /// selected at.
    #[default]
    PerStepBounds,
    /// Every past point is rescored with the latest lower bounds.
    CurrentStepBounds,
}

/// One past selection: the design index and its lower bound at that step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pick<T> {
    pub design: usize,
    pub lower_at_selection: T,
}

/// Upper confidence bound maximizer of the scalarized objective `G`.
pub fn mt_select<T: Scalar>(table: &RiskBoundTable<T>) -> Result<usize> {
    let g = table
        .g()
        .ok_or_else(|| Error::invalid("table has no scalarized bounds; call with_scalarization first"))?;
    argmax_indexed(g.iter().enumerate().map(|(i, b)| (i, b.upper))).ok_or_else(|| Error::invalid("empty design set"))
}

/// Recommended design among past selections. Ties go to the earliest step.
///
/// `current_lower` holds the latest lower bounds of the target objective for
/// every design point; it is only read under `CurrentStepBounds`.
pub fn mt_recommend<T: Scalar>(history: &[Pick<T>], rule: RecommendationRule, current_lower: &[T]) -> Result<usize> {
    if history.is_empty() {
        return Err(Error::invalid("no steps have been taken yet"));
    }
    let score = |p: &Pick<T>| -> Result<T> {
        match rule {
            RecommendationRule::PerStepBounds => Ok(p.lower_at_selection),
            RecommendationRule::CurrentStepBounds => current_lower
                .get(p.design)
                .copied()
                .ok_or_else(|| Error::invalid(format!("design index {} outside the bound table", p.design))),
        }
    };
    let scores = history.iter().map(score).collect::<Result<Vec<_>>>()?;
    let step = argmax_indexed(scores.into_iter().enumerate())
        .ok_or_else(|| Error::InvalidState("every recommendation score is NaN".into()))?;
    Ok(history[step].design)
}
