use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type the numerical core is generic over.
///
/// Implemented for `f32` and `f64`. Everything that touches the GP, the
/// interval calculus or the Pareto bookkeeping is written against this trait;
/// the benchmark and runner layers fix it to `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the target cannot represent
    /// any finite value, which never happens for the implemented types.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance used when checking that probability weights sum to one.
    #[inline]
    fn weight_tolerance(len: usize) -> Self {
        let scaled = Self::epsilon() * Self::lit(16.0) * Self::lit((len.max(1) as f64).sqrt());
        scaled.max(Self::lit(1e-12))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Index of the largest value, lowest index on ties. NaN entries are skipped.
pub(crate) fn argmax_indexed<T, I>(items: I) -> Option<usize>
where
    T: Scalar,
    I: IntoIterator<Item = (usize, T)>,
{
    let mut best: Option<(usize, T)> = None;
    for (idx, value) in items {
        if value.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if value <= b => {}
            _ => best = Some((idx, value)),
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax_indexed([(0, 1.0), (1, 3.0), (2, 3.0)]), Some(1));
        assert_eq!(argmax_indexed([(4, 2.0f32), (7, 2.0)]), Some(4));
        assert_eq!(argmax_indexed::<f64, _>([(0, f64::NAN), (1, -1.0)]), Some(1));
        assert_eq!(argmax_indexed::<f64, _>(std::iter::empty()), None);
    }

    #[test]
    fn weight_tolerance_floor() {
        assert_eq!(f64::weight_tolerance(10), 1e-12);
        assert!(f32::weight_tolerance(10) > 1e-7);
    }
}
