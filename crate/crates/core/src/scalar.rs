use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Numeric type that centrality flows and modularity sums are computed in.
///
/// Implemented for `f32`, `f64`, and exact rationals such as
/// `num_rational::Ratio<i128>` or `BigRational`. Weights on shortest paths
/// never use this trait; they stay in integer fixed point.
pub trait Scalar: Num + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync {
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where T: Num + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync {}

/// Sum a sequence in iteration order.
pub(crate) fn sum_in_order<S: Scalar, I: IntoIterator<Item = S>>(items: I) -> S {
    items.into_iter().fold(S::zero(), |acc, x| acc + x)
}
