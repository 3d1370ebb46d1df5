//! Scalar types usable as vertex or edge weights.
//!
//! Everything in the crate that sums, compares or subtracts weights is generic
//! over [`Weight`]. Floating point types are the default; [`Rational64`] and
//! `i64` give exact comparisons for oracle checks.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, ToPrimitive};

pub use num_rational::Rational64;

/// A non-negative additive weight.
pub trait Weight:
    Num + Copy + PartialOrd + Debug + Display + ToPrimitive + FromPrimitive + Send + Sync + 'static
{
    /// `true` when addition and comparison are exact.
    const EXACT: bool;

    /// Finite and non-negative.
    fn is_admissible(&self) -> bool;

    /// Lossy conversion used for statistics and perturbed scores.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_with(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn half(self) -> Self {
        self / (Self::one() + Self::one())
    }
}

impl Weight for f64 {
    const EXACT: bool = false;

    fn is_admissible(&self) -> bool {
        self.is_finite() && *self >= 0.0
    }

    fn as_f64(self) -> f64 {
        self
    }
}

impl Weight for f32 {
    const EXACT: bool = false;

    fn is_admissible(&self) -> bool {
        self.is_finite() && *self >= 0.0
    }
}

impl Weight for i64 {
    const EXACT: bool = true;

    fn is_admissible(&self) -> bool {
        *self >= 0
    }
}

impl Weight for Ratio<i64> {
    const EXACT: bool = true;

    fn is_admissible(&self) -> bool {
        *self.denom() != 0 && *self >= Ratio::from_integer(0)
    }
}

/// Sum of an iterator of weights, starting from zero.
pub fn total<W: Weight>(items: impl IntoIterator<Item = W>) -> W {
    items.into_iter().fold(W::zero(), |acc, w| acc + w)
}
