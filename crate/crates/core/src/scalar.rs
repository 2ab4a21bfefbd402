//! Scalar abstractions.
//!
//! The measure-theoretic kernels (pushforward densities, conditional
//! expectations, `J`, `J_n`, the pointwise criterion) only need field
//! arithmetic and an order, so they are written against [`Field`] and run on
//! `f32`, `f64` and exact rationals alike. Anything that needs square roots or
//! eigenvalues is written against [`Real`].

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, Signed};

/// Ordered field used by the pointwise machinery.
pub trait Field: Num + Signed + PartialOrd + Copy + Debug + Display + Send + Sync + 'static {
    /// Relative threshold used for supports when the caller does not pick one.
    /// Zero for exact arithmetic.
    fn default_relative_tolerance() -> Self;

    /// Slack used by internal sanity assertions (trace bound, witness replay).
    fn consistency_tolerance() -> Self;

    /// Lossy conversion for reporting.
    fn to_f64_lossy(self) -> f64;

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Field for f64 {
    fn default_relative_tolerance() -> Self {
        1e-12
    }

    fn consistency_tolerance() -> Self {
        1e-9
    }

    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl Field for f32 {
    fn default_relative_tolerance() -> Self {
        1e-6
    }

    fn consistency_tolerance() -> Self {
        1e-4
    }

    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Field for Ratio<i64> {
    fn default_relative_tolerance() -> Self {
        Ratio::from_integer(0)
    }

    fn consistency_tolerance() -> Self {
        Ratio::from_integer(0)
    }

    fn to_f64_lossy(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// Floating-point scalar: everything in [`Field`] plus the transcendental
/// operations needed by the spectral routines.
pub trait Real: Field + Float + FromPrimitive {
    /// Converts an `f64` literal. Panics only if the target type cannot
    /// represent finite `f64` constants, which is never the case for `f32`/`f64`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }
}

impl<T: Field + Float + FromPrimitive> Real for T {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_is_exact() {
        let third = Ratio::new(1i64, 3);
        assert_eq!(third * Ratio::from_integer(3), Ratio::from_integer(1));
        assert_eq!(Ratio::<i64>::default_relative_tolerance(), Ratio::from_integer(0));
        assert!((third.to_f64_lossy() - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn min_max_helpers() {
        assert_eq!(2.0f64.max_of(3.0), 3.0);
        assert_eq!(2.0f64.min_of(3.0), 2.0);
        assert_eq!(f32::lit(0.5), 0.5f32);
    }
}
