//! Scalar abstraction for the numeric core.
//!
//! Every math kernel in this crate is generic over [`Real`], so the whole
//! pipeline can be instantiated for `f32` or `f64`. The crate root exports
//! `f64` aliases, which is what the CLI and the acceptance suite use;
//! single precision is only good enough for smoke tests.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::{Product, Sum};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssignOps
    + Sum<Self>
    + Product<Self>
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Shorthand conversion from an `f64` literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal not representable")
    }

    /// Conversion from a count.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize not representable")
    }

    /// Lossy conversion back to `f64` (exact for f32/f64).
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssignOps
        + Sum<T>
        + Product<T>
        + Debug
        + Display
        + LowerExp
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Complex number over the crate scalar.
pub type C<T> = Complex<T>;

#[cfg(test)]
mod tests {
    use super::*;

    fn generic_sum<T: Real>() -> T {
        (0..4).map(|i| T::of_usize(i)).sum()
    }

    #[test]
    fn instantiates_for_both_widths() {
        assert_eq!(generic_sum::<f64>(), 6.0);
        assert_eq!(generic_sum::<f32>(), 6.0);
        assert_eq!(f64::of(0.5), 0.5);
    }
}
