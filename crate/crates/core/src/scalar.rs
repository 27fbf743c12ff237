//! Floating-point abstraction shared by every numeric kernel.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the engine is generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Largest admissible house-of-cards continuation probability.
    #[inline]
    fn q_cap() -> Self {
        Self::one() - Self::lit(1e-12).max(Self::epsilon())
    }

    /// Tolerance for internal-consistency checks scaled to the precision.
    #[inline]
    fn consistency_tol() -> Self {
        Self::lit(1e-10).max(Self::epsilon() * Self::lit(64.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Product of nonnegative factors kept in log space, tracking exact zeros.
///
/// A factor equal to zero annihilates the product; its logarithm is never taken.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogProduct<T> {
    log: T,
    zeros: usize,
}

impl<T: Scalar> LogProduct<T> {
    pub(crate) fn one() -> Self {
        Self {
            log: T::zero(),
            zeros: 0,
        }
    }

    /// Multiply by `base^exponent` with `0^0 = 1`.
    pub(crate) fn mul_pow(&mut self, base: T, exponent: T) {
        if exponent == T::zero() {
            return;
        }
        if base <= T::zero() {
            self.zeros += 1;
        } else {
            self.log += exponent * base.ln();
        }
    }

    pub(crate) fn mul(&mut self, factor: T) {
        self.mul_pow(factor, T::one());
    }

    pub(crate) fn value(&self) -> T {
        if self.zeros > 0 {
            T::zero()
        } else {
            self.log.exp()
        }
    }
}
