//! Scalar abstractions.
//!
//! [`Real`] covers the floating point types the special functions are written
//! for. [`Scalar`] is the weaker ordered-field interface used by the fraction
//! calculator, implemented for `f64` and for exact rationals.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Floating point scalar: `f32` or `f64`.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {
    /// Converts a literal. Panics only if the literal is not representable,
    /// which cannot happen for the finite constants used in this crate.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Ordered field with an optional exact square root.
pub trait Scalar: Clone + Debug + Display + PartialOrd + Num + Signed {
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_f64_value(x: f64) -> Option<Self>;
    fn to_f64_value(&self) -> f64;
    /// Square root if it is exactly representable.
    fn sqrt_exact(&self) -> Option<Self>;
    /// Tolerance for equality tests: `eps` for floats, zero for exact types.
    fn slack(eps: f64) -> Self;
}

impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_f64_value(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn to_f64_value(&self) -> f64 {
        *self
    }
    fn sqrt_exact(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }
    fn slack(eps: f64) -> Self {
        eps
    }
}

impl Scalar for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64_value(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }
    fn to_f64_value(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        (&n * &n == *self.numer() && &d * &d == *self.denom()).then(|| BigRational::new(n, d))
    }
    fn slack(_eps: f64) -> Self {
        Self::zero()
    }
}
