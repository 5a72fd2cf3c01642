//! Scalar abstraction shared by the distribution algebra.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating point type the state algebra is written against: `f32` or `f64`.
pub trait Real: Float + NumAssign + FromPrimitive + Debug + Display + Sum + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal representable in scalar type")
    }

    /// Conversion from a photon count.
    fn count(n: u32) -> Self {
        Self::from_u32(n).expect("photon count representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Binomial coefficient `C(n, k)` evaluated in the scalar type.
pub fn binomial<T: Real>(n: u32, k: u32) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * T::count(n - i) / T::count(i + 1);
    }
    acc
}

/// `n!` in the scalar type. Only used for small photon numbers.
pub fn factorial<T: Real>(n: u32) -> T {
    (1..=n).fold(T::one(), |acc, i| acc * T::count(i))
}

/// `base^exp` for a non-negative integer exponent, with `0^0 = 1`.
pub fn powu<T: Real>(base: T, exp: u32) -> T {
    base.powi(exp as i32)
}
