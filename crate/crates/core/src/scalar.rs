//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};

/// Real floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub(crate) fn half<T: Real>() -> T {
    lit(0.5)
}

/// `cos(pi * x)` with argument reduction done on `x` rather than on `pi * x`.
///
/// Half-integer arguments return an exact zero and integer arguments an exact
/// `±1`, so phases expressed in units of the transfer time stay exact at the
/// points the games care about.
pub fn cos_pi<T: Real>(x: T) -> T {
    let one = T::one();
    let two = one + one;
    let h = half::<T>();
    let quarter = lit::<T>(0.25);

    let mut r = x.abs() % two;
    if r > one {
        r = two - r;
    }
    let (r, sign) = if r > h { (one - r, -one) } else { (r, one) };
    let v = if r == h {
        T::zero()
    } else if r <= quarter {
        (T::PI() * r).cos()
    } else {
        (T::PI() * (h - r)).sin()
    };
    sign * v
}

/// `cos(pi * x)^m`.
///
/// The even part of the power is taken through `cos^2 = (1 + cos 2θ) / 2`,
/// which keeps cases like `cos^4(pi/4) = 1/4` exact in binary floating point.
pub fn cos_pi_pow<T: Real>(x: T, m: u32) -> T {
    let one = T::one();
    let squared = (one + cos_pi(x + x)) * half::<T>();
    let even = squared.powi((m / 2) as i32);
    if m % 2 == 1 {
        cos_pi(x) * even
    } else {
        even
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_special_points() {
        assert_eq!(cos_pi(0.0_f64), 1.0);
        assert_eq!(cos_pi(0.5_f64), 0.0);
        assert_eq!(cos_pi(1.0_f64), -1.0);
        assert_eq!(cos_pi(-0.5_f64), 0.0);
        assert_eq!(cos_pi(1.5_f64), 0.0);
        assert_eq!(cos_pi(2.0_f64), 1.0);
        assert_eq!(cos_pi(0.5_f32), 0.0);
    }

    #[test]
    fn powers_at_zeno_points() {
        assert_eq!(cos_pi_pow(1.0_f64, 1), -1.0);
        assert_eq!(cos_pi_pow(0.5_f64, 2), 0.0);
        assert!((cos_pi_pow(1.0_f64 / 3.0, 3) - 0.125).abs() < 1e-16);
        assert_eq!(cos_pi_pow(0.25_f64, 4), 0.25);
        assert_eq!(cos_pi_pow(0.3_f64, 0), 1.0);
    }

    proptest! {
        #[test]
        fn matches_libm(x in -10.0_f64..10.0) {
            prop_assert!((cos_pi(x) - (std::f64::consts::PI * x).cos()).abs() < 1e-13);
        }

        #[test]
        fn power_matches_repeated_product(x in -2.0_f64..2.0, m in 0u32..40) {
            let naive = (std::f64::consts::PI * x).cos().powi(m as i32);
            prop_assert!((cos_pi_pow(x, m) - naive).abs() < 1e-12);
        }
    }
}
