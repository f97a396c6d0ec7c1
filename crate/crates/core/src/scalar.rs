//! Scalar abstraction: probability arithmetic is generic over the float width.

use num_traits::{Float, FromPrimitive, ToPrimitive};

use crate::combinatorics::Count;

/// Floating-point scalar for probability computation: `f32` or `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + core::ops::AddAssign
    + core::ops::SubAssign
    + core::ops::MulAssign
    + core::ops::DivAssign
    + core::iter::Sum<Self>
    + core::fmt::Debug
    + core::fmt::Display
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Convert an exact count to the working scalar, rounding once at the
/// boundary. Counts stay exact everywhere else.
pub fn real_from_count<R: Real>(c: &Count) -> R {
    R::from_f64(c.to_f64().unwrap_or(f64::INFINITY)).unwrap_or_else(R::infinity)
}

pub(crate) fn real_from_u64<R: Real>(v: u64) -> R {
    R::from_u64(v).expect("u64 converts to any float width")
}

/// x^e by repeated multiplication, with the 0^0 = 1 convention.
pub(crate) fn pow_repeated<R: Real>(x: R, e: u32) -> R {
    let mut acc = R::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    #[test]
    fn pow_zero_exponent_is_one() {
        assert_eq!(pow_repeated(0.0f64, 0), 1.0);
        assert_eq!(pow_repeated(0.5f64, 0), 1.0);
        assert_eq!(pow_repeated(0.0f64, 3), 0.0);
    }

    #[test]
    fn count_conversion_round_trips_small_values() {
        let c = BigUint::from(286u32);
        assert_eq!(real_from_count::<f64>(&c), 286.0);
        assert_eq!(real_from_count::<f32>(&c), 286.0f32);
    }
}
