//! Field abstraction for the tableau: a checked fixed-width fast path and an
//! unbounded fallback. Every checked operation returns `None` on overflow so the
//! caller can restart the solve in big rationals.

use crate::Q;
use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};

pub(crate) trait Scalar: Clone + PartialOrd {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn sub(&self, other: &Self) -> Option<Self>;
    fn mul(&self, other: &Self) -> Option<Self>;
    fn div(&self, other: &Self) -> Option<Self>;
    fn from_q(q: &Q) -> Option<Self>;
    fn to_q(&self) -> Q;
}

pub(crate) type Small = Ratio<i128>;

impl Scalar for Small {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_one(&self) -> bool {
        One::is_one(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn sub(&self, other: &Self) -> Option<Self> {
        if Zero::is_zero(other) {
            return Some(*self);
        }
        self.checked_sub(other)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        if Zero::is_zero(self) || Zero::is_zero(other) {
            return Some(Zero::zero());
        }
        self.checked_mul(other)
    }
    fn div(&self, other: &Self) -> Option<Self> {
        if Zero::is_zero(self) {
            return Some(Zero::zero());
        }
        self.checked_div(other)
    }
    fn from_q(q: &Q) -> Option<Self> {
        // Keep headroom so that products of two entries rarely overflow.
        let n = q.numer().to_i128()?;
        let d = q.denom().to_i128()?;
        const LIMIT: i128 = 1 << 100;
        if n.unsigned_abs() > LIMIT as u128 || d > LIMIT {
            return None;
        }
        Some(Ratio::new_raw(n, d))
    }
    fn to_q(&self) -> Q {
        Q::new_raw(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }
}

impl Scalar for Q {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_one(&self) -> bool {
        One::is_one(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn sub(&self, other: &Self) -> Option<Self> {
        Some(self - other)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
    fn div(&self, other: &Self) -> Option<Self> {
        Some(self / other)
    }
    fn from_q(q: &Q) -> Option<Self> {
        Some(q.clone())
    }
    fn to_q(&self) -> Q {
        self.clone()
    }
}
