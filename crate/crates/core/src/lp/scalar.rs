use std::cmp::Ordering;
use std::fmt::Debug;

use num_traits::{Signed, Zero};

use crate::rational::{self, Rational};

/// Tolerance used by the floating-point solver.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Arithmetic the simplex tableau needs. Exact for [`Rational`]; for `f64`
/// every sign test uses [`FLOAT_TOLERANCE`].
pub trait Scalar: Clone + Debug + Send + Sync {
    fn nil() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_rational(&self) -> Rational;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn near_zero(&self) -> bool;
    fn above_zero(&self) -> bool;
    fn below_zero(&self) -> bool;
    fn compare(&self, other: &Self) -> Ordering;
}

impl Scalar for Rational {
    fn nil() -> Self {
        <Rational as Zero>::zero()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn near_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn above_zero(&self) -> bool {
        Signed::is_positive(self)
    }
    fn below_zero(&self) -> bool {
        Signed::is_negative(self)
    }
    fn compare(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
}

impl Scalar for f64 {
    fn nil() -> Self {
        0.0
    }
    fn from_rational(r: &Rational) -> Self {
        rational::to_f64(r)
    }
    fn to_rational(&self) -> Rational {
        rational::from_f64(*self).unwrap_or_else(<Rational as Zero>::zero)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn near_zero(&self) -> bool {
        self.abs() <= FLOAT_TOLERANCE
    }
    fn above_zero(&self) -> bool {
        *self > FLOAT_TOLERANCE
    }
    fn below_zero(&self) -> bool {
        *self < -FLOAT_TOLERANCE
    }
    fn compare(&self, other: &Self) -> Ordering {
        let d = self - other;
        if d.above_zero() {
            Ordering::Greater
        } else if d.below_zero() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
}
