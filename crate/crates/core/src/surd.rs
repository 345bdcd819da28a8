//! Exact arithmetic in `Q(√2)`.
//!
//! The closed-form game values are sums of rationals times half-integer
//! powers of two, so every one of them is exactly `a + b√2` with `a, b`
//! rational. Keeping them in this form lets symmetry and inequality checks
//! run without rounding.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// The number `a + b√2`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QuadSurd {
    a: BigRational,
    b: BigRational,
}

impl QuadSurd {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        Self { a, b }
    }

    pub fn rational(a: BigRational) -> Self {
        Self {
            a,
            b: BigRational::zero(),
        }
    }

    pub fn from_integer(a: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(a)))
    }

    pub fn sqrt2() -> Self {
        Self {
            a: BigRational::zero(),
            b: BigRational::one(),
        }
    }

    /// `2^(e/2)` for any integer `e`.
    pub fn pow2_half(e: i64) -> Self {
        let half = e.div_euclid(2);
        let p = pow2_rational(half);
        if e.rem_euclid(2) == 0 {
            Self::rational(p)
        } else {
            Self {
                a: BigRational::zero(),
                b: p,
            }
        }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn sqrt2_part(&self) -> &BigRational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Sign of `a + b√2`, decided exactly by comparing `a^2` with `2 b^2`
    /// when the two parts disagree in sign.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        match (sa, sb) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (x, y) if x == y => x,
            (sa, _) => {
                let a2 = &self.a * &self.a;
                let b2 = &self.b * &self.b * BigRational::from_integer(2.into());
                match a2.cmp(&b2) {
                    Ordering::Greater => sa,
                    Ordering::Less => sa.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self {
            a: &self.a * r,
            b: &self.b * r,
        }
    }

    /// Multiplicative inverse via the conjugate, `(a - b√2) / (a^2 - 2b^2)`.
    /// Returns `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        let norm = &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(2.into());
        if norm.is_zero() {
            return None;
        }
        Some(Self {
            a: &self.a / &norm,
            b: -&self.b / &norm,
        })
    }

    /// Nearest-ish double. Each part is converted separately, so the result
    /// carries at most a few ulps of error.
    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.a) + ratio_to_f64(&self.b) * std::f64::consts::SQRT_2
    }
}

/// `2^e` as a rational, for any integer `e`.
pub fn pow2_rational(e: i64) -> BigRational {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

pub fn biguint_to_rational(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}

/// Converts a big rational to `f64`, handling numerators and denominators
/// far outside the `f64` range.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if let Some(x) = r.to_f64() {
        if x.is_finite() && x != 0.0 {
            return x;
        }
    }
    // Fall back to scaling by a power of two so the quotient fits.
    let num = r.numer().abs();
    let den = r.denom().clone();
    let shift = num.bits() as i64 - den.bits() as i64;
    let scaled = if shift >= 0 {
        BigRational::new(num, den << (shift as u64))
    } else {
        BigRational::new(num << ((-shift) as u64), den)
    };
    let mantissa = scaled.to_f64().unwrap_or(f64::NAN);
    let value = mantissa * 2f64.powi(shift as i32);
    if r.is_negative() {
        -value
    } else {
        value
    }
}

impl Add for &QuadSurd {
    type Output = QuadSurd;

    fn add(self, rhs: &QuadSurd) -> QuadSurd {
        QuadSurd {
            a: &self.a + &rhs.a,
            b: &self.b + &rhs.b,
        }
    }
}

impl Add for QuadSurd {
    type Output = QuadSurd;

    fn add(self, rhs: QuadSurd) -> QuadSurd {
        &self + &rhs
    }
}

impl Sub for &QuadSurd {
    type Output = QuadSurd;

    fn sub(self, rhs: &QuadSurd) -> QuadSurd {
        QuadSurd {
            a: &self.a - &rhs.a,
            b: &self.b - &rhs.b,
        }
    }
}

impl Sub for QuadSurd {
    type Output = QuadSurd;

    fn sub(self, rhs: QuadSurd) -> QuadSurd {
        &self - &rhs
    }
}

impl Mul for &QuadSurd {
    type Output = QuadSurd;

    fn mul(self, rhs: &QuadSurd) -> QuadSurd {
        let two = BigRational::from_integer(2.into());
        QuadSurd {
            a: &self.a * &rhs.a + &self.b * &rhs.b * two,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
        }
    }
}

impl Mul for QuadSurd {
    type Output = QuadSurd;

    fn mul(self, rhs: QuadSurd) -> QuadSurd {
        &self * &rhs
    }
}

impl Neg for QuadSurd {
    type Output = QuadSurd;

    fn neg(self) -> QuadSurd {
        QuadSurd {
            a: -self.a,
            b: -self.b,
        }
    }
}

impl Zero for QuadSurd {
    fn zero() -> Self {
        Self::rational(BigRational::zero())
    }

    fn is_zero(&self) -> bool {
        QuadSurd::is_zero(self)
    }
}

impl PartialOrd for QuadSurd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadSurd {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}·√2", self.a, self.b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn half_powers() {
        assert_eq!(QuadSurd::pow2_half(0), QuadSurd::from_integer(1));
        assert_eq!(QuadSurd::pow2_half(1), QuadSurd::sqrt2());
        assert_eq!(QuadSurd::pow2_half(-1), QuadSurd::new(q(0, 1), q(1, 2)));
        assert_eq!(QuadSurd::pow2_half(-4), QuadSurd::rational(q(1, 4)));
        assert!((QuadSurd::pow2_half(-5).to_f64() - 2f64.powf(-2.5)).abs() < 1e-15);
    }

    #[test]
    fn sign_and_order() {
        // 3 - 2√2 > 0, 1 - √2 < 0, 0 == 0.
        assert_eq!(QuadSurd::new(q(3, 1), q(-2, 1)).signum(), Ordering::Greater);
        assert_eq!(QuadSurd::new(q(1, 1), q(-1, 1)).signum(), Ordering::Less);
        assert_eq!(QuadSurd::new(q(-7, 5), q(1, 1)).signum(), Ordering::Greater);
        assert_eq!(QuadSurd::zero().signum(), Ordering::Equal);
        assert!(QuadSurd::sqrt2() > QuadSurd::rational(q(141, 100)));
        assert!(QuadSurd::sqrt2() < QuadSurd::rational(q(142, 100)));
    }

    #[test]
    fn huge_ratio_to_f64() {
        let big = BigRational::new(BigInt::one() << 3000u32, (BigInt::one() << 3001u32) + 1);
        assert!((ratio_to_f64(&big) - 0.5).abs() < 1e-15);
        let tiny = BigRational::new(BigInt::from(3), BigInt::one() << 1100u32);
        assert_eq!(ratio_to_f64(&tiny), 0.0);
    }

    proptest! {
        #[test]
        fn recip_is_inverse(a in -50i64..50, b in -50i64..50, c in 1i64..20) {
            let x = QuadSurd::new(q(a, c), q(b, c));
            prop_assume!(!x.is_zero());
            let inv = x.recip().unwrap();
            prop_assert_eq!(&x * &inv, QuadSurd::from_integer(1));
        }

        #[test]
        fn sign_matches_float(a in -1000i64..1000, b in -1000i64..1000) {
            let x = QuadSurd::new(q(a, 7), q(b, 5));
            let f = x.to_f64();
            prop_assume!(f.abs() > 1e-9);
            prop_assert_eq!(x.signum(), f.partial_cmp(&0.0).unwrap());
        }
    }
}
