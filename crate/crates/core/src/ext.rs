//! Extended-exponent reals: a native mantissa paired with an `i64` binary
//! exponent.
//!
//! The value is `mantissa * 2^exponent` with `0.5 <= |mantissa| < 1`, or
//! exactly zero. Arithmetic is carried out on the mantissa in `T` and the
//! exponents are combined as integers, so magnitudes far outside the native
//! range stay ordered and usable.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::{from_i64, lit, Real};

/// Mantissa digits beyond which the smaller addend no longer matters.
const ALIGN_LIMIT: i64 = 96;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ext<T> {
    mantissa: T,
    exponent: i64,
}

/// `m * 2^e`, split in two steps so subnormal results keep their bits.
fn scale2<T: Real>(m: T, e: i64) -> T {
    let half = e / 2;
    let a: T = lit(2f64.powi(half as i32));
    let b: T = lit(2f64.powi((e - half) as i32));
    m * a * b
}

impl<T: Real> Ext<T> {
    pub fn zero() -> Self {
        Self {
            mantissa: T::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Self::from_real(T::one())
    }

    /// Exact conversion of a finite native value.
    ///
    /// Panics on NaN or infinity; callers filter those before conversion.
    pub fn from_real(x: T) -> Self {
        assert!(x.is_finite(), "Ext::from_real on non-finite value {x:?}");
        if x == T::zero() {
            return Self::zero();
        }
        let (mant, exp, sign) = x.integer_decode();
        let bits = 64 - mant.leading_zeros() as i64;
        let scale: T = lit(2f64.powi(-(bits as i32)));
        let m = T::from_u64(mant).expect("mantissa fits") * scale;
        let m = if sign < 0 { -m } else { m };
        Self {
            mantissa: m,
            exponent: exp as i64 + bits,
        }
    }

    /// Builds from an unnormalized pair.
    pub fn from_parts(mantissa: T, exponent: i64) -> Self {
        let inner = Self::from_real(mantissa);
        if inner.is_zero() {
            return inner;
        }
        Self {
            mantissa: inner.mantissa,
            exponent: inner.exponent.saturating_add(exponent),
        }
    }

    pub fn mantissa(&self) -> T {
        self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == T::zero()
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa > T::zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa < T::zero()
    }

    pub fn abs(self) -> Self {
        Self {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    /// Nearest native value; overflows to `±inf` and underflows to zero.
    pub fn to_real(self) -> T {
        if self.is_zero() {
            return T::zero();
        }
        if self.exponent > 16_400 {
            return self.mantissa.signum() * T::infinity();
        }
        if self.exponent < -16_500 {
            return T::zero();
        }
        scale2(self.mantissa, self.exponent)
    }

    /// `true` when the value converts to a finite, nonzero native number
    /// (or is exactly zero).
    pub fn fits_native(self) -> bool {
        let r = self.to_real();
        r.is_finite() && (r != T::zero() || self.is_zero())
    }

    /// Natural logarithm of a positive value; always representable in `T`.
    pub fn ln(self) -> T {
        assert!(self.is_positive(), "Ext::ln of non-positive value");
        self.mantissa.ln() + from_i64::<T>(self.exponent) * T::LN_2()
    }

    /// `exp(self)`, or `None` when the binary exponent leaves `i64`.
    pub fn exp(self) -> Option<Self> {
        let x = self.to_real();
        if !x.is_finite() {
            return if self.is_negative() {
                Some(Self::zero())
            } else {
                None
            };
        }
        let direct = x.exp();
        if direct.is_normal() {
            return Some(Self::from_real(direct));
        }
        let k = x / T::LN_2();
        let limit: T = lit(9.0e18);
        if k.abs() >= limit {
            return if k < T::zero() {
                Some(Self::zero())
            } else {
                None
            };
        }
        let whole = k.floor();
        let frac = k - whole;
        let e = whole.to_i64()?;
        Some(Self::from_parts(frac.exp2(), e))
    }

    pub fn powi(self, n: i32) -> Self {
        let mut out = Self::one();
        for _ in 0..n.unsigned_abs() {
            out = out * self;
        }
        if n < 0 {
            Self::one() / out
        } else {
            out
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Total order; NaN cannot be constructed.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        let sa = sign_class(self.mantissa);
        let sb = sign_class(other.mantissa);
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let mag = self.exponent.cmp(&other.exponent).then_with(|| {
            self.mantissa
                .abs()
                .partial_cmp(&other.mantissa.abs())
                .unwrap_or(Ordering::Equal)
        });
        if sa > 0 {
            mag
        } else {
            mag.reverse()
        }
    }

    /// Decimal scientific notation with `digits` significant digits, valid
    /// far outside the native exponent range.
    pub fn to_scientific(self, digits: usize) -> String {
        let native = self.to_real();
        let decimals = digits.saturating_sub(1);
        if native.is_finite() && (native != T::zero() || self.is_zero()) {
            let v = native.to_f64().unwrap_or(f64::NAN);
            if v.is_normal() || v == 0.0 {
                return format!("{v:.decimals$e}");
            }
        }
        let log10 = self.mantissa.abs().to_f64().unwrap_or(0.5).log10()
            + self.exponent as f64 * std::f64::consts::LOG10_2;
        let dexp = log10.floor();
        let mant = 10f64.powf(log10 - dexp);
        let sign = if self.is_negative() { "-" } else { "" };
        format!("{sign}{mant:.decimals$}e{}", dexp as i64)
    }
}

fn sign_class<T: Real>(x: T) -> i8 {
    if x > T::zero() {
        1
    } else if x < T::zero() {
        -1
    } else {
        0
    }
}

impl<T: Real> PartialOrd for Ext<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.total_cmp(other))
    }
}

impl<T: Real> Neg for Ext<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl<T: Real> Add for Ext<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.exponent >= rhs.exponent {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let gap =
            (big.exponent as i128 - small.exponent as i128).min(ALIGN_LIMIT as i128 + 1) as i64;
        if gap > ALIGN_LIMIT {
            return big;
        }
        let m = big.mantissa + scale2(small.mantissa, -gap);
        Self::from_parts(m, big.exponent)
    }
}

impl<T: Real> Sub for Ext<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Real> Mul for Ext<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        Self::from_parts(
            self.mantissa * rhs.mantissa,
            self.exponent.saturating_add(rhs.exponent),
        )
    }
}

impl<T: Real> Div for Ext<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.is_zero(), "Ext division by zero");
        if self.is_zero() {
            return Self::zero();
        }
        Self::from_parts(
            self.mantissa / rhs.mantissa,
            self.exponent.saturating_sub(rhs.exponent),
        )
    }
}

impl<T: Real> Add<T> for Ext<T> {
    type Output = Self;
    fn add(self, rhs: T) -> Self {
        self + Self::from_real(rhs)
    }
}

impl<T: Real> Sub<T> for Ext<T> {
    type Output = Self;
    fn sub(self, rhs: T) -> Self {
        self - Self::from_real(rhs)
    }
}

impl<T: Real> Mul<T> for Ext<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        self * Self::from_real(rhs)
    }
}

impl<T: Real> Div<T> for Ext<T> {
    type Output = Self;
    fn div(self, rhs: T) -> Self {
        self / Self::from_real(rhs)
    }
}

impl<T: Real> fmt::Display for Ext<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_scientific(f.precision().map_or(17, |p| p + 1)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_native_values() {
        for &x in &[
            1.0f64,
            -3.5,
            1e-300,
            7.25e300,
            0.1,
            -0.0,
            2.0f64.powi(-1074),
        ] {
            let e = Ext::from_real(x);
            assert_eq!(e.to_real(), x, "{x}");
        }
        let e = Ext::from_real(0.375f32);
        assert_eq!(e.mantissa(), 0.75);
        assert_eq!(e.exponent(), -1);
    }

    #[test]
    fn arithmetic_beyond_native_range() {
        let big = Ext::from_parts(0.5f64, 5000);
        let bigger = big * Ext::from_real(4.0);
        assert!(bigger > big);
        assert_eq!(bigger.exponent(), 5002);
        assert!(big.to_real().is_infinite());
        let ratio = bigger / big;
        assert_eq!(ratio.to_real(), 4.0);
        let ln = big.ln();
        assert!((ln - (0.5f64.ln() + 5000.0 * std::f64::consts::LN_2)).abs() < 1e-9);
        assert!(big + Ext::from_real(1.0) == big);
    }

    #[test]
    fn exp_of_large_argument_keeps_exponent() {
        let x = Ext::from_real(1.0e6f64);
        let e = x.exp().unwrap();
        assert!((e.ln() - 1.0e6).abs() < 1e-6);
        assert!(Ext::from_real(1.0e19f64).exp().is_none());
        assert!(Ext::from_real(-1.0e19f64).exp().unwrap().is_zero());
    }

    #[test]
    fn ordering_handles_signs() {
        let a = Ext::from_real(-2.0f64);
        let b = Ext::from_real(-1.0f64);
        let z = Ext::<f64>::zero();
        let c = Ext::from_parts(0.5f64, 4000);
        assert!(a < b && b < z && z < c);
        assert!(-c < a);
    }

    #[test]
    fn scientific_formatting() {
        assert_eq!(Ext::from_real(1234.5f64).to_scientific(5), "1.2345e3");
        let huge = Ext::from_parts(0.5f64, 10_000);
        let s = huge.to_scientific(4);
        assert!(s.ends_with("e3009"), "{s}");
    }
}
