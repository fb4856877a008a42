//! Positive magnitudes held by their logarithm.

use std::cmp::Ordering;
use std::fmt;

use crate::ext::Ext;
use crate::scalar::Real;

/// A positive real `x` stored as `ℓ = log x`, with `ℓ` itself an [`Ext`] so
/// towers such as `exp(exp(exp(r)))` stay finite and ordered.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogMag<T> {
    log: Ext<T>,
}

// Arithmetic stays as named methods: `sub` is partial and the rest read
// better next to it than as operators.
#[allow(clippy::should_implement_trait)]
impl<T: Real> LogMag<T> {
    pub fn one() -> Self {
        Self { log: Ext::zero() }
    }

    /// From a positive native value.
    pub fn from_value(x: T) -> Self {
        assert!(x > T::zero() && x.is_finite(), "LogMag::from_value({x:?})");
        Self::from_log(x.ln())
    }

    pub fn from_log(l: T) -> Self {
        Self {
            log: Ext::from_real(l),
        }
    }

    pub fn from_log_ext(l: Ext<T>) -> Self {
        Self { log: l }
    }

    /// From `log log x`; `None` when `log x` leaves the [`Ext`] range.
    pub fn from_log_log(ll: T) -> Option<Self> {
        Ext::from_real(ll).exp().map(|log| Self { log })
    }

    pub fn log(&self) -> Ext<T> {
        self.log
    }

    /// `log x` as a native value (`±inf` if it does not fit).
    pub fn log_real(&self) -> T {
        self.log.to_real()
    }

    /// The magnitude itself, when it fits the native range.
    pub fn value(&self) -> Option<T> {
        let l = self.log.to_real();
        if !l.is_finite() {
            return None;
        }
        let v = l.exp();
        (v.is_finite() && v > T::zero()).then_some(v)
    }

    /// `log log x`; defined for `x > 1`.
    pub fn log_log(&self) -> Option<T> {
        self.log.is_positive().then(|| self.log.ln())
    }

    pub fn mul(self, other: Self) -> Self {
        Self {
            log: self.log + other.log,
        }
    }

    pub fn div(self, other: Self) -> Self {
        Self {
            log: self.log - other.log,
        }
    }

    /// Multiplication by a positive native factor.
    pub fn scale(self, k: T) -> Self {
        self.mul(Self::from_value(k))
    }

    pub fn powf(self, p: T) -> Self {
        Self { log: self.log * p }
    }

    /// `x + y` for magnitudes.
    pub fn add(self, other: Self) -> Self {
        let (hi, lo) = if self >= other {
            (self, other)
        } else {
            (other, self)
        };
        let gap = (lo.log - hi.log).to_real();
        if !gap.is_finite() {
            return hi;
        }
        Self {
            log: hi.log + gap.exp().ln_1p(),
        }
    }

    /// `x - y` for `x > y`; `None` otherwise.
    pub fn sub(self, other: Self) -> Option<Self> {
        if self <= other {
            return None;
        }
        let gap = (other.log - self.log).to_real();
        if !gap.is_finite() {
            return Some(self);
        }
        Some(Self {
            log: self.log + (-gap.exp_m1()).ln(),
        })
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl<T: Real> PartialOrd for LogMag<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.log.total_cmp(&other.log))
    }
}

impl<T: Real> fmt::Display for LogMag<T> {
    /// Prints the magnitude in decimal scientific form, e.g. `2.107e3`, or
    /// `exp(…)` notation when even the decimal exponent is astronomical.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(6);
        if let Some(v) = self.value() {
            return write!(f, "{v:.digits$e}");
        }
        let l = self.log.to_real();
        if l.is_finite() {
            let log10 = l.to_f64().unwrap_or(f64::NAN) / std::f64::consts::LN_10;
            if log10.abs() < 1e15 {
                let e = log10.floor();
                let m = 10f64.powf(log10 - e);
                return write!(f, "{m:.digits$}e{}", e as i64);
            }
        }
        write!(f, "exp({})", self.log.to_scientific(digits + 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_matches_values() {
        let xs = [1e-30f64, 0.5, 1.0, 2.0, 1e300];
        for a in xs {
            for b in xs {
                let la = LogMag::from_value(a);
                let lb = LogMag::from_value(b);
                assert_eq!(la.partial_cmp(&lb), a.partial_cmp(&b));
            }
        }
    }

    #[test]
    fn sums_and_differences() {
        let a = LogMag::from_value(3.0f64);
        let b = LogMag::from_value(5.0f64);
        assert!((a.add(b).value().unwrap() - 8.0).abs() < 1e-12);
        assert!((b.sub(a).unwrap().value().unwrap() - 2.0).abs() < 1e-12);
        assert!(a.sub(b).is_none());
        let huge = LogMag::<f64>::from_log(1e6);
        assert_eq!(huge.add(a), huge);
    }

    #[test]
    fn tower_stays_ordered() {
        let t1 = LogMag::<f64>::from_log(1e300);
        let t2 = LogMag::<f64>::from_log_log(1e3).unwrap();
        assert!(t2 > t1);
        assert!(t2.value().is_none());
        assert!((t2.log_log().unwrap() - 1e3).abs() < 1e-9);
        assert_eq!(format!("{:.3}", LogMag::from_value(2107.0f64)), "2.107e3");
    }
}
