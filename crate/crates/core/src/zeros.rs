//! Zero sequences: an explicit finite head followed by a power-law tail.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::hurwitz::scaled_hurwitz;
use crate::scalar::{from_usize, lit, Real};

/// `a_n = C (n + shift)^p e^{i arg}` for indices past the explicit head.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLaw<T> {
    pub coefficient: T,
    pub exponent: T,
    pub shift: T,
    pub arg: T,
}

impl<T: Real> PowerLaw<T> {
    pub fn modulus(&self, n: usize) -> T {
        self.coefficient * (from_usize::<T>(n) + self.shift).powf(self.exponent)
    }

    pub fn at(&self, n: usize) -> Complex<T> {
        Complex::from_polar(self.modulus(n), self.arg)
    }

    /// Index offset `q0 = N + 1 + shift` of the tail that starts after `N`.
    pub(crate) fn offset(&self, n: usize) -> T {
        from_usize::<T>(n + 1) + self.shift
    }

    /// `Σ_{n>N} 1/|a_n|` over the power-law part.
    pub(crate) fn reciprocal_tail(&self, n: usize) -> T {
        let q0 = self.offset(n);
        scaled_hurwitz(self.exponent, q0) / (self.coefficient * q0.powf(self.exponent))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSequence<T> {
    head: Vec<Complex<T>>,
    tail: PowerLaw<T>,
}

impl<T: Real> ZeroSequence<T> {
    /// `head` lists `a_1..a_L`; the tail supplies `a_n` for `n > L`.
    pub fn new(head: Vec<Complex<T>>, tail: PowerLaw<T>) -> Result<Self> {
        if !(tail.coefficient > T::zero() && tail.coefficient.is_finite()) {
            return Err(Error::InvalidSequence(
                "tail coefficient must be positive".into(),
            ));
        }
        if !(tail.exponent > T::one() && tail.exponent.is_finite()) {
            return Err(Error::InvalidSequence(
                "tail exponent must exceed 1 (genus zero)".into(),
            ));
        }
        if !(tail.shift > -T::one() && tail.shift.is_finite()) || !tail.arg.is_finite() {
            return Err(Error::InvalidSequence("tail shift must exceed -1".into()));
        }
        let mut prev = T::zero();
        for (i, a) in head.iter().enumerate() {
            let m = a.norm();
            if !m.is_finite() || m <= T::zero() {
                return Err(Error::InvalidSequence(format!(
                    "a_{} is zero or not finite",
                    i + 1
                )));
            }
            if m < prev {
                return Err(Error::InvalidSequence(format!(
                    "|a_{}| < |a_{}|: moduli must be nondecreasing",
                    i + 1,
                    i
                )));
            }
            prev = m;
        }
        if tail.modulus(head.len() + 1) < prev {
            return Err(Error::InvalidSequence(
                "power-law tail starts below the last listed zero".into(),
            ));
        }
        Ok(Self { head, tail })
    }

    pub fn head(&self) -> &[Complex<T>] {
        &self.head
    }

    pub fn tail(&self) -> &PowerLaw<T> {
        &self.tail
    }

    /// Moduli are nondecreasing; construction rejects anything else.
    pub fn is_monotone(&self) -> bool {
        true
    }

    /// `a_n`, indexed from 1.
    pub fn get(&self, n: usize) -> Complex<T> {
        assert!(n >= 1, "zeros are indexed from 1");
        if n <= self.head.len() {
            self.head[n - 1]
        } else {
            self.tail.at(n)
        }
    }

    pub fn modulus(&self, n: usize) -> T {
        if n <= self.head.len() {
            self.head[n - 1].norm()
        } else {
            self.tail.modulus(n)
        }
    }

    /// Principal argument of `a_n`.
    pub fn arg(&self, n: usize) -> T {
        if n <= self.head.len() {
            self.head[n - 1].arg()
        } else {
            Complex::from_polar(T::one(), self.tail.arg).arg()
        }
    }

    /// `Σ_{n>N} R/|a_n|`, evaluated exactly through the Hurwitz sum and
    /// inflated by a rounding allowance.
    pub fn tail_bound(&self, n: usize, radius: T) -> T {
        let l = self.head.len();
        let mut s = T::zero();
        for k in (n + 1)..=l {
            s = s + self.head[k - 1].norm().recip();
        }
        s = s + self.tail.reciprocal_tail(n.max(l));
        radius * s * (T::one() + lit(1e-10))
    }

    /// Smallest `N ≥ L` with `|a_{N+1}| ≥ 2R`: past it every factor has
    /// `|z/a_n| ≤ 1/2` for `|z| ≤ R`.
    pub fn split_index(&self, radius: T) -> usize {
        let l = self.head.len();
        let t = &self.tail;
        let target =
            (lit::<T>(2.0) * radius / t.coefficient).powf(t.exponent.recip()) - t.shift - T::one();
        let mut n = if target > from_usize(l) {
            target.ceil().to_usize().unwrap_or(usize::MAX / 2)
        } else {
            l
        };
        // Guard against rounding in the closed-form inversion.
        while n > l && self.modulus(n) >= lit::<T>(2.0) * radius {
            n -= 1;
        }
        while self.modulus(n + 1) < lit::<T>(2.0) * radius {
            n += 1;
        }
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cosh_zeros() -> ZeroSequence<f64> {
        let pi2 = std::f64::consts::PI.powi(2);
        ZeroSequence::new(
            vec![],
            PowerLaw {
                coefficient: pi2,
                exponent: 2.0,
                shift: -0.5,
                arg: 0.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn tail_bound_matches_partial_sums() {
        let z = cosh_zeros();
        let direct: f64 = (11..2_000_000).map(|n| 1.0 / z.modulus(n)).sum();
        // Σ_{n≥M} (n-1/2)^{-2} ≈ 1/(M-1) to well below the tolerance.
        let approx = direct + 1.0 / (std::f64::consts::PI.powi(2) * 1_999_999.0);
        let tb = z.tail_bound(10, 1.0);
        assert!((tb - approx).abs() < 1e-9 * approx, "{tb} vs {approx}");
        assert!(z.tail_bound(100, 1.0) < tb);
    }

    #[test]
    fn split_index_is_minimal() {
        let z = cosh_zeros();
        for &r in &[0.1, 1.0, 37.0, 1e4, 1e8] {
            let n = z.split_index(r);
            assert!(z.modulus(n + 1) >= 2.0 * r);
            if n > 0 {
                assert!(z.modulus(n) < 2.0 * r);
            }
        }
    }

    #[test]
    fn rejects_decreasing_head() {
        let tail = PowerLaw {
            coefficient: 1.0,
            exponent: 2.0,
            shift: 0.0,
            arg: 0.0,
        };
        let head = vec![Complex::new(2.0, 0.0), Complex::new(1.0, 0.0)];
        assert!(matches!(
            ZeroSequence::new(head, tail),
            Err(Error::InvalidSequence(_))
        ));
        let head = vec![Complex::new(100.0, 0.0)];
        assert!(ZeroSequence::new(head, tail).is_err());
    }
}
