//! Scaled Hurwitz zeta `q^s ζ(s, q) = Σ_{j≥0} (q / (q + j))^s` for `s > 1`,
//! `q > 0`, by Euler–Maclaurin summation.
//!
//! The scaling keeps the leading term at 1, so power sums of the zero tail
//! `Σ_{n>N} (n + shift)^{-s}` stay in range for every `s` we need.

use crate::scalar::{from_usize, lit, Real};

/// `B_{2i} / (2i)!` for `i = 1..=10`.
const BERNOULLI_OVER_FACTORIAL: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
    43_867.0 / 5_109_094_217_170_944_000.0,
    -174_611.0 / 802_857_662_698_291_200_000.0,
];

/// `Σ_{j≥0} (q / (q + j))^s`.
pub fn scaled_hurwitz<T: Real>(s: T, q: T) -> T {
    assert!(
        s > T::one() && q > T::zero(),
        "scaled_hurwitz(s={s:?}, q={q:?})"
    );
    let tiny = T::epsilon() * lit(1e-4);
    let ten: T = lit(10.0);
    let start = if s > ten { s } else { ten };

    let mut sum = T::zero();
    let mut j = 0usize;
    let mut x = q;
    loop {
        let term = (q / x).powf(s);
        if term < tiny * sum {
            // Geometric-or-faster decay: the rest is below rounding.
            return sum;
        }
        if x >= start {
            break;
        }
        sum = sum + term;
        j += 1;
        x = q + from_usize::<T>(j);
    }

    // Tail Σ_{k≥0} (q/(x+k))^s = (q/x)^s [x/(s-1) + 1/2 + Σ_i B_{2i}/(2i)! (s)_{2i-1} x^{1-2i}].
    let lead = (q / x).powf(s);
    let mut bracket = x / (s - T::one()) + lit(0.5);
    let mut poch = s; // (s)_{2i-1}
    let mut xpow = x.recip(); // x^{1-2i}
    let inv_x2 = (x * x).recip();
    for (i, &b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let term = lit::<T>(b) * poch * xpow;
        bracket = bracket + term;
        if term.abs() < T::epsilon() * bracket.abs() {
            break;
        }
        let k = from_usize::<T>(2 * i + 1);
        poch = poch * (s + k) * (s + k + T::one());
        xpow = xpow * inv_x2;
    }
    sum + lead * bracket
}
