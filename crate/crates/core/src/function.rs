//! Genus-zero entire functions `f(z) = c z^q Π (1 + z/a_n)`.
//!
//! Factors with `|a_n| < 2|z|` are summed one by one. The remaining tail is
//! expanded as `Σ_k (-1)^{k+1} z^k/k Σ_n a_n^{-k}`; for a power-law tail the
//! inner sums are scaled Hurwitz zeta values, so the whole infinite product is
//! evaluated with an explicit remainder bound instead of a long truncation.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::hurwitz::scaled_hurwitz;
use crate::scalar::{from_usize, lit, Real};
use crate::zeros::{PowerLaw, ZeroSequence};

/// `|1 + z/a_n|` below this is treated as hitting a zero.
pub const ZERO_TOLERANCE: f64 = 1e-12;

/// Number of power sums kept per split index; with `|u| ≤ 1/2` the series
/// remainder after this many terms is below `2^-64`.
const SERIES_TERMS: usize = 64;

/// Split indices cached before the table is reset.
const CACHE_LIMIT: usize = 8192;

type ZetaTable<T> = Arc<Vec<T>>;

#[derive(Clone, Debug)]
pub struct GenusZeroFunction<T: Real> {
    c: Complex<T>,
    q: u32,
    zeros: ZeroSequence<T>,
    max_terms: usize,
    eps: T,
    inverses: Arc<OnceLock<Vec<Complex<T>>>>,
    zeta: Arc<RwLock<HashMap<usize, ZetaTable<T>>>>,
}

impl<T: Real> GenusZeroFunction<T> {
    pub fn new(c: Complex<T>, q: u32, zeros: ZeroSequence<T>) -> Result<Self> {
        if c.norm() == T::zero() || !c.norm().is_finite() {
            return Err(Error::InvalidArgument(
                "c must be nonzero and finite".into(),
            ));
        }
        Ok(Self {
            c,
            q,
            zeros,
            max_terms: 100_000,
            eps: T::tolerance_floor() * lit(8.0),
            inverses: Arc::new(OnceLock::new()),
            zeta: Arc::new(RwLock::new(HashMap::new())),
        })
    }

    /// Caps the number of explicitly summed factors (default `10^5`).
    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms.max(self.zeros.head().len());
        self.inverses = Arc::new(OnceLock::new());
        self
    }

    /// Default accuracy used by [`eval`](Self::eval) and friends.
    pub fn with_eps(mut self, eps: T) -> Self {
        self.eps = eps;
        self
    }

    pub fn c(&self) -> Complex<T> {
        self.c
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn zeros(&self) -> &ZeroSequence<T> {
        &self.zeros
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    /// `f` maps the positive axis into itself: `c > 0` and every zero lies on
    /// the positive axis.
    pub fn preserves_positive_axis(&self) -> bool {
        self.c.im == T::zero()
            && self.c.re > T::zero()
            && self
                .zeros
                .head()
                .iter()
                .all(|a| a.im == T::zero() && a.re > T::zero())
            && self.zeros.tail().arg == T::zero()
    }

    /// Largest `|z|` the accelerated evaluation certifies within `max_terms`.
    pub fn evaluation_radius(&self) -> T {
        self.zeros.modulus(self.max_terms + 1) / lit(2.0)
    }

    fn inverses(&self) -> &[Complex<T>] {
        self.inverses.get_or_init(|| {
            (1..=self.max_terms)
                .map(|n| self.zeros.get(n).inv())
                .collect()
        })
    }

    fn split(&self, radius: T) -> Result<usize> {
        if !radius.is_finite() {
            return Err(Error::TailBoundUnavailable);
        }
        let n = self.zeros.split_index(radius);
        if n > self.max_terms {
            return Err(Error::TailBoundUnavailable);
        }
        Ok(n)
    }

    /// `ζ̃(k p, q0)` for `k = 1..=SERIES_TERMS + 1` at split index `n`.
    fn zeta_table(&self, n: usize) -> ZetaTable<T> {
        if let Some(t) = self.zeta.read().expect("zeta cache poisoned").get(&n) {
            return t.clone();
        }
        let tail = self.zeros.tail();
        let q0 = tail.offset(n);
        let table: Vec<T> = (1..=SERIES_TERMS + 1)
            .map(|k| scaled_hurwitz(tail.exponent * from_usize::<T>(k), q0))
            .collect();
        let table = Arc::new(table);
        let mut w = self.zeta.write().expect("zeta cache poisoned");
        if w.len() >= CACHE_LIMIT {
            w.clear();
        }
        w.insert(n, table.clone());
        table
    }

    /// `u = z e^{-i arg} / (C q0^p)` and its table for the tail after `n`.
    fn tail_variable(&self, z: Complex<T>, n: usize) -> (Complex<T>, Complex<T>, ZetaTable<T>) {
        let tail: &PowerLaw<T> = self.zeros.tail();
        let scale = tail.coefficient * tail.offset(n).powf(tail.exponent);
        let rot = Complex::from_polar(scale, tail.arg);
        (z / rot, rot, self.zeta_table(n))
    }

    fn prefix(&self, z: Complex<T>) -> Result<Complex<T>> {
        let mut acc = self.c.ln();
        if self.q > 0 {
            if z.norm() == T::zero() {
                return Err(Error::ZeroOfF { index: 0 });
            }
            acc = acc + z.ln() * from_usize::<T>(self.q as usize);
        }
        Ok(acc)
    }

    /// `log f(z)` with the branch given by summing principal logarithms of
    /// the factors; the tail contributes less than `eps`.
    pub fn log_f(&self, z: Complex<T>, eps: T) -> Result<Complex<T>> {
        let mut acc = self.prefix(z)?;
        let n = self.split(z.norm())?;
        let tol: T = lit(ZERO_TOLERANCE);
        for (k, inv) in self.inverses()[..n].iter().enumerate() {
            let w = Complex::new(T::one(), T::zero()) + z * inv;
            if w.norm() < tol {
                return Err(Error::ZeroOfF { index: k + 1 });
            }
            acc = acc + w.ln();
        }
        if z.norm() == T::zero() {
            return Ok(acc);
        }
        let (u, _, table) = self.tail_variable(z, n);
        let au = u.norm();
        let mut pow = u;
        let mut sign = T::one();
        for k in 1..=SERIES_TERMS {
            acc = acc + pow * (table[k - 1] * sign / from_usize::<T>(k));
            let next = from_usize::<T>(k + 1);
            let rem = pow.norm() * au * table[k] / (next * (T::one() - au));
            if rem < eps / lit(8.0) {
                return Ok(acc);
            }
            pow = pow * u;
            sign = -sign;
        }
        Err(Error::TailBoundUnavailable)
    }

    /// `log |f(z)|`, skipping the argument bookkeeping of [`log_f`](Self::log_f).
    pub fn log_abs_f(&self, z: Complex<T>, eps: T) -> Result<T> {
        let mut acc = self.c.norm().ln();
        if self.q > 0 {
            if z.norm() == T::zero() {
                return Err(Error::ZeroOfF { index: 0 });
            }
            acc = acc + z.norm().ln() * from_usize::<T>(self.q as usize);
        }
        let n = self.split(z.norm())?;
        let tol2: T = lit(ZERO_TOLERANCE * ZERO_TOLERANCE);
        let two: T = lit(2.0);
        let half: T = lit(0.5);
        let mut head = T::zero();
        for (k, inv) in self.inverses()[..n].iter().enumerate() {
            let x = z * inv;
            let d = two * x.re + x.norm_sqr();
            if T::one() + d < tol2 {
                return Err(Error::ZeroOfF { index: k + 1 });
            }
            head = head + d.ln_1p();
        }
        acc = acc + half * head;
        if z.norm() == T::zero() {
            return Ok(acc);
        }
        let (u, _, table) = self.tail_variable(z, n);
        let au = u.norm();
        let mut pow = u;
        let mut sign = T::one();
        for k in 1..=SERIES_TERMS {
            acc = acc + pow.re * table[k - 1] * sign / from_usize::<T>(k);
            let next = from_usize::<T>(k + 1);
            let rem = pow.norm() * au * table[k] / (next * (T::one() - au));
            if rem < eps / lit(8.0) {
                return Ok(acc);
            }
            pow = pow * u;
            sign = -sign;
        }
        Err(Error::TailBoundUnavailable)
    }

    /// `f'(z)/f(z) = q/z + Σ 1/(z + a_n)` with relative error at most `eps`.
    pub fn log_derivative(&self, z: Complex<T>, eps: T) -> Result<Complex<T>> {
        let mut acc = Complex::new(T::zero(), T::zero());
        if self.q > 0 {
            if z.norm() == T::zero() {
                return Err(Error::ZeroOfF { index: 0 });
            }
            acc = z.inv() * from_usize::<T>(self.q as usize);
        }
        let n = self.split(z.norm())?;
        let tol: T = lit(ZERO_TOLERANCE);
        let one = Complex::new(T::one(), T::zero());
        for (k, inv) in self.inverses()[..n].iter().enumerate() {
            let w = one + z * inv;
            if w.norm() < tol {
                return Err(Error::ZeroOfF { index: k + 1 });
            }
            acc = acc + inv / w;
        }
        let (u, rot, table) = self.tail_variable(z, n);
        let pref = rot.inv();
        let au = u.norm();
        let mut series = Complex::new(T::zero(), T::zero());
        let mut pow = one;
        let mut sign = T::one();
        for k in 0..SERIES_TERMS {
            series = series + pow * (table[k] * sign);
            let rem = pow.norm() * au * table[k + 1] / (T::one() - au) * pref.norm();
            let total = (acc + pref * series).norm();
            if rem <= eps / lit(8.0) * total || rem == T::zero() {
                return Ok(acc + pref * series);
            }
            pow = pow * u;
            sign = -sign;
        }
        Err(Error::TailBoundUnavailable)
    }

    /// [`log_f`](Self::log_f) at the function's default accuracy.
    pub fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        self.log_f(z, self.eps)
    }

    pub fn eval_abs(&self, z: Complex<T>) -> Result<T> {
        self.log_abs_f(z, self.eps)
    }

    pub fn eval_log_derivative(&self, z: Complex<T>) -> Result<Complex<T>> {
        self.log_derivative(z, self.eps)
    }

    /// Smallest `N` for which truncating the product after `N` factors is
    /// certified to `eps` without the tail expansion: `|a_{N+1}| ≥ 2|z|` and
    /// `2 |z| Σ_{n>N} 1/|a_n| < eps` (from `|log(1+w)| ≤ 2|w|`, `|w| ≤ 1/2`).
    pub fn truncation_index(&self, z: Complex<T>, eps: T) -> usize {
        let r = z.norm();
        let lo0 = self.zeros.split_index(r);
        let ok = |n: usize| lit::<T>(2.0) * self.zeros.tail_bound(n, r) < eps;
        if ok(lo0) {
            return lo0;
        }
        let mut hi = lo0.max(1);
        while !ok(hi) {
            hi = hi.saturating_mul(2);
            if hi >= usize::MAX / 4 {
                return hi;
            }
        }
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// `log c + q log z + Σ_{n≤N} Log(1 + z/a_n)`, summed directly from the
    /// zero sequence.
    pub fn partial_log_product(&self, z: Complex<T>, n: usize) -> Result<Complex<T>> {
        let mut acc = self.prefix(z)?;
        let one = Complex::new(T::one(), T::zero());
        for k in 1..=n {
            let w = one + z / self.zeros.get(k);
            if w.norm() < lit(ZERO_TOLERANCE) {
                return Err(Error::ZeroOfF { index: k });
            }
            acc = acc + w.ln();
        }
        Ok(acc)
    }
}

/// Parameters accepted by [`canonical`]. Unused fields are ignored by the
/// families that do not need them.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyParams<T> {
    pub c: Complex<T>,
    pub q: u32,
    pub coefficient: T,
    pub exponent: T,
    pub shift: T,
    pub arg: T,
    pub head: Vec<Complex<T>>,
}

impl<T: Real> Default for FamilyParams<T> {
    fn default() -> Self {
        Self {
            c: Complex::new(T::one(), T::zero()),
            q: 0,
            coefficient: T::one(),
            exponent: lit(2.0),
            shift: T::zero(),
            arg: T::zero(),
            head: Vec::new(),
        }
    }
}

pub const FAMILIES: [&str; 3] = ["cosh-sqrt", "positive-real-zeros", "custom"];

/// Built-in families:
///
/// * `cosh-sqrt`: `cosh √z`, zeros `π²(n - 1/2)²`; parameters ignored.
/// * `positive-real-zeros`: `c z^q Π(1 + z/α_n)` with positive listed `α_n`
///   followed by `coefficient (n + shift)^exponent`.
/// * `custom`: arbitrary complex head and a rotated power-law tail.
pub fn canonical<T: Real>(name: &str, params: &FamilyParams<T>) -> Result<GenusZeroFunction<T>> {
    match name {
        "cosh-sqrt" => {
            let tail = PowerLaw {
                coefficient: T::PI() * T::PI(),
                exponent: lit(2.0),
                shift: lit(-0.5),
                arg: T::zero(),
            };
            GenusZeroFunction::new(
                Complex::new(T::one(), T::zero()),
                0,
                ZeroSequence::new(Vec::new(), tail)?,
            )
        }
        "positive-real-zeros" => {
            if params
                .head
                .iter()
                .any(|a| a.im != T::zero() || a.re <= T::zero())
            {
                return Err(Error::InvalidSequence(
                    "positive-real-zeros needs positive real zeros".into(),
                ));
            }
            let tail = PowerLaw {
                coefficient: params.coefficient,
                exponent: params.exponent,
                shift: params.shift,
                arg: T::zero(),
            };
            GenusZeroFunction::new(
                params.c,
                params.q,
                ZeroSequence::new(params.head.clone(), tail)?,
            )
        }
        "custom" => {
            let tail = PowerLaw {
                coefficient: params.coefficient,
                exponent: params.exponent,
                shift: params.shift,
                arg: params.arg,
            };
            GenusZeroFunction::new(
                params.c,
                params.q,
                ZeroSequence::new(params.head.clone(), tail)?,
            )
        }
        other => Err(Error::UnknownFamily(other.to_string())),
    }
}
