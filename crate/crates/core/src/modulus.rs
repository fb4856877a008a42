//! Maximum modulus `M(r, f)`, the shrunken `μ(r) = M(σr, f)`, and their
//! iterates.
//!
//! `M` is found by a coarse angular scan refined by golden-section search
//! around the best local maxima. The reported value is never below any
//! scanned sample, which is the only thing the scan certifies.
//!
//! Iterates quickly leave the radius where `log f` can be evaluated. Past it
//! we switch to the asymptotic growth law of the zero tail,
//! `log M(r) ≈ A r^ρ + λ log r + B`, calibrated on the largest certified
//! radius, and flag every value obtained that way.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ext::Ext;
use crate::frame::SectorFrame;
use crate::function::GenusZeroFunction;
use crate::logmag::LogMag;
use crate::scalar::{from_usize, lit, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleConfig<T> {
    /// Coarse scan size over the full circle.
    pub samples: usize,
    /// Angular tolerance of the refinement.
    pub tol: T,
    /// Number of local maxima refined.
    pub refine: usize,
}

impl<T: Real> Default for CircleConfig<T> {
    fn default() -> Self {
        Self {
            samples: 256,
            tol: lit(1e-10),
            refine: 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleMax<T> {
    pub log_max: T,
    pub angle: T,
}

fn range_error<T: Real>(r: T) -> Error {
    Error::EvaluationRange {
        radius: r.to_f64().unwrap_or(f64::INFINITY),
    }
}

fn log_abs_on_circle<T: Real>(f: &GenusZeroFunction<T>, r: T, theta: T) -> Result<T> {
    match f.eval_abs(Complex::from_polar(r, theta)) {
        Err(Error::TailBoundUnavailable) => Err(range_error(r)),
        // A sample landing on a zero contributes nothing to the maximum.
        Err(Error::ZeroOfF { .. }) => Ok(T::neg_infinity()),
        other => other,
    }
}

/// `log M(r, f)` and a maximizing angle.
pub fn circle_max<T: Real>(
    f: &GenusZeroFunction<T>,
    r: T,
    cfg: &CircleConfig<T>,
) -> Result<CircleMax<T>> {
    if r == T::zero() {
        return Ok(CircleMax {
            log_max: f.eval_abs(Complex::new(T::zero(), T::zero()))?,
            angle: T::zero(),
        });
    }
    if !(r > T::zero()) || r > f.evaluation_radius() {
        return Err(range_error(r));
    }
    let n = cfg.samples.max(16) & !1; // even, so θ = 0 is a sample
    let step = T::TAU() / from_usize::<T>(n);
    let theta = |j: usize| -T::PI() + step * from_usize::<T>(j);
    // With real c and zeros |f(z̄)| = |f(z)|, so half the circle suffices.
    let symmetric = f.c().im == T::zero()
        && f.zeros().head().iter().all(|a| a.im == T::zero())
        && f.zeros().tail().arg.sin() == T::zero();
    let js: Vec<usize> = if symmetric {
        (n / 2..=n).collect()
    } else {
        (1..=n).collect()
    };
    let mut vals = Vec::with_capacity(js.len());
    for &j in &js {
        vals.push(log_abs_on_circle(f, r, theta(j))?);
    }
    let mut best = 0;
    for i in 1..vals.len() {
        if vals[i] > vals[best] {
            best = i;
        }
    }
    let mut out = CircleMax {
        log_max: vals[best],
        angle: theta(js[best]),
    };

    // Local maxima on the cyclic (or half) sample sequence.
    let m = vals.len();
    let mut peaks: Vec<usize> = (0..m)
        .filter(|&i| {
            let prev = if i == 0 {
                if symmetric {
                    1.min(m - 1)
                } else {
                    m - 1
                }
            } else {
                i - 1
            };
            let next = if i + 1 == m {
                if symmetric {
                    m - 2
                } else {
                    0
                }
            } else {
                i + 1
            };
            vals[i] >= vals[prev] && vals[i] >= vals[next]
        })
        .collect();
    peaks.sort_by(|&a, &b| {
        vals[b]
            .partial_cmp(&vals[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    peaks.truncate(cfg.refine);

    let inv_phi: T = lit(0.618_033_988_749_894_9);
    for &i in &peaks {
        let centre = theta(js[i]);
        let (mut a, mut b) = (centre - step, centre + step);
        let mut x1 = b - inv_phi * (b - a);
        let mut x2 = a + inv_phi * (b - a);
        let mut f1 = log_abs_on_circle(f, r, x1)?;
        let mut f2 = log_abs_on_circle(f, r, x2)?;
        while b - a > cfg.tol {
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = log_abs_on_circle(f, r, x2)?;
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = log_abs_on_circle(f, r, x1)?;
            }
        }
        let (x, v) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
        // Near a flat top the refinement only chases rounding noise.
        let noise = T::epsilon() * lit(4.0) * out.log_max.abs().max(T::one());
        if v > out.log_max + noise {
            out = CircleMax {
                log_max: v,
                angle: Complex::from_polar(T::one(), x).arg(),
            };
        }
    }
    Ok(out)
}

/// `log M(r, f)` for `r` given as a [`LogMag`].
pub fn max_modulus_log<T: Real>(
    f: &GenusZeroFunction<T>,
    r: LogMag<T>,
    cfg: &CircleConfig<T>,
) -> Result<LogMag<T>> {
    let rv = r.value().ok_or_else(|| range_error(r.log_real().exp()))?;
    Ok(LogMag::from_log(circle_max(f, rv, cfg)?.log_max))
}

/// `log μ(r) = log M(σ r, f)`.
pub fn mu_log<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    r: LogMag<T>,
    cfg: &CircleConfig<T>,
) -> Result<LogMag<T>> {
    max_modulus_log(f, r.scale(frame.sigma()), cfg)
}

/// `log M` on a list of radii, evaluated in parallel.
pub fn radial_table<T: Real>(
    f: &GenusZeroFunction<T>,
    radii: &[T],
    cfg: &CircleConfig<T>,
) -> Result<Vec<CircleMax<T>>> {
    radii.par_iter().map(|&r| circle_max(f, r, cfg)).collect()
}

/// `log M(r) ≈ A r^ρ + λ log r + B` for a power-law zero tail
/// `C (n + s)^p`: `ρ = 1/p`, `A = π / sin(π/p) · C^{-1/p}`, `λ = q - 1/2 - s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthModel<T> {
    pub a: T,
    pub rho: T,
    pub lambda: T,
    pub b: T,
    /// Radius at which `B` was calibrated.
    pub calibration_radius: T,
}

impl<T: Real> GrowthModel<T> {
    pub fn fit(f: &GenusZeroFunction<T>, cfg: &CircleConfig<T>) -> Result<Self> {
        let tail = f.zeros().tail();
        let rho = tail.exponent.recip();
        let a = T::PI() / (T::PI() * rho).sin() * tail.coefficient.powf(-rho);
        let lambda = from_usize::<T>(f.q() as usize) - lit(0.5) - tail.shift;
        let cap: T = lit(1e8);
        let rc = {
            let e = f.evaluation_radius() * lit(0.5);
            if e < cap {
                e
            } else {
                cap
            }
        };
        let m = circle_max(f, rc, cfg)?.log_max;
        let b = m - a * rc.powf(rho) - lambda * rc.ln();
        Ok(Self {
            a,
            rho,
            lambda,
            b,
            calibration_radius: rc,
        })
    }

    /// Model `log M(r)` as an [`Ext`], for `r` given by `log r`.
    /// `None` when `r^ρ` leaves the [`Ext`] range.
    pub fn log_m(&self, log_r: Ext<T>) -> Option<Ext<T>> {
        let power = (log_r * self.rho).exp()?;
        Some(power * self.a + log_r * self.lambda + self.b)
    }

    /// Model `log log M(r)`, valid when `log M` itself cannot be stored.
    pub fn log_log_m(&self, log_r: Ext<T>) -> Ext<T> {
        log_r * self.rho + self.a.ln()
    }
}

/// One value of an iterated sequence. Either the magnitude is stored, or
/// (when even its logarithm overflows [`Ext`]) only `log log` of it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Iterate<T> {
    pub k: usize,
    pub magnitude: Option<LogMag<T>>,
    pub log_log: Option<Ext<T>>,
    /// Obtained by certified evaluation at every step so far.
    pub certified: bool,
}

impl<T: Real> Iterate<T> {
    fn from_magnitude(k: usize, m: LogMag<T>, certified: bool) -> Self {
        let log_log = m.log().is_positive().then(|| Ext::from_real(m.log().ln()));
        Self {
            k,
            magnitude: Some(m),
            log_log,
            certified,
        }
    }

    /// `true` when nothing is known beyond "astronomically large".
    pub fn is_unbounded(&self) -> bool {
        self.magnitude.is_none() && self.log_log.is_none()
    }

    /// Compares two iterates as magnitudes, falling back to `log log`.
    /// `None` when neither level is available for both.
    pub fn compare(&self, other: &Self) -> Option<std::cmp::Ordering> {
        if let (Some(a), Some(b)) = (self.magnitude, other.magnitude) {
            return a.partial_cmp(&b);
        }
        match (self.log_log, other.log_log) {
            (Some(a), Some(b)) if self.magnitude.is_none() && other.magnitude.is_none() => {
                a.partial_cmp(&b)
            }
            _ => match (self.magnitude.is_some(), other.magnitude.is_some()) {
                // A stored magnitude is below anything that needed log-log storage.
                (true, false) => Some(std::cmp::Ordering::Less),
                (false, true) => Some(std::cmp::Ordering::Greater),
                _ => None,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterateSequence<T> {
    pub values: Vec<Iterate<T>>,
    /// First `k` at which certified evaluation was impossible.
    pub horizon: Option<usize>,
}

/// `M(scale · x)` applied `n_max` times starting from `x₀`.
pub fn iterate_scaled<T: Real>(
    f: &GenusZeroFunction<T>,
    model: &GrowthModel<T>,
    scale: T,
    x0: LogMag<T>,
    n_max: usize,
    cfg: &CircleConfig<T>,
) -> IterateSequence<T> {
    let mut values = Vec::with_capacity(n_max + 1);
    values.push(Iterate::from_magnitude(0, x0, true));
    let mut horizon = None;
    let ln_scale = scale.ln();
    for k in 1..=n_max {
        let prev = values[k - 1];
        let mut next = None;
        if prev.certified {
            if let Some(v) = prev.magnitude.and_then(|m| m.value()) {
                if let Ok(cm) = circle_max(f, v * scale, cfg) {
                    next = Some(Iterate::from_magnitude(
                        k,
                        LogMag::from_log(cm.log_max),
                        true,
                    ));
                }
            }
        }
        let next = match next {
            Some(it) => it,
            None => {
                if horizon.is_none() {
                    horizon = Some(k);
                }
                if let Some(m) = prev.magnitude {
                    let log_r = m.log() + ln_scale;
                    match model.log_m(log_r) {
                        Some(lm) => Iterate::from_magnitude(k, LogMag::from_log_ext(lm), false),
                        None => Iterate {
                            k,
                            magnitude: None,
                            log_log: Some(model.log_log_m(log_r)),
                            certified: false,
                        },
                    }
                } else if let Some(ll) = prev.log_log {
                    // log r = exp(ll); log log M(r) ≈ ρ log r.
                    let log_log = ll.exp().map(|log_r| model.log_log_m(log_r));
                    Iterate {
                        k,
                        magnitude: None,
                        log_log,
                        certified: false,
                    }
                } else {
                    Iterate {
                        k,
                        magnitude: None,
                        log_log: None,
                        certified: false,
                    }
                }
            }
        };
        values.push(next);
    }
    IterateSequence { values, horizon }
}

/// `μᵏ(r₀)` for `k = 0..=n_max`.
pub fn iterate_mu<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    model: &GrowthModel<T>,
    r0: LogMag<T>,
    n_max: usize,
    cfg: &CircleConfig<T>,
) -> IterateSequence<T> {
    iterate_scaled(f, model, frame.sigma(), r0, n_max, cfg)
}

/// `Mᵏ(r₀)` for `k = 0..=n_max`.
pub fn iterate_max_modulus<T: Real>(
    f: &GenusZeroFunction<T>,
    model: &GrowthModel<T>,
    r0: LogMag<T>,
    n_max: usize,
    cfg: &CircleConfig<T>,
) -> IterateSequence<T> {
    iterate_scaled(f, model, T::one(), r0, n_max, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthTerm<T> {
    pub n: usize,
    /// `log log Mⁿ(R₀) / n`; `None` means beyond any stored range, i.e.
    /// larger than every finite entry.
    pub value: Option<Ext<T>>,
    pub certified: bool,
}

/// `(log log Mⁿ(R₀))/n` for `n = 1..=n_max`.
pub fn growth_diagnostic<T: Real>(
    f: &GenusZeroFunction<T>,
    model: &GrowthModel<T>,
    r0: LogMag<T>,
    n_max: usize,
    cfg: &CircleConfig<T>,
) -> Vec<GrowthTerm<T>> {
    let seq = iterate_max_modulus(f, model, r0, n_max, cfg);
    seq.values[1..]
        .iter()
        .map(|it| GrowthTerm {
            n: it.k,
            value: it.log_log.map(|ll| ll / from_usize::<T>(it.k)),
            certified: it.certified,
        })
        .collect()
}

/// `true` when the diagnostic is strictly increasing (a `None` entry counts
/// as larger than any finite one; two `None`s in a row are not comparable).
pub fn strictly_increasing<T: Real>(terms: &[GrowthTerm<T>]) -> bool {
    terms.windows(2).all(|w| match (w[0].value, w[1].value) {
        (Some(a), Some(b)) => b > a,
        (Some(_), None) => true,
        _ => false,
    })
}
