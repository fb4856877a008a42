//! Sampled checks of the modulus and logarithmic-derivative inequalities.
//!
//! Every check evaluates a signed margin (`lhs - rhs`, or a log-scale
//! variant) on a deterministic sample set and reports the smallest one with
//! the point where it occurred. A check passes when that margin is `≥ 0`.
//! These are finite samples; nothing here is an interval-arithmetic proof.

use std::fmt;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::SectorFrame;
use crate::function::GenusZeroFunction;
use crate::lattice;
use crate::modulus::{circle_max, CircleConfig};
use crate::scalar::{from_usize, lit, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckId {
    SectorCosine,
    ModulusLower,
    LogderivComparability,
    LogderivReal,
    DerivativeLower,
    ProductComparison,
    LogRatio,
    HDecreasing,
}

impl CheckId {
    pub const ALL: [CheckId; 8] = [
        CheckId::SectorCosine,
        CheckId::ModulusLower,
        CheckId::LogderivComparability,
        CheckId::LogderivReal,
        CheckId::DerivativeLower,
        CheckId::ProductComparison,
        CheckId::LogRatio,
        CheckId::HDecreasing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::SectorCosine => "sector-cosine",
            CheckId::ModulusLower => "modulus-lower",
            CheckId::LogderivComparability => "logderiv-comparability",
            CheckId::LogderivReal => "logderiv-real",
            CheckId::DerivativeLower => "derivative-lower",
            CheckId::ProductComparison => "product-comparison",
            CheckId::LogRatio => "log-ratio",
            CheckId::HDecreasing => "h-decreasing",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where the smallest margin was found; enough to recompute it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Witness<T> {
    Polar {
        modulus: T,
        angle: T,
    },
    Point(Complex<T>),
    /// A point of `T(r)` together with `r`.
    PointIn {
        r: T,
        z: Complex<T>,
    },
    Pair(Complex<T>, Complex<T>),
    Radius(T),
    Factor {
        z: Complex<T>,
        index: usize,
    },
    RadiusIndex {
        r: T,
        index: usize,
    },
    Interval(T, T),
}

impl<T: Real> fmt::Display for Witness<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Polar { modulus, angle } => write!(f, "polar({modulus:e}, {angle:e})"),
            Witness::Point(z) => write!(f, "z=({:e}, {:e})", z.re, z.im),
            Witness::PointIn { r, z } => write!(f, "r={r:e} z=({:e}, {:e})", z.re, z.im),
            Witness::Pair(z, w) => {
                write!(f, "z=({:e}, {:e}) w=({:e}, {:e})", z.re, z.im, w.re, w.im)
            }
            Witness::Radius(r) => write!(f, "r={r:e}"),
            Witness::Factor { z, index } => write!(f, "z=({:e}, {:e}) n={index}", z.re, z.im),
            Witness::RadiusIndex { r, index } => write!(f, "r={r:e} n={index}"),
            Witness::Interval(a, b) => write!(f, "x=[{a:e}, {b:e}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarginReport<T> {
    pub id: CheckId,
    pub sample_count: usize,
    pub min_margin: T,
    pub witness: Witness<T>,
    /// Both sides at the witness.
    pub lhs: T,
    pub rhs: T,
    pub pass: bool,
}

/// Per-sample detail for CSV output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleRow<T> {
    pub point: Complex<T>,
    pub lhs: T,
    pub rhs: T,
    pub margin: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutput<T> {
    pub report: MarginReport<T>,
    pub rows: Vec<SampleRow<T>>,
}

struct Eval<T> {
    witness: Witness<T>,
    row: SampleRow<T>,
}

fn summarize<T: Real>(id: CheckId, sample_count: usize, evals: Vec<Eval<T>>) -> CheckOutput<T> {
    assert!(!evals.is_empty(), "check {id} evaluated no samples");
    let mut best = 0;
    for (i, e) in evals.iter().enumerate() {
        // NaN margins count as failures.
        let m = e.row.margin;
        let b = evals[best].row.margin;
        if m.is_nan() || (!b.is_nan() && m < b) {
            best = i;
        }
    }
    let w = &evals[best];
    let min_margin = w.row.margin;
    let report = MarginReport {
        id,
        sample_count,
        min_margin,
        witness: w.witness,
        lhs: w.row.lhs,
        rhs: w.row.rhs,
        pass: min_margin >= T::zero(),
    };
    CheckOutput {
        report,
        rows: evals.into_iter().map(|e| e.row).collect(),
    }
}

fn row<T: Real>(point: Complex<T>, lhs: T, rhs: T, margin: T) -> SampleRow<T> {
    SampleRow {
        point,
        lhs,
        rhs,
        margin,
    }
}

/// `σ|ζ| ≤ Re ζ` for `|arg ζ| ≤ ψ′`, on a polar lattice with
/// `10^-3 ≤ |ζ| ≤ 10^3`. Margins are `|ζ|(cos arg ζ - σ)`, so the edge
/// `arg ζ = ψ′` gives exactly zero.
pub fn check_sector_cosine<T: Real>(frame: &SectorFrame<T>, samples: usize) -> CheckOutput<T> {
    let pts = lattice::polar_coords(lit::<T>(1e-3), lit(1e3), frame.psi_prime(), samples.max(9));
    let evals = pts
        .iter()
        .map(|&(rho, th)| sector_cosine_eval(frame, rho, th))
        .collect();
    summarize(CheckId::SectorCosine, samples.max(9), evals)
}

fn sector_cosine_eval<T: Real>(frame: &SectorFrame<T>, rho: T, th: T) -> Eval<T> {
    let lhs = rho * th.cos();
    let rhs = frame.sigma() * rho;
    Eval {
        witness: Witness::Polar {
            modulus: rho,
            angle: th,
        },
        row: row(
            Complex::from_polar(rho, th),
            lhs,
            rhs,
            rho * (th.cos() - frame.sigma()),
        ),
    }
}

/// Edges `arg ζ = ±ψ′` included exactly.
pub fn check_sector_cosine_edges<T: Real>(frame: &SectorFrame<T>) -> CheckOutput<T> {
    let evals = [frame.psi_prime(), -frame.psi_prime(), T::zero()]
        .iter()
        .map(|&th| sector_cosine_eval(frame, T::one(), th))
        .collect();
    summarize(CheckId::SectorCosine, 3, evals)
}

fn range<T: Real>(e: Error, r: T) -> Error {
    match e {
        Error::TailBoundUnavailable => Error::EvaluationRange {
            radius: r.to_f64().unwrap_or(f64::INFINITY),
        },
        other => other,
    }
}

fn modulus_lower_eval<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    z: Complex<T>,
    cfg: &CircleConfig<T>,
) -> Result<Eval<T>> {
    let lhs = f.eval_abs(z).map_err(|e| range(e, z.norm()))?;
    let rhs = circle_max(f, frame.sigma() * z.norm(), cfg)?.log_max;
    Ok(Eval {
        witness: Witness::Point(z),
        row: row(z, lhs, rhs, lhs - rhs),
    })
}

/// `log μ` on a geometric table of radii covering `[r, span·r]`; since `μ`
/// is increasing, neighbouring entries bracket `log μ(|z|)`.
struct MuTable<T> {
    radii: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> MuTable<T> {
    fn new(
        f: &GenusZeroFunction<T>,
        frame: &SectorFrame<T>,
        r: T,
        span: T,
        size: usize,
        cfg: &CircleConfig<T>,
    ) -> Result<Self> {
        let size = size.max(1);
        let radii: Vec<T> = (0..=size)
            .map(|i| {
                if i == size {
                    r * span
                } else {
                    r * span.powf(from_usize::<T>(i) / from_usize::<T>(size))
                }
            })
            .collect();
        let values = radii
            .par_iter()
            .map(|&s| circle_max(f, frame.sigma() * s, cfg).map(|c| c.log_max))
            .collect::<Result<_>>()?;
        Ok(Self { radii, values })
    }

    /// `(lower, upper)` bounds on `log μ(s)` for `r ≤ s ≤ span·r`.
    fn bracket(&self, s: T) -> (T, T) {
        let i = self.radii.partition_point(|&x| x <= s);
        let lo = self.values[i.saturating_sub(1)];
        let hi = self.values[i.min(self.values.len() - 1)];
        (lo, hi)
    }
}

/// Radii in the μ table used by [`check_modulus_lower`].
pub const MU_TABLE_SIZE: usize = 64;

/// `log|f(z)| ≥ log μ(|z|)` on `n` points of `S(r) ∩ {|z| ≤ span·r}`.
///
/// `μ(|z|)` is bracketed from a radial table; the exact value is computed
/// for every sample whose bracket could hold the minimum, so the reported
/// minimum and witness are exact while the remaining rows carry the
/// conservative margin `log|f(z)| - (table upper bound)`.
pub fn check_modulus_lower<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    r: T,
    span: T,
    samples: usize,
    cfg: &CircleConfig<T>,
) -> Result<CheckOutput<T>> {
    let pts = lattice::polar_sector(r, r * span, frame.alpha(), samples);
    let table = MuTable::new(f, frame, r, span, MU_TABLE_SIZE, cfg)?;
    let lhs: Vec<T> = pts
        .par_iter()
        .map(|&z| f.eval_abs(z).map_err(|e| range(e, z.norm())))
        .collect::<Result<_>>()?;
    let bounds: Vec<(T, T)> = pts.iter().map(|z| table.bracket(z.norm())).collect();
    let best_upper = lhs
        .iter()
        .zip(&bounds)
        .map(|(l, b)| *l - b.0)
        .fold(T::infinity(), T::min);
    let evals: Vec<Eval<T>> = pts
        .par_iter()
        .zip(lhs.par_iter().zip(bounds.par_iter()))
        .map(|(&z, (&l, &(_, hi)))| {
            if l - hi <= best_upper {
                modulus_lower_eval(f, frame, z, cfg)
            } else {
                Ok(Eval {
                    witness: Witness::Point(z),
                    row: row(z, l, hi, l - hi),
                })
            }
        })
        .collect::<Result<_>>()?;
    Ok(summarize(CheckId::ModulusLower, pts.len(), evals))
}

/// Pass/fail form of [`check_modulus_lower`] for threshold scans: samples
/// are first tested against the table's upper bound and evaluated exactly
/// only when that is inconclusive.
pub fn modulus_lower_holds<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    r: T,
    span: T,
    samples: usize,
    table_size: usize,
    cfg: &CircleConfig<T>,
) -> Result<bool> {
    let pts = lattice::polar_sector(r, r * span, frame.alpha(), samples);
    let table = MuTable::new(f, frame, r, span, table_size, cfg)?;
    let fails = pts
        .par_iter()
        .map(|&z| -> Result<bool> {
            let l = f.eval_abs(z).map_err(|e| range(e, z.norm()))?;
            let (_, hi) = table.bracket(z.norm());
            if l >= hi {
                return Ok(false);
            }
            Ok(modulus_lower_eval(f, frame, z, cfg)?.row.margin < T::zero())
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(!fails.into_iter().any(|x| x))
}

/// `|z f′(z)/f(z)|` on a sample set.
fn zg_abs<T: Real>(f: &GenusZeroFunction<T>, pts: &[Complex<T>]) -> Result<Vec<T>> {
    pts.par_iter()
        .map(|&z| {
            f.eval_log_derivative(z)
                .map(|g| (z * g).norm())
                .map_err(|e| range(e, z.norm()))
        })
        .collect()
}

/// `|z g(z)| ≥ (σ⁴/4)|w g(w)|` for all sampled pairs `z, w ∈ T(r)`:
/// the minimum over `z` against the maximum over `w` covers every pair.
pub fn check_logderiv_comparability<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    r: T,
    samples: usize,
) -> Result<CheckOutput<T>> {
    let pts = lattice::polar_sector(r, r * lit(2.0), frame.alpha(), samples);
    let vals = zg_abs(f, &pts)?;
    let k = frame.sigma().powi(4) / lit(4.0);
    let mut imax = 0;
    for i in 1..vals.len() {
        if vals[i] > vals[imax] {
            imax = i;
        }
    }
    let rhs = k * vals[imax];
    let w = pts[imax];
    let evals = pts
        .iter()
        .zip(&vals)
        .map(|(&z, &v)| Eval {
            witness: Witness::Pair(z, w),
            row: row(z, v, rhs, v - rhs),
        })
        .collect();
    Ok(summarize(
        CheckId::LogderivComparability,
        pts.len() * pts.len(),
        evals,
    ))
}

fn logderiv_real_eval<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    r: T,
    cfg: &CircleConfig<T>,
) -> Result<Eval<T>> {
    let z = Complex::new(r, T::zero());
    let g = f.eval_log_derivative(z).map_err(|e| range(e, r))?;
    let lhs = (z * g).norm();
    let log_m = circle_max(f, r, cfg)?.log_max;
    let rhs = frame.sigma().powi(2) / lit(8.0) * log_m / r.ln();
    // Both links of `|r g(r)| ≥ (σ²/8) log M / log r > 0`.
    let margin = (lhs - rhs).min(rhs);
    Ok(Eval {
        witness: Witness::Radius(r),
        row: row(z, lhs, rhs, margin),
    })
}

/// `|r f′(r)/f(r)| ≥ (σ²/8) log M(r)/log r > 0` on a radius grid.
pub fn check_logderiv_real<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    radii: &[T],
    cfg: &CircleConfig<T>,
) -> Result<CheckOutput<T>> {
    let evals: Result<Vec<_>> = radii
        .par_iter()
        .map(|&r| logderiv_real_eval(f, frame, r, cfg))
        .collect();
    Ok(summarize(CheckId::LogderivReal, radii.len(), evals?))
}

fn derivative_lower_rhs<T: Real>(frame: &SectorFrame<T>, r: T, log_m: T) -> T {
    (frame.sigma().powi(6) / lit(64.0) * log_m / (r * r.ln())).ln()
}

/// `|f′(z)| ≥ (σ⁶/64)(log M(r)/(r log r))|f(z)|` on `T(r)`, compared as
/// `log|f′/f|` against the log of the factor.
pub fn check_derivative_lower<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    r: T,
    samples: usize,
    cfg: &CircleConfig<T>,
) -> Result<CheckOutput<T>> {
    let pts = lattice::polar_sector(r, r * lit(2.0), frame.alpha(), samples);
    let log_m = circle_max(f, r, cfg)?.log_max;
    let rhs = derivative_lower_rhs(frame, r, log_m);
    let evals: Result<Vec<_>> = pts
        .par_iter()
        .map(|&z| {
            let g = f.eval_log_derivative(z).map_err(|e| range(e, z.norm()))?;
            let lhs = g.norm().ln();
            Ok(Eval {
                witness: Witness::PointIn { r, z },
                row: row(z, lhs, rhs, lhs - rhs),
            })
        })
        .collect();
    Ok(summarize(CheckId::DerivativeLower, pts.len(), evals?))
}

/// Factor indices tested for a point of modulus `r`: well past the split
/// index, where the factors are already close to 1.
fn factor_count<T: Real>(f: &GenusZeroFunction<T>, r: T) -> usize {
    4 * f.zeros().split_index(r) + 64
}

/// `|1 + z/a_n| - (1 + σ|z|/|a_n|)`: the worst `w` with `|w| = σ|z|` makes
/// `|1 + w/a_n| = 1 + |w|/|a_n|`. Written without cancellation as
/// `(2 Re x + |x|²)/(|1 + x| + 1) - σ|x|`, `x = z/a_n`.
fn product_margin<T: Real>(z: Complex<T>, a: Complex<T>, sigma: T) -> (T, T, T) {
    let x = z / a;
    let one_plus = (Complex::new(T::one(), T::zero()) + x).norm();
    let margin = (lit::<T>(2.0) * x.re + x.norm_sqr()) / (one_plus + T::one()) - sigma * x.norm();
    (one_plus, T::one() + sigma * x.norm(), margin)
}

/// `|1 + w/a_n| ≤ |1 + z/a_n|` for `z ∈ S(r) ∩ {|z| ≤ span·r}`, `|w| = σ|z|`.
pub fn check_product_comparison<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    r: T,
    span: T,
    samples: usize,
) -> CheckOutput<T> {
    let pts = lattice::polar_sector(r, r * span, frame.alpha(), samples);
    let sigma = frame.sigma();
    let per_point: Vec<(Eval<T>, usize)> = pts
        .par_iter()
        .map(|&z| {
            let count = factor_count(f, z.norm());
            let mut best: Option<(usize, (T, T, T))> = None;
            for n in 1..=count {
                let m = product_margin(z, f.zeros().get(n), sigma);
                if best.is_none_or(|(_, b)| m.2 < b.2) {
                    best = Some((n, m));
                }
            }
            let (index, (lhs, rhs, margin)) = best.expect("at least one factor");
            (
                Eval {
                    witness: Witness::Factor { z, index },
                    row: row(z, lhs, rhs, margin),
                },
                count,
            )
        })
        .collect();
    let pairs = per_point.iter().map(|(_, c)| c).sum();
    summarize(
        CheckId::ProductComparison,
        pairs,
        per_point.into_iter().map(|(e, _)| e).collect(),
    )
}

fn log_ratio_terms<T: Real>(r: T, a: T) -> (T, T, T) {
    let lhs = r / (r + a);
    let rhs = (r / a).ln_1p() / (lit::<T>(4.0) * r.ln());
    (lhs, rhs, lhs - rhs)
}

/// `r/(r + |a_n|) ≥ (1/4) log(1 + r/|a_n|)/log r` for grid radii
/// `r ≥ 3^{3/2}` and zeros with `|a_n| ≥ 1`.
pub fn check_log_ratio<T: Real>(f: &GenusZeroFunction<T>, radii: &[T]) -> CheckOutput<T> {
    let floor: T = lit::<T>(3.0).powf(lit(1.5));
    let mut evals = Vec::new();
    let mut count = 0;
    for &r in radii.iter().filter(|&&r| r >= floor) {
        let mut best: Option<(usize, (T, T, T))> = None;
        for n in 1..=factor_count(f, r) {
            let a = f.zeros().modulus(n);
            if a < T::one() {
                continue;
            }
            count += 1;
            let m = log_ratio_terms(r, a);
            if best.is_none_or(|(_, b)| m.2 < b.2) {
                best = Some((n, m));
            }
        }
        if let Some((index, (lhs, rhs, margin))) = best {
            evals.push(Eval {
                witness: Witness::RadiusIndex { r, index },
                row: row(Complex::new(r, T::zero()), lhs, rhs, margin),
            });
        }
    }
    if evals.is_empty() {
        // Nothing in range: report the vacuous pass at the floor radius.
        evals.push(Eval {
            witness: Witness::Radius(floor),
            row: row(
                Complex::new(floor, T::zero()),
                T::zero(),
                T::zero(),
                T::zero(),
            ),
        });
    }
    summarize(CheckId::LogRatio, count, evals)
}

/// `h(x) = (1 + x) log(1 + 1/x)`.
pub fn h<T: Real>(x: T) -> T {
    (T::one() + x) * x.recip().ln_1p()
}

/// `h(x_i) - h(x_{i+1}) > 0` on consecutive points of an increasing grid.
pub fn check_h_decreasing<T: Real>(xs: &[T]) -> CheckOutput<T> {
    let evals = xs
        .windows(2)
        .map(|w| {
            let (a, b) = (h(w[0]), h(w[1]));
            Eval {
                witness: Witness::Interval(w[0], w[1]),
                row: row(Complex::new(w[0], T::zero()), a, b, a - b),
            }
        })
        .collect();
    summarize(CheckId::HDecreasing, xs.len(), evals)
}

/// Geometric grid of `n` points on `[lo, hi]`.
pub fn geometric_points<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * from_usize::<T>(i) / from_usize::<T>(n - 1)).exp())
        .collect()
}

/// Recomputes the margin stored in a report from its witness alone.
pub fn reproduce<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    report: &MarginReport<T>,
    cfg: &CircleConfig<T>,
) -> Result<T> {
    let sigma = frame.sigma();
    match (report.id, report.witness) {
        (CheckId::SectorCosine, Witness::Polar { modulus, angle }) => {
            Ok(sector_cosine_eval(frame, modulus, angle).row.margin)
        }
        (CheckId::ModulusLower, Witness::Point(z)) => {
            Ok(modulus_lower_eval(f, frame, z, cfg)?.row.margin)
        }
        (CheckId::LogderivComparability, Witness::Pair(z, w)) => {
            let a = zg_abs(f, &[z, w])?;
            Ok(a[0] - sigma.powi(4) / lit(4.0) * a[1])
        }
        (CheckId::LogderivReal, Witness::Radius(r)) => {
            Ok(logderiv_real_eval(f, frame, r, cfg)?.row.margin)
        }
        (CheckId::DerivativeLower, Witness::PointIn { r, z }) => {
            let log_m = circle_max(f, r, cfg)?.log_max;
            let g = f.eval_log_derivative(z)?;
            Ok(g.norm().ln() - derivative_lower_rhs(frame, r, log_m))
        }
        (CheckId::ProductComparison, Witness::Factor { z, index }) => {
            Ok(product_margin(z, f.zeros().get(index), sigma).2)
        }
        (CheckId::LogRatio, Witness::RadiusIndex { r, index }) => {
            Ok(log_ratio_terms(r, f.zeros().modulus(index)).2)
        }
        (CheckId::LogRatio, Witness::Radius(_)) => Ok(T::zero()),
        (CheckId::HDecreasing, Witness::Interval(a, b)) => Ok(h(a) - h(b)),
        (id, w) => Err(Error::InvalidArgument(format!(
            "witness {w} does not belong to {id}"
        ))),
    }
}

/// The seven inequality checks swept over radii; `h-decreasing` is a scalar
/// claim and runs separately.
pub const SUITE: [CheckId; 7] = [
    CheckId::SectorCosine,
    CheckId::ModulusLower,
    CheckId::LogderivComparability,
    CheckId::LogderivReal,
    CheckId::DerivativeLower,
    CheckId::ProductComparison,
    CheckId::LogRatio,
];

/// Grid for the `h-decreasing` claim.
pub const H_GRID: (f64, f64) = (1e-2, 1e2);

/// Combines outputs of one check: the smallest margin wins, counts add up,
/// and the check passes only if every part did.
pub fn merge_outputs<T: Real>(outs: Vec<CheckOutput<T>>) -> Option<CheckOutput<T>> {
    let mut it = outs.into_iter();
    let mut acc = it.next()?;
    for o in it {
        let worse = o.report.min_margin.is_nan()
            || (!acc.report.min_margin.is_nan() && o.report.min_margin < acc.report.min_margin);
        let count = acc.report.sample_count + o.report.sample_count;
        let pass = acc.report.pass && o.report.pass;
        if worse {
            acc.report = o.report;
        }
        acc.report.sample_count = count;
        acc.report.pass = pass;
        acc.rows.extend(o.rows);
    }
    Some(acc)
}

/// Runs `id` at every radius (`samples` points per set, sets spanning
/// `[r, span·r]` where the check has a radial extent).
pub fn run_check<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    id: CheckId,
    radii: &[T],
    span: T,
    samples: usize,
    cfg: &CircleConfig<T>,
) -> Result<CheckOutput<T>> {
    if radii.is_empty() && !matches!(id, CheckId::SectorCosine | CheckId::HDecreasing) {
        return Err(Error::InvalidArgument(format!(
            "{id} needs at least one radius"
        )));
    }
    let per_radius =
        |run: &(dyn Fn(T) -> Result<CheckOutput<T>> + Sync)| -> Result<CheckOutput<T>> {
            let outs = radii.iter().map(|&r| run(r)).collect::<Result<Vec<_>>>()?;
            Ok(merge_outputs(outs).expect("nonempty radii"))
        };
    match id {
        CheckId::SectorCosine => Ok(merge_outputs(vec![
            check_sector_cosine(frame, samples),
            check_sector_cosine_edges(frame),
        ])
        .expect("two parts")),
        CheckId::ModulusLower => {
            per_radius(&|r| check_modulus_lower(f, frame, r, span, samples, cfg))
        }
        CheckId::LogderivComparability => {
            per_radius(&|r| check_logderiv_comparability(f, frame, r, samples))
        }
        CheckId::LogderivReal => check_logderiv_real(f, frame, radii, cfg),
        CheckId::DerivativeLower => {
            per_radius(&|r| check_derivative_lower(f, frame, r, samples, cfg))
        }
        CheckId::ProductComparison => {
            per_radius(&|r| Ok(check_product_comparison(f, frame, r, span, samples)))
        }
        CheckId::LogRatio => Ok(check_log_ratio(f, radii)),
        CheckId::HDecreasing => {
            let xs = geometric_points(lit(H_GRID.0), lit(H_GRID.1), samples.max(2));
            Ok(check_h_decreasing(&xs))
        }
    }
}
