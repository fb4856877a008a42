//! Threshold radii located on a geometric scan.
//!
//! Each threshold is the smallest grid radius from which its defining
//! predicate holds at every grid radius up to the end of the scan. The
//! predicates are checked on finite samples, so the thresholds are empirical
//! crossovers, not proofs.

use rayon::prelude::*;

use crate::dimension::dn_model;
use crate::error::{Error, Result};
use crate::ext::Ext;
use crate::frame::{validate_sector, SectorFrame};
use crate::function::GenusZeroFunction;
use crate::islands::{m_of_r, pack_discs, t_of_r};
use crate::lattice;
use crate::logmag::LogMag;
use crate::modulus::{
    circle_max, growth_diagnostic, iterate_max_modulus, iterate_mu, strictly_increasing,
    CircleConfig, GrowthModel, Iterate,
};
use crate::scalar::{lit, Real};
use crate::verify;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanConfig<T> {
    pub r_min: T,
    pub ratio: T,
    /// Clamped to half the evaluation radius so `T(r)` stays evaluable.
    pub r_max: T,
    /// Samples per set for radii up to `sampled_max`.
    pub samples: usize,
    /// Samples per set beyond `sampled_max`.
    pub far_samples: usize,
    pub sampled_max: T,
    pub nu: T,
    pub c1: T,
    /// Levels of the growth diagnostic required to increase.
    pub growth_levels: usize,
    pub circle: CircleConfig<T>,
}

impl<T: Real> Default for ScanConfig<T> {
    fn default() -> Self {
        Self {
            r_min: T::one(),
            ratio: lit(1.25),
            r_max: lit(1e10),
            samples: 10_000,
            far_samples: 64,
            sampled_max: lit(1e5),
            nu: T::one(),
            c1: lit(1e-3),
            growth_levels: 4,
            circle: CircleConfig::default(),
        }
    }
}

impl<T: Real> ScanConfig<T> {
    fn samples_at(&self, r: T) -> usize {
        if r <= self.sampled_max {
            self.samples
        } else {
            self.far_samples
        }
    }

    /// Smallest value `r_min · ratioᵏ` (any `k ≥ 0`) that is at least `x`.
    pub fn grid_ceil(&self, x: T) -> T {
        if x <= self.r_min {
            return self.r_min;
        }
        let mut k = ((x / self.r_min).ln() / self.ratio.ln())
            .ceil()
            .to_i32()
            .unwrap_or(i32::MAX);
        let mut v = self.r_min * self.ratio.powi(k);
        while v < x {
            k += 1;
            v = self.r_min * self.ratio.powi(k);
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds<T> {
    /// `μ(r) > r` from here on.
    pub r0: LogMag<T>,
    /// The sampled size-lemma inequalities hold from here on.
    pub r1: LogMag<T>,
    /// Enough disjoint discs for `m(r) ≥ 1` islands.
    pub r2: LogMag<T>,
    /// `|z f'(z)/f(z)| ≥ 2` on `T(r)`.
    pub r_prime: LogMag<T>,
    /// `M(r) > r` with an increasing growth diagnostic.
    pub big_r0: LogMag<T>,
    /// Doubling `M(r) ≥ max{2, 1/σ²} M(σr)` and `d₂ < 1`.
    pub big_r1: LogMag<T>,
    /// Base radius of the nesting, `σ²ρ₀ ≥ max{r₂, R₁}`.
    pub rho0: LogMag<T>,
    /// First index of the zeros inside the angle `θ₂`.
    pub n0: usize,
}

impl<T: Real> Thresholds<T> {
    pub fn ordered(&self) -> bool {
        self.r0 <= self.r1 && self.r1 <= self.r2
    }

    pub fn rho0_dominates(&self, frame: &SectorFrame<T>) -> bool {
        let s2 = LogMag::from_value(frame.sigma() * frame.sigma());
        let lhs = s2.mul(self.rho0);
        lhs >= self.r2 && lhs >= self.big_r1
    }

    /// Name and value pairs in a fixed order.
    pub fn entries(&self) -> [(&'static str, LogMag<T>); 7] {
        [
            ("r0", self.r0),
            ("r1", self.r1),
            ("r2", self.r2),
            ("r_prime", self.r_prime),
            ("big_r0", self.big_r0),
            ("big_r1", self.big_r1),
            ("rho0", self.rho0),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRow<T> {
    pub r: T,
    pub log_m: T,
    pub log_mu: T,
    pub angle: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdReport<T> {
    pub thresholds: Thresholds<T>,
    pub rows: Vec<ScanRow<T>>,
    pub model: GrowthModel<T>,
    /// `m(r₂)` and the packing's achieved `c₁` at `r₂`.
    pub islands_at_r2: usize,
    pub achieved_c1: T,
}

/// Smallest index from which `pred` holds through the end of the grid.
/// Evaluated from the top down, stopping at the first failure.
fn suffix_start<F: FnMut(usize) -> bool>(
    n: usize,
    name: &'static str,
    lowest: usize,
    mut pred: F,
) -> Result<usize> {
    let mut i = n;
    while i > lowest {
        if !pred(i - 1) {
            break;
        }
        i -= 1;
    }
    if i == n {
        Err(Error::NotFoundInScanRange(name))
    } else {
        Ok(i)
    }
}

/// The sampled inequalities of the size lemma at one radius.
fn size_lemma_holds<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    r: T,
    scan: &ScanConfig<T>,
) -> Result<bool> {
    let n = scan.samples_at(r);
    let table = if r <= scan.sampled_max { 16 } else { 1 };
    let cfg = &scan.circle;
    Ok(verify::check_logderiv_real(f, frame, &[r], cfg)?
        .report
        .pass
        && verify::check_log_ratio(f, &[r]).report.pass
        && verify::check_logderiv_comparability(f, frame, r, n)?
            .report
            .pass
        && verify::check_derivative_lower(f, frame, r, n, cfg)?
            .report
            .pass
        && verify::check_product_comparison(f, frame, r, scan.ratio, n)
            .report
            .pass
        && verify::modulus_lower_holds(f, frame, r, scan.ratio, n, table, cfg)?)
}

/// Sampled `min |z f'(z)/f(z)|` over `T(r)`.
fn min_zg<T: Real>(f: &GenusZeroFunction<T>, frame: &SectorFrame<T>, r: T, n: usize) -> Result<T> {
    let pts = lattice::polar_sector(r, r * lit(2.0), frame.alpha(), n);
    let v: Vec<T> = pts
        .par_iter()
        .map(|&z| f.eval_log_derivative(z).map(|g| (z * g).norm()))
        .collect::<Result<_>>()?;
    Ok(v.into_iter().fold(T::infinity(), T::min))
}

pub fn find_thresholds<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    scan: &ScanConfig<T>,
) -> Result<ThresholdReport<T>> {
    let n0 = validate_sector(f, frame)?;
    let top = scan.r_max.min(f.evaluation_radius() * lit(0.5));
    let grid = lattice::geometric(scan.r_min, top, scan.ratio);
    if grid.len() < 2 {
        return Err(Error::InvalidArgument(
            "scan range holds fewer than two radii".into(),
        ));
    }
    let cfg = &scan.circle;
    let sigma = frame.sigma();
    let rows: Vec<ScanRow<T>> = grid
        .par_iter()
        .map(|&r| {
            let m = circle_max(f, r, cfg)?;
            let mu = circle_max(f, sigma * r, cfg)?;
            Ok(ScanRow {
                r,
                log_m: m.log_max,
                log_mu: mu.log_max,
                angle: m.angle,
            })
        })
        .collect::<Result<_>>()?;
    let model = GrowthModel::fit(f, cfg)?;
    let n = grid.len();

    let i_r0 = suffix_start(n, "r0", 0, |i| rows[i].log_mu > grid[i].ln())?;

    let zeros = f.zeros();
    let mut floor = lit::<T>(3.0).powf(lit(1.5));
    if n0 >= 2 {
        let a = zeros.modulus(n0 - 1);
        floor = floor.max(lit::<T>(2.0) * a / (T::one() - sigma));
        let s = (frame.psi_prime() - frame.alpha()).sin();
        for k in 1..n0 {
            floor = floor.max(zeros.modulus(k) / s);
        }
    }
    let i_r1 = suffix_start(n, "r1", i_r0, |i| {
        let r = grid[i];
        r >= floor
            && rows[i].log_m > T::zero()
            && size_lemma_holds(f, frame, r, scan).unwrap_or(false)
    })?;
    let r1 = grid[i_r1];

    let i_r2 = suffix_start(n, "r2", i_r1, |i| {
        let r = grid[i];
        match (
            m_of_r(f, frame, r, r1, scan.c1, scan.nu),
            t_of_r(f, frame, r, r1, scan.nu),
        ) {
            (Ok(m), Ok(t)) => pack_discs(frame, r, t, m).is_ok(),
            _ => false,
        }
    })?;
    let r2 = grid[i_r2];

    let c4 = sigma.powi(6) / lit(64.0);
    let i_rp = suffix_start(n, "r_prime", 0, |i| {
        let r = grid[i];
        c4 * rows[i].log_m / r.ln() >= lit(2.0)
            && min_zg(f, frame, r, scan.samples_at(r)).is_ok_and(|v| v >= lit(2.0))
    })?;

    let i_big_r0 = suffix_start(n, "big_r0", 0, |i| {
        let r = grid[i];
        rows[i].log_m > r.ln()
            && strictly_increasing(&growth_diagnostic(
                f,
                &model,
                LogMag::from_value(r),
                scan.growth_levels,
                cfg,
            ))
    })?;

    let s2 = sigma * sigma;
    let ln_doubling = frame.doubling_factor().ln();
    let i_big_r1 = suffix_start(n, "big_r1", i_big_r0, |i| {
        let r = grid[i];
        if rows[i].log_m - rows[i].log_mu < ln_doubling {
            return false;
        }
        let rho0 = scan.grid_ceil(r2.max(r) / s2);
        match dn_model(f, frame, &model, scan.nu, rho0, r, 2, cfg) {
            Ok(m) => m.terms[1].log_d.is_negative(),
            Err(_) => false,
        }
    })?;
    let big_r1 = grid[i_big_r1];
    let mut rho0 = scan.grid_ceil(r2.max(big_r1) / s2);
    while s2 * rho0 < r2.max(big_r1) {
        rho0 = rho0 * scan.ratio;
    }

    let t2 = t_of_r(f, frame, r2, r1, scan.nu)?;
    let m2 = m_of_r(f, frame, r2, r1, scan.c1, scan.nu)?;
    let packing = pack_discs(frame, r2, t2, m2)?;

    Ok(ThresholdReport {
        thresholds: Thresholds {
            r0: LogMag::from_value(grid[i_r0]),
            r1: LogMag::from_value(r1),
            r2: LogMag::from_value(r2),
            r_prime: LogMag::from_value(grid[i_rp]),
            big_r0: LogMag::from_value(grid[i_big_r0]),
            big_r1: LogMag::from_value(big_r1),
            rho0: LogMag::from_value(rho0),
            n0,
        },
        rows,
        model,
        islands_at_r2: m2,
        achieved_c1: packing.achieved_c1,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChainLevel {
    /// Compared as magnitudes, including the constant factors.
    Magnitude,
    /// Only `log log` was available; the constant factors are below its
    /// resolution and the comparison is of the iterates alone.
    LogLog,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainStep<T> {
    pub k: usize,
    pub mu_rho0: Iterate<T>,
    pub m_scaled: Iterate<T>,
    pub m_r1: Iterate<T>,
    /// `μᵏ(ρ₀) ≥ max{2, 1/σ²} Mᵏ(σ²ρ₀)`.
    pub left: bool,
    /// `max{2, 1/σ²} Mᵏ(σ²ρ₀) ≥ 2 Mᵏ(R₁)`.
    pub right: bool,
    pub level: ChainLevel,
    pub certified: bool,
}

impl<T: Real> ChainStep<T> {
    pub fn holds(&self) -> bool {
        self.left && self.right
    }
}

/// `a · factor_a ≥ b · factor_b` for iterates, at the finest level both carry.
fn dominates<T: Real>(a: &Iterate<T>, fa: T, b: &Iterate<T>, fb: T) -> (bool, ChainLevel) {
    if let (Some(x), Some(y)) = (a.magnitude, b.magnitude) {
        let lhs: Ext<T> = x.log() + fa.ln();
        let rhs: Ext<T> = y.log() + fb.ln();
        return (lhs >= rhs, ChainLevel::Magnitude);
    }
    let ok = matches!(
        a.compare(b),
        Some(std::cmp::Ordering::Greater) | Some(std::cmp::Ordering::Equal)
    );
    (ok, ChainLevel::LogLog)
}

/// The chain `μᵏ(ρ₀) ≥ max{2, 1/σ²} Mᵏ(σ²ρ₀) ≥ 2 Mᵏ(R₁)` for `k = 1..=k_max`.
pub fn rhobig_chain<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    model: &GrowthModel<T>,
    th: &Thresholds<T>,
    k_max: usize,
    cfg: &CircleConfig<T>,
) -> Vec<ChainStep<T>> {
    let s2 = LogMag::from_value(frame.sigma() * frame.sigma());
    let mu = iterate_mu(f, frame, model, th.rho0, k_max, cfg);
    let ms = iterate_max_modulus(f, model, s2.mul(th.rho0), k_max, cfg);
    let m1 = iterate_max_modulus(f, model, th.big_r1, k_max, cfg);
    let d = frame.doubling_factor();
    (1..=k_max)
        .map(|k| {
            let (a, b, c) = (mu.values[k], ms.values[k], m1.values[k]);
            let (left, l1) = dominates(&a, T::one(), &b, d);
            let (right, l2) = dominates(&b, d, &c, lit(2.0));
            ChainStep {
                k,
                mu_rho0: a,
                m_scaled: b,
                m_r1: c,
                left,
                right,
                level: if l1 == ChainLevel::Magnitude && l2 == ChainLevel::Magnitude {
                    ChainLevel::Magnitude
                } else {
                    ChainLevel::LogLog
                },
                certified: a.certified && b.certified && c.certified,
            }
        })
        .collect()
}
