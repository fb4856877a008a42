//! McMullen's lower bound from nesting data, the diameter model for the
//! nested construction, and box-counting estimates.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ext::Ext;
use crate::frame::SectorFrame;
use crate::function::GenusZeroFunction;
use crate::logmag::LogMag;
use crate::modulus::{
    growth_diagnostic, iterate_max_modulus, strictly_increasing, CircleConfig, GrowthModel,
};
use crate::scalar::{from_usize, lit, Real};

/// Density and diameter data for one level of a nested construction.
#[derive(Clone, Debug, PartialEq)]
pub struct NestingLevel<T> {
    pub n: usize,
    /// Lower bound for `dens(E_{n+1}, F)`, `F ∈ E_n`.
    pub delta: T,
    /// `log dₙ`; diameters far below the native range stay representable.
    pub log_d: Ext<T>,
    pub provenance: String,
}

impl<T: Real> NestingLevel<T> {
    pub fn new(n: usize, delta: T, d: T, provenance: impl Into<String>) -> Result<Self> {
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "level {n}: diameter {d:?} must be positive"
            )));
        }
        Self::from_log_d(n, delta, Ext::from_real(d.ln()), provenance)
    }

    pub fn from_log_d(
        n: usize,
        delta: T,
        log_d: Ext<T>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if !(delta > T::zero() && delta <= T::one()) {
            return Err(Error::InvalidArgument(format!(
                "level {n}: density {delta:?} outside (0, 1]"
            )));
        }
        Ok(Self {
            n,
            delta,
            log_d,
            provenance: provenance.into(),
        })
    }
}

/// One entry of the McMullen trend.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrendPoint<T> {
    pub n: usize,
    /// `Σ_{k ≤ n} |log Δ_k|` over the provided levels.
    pub sum_log_delta: T,
    pub log_d: Ext<T>,
    /// `sum_log_delta / |log dₙ|`; `None` when `dₙ ≥ 1`.
    pub ratio: Option<Ext<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McMullenReport<T> {
    /// `2 - max ratio` over the levels that entered the bound.
    pub bound: T,
    pub trend: Vec<TrendPoint<T>>,
    /// Level attaining the largest ratio.
    pub worst_n: usize,
}

/// Per-level ratios `Σ_{k≤n} |log Δ_k| / |log dₙ|`, levels sorted by `n`.
pub fn mcmullen_trend<T: Real>(levels: &[NestingLevel<T>]) -> Result<Vec<TrendPoint<T>>> {
    if levels.is_empty() {
        return Err(Error::InvalidArgument("no nesting levels".into()));
    }
    let mut sorted: Vec<&NestingLevel<T>> = levels.iter().collect();
    sorted.sort_by_key(|l| l.n);
    if sorted.windows(2).any(|w| w[0].n == w[1].n) {
        return Err(Error::InvalidArgument("duplicate level index".into()));
    }
    if sorted.windows(2).any(|w| !(w[1].log_d < w[0].log_d)) {
        return Err(Error::InvalidArgument(
            "diameters must decrease across levels".into(),
        ));
    }
    let mut sum = T::zero();
    Ok(sorted
        .into_iter()
        .map(|l| {
            sum = sum + l.delta.ln().abs();
            let ratio = l
                .log_d
                .is_negative()
                .then(|| Ext::from_real(sum) / l.log_d.abs());
            TrendPoint {
                n: l.n,
                sum_log_delta: sum,
                log_d: l.log_d,
                ratio,
            }
        })
        .collect())
}

fn bound_from<T: Real>(trend: Vec<TrendPoint<T>>) -> Result<McMullenReport<T>> {
    let mut worst: Option<(usize, Ext<T>)> = None;
    for p in &trend {
        if let Some(r) = p.ratio {
            if worst.is_none_or(|(_, w)| r > w) {
                worst = Some((p.n, r));
            }
        }
    }
    let (worst_n, ratio) = worst.ok_or(Error::DegenerateDiameter {
        level: trend.first().map_or(0, |p| p.n),
    })?;
    Ok(McMullenReport {
        bound: lit::<T>(2.0) - ratio.to_real(),
        trend,
        worst_n,
    })
}

/// `2 - max_n Σ_{k≤n} |log Δ_k| / |log dₙ|` over the provided levels: the
/// finite-data stand-in for the lim sup.
pub fn mcmullen_bound<T: Real>(levels: &[NestingLevel<T>]) -> Result<McMullenReport<T>> {
    let trend = mcmullen_trend(levels)?;
    if let Some(p) = trend.iter().find(|p| p.ratio.is_none()) {
        return Err(Error::DegenerateDiameter { level: p.n });
    }
    bound_from(trend)
}

/// As [`mcmullen_bound`], but levels with `dₙ ≥ 1` are reported in the trend
/// and left out of the maximum instead of rejected. The lim sup does not see
/// finitely many levels, so early degenerate ones carry no information.
pub fn mcmullen_bound_tail<T: Real>(levels: &[NestingLevel<T>]) -> Result<McMullenReport<T>> {
    bound_from(mcmullen_trend(levels)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DnTerm<T> {
    pub n: usize,
    pub log_d: Ext<T>,
    /// `n / |log dₙ|`; `None` when `log dₙ = 0`.
    pub ratio: Option<Ext<T>>,
    /// `Mⁿ(R₁)` came from certified evaluation rather than the growth model.
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DnModel<T> {
    pub c4: T,
    pub c5: T,
    pub c6: T,
    pub terms: Vec<DnTerm<T>>,
    /// `log log Mⁿ(R₁)/n` strictly increasing over the same levels, which
    /// is what drives `n/|log dₙ|` to zero.
    pub dominated: bool,
}

/// `log dₙ = c₆ - n log c₄ - log log Mⁿ(R₁)` with `c₄ = σ⁶/64`,
/// `c₅ = 1536 ν ρ₀/σ⁶`, `c₆ = log(c₄ c₅ log R₁)`.
#[allow(clippy::too_many_arguments)]
pub fn dn_model<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    model: &GrowthModel<T>,
    nu: T,
    rho0: T,
    big_r1: T,
    n_max: usize,
    cfg: &CircleConfig<T>,
) -> Result<DnModel<T>> {
    let s6 = frame.sigma().powi(6);
    let c4 = s6 / lit(64.0);
    let c5 = lit::<T>(1536.0) * nu * rho0 / s6;
    let c6 = (c4 * c5 * big_r1.ln()).ln();
    let seq = iterate_max_modulus(f, model, LogMag::from_value(big_r1), n_max, cfg);
    let mut terms = Vec::with_capacity(n_max);
    for it in &seq.values[1..] {
        let ll = it.log_log.ok_or(Error::HorizonExceeded { level: it.k })?;
        let n = from_usize::<T>(it.k);
        let log_d = Ext::from_real(c6 - n * c4.ln()) - ll;
        let ratio = (!log_d.is_zero()).then(|| Ext::from_real(n) / log_d.abs());
        terms.push(DnTerm {
            n: it.k,
            log_d,
            ratio,
            certified: it.certified,
        });
    }
    let dominated = strictly_increasing(&growth_diagnostic(
        f,
        model,
        LogMag::from_value(big_r1),
        n_max,
        cfg,
    ));
    Ok(DnModel {
        c4,
        c5,
        c6,
        terms,
        dominated,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxFit<T> {
    /// Least-squares slope of `log N(ε)` against `log(1/ε)`.
    pub dimension: T,
    pub intercept: T,
    /// `(ε, N(ε))` for every scale in the fit.
    pub counts: Vec<(T, usize)>,
    pub residual_rms: T,
    pub max_residual: T,
}

fn fit_counts<T: Real>(counts: Vec<(T, usize)>) -> Result<BoxFit<T>> {
    let pts: Vec<(T, T)> = counts
        .iter()
        .map(|&(eps, n)| (eps.recip().ln(), from_usize::<T>(n).ln()))
        .collect();
    let k = from_usize::<T>(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / k;
    let my = pts.iter().map(|p| p.1).sum::<T>() / k;
    let sxx = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<T>();
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
    if sxx == T::zero() {
        return Err(Error::InvalidArgument(
            "box-counting scales must differ".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res: Vec<T> = pts
        .iter()
        .map(|p| p.1 - (intercept + slope * p.0))
        .collect();
    let residual_rms = (res.iter().map(|r| *r * *r).sum::<T>() / k).sqrt();
    let max_residual = res.iter().map(|r| r.abs()).fold(T::zero(), T::max);
    Ok(BoxFit {
        dimension: slope,
        intercept,
        counts,
        residual_rms,
        max_residual,
    })
}

/// Box counting of a planar point set at the given box sizes; boxes are
/// aligned to the lower-left corner of the bounding box.
pub fn box_counting<T: Real>(points: &[(T, T)], scales: &[T]) -> Result<BoxFit<T>> {
    if scales.len() < 4 {
        return Err(Error::InsufficientScales(scales.len()));
    }
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty point set".into()));
    }
    if scales.iter().any(|s| !(*s > T::zero())) {
        return Err(Error::InvalidArgument("box sizes must be positive".into()));
    }
    let x0 = points.iter().map(|p| p.0).fold(T::infinity(), T::min);
    let y0 = points.iter().map(|p| p.1).fold(T::infinity(), T::min);
    let counts: Vec<(T, usize)> = scales
        .par_iter()
        .map(|&eps| {
            let cells: HashSet<(i64, i64)> = points
                .iter()
                .map(|&(x, y)| {
                    (
                        ((x - x0) / eps).floor().to_i64().unwrap_or(i64::MAX),
                        ((y - y0) / eps).floor().to_i64().unwrap_or(i64::MAX),
                    )
                })
                .collect();
            (eps, cells.len())
        })
        .collect();
    fit_counts(counts)
}

/// `2^-k_lo, …, 2^-k_hi` times `extent`.
pub fn dyadic_scales<T: Real>(extent: T, k_lo: u32, k_hi: u32) -> Vec<T> {
    (k_lo..=k_hi)
        .map(|k| extent / lit::<T>(2f64.powi(k as i32)))
        .collect()
}

/// Smallest box side, in pixels, admitted by [`box_counting_raster`].
pub const MIN_BOX_PIXELS: usize = 4;

/// Box counting on a `width × height` mask (row-major), with square boxes of
/// `4, 8, 16, …` pixels up to half the shorter side. Sizes are reported
/// as fractions of the width.
pub fn box_counting_raster<T: Real>(
    mask: &[bool],
    width: usize,
    height: usize,
) -> Result<BoxFit<T>> {
    if mask.len() != width * height {
        return Err(Error::InvalidArgument(
            "mask size does not match raster".into(),
        ));
    }
    if !mask.iter().any(|&b| b) {
        return Err(Error::InvalidArgument("empty raster".into()));
    }
    let mut sizes = Vec::new();
    let mut s = MIN_BOX_PIXELS;
    while s <= width.min(height) / 2 {
        sizes.push(s);
        s *= 2;
    }
    if sizes.len() < 4 {
        return Err(Error::InsufficientScales(sizes.len()));
    }
    let counts: Vec<(T, usize)> = sizes
        .par_iter()
        .map(|&s| {
            let (bw, bh) = (width.div_ceil(s), height.div_ceil(s));
            let mut hit = vec![false; bw * bh];
            for y in 0..height {
                for x in 0..width {
                    if mask[y * width + x] {
                        hit[(y / s) * bw + x / s] = true;
                    }
                }
            }
            (
                from_usize::<T>(s) / from_usize::<T>(width),
                hit.into_iter().filter(|&h| h).count(),
            )
        })
        .collect();
    fit_counts(counts)
}
