//! Nested collections built from traced islands, and their density and
//! diameter measurements.
//!
//! Level 1 is the set of islands traced in `T(r)`. Level 2 sits inside each
//! island `V`: since `f` maps `V` onto `T(f(b))` and `f(b)` is far beyond any
//! evaluation range, the level-1 islands are used as a template, scaled into
//! `T(f(b))` and pulled back through the inverse branch on `V`. Those children
//! are flagged synthetic.

use num_complex::Complex;
use rayon::prelude::*;

use crate::dimension::NestingLevel;
use crate::error::{Error, Result};
use crate::ext::Ext;
use crate::frame::SectorFrame;
use crate::function::GenusZeroFunction;
use crate::islands::{
    self, distortion_constant, koebe_check, point_in_polygon, polygon_area, polygon_diameter,
    IslandRecord, KoebeReport, TraceConfig,
};
use crate::scalar::{from_usize, lit, Real};

/// Relative precision allowed for pulled-back vertices before a level is
/// refused.
pub const RESIDUAL_BUDGET: f64 = 1e-6;

const SECTOR_OUTLINE: usize = 256;

#[derive(Clone, Copy, Debug)]
pub enum Parent<'a, T> {
    /// The sector piece `T(r)`.
    Sector {
        r: T,
    },
    Island(&'a IslandRecord<T>),
}

impl<T: Real> Parent<'_, T> {
    pub fn area(&self, frame: &SectorFrame<T>) -> T {
        match self {
            Parent::Sector { r } => frame.t_area(*r),
            Parent::Island(isl) => isl.area,
        }
    }

    pub fn diameter(&self, frame: &SectorFrame<T>) -> T {
        match self {
            Parent::Sector { r } => sector_diameter(frame, *r),
            Parent::Island(isl) => isl.diameter,
        }
    }
}

/// Diameter of `T(r)` from a sampled outline (corners included).
pub fn sector_diameter<T: Real>(frame: &SectorFrame<T>, r: T) -> T {
    let alpha = frame.alpha();
    let n = SECTOR_OUTLINE;
    let mut pts = Vec::with_capacity(2 * n + 2);
    for k in 0..=n {
        let th = -alpha + (alpha + alpha) * from_usize::<T>(k) / from_usize::<T>(n);
        pts.push(Complex::from_polar(r, th));
        pts.push(Complex::from_polar(r + r, th));
    }
    polygon_diameter(&pts)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChildShape<T> {
    pub area: T,
    pub diameter: T,
    /// Upper bound `24 |h'(b_q)| t` for synthetic children.
    pub fdiam_bound: Option<T>,
    pub synthetic: bool,
    /// Every vertex lies inside the parent outline.
    pub contained: bool,
    pub vertices: Vec<Complex<T>>,
}

impl<T: Real> ChildShape<T> {
    pub fn from_island(isl: &IslandRecord<T>) -> Self {
        Self {
            area: isl.area,
            diameter: isl.diameter,
            fdiam_bound: None,
            synthetic: false,
            contained: isl.within_disc(),
            vertices: isl.boundary.clone(),
        }
    }
}

/// Measured ingredients of `c₃ = c₁ c₂ / (8 C² (ψ−θ₂) log 2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct C3Inputs<T> {
    pub c1: T,
    pub c2: T,
    pub distortion: T,
}

impl<T: Real> C3Inputs<T> {
    pub fn c3(&self, frame: &SectorFrame<T>) -> T {
        self.c1 * self.c2
            / (lit::<T>(8.0) * self.distortion * self.distortion * frame.alpha() * T::LN_2())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelMeasurement<T> {
    /// Level of the children (`E_n`).
    pub level: usize,
    pub parents: usize,
    pub count: usize,
    /// `min` over parents of `Σ area(child) / area(parent)`.
    pub density: T,
    pub parent_diameter: T,
    pub max_child_diameter: T,
    pub c3: T,
    pub density_margin: T,
    /// `min (bound − diameter)` over children carrying an `Fdiam` bound.
    pub fdiam_margin: Option<T>,
    pub all_contained: bool,
    pub synthetic: bool,
}

/// Density and diameter of `children` inside one parent.
pub fn measure_level<T: Real>(
    frame: &SectorFrame<T>,
    level: usize,
    parent: &Parent<'_, T>,
    children: &[ChildShape<T>],
    c3: &C3Inputs<T>,
) -> LevelMeasurement<T> {
    let total = children.iter().fold(T::zero(), |a, c| a + c.area);
    let density = total / parent.area(frame);
    let c3v = c3.c3(frame);
    let fdiam_margin = children
        .iter()
        .filter_map(|c| c.fdiam_bound.map(|b| b - c.diameter))
        .fold(None, |acc: Option<T>, m| Some(acc.map_or(m, |a| a.min(m))));
    LevelMeasurement {
        level,
        parents: 1,
        count: children.len(),
        density,
        parent_diameter: parent.diameter(frame),
        max_child_diameter: children.iter().map(|c| c.diameter).fold(T::zero(), T::max),
        c3: c3v,
        density_margin: density - c3v,
        fdiam_margin,
        all_contained: children.iter().all(|c| c.contained),
        synthetic: children.iter().any(|c| c.synthetic),
    }
}

/// Folds per-parent measurements of one level into a single row.
pub fn merge_levels<T: Real>(rows: &[LevelMeasurement<T>]) -> Option<LevelMeasurement<T>> {
    let mut it = rows.iter();
    let mut acc = it.next()?.clone();
    for r in it {
        acc.parents += r.parents;
        acc.count += r.count;
        acc.density = acc.density.min(r.density);
        acc.parent_diameter = acc.parent_diameter.max(r.parent_diameter);
        acc.max_child_diameter = acc.max_child_diameter.max(r.max_child_diameter);
        acc.density_margin = acc.density_margin.min(r.density_margin);
        acc.fdiam_margin = match (acc.fdiam_margin, r.fdiam_margin) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        acc.all_contained &= r.all_contained;
        acc.synthetic |= r.synthetic;
    }
    Some(acc)
}

/// Log-plane image of a template point `v ∈ T(r_t)` once scaled into
/// `T(f(b))` and lifted to the sheet of `Q_κ(b)`.
fn lift<T: Real>(parent: &IslandRecord<T>, ln_rt: T, v: Complex<T>) -> Complex<T> {
    let k8 = lit::<T>(8.0) * T::PI() * from_usize::<T>(parent.kappa as usize);
    v.ln() + Complex::new(parent.log_fb - ln_rt, k8)
}

/// Children of `parent` obtained by pulling the template islands (traced in
/// `T(template_r)`) back through `f|V`.
pub fn synthetic_children<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    parent: &IslandRecord<T>,
    template: &[IslandRecord<T>],
    template_r: T,
) -> Result<Vec<ChildShape<T>>> {
    let alpha = frame.alpha();
    let ln_rt = template_r.ln();
    template
        .par_iter()
        .map(|tpl| {
            let ws: Vec<Complex<T>> = tpl
                .boundary
                .iter()
                .map(|&v| lift(parent, ln_rt, v))
                .collect();
            let zs = parent.pull_back_path(f, alpha, &ws)?;
            let zb = parent.pull_back(f, alpha, lift(parent, ln_rt, tpl.b))?;
            let g = f.eval_log_derivative(zb)?.norm();
            let bound = lit::<T>(24.0) * tpl.t / (tpl.b.norm() * g);
            let contained = zs.iter().all(|&z| point_in_polygon(z, &parent.boundary));
            Ok(ChildShape {
                area: polygon_area(&zs),
                diameter: polygon_diameter(&zs),
                fdiam_bound: Some(bound),
                synthetic: true,
                contained,
                vertices: zs,
            })
        })
        .collect()
}

/// Relative vertex precision of a level whose smallest member has diameter
/// `d`, sitting where `|log f| ≈ log_f` and `|f'/f| ≈ g`.
pub fn vertex_precision<T: Real>(log_f: T, g: T, d: T) -> T {
    T::epsilon() * (T::one() + log_f.abs()) / (g * d)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstructConfig<T> {
    pub r: T,
    pub r1: T,
    pub nu: T,
    pub c1: T,
    pub trace: TraceConfig<T>,
    pub koebe_samples: usize,
    pub distortion_samples: usize,
    /// Number of nested levels to build (1 or 2).
    pub levels: usize,
}

impl<T: Real> ConstructConfig<T> {
    pub fn new(r: T, r1: T) -> Self {
        Self {
            r,
            r1,
            nu: T::one(),
            c1: lit(1e-3),
            trace: TraceConfig::default(),
            koebe_samples: 400,
            distortion_samples: 8,
            levels: 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Construction<T> {
    pub r: T,
    pub t: T,
    pub m: usize,
    pub packed: usize,
    pub islands: Vec<IslandRecord<T>>,
    /// Packing centres whose trace failed, with the reason.
    pub failures: Vec<(Complex<T>, Error)>,
    pub koebe: Vec<KoebeReport<T>>,
    pub c2_formula: T,
    pub c3: C3Inputs<T>,
    pub levels: Vec<LevelMeasurement<T>>,
    /// Synthetic level-2 children, grouped by parent island.
    pub children: Vec<Vec<ChildShape<T>>>,
    /// Estimated relative vertex precision one level deeper than built.
    pub next_level_precision: T,
}

impl<T: Real> Construction<T> {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty()
            && self.islands.iter().all(|i| i.passes(self.c2_formula))
            && self.koebe.iter().all(|k| k.pass)
    }

    /// Levels for the McMullen estimate, with lengths in units of `diam T(r)`
    /// (dimension is invariant under scaling, the lemma needs `dₙ < 1`).
    pub fn nesting_levels(&self, frame: &SectorFrame<T>) -> Result<Vec<NestingLevel<T>>> {
        let unit = sector_diameter(frame, self.r);
        self.levels
            .iter()
            .map(|lv| {
                let prov = format!(
                    "level {} of r={:e}",
                    lv.level,
                    self.r.to_f64().unwrap_or(f64::NAN)
                );
                NestingLevel::from_log_d(
                    lv.level,
                    lv.density.min(T::one()),
                    Ext::from_real((lv.max_child_diameter / unit).ln()),
                    prov,
                )
            })
            .collect()
    }
}

/// Packs `T(r)`, traces one island per disc and measures the nested levels.
pub fn construct<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    cfg: &ConstructConfig<T>,
) -> Result<Construction<T>> {
    if !(1..=2).contains(&cfg.levels) {
        return Err(Error::InvalidArgument(format!(
            "levels = {}: only 1 or 2 fit the vertex precision budget",
            cfg.levels
        )));
    }
    let r = cfg.r;
    let t = islands::t_of_r(f, frame, r, cfg.r1, cfg.nu)?;
    let m = islands::m_of_r(f, frame, r, cfg.r1, cfg.c1, cfg.nu)?;
    let packing = islands::pack_discs(frame, r, t, m)?;
    let centres: Vec<Complex<T>> = packing.centres.iter().take(m).copied().collect();

    let traced: Vec<(Complex<T>, Result<IslandRecord<T>>)> = centres
        .par_iter()
        .map(|&beta| {
            let rec = islands::find_positive_point(f, beta, t)
                .and_then(|p| islands::trace_first_kappa(f, frame, beta, &p, t, &cfg.trace));
            (beta, rec)
        })
        .collect();
    let mut found = Vec::new();
    let mut failures = Vec::new();
    for (beta, rec) in traced {
        match rec {
            Ok(i) => found.push(i),
            Err(e) => failures.push((beta, e)),
        }
    }
    if found.is_empty() {
        return Err(Error::TooFewIslands);
    }

    let koebe = found
        .iter()
        .map(|i| koebe_check(f, i, cfg.koebe_samples))
        .collect::<Result<Vec<_>>>()?;
    let distortion = distortion_constant(f, frame, &found, cfg.distortion_samples)?;
    let c3 = C3Inputs {
        c1: from_usize::<T>(found.len()) * t * t / (r * r),
        c2: found
            .iter()
            .map(|i| i.area_ratio())
            .fold(T::infinity(), T::min),
        distortion,
    };

    let level1: Vec<ChildShape<T>> = found.iter().map(ChildShape::from_island).collect();
    let mut levels = vec![measure_level(frame, 1, &Parent::Sector { r }, &level1, &c3)];
    let mut children = Vec::new();
    let mut deepest = level1;
    if cfg.levels >= 2 {
        let mut rows = Vec::with_capacity(found.len());
        for parent in &found {
            let kids = synthetic_children(f, frame, parent, &found, r)?;
            rows.push(measure_level(frame, 2, &Parent::Island(parent), &kids, &c3));
            children.push(kids);
        }
        levels.extend(merge_levels(&rows));
        deepest = children.concat();
    }

    // The next level shrinks every member by the same factor as this one did.
    let g = f.eval_log_derivative(Complex::new(r, T::zero()))?.norm();
    let log_f = f.eval(Complex::new(r, T::zero()))?.re;
    let min_d = deepest
        .iter()
        .map(|c| c.diameter)
        .fold(T::infinity(), T::min);
    let shrink = levels
        .last()
        .map_or(T::one(), |lv| lv.max_child_diameter / lv.parent_diameter);
    let next_level_precision = vertex_precision(log_f, g, min_d * shrink);

    Ok(Construction {
        r,
        t,
        m,
        packed: packing.centres.len(),
        islands: found,
        failures,
        koebe,
        c2_formula: islands::c2(frame, cfg.nu),
        c3,
        levels,
        children,
        next_level_precision,
    })
}
