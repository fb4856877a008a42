//! Orbits, fast-escape classification and class rasters.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ext::Ext;
use crate::frame::SectorFrame;
use crate::function::GenusZeroFunction;
use crate::logmag::LogMag;
use crate::modulus::{iterate_mu, CircleConfig, GrowthModel, Iterate};
use crate::scalar::{from_usize, lit, Real};

/// Rows per rendering tile.
const TILE_ROWS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Termination {
    /// `n_max` steps done without a verdict.
    Horizon,
    /// Reached the trapped ray; see [`Trap`].
    EscapedCertified,
    /// `n_max` steps done and the orbit never left the bounded window.
    BoundedWindow,
    /// The next point is beyond the certified evaluation range.
    LeftDomain,
}

impl Termination {
    pub fn label(self) -> &'static str {
        match self {
            Termination::Horizon => "horizon",
            Termination::EscapedCertified => "escaped-certified",
            Termination::BoundedWindow => "bounded-window",
            Termination::LeftDomain => "left-domain",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitPoint<T> {
    /// The point itself while it fits the native range.
    pub z: Option<Complex<T>>,
    /// `|z|`; `None` only for `z = 0`.
    pub modulus: Option<LogMag<T>>,
    /// `|z f'(z)/f(z)|` where `f` was evaluated at this point.
    pub zg: Option<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRecord<T> {
    pub points: Vec<OrbitPoint<T>>,
    pub termination: Termination,
    /// First index at which the trap certified fast escape.
    pub certified_at: Option<usize>,
    /// Some step landed on a zero of `f`.
    pub zero_hit: bool,
    /// First index with `|z| > bounded_radius`.
    pub escape_time: Option<usize>,
}

/// Sector-trapping certificate. When `f` maps the positive axis into itself,
/// a real point `x ≥ r*` (with `μ(r) > r` beyond `r*`) has
/// `fⁿ(x) ≥ μⁿ(x)` for all `n`, since each image is again real and at least
/// `μ` of its preimage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Trap<T> {
    pub r_star: T,
}

impl<T: Real> Trap<T> {
    pub fn certifies(&self, f: &GenusZeroFunction<T>, z: Complex<T>) -> bool {
        f.preserves_positive_axis() && z.im == T::zero() && z.re >= self.r_star
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitConfig<T> {
    pub n_max: usize,
    /// Largest `|z|` at which `f` is evaluated; capped by the function's own
    /// certified range.
    pub range: T,
    pub bounded_radius: T,
    pub trap: Option<Trap<T>>,
}

impl<T: Real> Default for OrbitConfig<T> {
    fn default() -> Self {
        Self {
            n_max: 64,
            range: T::infinity(),
            bounded_radius: lit(1e3),
            trap: None,
        }
    }
}

fn point_of<T: Real>(z: Complex<T>) -> OrbitPoint<T> {
    let m = z.norm();
    OrbitPoint {
        z: Some(z),
        modulus: (m > T::zero()).then(|| LogMag::from_value(m)),
        zg: None,
    }
}

/// Iterates `f` from `z0` for at most `n_max` steps.
pub fn iterate_orbit<T: Real>(
    f: &GenusZeroFunction<T>,
    z0: Complex<T>,
    cfg: &OrbitConfig<T>,
) -> OrbitRecord<T> {
    let range = cfg.range.min(f.evaluation_radius());
    let mut points = vec![point_of(z0)];
    let mut certified_at = None;
    let mut zero_hit = false;
    let mut escape_time = (z0.norm() > cfg.bounded_radius).then_some(0);
    let mut termination = None;
    for n in 0..cfg.n_max {
        if certified_at.is_none() {
            if let (Some(trap), Some(z)) = (cfg.trap, points[n].z) {
                if trap.certifies(f, z) {
                    certified_at = Some(n);
                }
            }
        }
        let Some(z) = points[n].z else {
            termination = Some(Termination::LeftDomain);
            break;
        };
        if !(z.norm() <= range) {
            termination = Some(Termination::LeftDomain);
            break;
        }
        let next = if z.norm() == T::zero() && f.q() > 0 {
            zero_hit = true;
            point_of(Complex::new(T::zero(), T::zero()))
        } else {
            match f.eval(z) {
                Ok(lf) => {
                    points[n].zg = f.eval_log_derivative(z).ok().map(|g| (z * g).norm());
                    let w = lf.exp();
                    if w.re.is_finite() && w.im.is_finite() && w.norm().is_finite() {
                        point_of(w)
                    } else {
                        OrbitPoint {
                            z: None,
                            modulus: Some(LogMag::from_log(lf.re)),
                            zg: None,
                        }
                    }
                }
                Err(Error::ZeroOfF { .. }) => {
                    zero_hit = true;
                    point_of(Complex::new(T::zero(), T::zero()))
                }
                Err(_) => {
                    termination = Some(Termination::LeftDomain);
                    break;
                }
            }
        };
        if escape_time.is_none() {
            let big = next
                .modulus
                .is_some_and(|m| m > LogMag::from_value(cfg.bounded_radius));
            if big {
                escape_time = Some(n + 1);
            }
        }
        points.push(next);
    }
    if certified_at.is_none() {
        if let (Some(trap), Some(z)) = (cfg.trap, points.last().and_then(|p| p.z)) {
            if trap.certifies(f, z) {
                certified_at = Some(points.len() - 1);
            }
        }
    }
    let termination = match (certified_at, termination) {
        (Some(_), _) => Termination::EscapedCertified,
        (None, Some(t)) => t,
        (None, None) if escape_time.is_none() => Termination::BoundedWindow,
        (None, None) => Termination::Horizon,
    };
    OrbitRecord {
        points,
        termination,
        certified_at,
        zero_hit,
        escape_time,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    Unknown = 0,
    BoundedWindow = 1,
    EscapeEmpirical = 2,
    ACertified = 3,
}

impl Class {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn label(self) -> &'static str {
        match self {
            Class::Unknown => "unknown",
            Class::BoundedWindow => "bounded-window",
            Class::EscapeEmpirical => "escape-empirical",
            Class::ACertified => "A-certified",
        }
    }
}

/// `a ≥ b` with `b` an iterate that may only be known through `log log`.
fn at_least<T: Real>(a: LogMag<T>, b: &Iterate<T>) -> bool {
    match (b.magnitude, b.log_log) {
        (Some(m), _) => a >= m,
        (None, Some(ll)) => a.log().is_positive() && Ext::from_real(a.log().ln()) >= ll,
        (None, None) => false,
    }
}

/// Classification against the alternative characterisation
/// `z ∈ A(f) ⇔ ∃ℓ ∀n: |f^{n+ℓ}(z)| ≥ μⁿ(R)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FastEscapeTest<T> {
    pub r_star: T,
    /// `μⁿ(R)` for `n = 0..`.
    pub mu: Vec<Iterate<T>>,
}

impl<T: Real> FastEscapeTest<T> {
    /// `r_star` is the radius from which the trap certifies; `base` is `R`,
    /// which must satisfy `μ(r) > r` for `r ≥ R`.
    pub fn new(
        f: &GenusZeroFunction<T>,
        frame: &SectorFrame<T>,
        model: &GrowthModel<T>,
        r_star: T,
        base: T,
        n_max: usize,
        cfg: &CircleConfig<T>,
    ) -> Self {
        let seq = iterate_mu(f, frame, model, LogMag::from_value(base), n_max, cfg);
        Self {
            r_star,
            mu: seq.values,
        }
    }

    pub fn trap(&self) -> Trap<T> {
        Trap {
            r_star: self.r_star,
        }
    }

    pub fn classify(&self, orbit: &OrbitRecord<T>) -> Class {
        if orbit.certified_at.is_some() {
            return Class::ACertified;
        }
        if orbit.termination == Termination::BoundedWindow {
            return Class::BoundedWindow;
        }
        let escaped = matches!(
            orbit.termination,
            Termination::LeftDomain | Termination::Horizon
        ) && orbit.escape_time.is_some();
        if !escaped || orbit.zero_hit {
            return Class::Unknown;
        }
        let pts = &orbit.points;
        let dominated_from = |l: usize| {
            pts[l..]
                .iter()
                .enumerate()
                .all(|(n, p)| match (p.modulus, self.mu.get(n)) {
                    (Some(m), Some(mu)) => at_least(m, mu),
                    _ => false,
                })
        };
        // At least two comparisons, so one full step of the characterisation.
        let found = (0..pts.len().saturating_sub(1)).any(dominated_from);
        if found {
            Class::EscapeEmpirical
        } else {
            Class::Unknown
        }
    }
}

/// `|zₙ f'(zₙ)/f(zₙ)| ≥ λ` for every evaluated `n ≥ big_n`, with at least one
/// such `n`. A true result means `z ∈ J(f)` or `z` lies in a multiply
/// connected Fatou component; the test cannot tell which.
pub fn julia_criterion<T: Real>(orbit: &OrbitRecord<T>, lambda: T, big_n: usize) -> bool {
    if orbit.zero_hit {
        return false;
    }
    let evaluated = orbit.points.iter().take_while(|p| p.zg.is_some()).count();
    evaluated > big_n
        && orbit.points[big_n..evaluated]
            .iter()
            .all(|p| p.zg.is_some_and(|v| v >= lambda))
}

/// First index whose point lies in `S(r)`.
pub fn first_entry<T: Real>(orbit: &OrbitRecord<T>, frame: &SectorFrame<T>, r: T) -> Option<usize> {
    orbit
        .points
        .iter()
        .position(|p| p.z.is_some_and(|z| frame.in_s(r, z)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassGrid<T> {
    pub lo: Complex<T>,
    pub hi: Complex<T>,
    pub width: usize,
    pub height: usize,
    /// Row-major, row 0 at the top (`Im = hi.im`).
    pub classes: Vec<Class>,
    pub escape: Vec<Option<usize>>,
}

impl<T: Real> ClassGrid<T> {
    pub fn get(&self, col: usize, row: usize) -> Class {
        self.classes[row * self.width + col]
    }

    pub fn count(&self, c: Class) -> usize {
        self.classes.iter().filter(|&&x| x == c).count()
    }
}

/// Centre of pixel `(col, row)`, row 0 at the top.
pub fn pixel_centre<T: Real>(
    lo: Complex<T>,
    hi: Complex<T>,
    width: usize,
    height: usize,
    col: usize,
    row: usize,
) -> Complex<T> {
    let half = lit::<T>(0.5);
    let x = lo.re + (hi.re - lo.re) * (from_usize::<T>(col) + half) / from_usize::<T>(width);
    let y = hi.im - (hi.im - lo.im) * (from_usize::<T>(row) + half) / from_usize::<T>(height);
    Complex::new(x, y)
}

/// Classifies every pixel centre of the rectangle `lo..hi`.
#[allow(clippy::too_many_arguments)]
pub fn render_grid<T: Real>(
    f: &GenusZeroFunction<T>,
    test: &FastEscapeTest<T>,
    lo: Complex<T>,
    hi: Complex<T>,
    width: usize,
    height: usize,
    max_pixels: usize,
    orbit: &OrbitConfig<T>,
) -> Result<ClassGrid<T>> {
    let finite = lo.re.is_finite() && lo.im.is_finite() && hi.re.is_finite() && hi.im.is_finite();
    if !finite || !(lo.re < hi.re && lo.im < hi.im) {
        return Err(Error::InvalidArgument(
            "render rectangle must be finite with lo < hi".into(),
        ));
    }
    if width == 0 || height == 0 || width.saturating_mul(height) > max_pixels {
        return Err(Error::InvalidArgument(format!(
            "resolution {width}x{height} outside 1..={max_pixels} pixels"
        )));
    }
    let cfg = OrbitConfig {
        trap: Some(test.trap()),
        ..*orbit
    };
    let mut cells = vec![(Class::Unknown, None); width * height];
    cells
        .par_chunks_mut(width * TILE_ROWS)
        .enumerate()
        .for_each(|(tile, chunk)| {
            for (i, cell) in chunk.iter_mut().enumerate() {
                let (row, col) = (tile * TILE_ROWS + i / width, i % width);
                let z = pixel_centre(lo, hi, width, height, col, row);
                let rec = iterate_orbit(f, z, &cfg);
                *cell = (test.classify(&rec), rec.escape_time);
            }
        });
    let (classes, escape) = cells.into_iter().unzip();
    Ok(ClassGrid {
        lo,
        hi,
        width,
        height,
        classes,
        escape,
    })
}
