//! Disc packings in `T(r)`, points with `f(b) > 0`, and islands `V` traced
//! as preimages of the target boxes under `log f` by Newton continuation.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::SectorFrame;
use crate::function::GenusZeroFunction;
use crate::lattice;
use crate::scalar::{from_usize, lit, Real};

const NEWTON_ITERATIONS: usize = 60;
const MAX_HALVINGS: usize = 50;
const POSITIVE_POINT_TOL: f64 = 1e-10;

/// `t(r) = 8ν/σ⁴ · |f(r)/f'(r)|`.
pub fn t_of_r<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    r: T,
    r1: T,
    nu: T,
) -> Result<T> {
    if r < r1 {
        return Err(Error::ThresholdViolation {
            radius: r.to_f64().unwrap_or(f64::NAN),
            threshold: r1.to_f64().unwrap_or(f64::NAN),
        });
    }
    let g = f.eval_log_derivative(Complex::new(r, T::zero()))?;
    let s2 = frame.sigma() * frame.sigma();
    Ok(lit::<T>(8.0) * nu / (s2 * s2 * g.norm()))
}

/// `m(r) = ⌊c₁ r² / t(r)²⌋`.
pub fn m_of_r<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    r: T,
    r1: T,
    c1: T,
    nu: T,
) -> Result<usize> {
    let t = t_of_r(f, frame, r, r1, nu)?;
    let m = (c1 * r * r / (t * t)).floor();
    match m.to_usize() {
        Some(m) if m >= 1 => Ok(m),
        _ => Err(Error::TooFewIslands),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Packing<T> {
    /// Centres ordered by row (increasing modulus), then by `|arg|`.
    pub centres: Vec<Complex<T>>,
    pub t: T,
    pub r: T,
    /// `count · t² / r²`.
    pub achieved_c1: T,
}

/// Centres `β` of pairwise disjoint discs `B(β, 3t) ⊂ T(r)`, laid out on
/// hexagonal rows in `(|z|, arg z)`.
pub fn pack_discs<T: Real>(frame: &SectorFrame<T>, r: T, t: T, want: usize) -> Result<Packing<T>> {
    if want == 0 {
        return Err(Error::PackingImpossible(
            "at least one disc must be requested".into(),
        ));
    }
    if !(t > T::zero()) || !(r > T::zero()) || !t.is_finite() || !r.is_finite() {
        return Err(Error::PackingImpossible(format!(
            "invalid radius {r:?} or t {t:?}"
        )));
    }
    let three_t = lit::<T>(3.0) * t;
    let d = lit::<T>(6.0) * t * lit(1.0 + 1e-6);
    let alpha = frame.alpha();
    let row_gap = d * lit::<T>(3f64.sqrt() / 2.0);
    let mut rows: Vec<Vec<(T, Complex<T>)>> = Vec::new();
    let mut rho = r + three_t;
    let mut row = 0usize;
    while rho <= lit::<T>(2.0) * r - three_t {
        let ratio = three_t / rho;
        if ratio < T::one() && alpha - ratio.asin() >= T::zero() {
            let theta_max = alpha - ratio.asin();
            let chord = d / (lit::<T>(2.0) * rho);
            if chord <= T::one() {
                let step = lit::<T>(2.0) * chord.asin();
                let n = (lit::<T>(2.0) * theta_max / step)
                    .floor()
                    .to_usize()
                    .unwrap_or(0)
                    + 1;
                let shift = if row % 2 == 1 {
                    step * lit(0.5)
                } else {
                    T::zero()
                };
                let start = -(from_usize::<T>(n - 1) * step) * lit(0.5) + shift;
                let pts: Vec<(T, Complex<T>)> = (0..n)
                    .map(|j| start + from_usize::<T>(j) * step)
                    .filter(|th| th.abs() <= theta_max)
                    .map(|th| (th, Complex::from_polar(rho, th)))
                    .collect();
                rows.push(pts);
            }
        }
        rho = rho + row_gap;
        row += 1;
    }
    let mut accepted: Vec<Complex<T>> = Vec::new();
    let mut grid: std::collections::HashMap<(i64, i64), Vec<usize>> =
        std::collections::HashMap::new();
    let cell = |z: Complex<T>| {
        (
            (z.re / d).floor().to_i64().unwrap_or(0),
            (z.im / d).floor().to_i64().unwrap_or(0),
        )
    };
    for mut pts in rows {
        pts.sort_by(|a, b| {
            a.0.abs()
                .partial_cmp(&b.0.abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for (_, z) in pts {
            let (cx, cy) = cell(z);
            let clash = (-1..=1).any(|dx| {
                (-1..=1).any(|dy| {
                    grid.get(&(cx + dx, cy + dy)).is_some_and(|v| {
                        v.iter()
                            .any(|&i| (accepted[i] - z).norm() <= lit::<T>(6.0) * t)
                    })
                })
            });
            if !clash {
                grid.entry((cx, cy)).or_default().push(accepted.len());
                accepted.push(z);
            }
        }
    }
    if accepted.len() < want {
        return Err(Error::PackingImpossible(format!(
            "{} discs of radius 3t fit in T(r), {} requested",
            accepted.len(),
            want
        )));
    }
    let achieved_c1 = from_usize::<T>(accepted.len()) * t * t / (r * r);
    Ok(Packing {
        centres: accepted,
        t,
        r,
        achieved_c1,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PositivePoint<T> {
    pub b: Complex<T>,
    /// `Im log f(b) = 2π · branch` on the branch of [`GenusZeroFunction::log_f`].
    pub branch: i64,
    pub iterations: usize,
    pub residual: T,
}

fn wrap_branch<T: Real>(im: T) -> (i64, T) {
    let k = (im / T::TAU()).round();
    (k.to_i64().unwrap_or(0), im - k * T::TAU())
}

/// Newton on `Im log f` from `β` until `f(b) > 0`, staying in `B(β, t)`.
pub fn find_positive_point<T: Real>(
    f: &GenusZeroFunction<T>,
    beta: Complex<T>,
    t: T,
) -> Result<PositivePoint<T>> {
    let tol: T = lit(POSITIVE_POINT_TOL);
    let mut z = beta;
    for it in 0..=50 {
        let l = f.eval(z)?;
        let (branch, phi) = wrap_branch(l.im);
        if phi.abs() < tol {
            if (z - beta).norm() >= t {
                return Err(Error::LeftDisc);
            }
            return Ok(PositivePoint {
                b: z,
                branch,
                iterations: it,
                residual: phi.abs(),
            });
        }
        let g = f.eval_log_derivative(z)?;
        // L(z + δ) ≈ L(z) + g δ; choose δ so the imaginary part drops by φ.
        let delta = Complex::new(T::zero(), -phi) / g;
        z = z + delta;
        if (z - beta).norm() >= t {
            return Err(Error::LeftDisc);
        }
    }
    Err(Error::NewtonDiverged { iterations: 50 })
}

/// Corners of `Q_κ(b)` in the log plane on the branch with `Im log f(b) = 0`,
/// listed counter-clockwise from the lower-left one.
pub fn target_box<T: Real>(log_fb: T, kappa: u8, alpha: T) -> [Complex<T>; 4] {
    let mid = lit::<T>(8.0) * T::PI() * from_usize::<T>(kappa as usize);
    let lo = log_fb;
    let hi = log_fb + T::LN_2();
    [
        Complex::new(lo, mid - alpha),
        Complex::new(hi, mid - alpha),
        Complex::new(hi, mid + alpha),
        Complex::new(lo, mid + alpha),
    ]
}

/// `P_κ`: the horizontal strip `|Im w - 8πκ| < 3π`.
pub fn in_p<T: Real>(w: Complex<T>, kappa: u8) -> bool {
    let mid = lit::<T>(8.0) * T::PI() * from_usize::<T>(kappa as usize);
    (w.im - mid).abs() < lit::<T>(3.0) * T::PI()
}

/// Distance from `w` to the closed rectangle spanned by `corners[0]` and
/// `corners[2]`; zero inside.
fn box_distance<T: Real>(w: Complex<T>, corners: &[Complex<T>; 4]) -> T {
    let dx = (corners[0].re - w.re)
        .max(w.re - corners[2].re)
        .max(T::zero());
    let dy = (corners[0].im - w.im)
        .max(w.im - corners[2].im)
        .max(T::zero());
    dx.hypot(dy)
}

/// Distance from `w` to the boundary of the rectangle.
fn boundary_distance<T: Real>(w: Complex<T>, corners: &[Complex<T>; 4]) -> T {
    let outside = box_distance(w, corners);
    if outside > T::zero() {
        return outside;
    }
    let dx = (w.re - corners[0].re).min(corners[2].re - w.re);
    let dy = (w.im - corners[0].im).min(corners[2].im - w.im);
    dx.min(dy)
}

/// `log f - 2πi·branch`, the branch of `log f` vanishing in argument at `b`.
struct Branch<'a, T: Real> {
    f: &'a GenusZeroFunction<T>,
    shift: T,
}

impl<'a, T: Real> Branch<'a, T> {
    fn new(f: &'a GenusZeroFunction<T>, branch: i64) -> Self {
        Self {
            f,
            shift: T::TAU() * T::from_i64(branch).expect("branch index fits"),
        }
    }

    /// Value continued to the sheet nearest `reference`.
    fn value(&self, z: Complex<T>, reference: Complex<T>) -> Result<Complex<T>> {
        let raw = self.f.eval(z)? - Complex::new(T::zero(), self.shift);
        let k = ((reference.im - raw.im) / T::TAU()).round();
        Ok(raw + Complex::new(T::zero(), k * T::TAU()))
    }

    fn derivative(&self, z: Complex<T>) -> Result<Complex<T>> {
        self.f.eval_log_derivative(z)
    }

    /// Damped Newton for `H(z) = w` from `z0`.
    fn solve(&self, z0: Complex<T>, w: Complex<T>) -> Result<(Complex<T>, T)> {
        let scale = T::one() + w.norm();
        let strict = T::epsilon() * lit::<T>(1e4) * scale;
        let loose = T::epsilon() * lit::<T>(1e6) * scale;
        let mut z = z0;
        let mut res = self.value(z, w)? - w;
        for _ in 0..NEWTON_ITERATIONS {
            if res.norm() <= strict {
                return Ok((z, res.norm()));
            }
            let step = -res / self.derivative(z)?;
            let mut lambda = T::one();
            let mut improved = None;
            for _ in 0..MAX_HALVINGS {
                let trial = z + step * lambda;
                if let Ok(v) = self.value(trial, w) {
                    let r = v - w;
                    if r.norm() < res.norm() {
                        improved = Some((trial, r));
                        break;
                    }
                }
                lambda = lambda * lit(0.5);
            }
            match improved {
                Some((zn, rn)) => {
                    z = zn;
                    res = rn;
                }
                None if res.norm() <= loose => return Ok((z, res.norm())),
                None => {
                    return Err(Error::ContinuationBroke {
                        at: z.norm().to_f64().unwrap_or(f64::NAN),
                    })
                }
            }
        }
        if res.norm() <= loose {
            Ok((z, res.norm()))
        } else {
            Err(Error::ContinuationBroke {
                at: z.norm().to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    /// Follows `w` along the segment `from → to` in steps of at most `h`,
    /// starting at a known preimage `z0` of `from`.
    fn follow(&self, z0: Complex<T>, from: Complex<T>, to: Complex<T>, h: T) -> Result<Complex<T>> {
        let n = ((to - from).norm() / h)
            .ceil()
            .to_usize()
            .unwrap_or(1)
            .max(1);
        let mut z = z0;
        for s in 1..=n {
            let w = from + (to - from) * (from_usize::<T>(s) / from_usize::<T>(n));
            let prev = from + (to - from) * (from_usize::<T>(s - 1) / from_usize::<T>(n));
            let guess = z + (w - prev) / self.derivative(z)?;
            z = self.solve(guess, w)?.0;
        }
        Ok(z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceConfig<T> {
    /// Vertices per `log 2` of boundary length.
    pub mesh: usize,
    /// Step in the log plane while approaching `Q_κ(b)` from `log f(b)`.
    pub approach_step: T,
    /// Interior forward-check grid is `interior × interior` over the bounding box.
    pub interior: usize,
    pub interior_tol: T,
}

impl<T: Real> Default for TraceConfig<T> {
    fn default() -> Self {
        Self {
            mesh: 512,
            approach_step: lit(0.05),
            interior: 64,
            interior_tol: lit(1e-6),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IslandRecord<T> {
    pub beta: Complex<T>,
    pub b: Complex<T>,
    pub branch: i64,
    pub kappa: u8,
    pub t: T,
    /// `log f(b)` (real since `f(b) > 0`).
    pub log_fb: T,
    /// Preimage of the centre of `Q_κ(b)`.
    pub centre: Complex<T>,
    /// Closed polyline; the first vertex is not repeated at the end.
    pub boundary: Vec<Complex<T>>,
    /// Target point on `∂Q_κ(b)` for each vertex.
    pub targets: Vec<Complex<T>>,
    pub area: T,
    pub diameter: T,
    /// `max |log f(v) - target(v)| / (1 + |log f(b)|)` over the vertices.
    pub forward_residual: T,
    /// Largest distance from `log f(v)` to `∂Q_κ(b)`, relative as above.
    pub boundary_residual: T,
    pub closure_gap: T,
    pub winding: i64,
    pub image_winding: i64,
    /// `max |v - b| / t`.
    pub reach: T,
    pub min_log_derivative: T,
    pub interior_points: usize,
    pub interior_fraction: T,
}

impl<T: Real> IslandRecord<T> {
    pub fn area_ratio(&self) -> T {
        self.area / (self.t * self.t)
    }

    pub fn within_disc(&self) -> bool {
        self.reach < T::one()
    }

    /// All a-posteriori checks at the given `c₂`.
    pub fn passes(&self, c2: T) -> bool {
        self.winding == 1
            && self.image_winding == 1
            && self.within_disc()
            && self.forward_residual < lit(1e-8)
            && self.interior_fraction >= lit(0.99)
            && self.min_log_derivative > T::zero()
            && self.area_ratio() >= c2
    }

    pub fn corners(&self, alpha: T) -> [Complex<T>; 4] {
        target_box(self.log_fb, self.kappa, alpha)
    }

    /// Inverse branch of `log f` (relative to `b`) near this island, from a
    /// prediction off the centre preimage.
    pub fn pull_back(
        &self,
        f: &GenusZeroFunction<T>,
        alpha: T,
        w: Complex<T>,
    ) -> Result<Complex<T>> {
        let h = Branch::new(f, self.branch);
        let wc = centre_of(&self.corners(alpha));
        let g = h.derivative(self.centre)?;
        let guess = self.centre + (w - wc) / g;
        Ok(h.solve(guess, w)?.0)
    }

    /// Pulls back a path of log-plane points, each solve warm-started from
    /// the previous preimage.
    pub fn pull_back_path(
        &self,
        f: &GenusZeroFunction<T>,
        alpha: T,
        ws: &[Complex<T>],
    ) -> Result<Vec<Complex<T>>> {
        let h = Branch::new(f, self.branch);
        let mut out = Vec::with_capacity(ws.len());
        let Some(&first) = ws.first() else {
            return Ok(out);
        };
        let mut z = self.pull_back(f, alpha, first)?;
        out.push(z);
        for pair in ws.windows(2) {
            let guess = z + (pair[1] - pair[0]) / h.derivative(z)?;
            z = h.solve(guess, pair[1])?.0;
            out.push(z);
        }
        Ok(out)
    }
}

fn centre_of<T: Real>(c: &[Complex<T>; 4]) -> Complex<T> {
    (c[0] + c[2]) * lit::<T>(0.5)
}

/// Shoelace area of a closed polygon.
pub fn polygon_area<T: Real>(pts: &[Complex<T>]) -> T {
    let n = pts.len();
    let mut s = T::zero();
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        s = s + (a.re * b.im - b.re * a.im);
    }
    (s * lit(0.5)).abs()
}

/// Largest pairwise distance between vertices.
pub fn polygon_diameter<T: Real>(pts: &[Complex<T>]) -> T {
    pts.par_iter()
        .enumerate()
        .map(|(i, a)| {
            pts[i + 1..]
                .iter()
                .map(|b| (*a - *b).norm())
                .fold(T::zero(), T::max)
        })
        .reduce(T::zero, T::max)
}

/// Even-odd point-in-polygon test.
pub fn point_in_polygon<T: Real>(p: Complex<T>, poly: &[Complex<T>]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.im > p.im) != (b.im > p.im) {
            let x = a.re + (p.im - a.im) * (b.re - a.re) / (b.im - a.im);
            if p.re < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Winding number of the closed polyline about `c`.
pub fn winding_number<T: Real>(pts: &[Complex<T>], c: Complex<T>) -> i64 {
    let n = pts.len();
    let mut total = T::zero();
    for i in 0..n {
        let a = pts[i] - c;
        let b = pts[(i + 1) % n] - c;
        total = total + (b / a).arg();
    }
    (total / T::TAU()).round().to_i64().unwrap_or(0)
}

/// Traces `V`, the preimage of `Q_κ(b)` under the branch of `log f` fixed at
/// `b`, by continuation around `∂Q_κ(b)`.
pub fn trace_island<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    beta: Complex<T>,
    point: &PositivePoint<T>,
    kappa: u8,
    t: T,
    cfg: &TraceConfig<T>,
) -> Result<IslandRecord<T>> {
    let alpha = frame.alpha();
    let h = Branch::new(f, point.branch);
    let b = point.b;
    let log_fb = f.eval(b)?.re;
    let start = Complex::new(log_fb, T::zero());
    let corners = target_box(log_fb, kappa, alpha);
    let z_corner = h.follow(b, start, corners[0], cfg.approach_step)?;

    let step = T::LN_2() / from_usize::<T>(cfg.mesh.max(1));
    let mut boundary = vec![z_corner];
    let mut targets = vec![corners[0]];
    let mut z = z_corner;
    for side in 0..4 {
        let (a, e) = (corners[side], corners[(side + 1) % 4]);
        let n = ((e - a).norm() / step)
            .ceil()
            .to_usize()
            .unwrap_or(1)
            .max(1);
        for s in 1..=n {
            let w = a + (e - a) * (from_usize::<T>(s) / from_usize::<T>(n));
            let prev = *targets.last().expect("nonempty");
            let guess = z + (w - prev) / h.derivative(z)?;
            z = h.solve(guess, w)?.0;
            boundary.push(z);
            targets.push(w);
        }
    }
    let closure_gap = (boundary.pop().expect("closing vertex") - z_corner).norm();
    targets.pop();
    if !(closure_gap <= t * lit(1e-6)) {
        return Err(Error::NotClosed {
            gap: closure_gap.to_f64().unwrap_or(f64::NAN),
        });
    }

    let wc = centre_of(&corners);
    let centre = h.follow(z_corner, corners[0], wc, cfg.approach_step)?;
    let scale = T::one() + log_fb.abs();

    let images: Vec<Complex<T>> = boundary
        .par_iter()
        .zip(targets.par_iter())
        .map(|(&v, &w)| h.value(v, w))
        .collect::<Result<_>>()?;
    let forward_residual = images
        .iter()
        .zip(&targets)
        .map(|(a, w)| (*a - *w).norm())
        .fold(T::zero(), T::max)
        / scale;
    let boundary_residual = images
        .iter()
        .map(|w| boundary_distance(*w, &corners))
        .fold(T::zero(), T::max)
        / scale;
    let min_log_derivative = boundary
        .par_iter()
        .map(|&v| h.derivative(v).map(|g| g.norm()))
        .collect::<Result<Vec<T>>>()?
        .into_iter()
        .fold(T::infinity(), T::min);

    let winding = winding_number(&boundary, centre);
    let image_winding = winding_number(&images, wc);
    let reach = boundary
        .iter()
        .map(|v| (*v - b).norm())
        .fold(T::zero(), T::max)
        / t;
    let area = polygon_area(&boundary);
    let diameter = polygon_diameter(&boundary);

    let (mut lo, mut hi) = (boundary[0], boundary[0]);
    for v in &boundary {
        lo = Complex::new(lo.re.min(v.re), lo.im.min(v.im));
        hi = Complex::new(hi.re.max(v.re), hi.im.max(v.im));
    }
    let inside: Vec<Complex<T>> = lattice::rectangle(lo, hi, cfg.interior, cfg.interior)
        .into_iter()
        .filter(|p| point_in_polygon(*p, &boundary))
        .collect();
    let ok = inside
        .par_iter()
        .map(|&p| {
            h.value(p, wc)
                .map(|w| box_distance(w, &corners) <= cfg.interior_tol * scale)
                .unwrap_or(false)
        })
        .filter(|&x| x)
        .count();
    let interior_fraction = if inside.is_empty() {
        T::zero()
    } else {
        from_usize::<T>(ok) / from_usize::<T>(inside.len())
    };

    Ok(IslandRecord {
        beta,
        b,
        branch: point.branch,
        kappa,
        t,
        log_fb,
        centre,
        boundary,
        targets,
        area,
        diameter,
        forward_residual,
        boundary_residual,
        closure_gap,
        winding,
        image_winding,
        reach,
        min_log_derivative,
        interior_points: inside.len(),
        interior_fraction,
    })
}

/// Tries `κ = 1, 2, 3` in order and keeps the first trace that closes with
/// unit winding and stays inside `B(b, t)`.
pub fn trace_first_kappa<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    beta: Complex<T>,
    point: &PositivePoint<T>,
    t: T,
    cfg: &TraceConfig<T>,
) -> Result<IslandRecord<T>> {
    let mut last = Error::ContinuationBroke { at: f64::NAN };
    for kappa in 1..=3u8 {
        match trace_island(f, frame, beta, point, kappa, t, cfg) {
            Ok(rec) if rec.winding == 1 && rec.within_disc() => return Ok(rec),
            Ok(_) => {}
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// `c₂ = α σ¹⁶ log 2 / (512 ν²)`.
pub fn c2<T: Real>(frame: &SectorFrame<T>, nu: T) -> T {
    frame.alpha() * frame.sigma().powi(16) * T::LN_2() / (lit::<T>(512.0) * nu * nu)
}

/// `max |g'| / min |g'|` over the samples.
pub fn distortion_of_map<T: Real, G: Fn(Complex<T>) -> Complex<T>>(
    g_prime: G,
    points: &[Complex<T>],
) -> T {
    let mags: Vec<T> = points.iter().map(|&w| g_prime(w).norm()).collect();
    let hi = mags.iter().copied().fold(T::zero(), T::max);
    let lo = mags.iter().copied().fold(T::infinity(), T::min);
    hi / lo
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KoebeReport<T> {
    /// `max |h'(z)| / |h'(b)|` over samples of `B(b, t)`, with `h = log f`.
    pub max_ratio: T,
    pub samples: usize,
    /// `min Re(h'(z) conj h'(b)) / |h'(b)|²` over `B(b, 2t)`; positive means
    /// `h` is univalent on that disc.
    pub univalence_margin: T,
    pub pass: bool,
}

/// Koebe's `|h'(z)| ≤ 12 |h'(b)|` on `B(b, t)` for `h = log f - log f(b)`,
/// together with the derivative condition making `h` univalent on `B(b, 2t)`.
pub fn koebe_check<T: Real>(
    f: &GenusZeroFunction<T>,
    island: &IslandRecord<T>,
    samples: usize,
) -> Result<KoebeReport<T>> {
    let gb = f.eval_log_derivative(island.b)?;
    let near = lattice::disc(island.b, island.t, samples);
    let far = lattice::disc(island.b, island.t * lit(2.0), samples);
    let ratios: Vec<T> = near
        .par_iter()
        .map(|&z| f.eval_log_derivative(z).map(|g| g.norm() / gb.norm()))
        .collect::<Result<_>>()?;
    let margins: Vec<T> = far
        .par_iter()
        .map(|&z| {
            f.eval_log_derivative(z)
                .map(|g| (g * gb.conj()).re / gb.norm_sqr())
        })
        .collect::<Result<_>>()?;
    let max_ratio = ratios.into_iter().fold(T::zero(), T::max);
    let univalence_margin = margins.into_iter().fold(T::infinity(), T::min);
    Ok(KoebeReport {
        max_ratio,
        samples: near.len(),
        univalence_margin,
        pass: max_ratio <= lit(12.0) && univalence_margin > T::zero(),
    })
}

/// Empirical `C` for the inverse branches `Q_κ(b) → V`: the largest ratio
/// `|φ'(w)| / |φ'(w')|` over a `samples × samples` grid of each box, maximised
/// over islands.
pub fn distortion_constant<T: Real>(
    f: &GenusZeroFunction<T>,
    frame: &SectorFrame<T>,
    islands: &[IslandRecord<T>],
    samples: usize,
) -> Result<T> {
    let alpha = frame.alpha();
    let per: Vec<T> = islands
        .par_iter()
        .map(|isl| {
            let c = isl.corners(alpha);
            let grid = lattice::rectangle(c[0], c[2], samples, samples);
            let mut derivs = Vec::with_capacity(grid.len());
            for w in grid {
                let z = isl.pull_back(f, alpha, w)?;
                derivs.push(f.eval_log_derivative(z)?.inv());
            }
            let hi = derivs.iter().map(|d| d.norm()).fold(T::zero(), T::max);
            let lo = derivs.iter().map(|d| d.norm()).fold(T::infinity(), T::min);
            Ok(hi / lo)
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().fold(T::one(), T::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{canonical, FamilyParams};

    fn cosh() -> GenusZeroFunction<f64> {
        canonical("cosh-sqrt", &FamilyParams::default()).unwrap()
    }

    #[test]
    fn t_matches_closed_form() {
        let f = cosh();
        let fr = SectorFrame::<f64>::default();
        let r = 1e6f64;
        let s = r.sqrt();
        let ratio = 2.0 * s / s.tanh();
        let want = 8.0 * ratio / fr.sigma().powi(4);
        let t = t_of_r(&f, &fr, r, 10.0, 1.0).unwrap();
        assert!((t - want).abs() < 1e-9 * want);
        assert!((t_of_r(&f, &fr, r, 10.0, 2.0).unwrap() - 2.0 * t).abs() < 1e-9 * t);
        assert!(matches!(
            t_of_r(&f, &fr, 5.0, 10.0, 1.0),
            Err(Error::ThresholdViolation { .. })
        ));
    }

    #[test]
    fn island_count_formula() {
        let f = cosh();
        let fr = SectorFrame::<f64>::default();
        assert_eq!(m_of_r(&f, &fr, 1e7, 10.0, 1e-3, 1.0).unwrap(), 2);
        assert!(matches!(
            m_of_r(&f, &fr, 1e7, 10.0, 0.0, 1.0),
            Err(Error::TooFewIslands)
        ));
    }

    #[test]
    fn packing_is_disjoint_and_inside() {
        let fr = SectorFrame::<f64>::default();
        let r = 1000.0;
        let t = r / 100.0;
        let p = pack_discs(&fr, r, t, 50).unwrap();
        assert!(p.centres.len() >= 50);
        for (i, a) in p.centres.iter().enumerate() {
            for b in &p.centres[i + 1..] {
                assert!((a - b).norm() > 6.0 * t);
            }
            for k in 0..64 {
                let e = *a + Complex::from_polar(3.0 * t, k as f64 * std::f64::consts::TAU / 64.0);
                assert!(fr.in_t(r, e), "{a} {e}");
            }
        }
        assert!(pack_discs(&fr, r, 2.0 * r, 1).is_err());
    }

    #[test]
    fn positive_point_on_axis_is_immediate() {
        let f = cosh();
        let p = find_positive_point(&f, Complex::new(5e4, 0.0), 100.0).unwrap();
        assert_eq!(p.iterations, 0);
        assert_eq!(p.b, Complex::new(5e4, 0.0));
    }

    #[test]
    fn positive_point_off_axis() {
        let f = cosh();
        let r = 1e7f64;
        let t = t_of_r(&f, &SectorFrame::default(), r, 10.0, 1.0).unwrap();
        let beta = Complex::from_polar(r, 0.05);
        let p = find_positive_point(&f, beta, t).unwrap();
        assert!(p.iterations <= 20);
        assert!(p.residual < 1e-10);
        let l = f.eval(p.b).unwrap();
        assert!((l.im - std::f64::consts::TAU * p.branch as f64).abs() < 1e-10);
    }

    #[test]
    fn polygon_helpers() {
        let sq = [
            Complex::new(0.0f64, 0.0),
            Complex::new(2.0, 0.0),
            Complex::new(2.0, 2.0),
            Complex::new(0.0, 2.0),
        ];
        assert!((polygon_area(&sq) - 4.0).abs() < 1e-15);
        assert!((polygon_diameter(&sq) - 8f64.sqrt()).abs() < 1e-15);
        assert!(point_in_polygon(Complex::new(1.0, 1.0), &sq));
        assert!(!point_in_polygon(Complex::new(3.0, 1.0), &sq));
        assert_eq!(winding_number(&sq, Complex::new(1.0, 1.0)), 1);
        assert_eq!(winding_number(&sq, Complex::new(5.0, 1.0)), 0);
    }

    #[test]
    fn affine_map_has_unit_distortion() {
        let a = Complex::new(2.0f64, -1.0);
        let pts = lattice::rectangle(Complex::new(0.0, 0.0), Complex::new(1.0, 1.0), 8, 8);
        assert_eq!(distortion_of_map(|_| a, &pts), 1.0);
    }

    #[test]
    fn c2_default_value() {
        let fr = SectorFrame::<f64>::default();
        let want = 0.5 * fr.sigma().powi(16) * 2f64.ln() / 512.0;
        assert!((c2(&fr, 1.0) - want).abs() < 1e-20);
        assert!((c2(&fr, 1.0) - 2.086e-6).abs() < 0.001e-6);
    }

    #[test]
    fn traces_an_island_at_moderate_radius() {
        let f = cosh();
        let fr = SectorFrame::<f64>::default();
        let r = 1e6f64;
        let t = t_of_r(&f, &fr, r, 10.0, 1.0).unwrap();
        let beta = Complex::new(r + 3.0 * t, 0.0);
        let p = find_positive_point(&f, beta, t).unwrap();
        let cfg = TraceConfig {
            mesh: 128,
            interior: 24,
            ..TraceConfig::default()
        };
        let isl = trace_first_kappa(&f, &fr, beta, &p, t, &cfg).unwrap();
        assert_eq!(isl.kappa, 1);
        assert!(isl.passes(c2(&fr, 1.0)), "{isl:?}");
        let k = koebe_check(&f, &isl, 64).unwrap();
        assert!(k.pass);
        let c = distortion_constant(&f, &fr, std::slice::from_ref(&isl), 6).unwrap();
        assert!((1.0..1.1).contains(&c));
        let again = trace_island(&f, &fr, beta, &p, 1, t, &cfg).unwrap();
        assert_eq!(again.boundary, isl.boundary);
    }
}
