//! Deterministic low-discrepancy sample sets.
//!
//! Points come from the additive recurrence `frac(j·g₁), frac(j·g₂)` with the
//! plastic-number constants, mapped into `(log |z|, arg z)` coordinates.

use num_complex::Complex;

use crate::scalar::{from_usize, lit, Real};

const G1: f64 = 0.754_877_666_246_692_7;
const G2: f64 = 0.569_840_290_998_053_2;

/// The `j`-th point of the two-dimensional Kronecker sequence in `[0,1)²`.
pub fn kronecker(j: usize) -> (f64, f64) {
    let jf = j as f64 + 0.5;
    ((jf * G1).fract(), (jf * G2).fract())
}

/// `n` points `(|z|, arg z)` of the polar sector `r_lo ≤ |z| ≤ r_hi`,
/// `|arg z| ≤ half`, spaced evenly in `log |z|` and `arg z`. The four corners
/// and four edge midpoints are always included, since extremes tend to sit
/// on the edges.
pub fn polar_coords<T: Real>(r_lo: T, r_hi: T, half: T, n: usize) -> Vec<(T, T)> {
    let (l0, l1) = (r_lo.ln(), r_hi.ln());
    let at = |x: T, y: T| {
        let rho = if x == T::zero() {
            r_lo
        } else if x == T::one() {
            r_hi
        } else {
            (l0 + x * (l1 - l0)).exp()
        };
        let th = if y == T::zero() {
            -half
        } else if y == T::one() {
            half
        } else {
            -half + y * lit::<T>(2.0) * half
        };
        (rho, th)
    };
    let mut out = Vec::with_capacity(n.max(8));
    let marks = [T::zero(), lit(0.5), T::one()];
    for &x in &marks {
        for &y in &marks {
            if x == lit(0.5) && y == lit(0.5) {
                continue;
            }
            out.push(at(x, y));
        }
    }
    let mut j = 0;
    while out.len() < n {
        let (x, y) = kronecker(j);
        out.push(at(lit(x), lit(y)));
        j += 1;
    }
    out.truncate(n.max(1));
    out
}

/// [`polar_coords`] as complex points.
pub fn polar_sector<T: Real>(r_lo: T, r_hi: T, half: T, n: usize) -> Vec<Complex<T>> {
    polar_coords(r_lo, r_hi, half, n)
        .into_iter()
        .map(|(rho, th)| Complex::from_polar(rho, th))
        .collect()
}

/// `n` points of the disc `|z - centre| ≤ radius`, area-uniform.
pub fn disc<T: Real>(centre: Complex<T>, radius: T, n: usize) -> Vec<Complex<T>> {
    let mut out = Vec::with_capacity(n);
    out.push(centre);
    let mut j = 0;
    while out.len() < n {
        let (x, y) = kronecker(j);
        let rho = radius * lit::<T>(x).sqrt();
        out.push(centre + Complex::from_polar(rho, lit::<T>(y) * T::TAU()));
        j += 1;
    }
    out
}

/// Uniform grid of `nx × ny` cell centres of a rectangle.
pub fn rectangle<T: Real>(lo: Complex<T>, hi: Complex<T>, nx: usize, ny: usize) -> Vec<Complex<T>> {
    let mut out = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let x =
                lo.re + (hi.re - lo.re) * (from_usize::<T>(ix) + lit(0.5)) / from_usize::<T>(nx);
            let y =
                lo.im + (hi.im - lo.im) * (from_usize::<T>(iy) + lit(0.5)) / from_usize::<T>(ny);
            out.push(Complex::new(x, y));
        }
    }
    out
}

/// Geometric grid `r_lo, r_lo·ratio, …` up to and including `r_hi`.
pub fn geometric<T: Real>(r_lo: T, r_hi: T, ratio: T) -> Vec<T> {
    assert!(ratio > T::one() && r_lo > T::zero());
    let mut out = Vec::new();
    let mut k = 0i32;
    loop {
        let r = r_lo * ratio.powi(k);
        if r > r_hi * (T::one() + lit(1e-12)) {
            break;
        }
        out.push(r);
        k += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polar_sector_stays_inside() {
        let pts = polar_sector(10.0f64, 20.0, 0.5, 1000);
        assert_eq!(pts.len(), 1000);
        for z in &pts {
            assert!(z.norm() >= 10.0 - 1e-9 && z.norm() <= 20.0 + 1e-9);
            assert!(z.arg().abs() <= 0.5 + 1e-12);
        }
        assert!(pts.iter().any(|z| (z.arg() - 0.5).abs() < 1e-12));
        assert_eq!(pts, polar_sector(10.0f64, 20.0, 0.5, 1000));
    }

    #[test]
    fn geometric_grid_endpoints() {
        let g = geometric(1.0f64, 10.0, 1.25);
        assert_eq!(g[0], 1.0);
        assert!(*g.last().unwrap() <= 10.0);
        assert_eq!(g.len(), 11);
    }
}
