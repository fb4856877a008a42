//! Sector geometry: the angles `θ₂ < ψ < ψ′ < π/2`, `σ = cos ψ′`, and the
//! regions `S(r) = {|arg z| ≤ ψ - θ₂, |z| ≥ r}` and `T(r) = S(r) ∩ {|z| ≤ 2r}`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::function::GenusZeroFunction;
use crate::scalar::{lit, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectorFrame<T> {
    theta2: T,
    psi: T,
    psi_prime: T,
    sigma: T,
}

impl<T: Real> SectorFrame<T> {
    pub fn new(theta2: T, psi: T, psi_prime: T) -> Result<Self> {
        let ok =
            theta2 >= T::zero() && theta2 < psi && psi < psi_prime && psi_prime < T::FRAC_PI_2();
        if !ok {
            return Err(Error::InvalidFrame(format!(
                "need 0 <= theta2 < psi < psi' < pi/2, got ({theta2:?}, {psi:?}, {psi_prime:?})"
            )));
        }
        Ok(Self {
            theta2,
            psi,
            psi_prime,
            sigma: psi_prime.cos(),
        })
    }

    pub fn theta2(&self) -> T {
        self.theta2
    }

    pub fn psi(&self) -> T {
        self.psi
    }

    pub fn psi_prime(&self) -> T {
        self.psi_prime
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    /// Half-opening `ψ - θ₂` of `S(r)` and `T(r)`.
    pub fn alpha(&self) -> T {
        self.psi - self.theta2
    }

    pub fn in_s(&self, r: T, z: Complex<T>) -> bool {
        z.arg().abs() <= self.alpha() && z.norm() >= r
    }

    pub fn in_t(&self, r: T, z: Complex<T>) -> bool {
        self.in_s(r, z) && z.norm() <= lit::<T>(2.0) * r
    }

    /// Exact area of `T(r)`: `3 α r²`.
    pub fn t_area(&self, r: T) -> T {
        lit::<T>(3.0) * self.alpha() * r * r
    }

    /// `max{2, 1/σ²}`.
    pub fn doubling_factor(&self) -> T {
        let inv = (self.sigma * self.sigma).recip();
        if inv > lit(2.0) {
            inv
        } else {
            lit(2.0)
        }
    }
}

impl Default for SectorFrame<f64> {
    fn default() -> Self {
        Self::new(0.1, 0.6, 0.8).expect("default frame is valid")
    }
}

impl Default for SectorFrame<f32> {
    fn default() -> Self {
        Self::new(0.1, 0.6, 0.8).expect("default frame is valid")
    }
}

/// Smallest `N₀` with `|arg a_n| ≤ θ₂` for every `n ≥ N₀`.
///
/// Listed zeros are checked one by one; the power-law tail has a single
/// argument, so the answer is exact rather than limited by a scan horizon.
pub fn validate_sector<T: Real>(f: &GenusZeroFunction<T>, frame: &SectorFrame<T>) -> Result<usize> {
    let zeros = f.zeros();
    let l = zeros.head().len();
    if zeros.arg(l + 1).abs() > frame.theta2() {
        return Err(Error::SectorViolation { index: l + 1 });
    }
    let last_bad = (1..=l).rev().find(|&n| zeros.arg(n).abs() > frame.theta2());
    Ok(last_bad.map_or(1, |n| n + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{canonical, FamilyParams};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn default_frame_constants() {
        let fr = SectorFrame::<f64>::default();
        assert!((fr.sigma() - 0.696_706_709_347_165_4).abs() < 1e-15);
        assert!((fr.alpha() - 0.5).abs() < 1e-15);
        assert!(SectorFrame::new(0.7, 0.6, 0.8).is_err());
        assert!(SectorFrame::new(0.1, 0.6, 1.6).is_err());
    }

    #[test]
    fn membership() {
        let fr = SectorFrame::<f64>::default();
        let r = 10.0;
        assert!(fr.in_s(r, c(r, 0.0)) && fr.in_t(r, c(r, 0.0)));
        assert!(fr.in_s(r, c(3.0 * r, 0.0)) && !fr.in_t(r, c(3.0 * r, 0.0)));
        let edge = Complex::from_polar(r, fr.psi());
        assert!(!fr.in_s(r, edge) && !fr.in_t(r, edge));
    }

    #[test]
    fn sector_validation() {
        let fr = SectorFrame::<f64>::default();
        let f = canonical("cosh-sqrt", &FamilyParams::default()).unwrap();
        assert_eq!(validate_sector(&f, &fr), Ok(1));

        let p = FamilyParams {
            head: vec![c(-1.0, 0.0)],
            coefficient: 2.0,
            ..FamilyParams::default()
        };
        let g = canonical("custom", &p).unwrap();
        assert_eq!(validate_sector(&g, &fr), Ok(2));

        let p = FamilyParams {
            arg: std::f64::consts::FRAC_PI_2,
            ..FamilyParams::default()
        };
        let h = canonical("custom", &p).unwrap();
        assert!(matches!(
            validate_sector(&h, &fr),
            Err(Error::SectorViolation { .. })
        ));
    }
}
