use std::sync::OnceLock;

use proptest::prelude::*;

use fastescape::dimension::{box_counting, dyadic_scales, mcmullen_bound, NestingLevel};
use fastescape::dynamics::{iterate_orbit, FastEscapeTest, OrbitConfig};
use fastescape::function::{canonical, FamilyParams};
use fastescape::islands::{pack_discs, polygon_area};
use fastescape::modulus::{iterate_mu, CircleConfig, GrowthModel};
use fastescape::verify::h;
use fastescape::{Complex, Ext, Frame, Function, Mag};

const R_STAR: f64 = 30.0;

struct Fixture {
    f: Function,
    frame: Frame,
    model: GrowthModel<f64>,
    test: FastEscapeTest<f64>,
}

fn fixture() -> &'static Fixture {
    static FX: OnceLock<Fixture> = OnceLock::new();
    FX.get_or_init(|| {
        let f = canonical("cosh-sqrt", &FamilyParams::default()).unwrap();
        let frame = Frame::default();
        let cfg = CircleConfig::default();
        let model = GrowthModel::fit(&f, &cfg).unwrap();
        // μ(r) = cosh √(σr) > r from r = 30 on.
        assert!((1..200)
            .map(|k| R_STAR * 1.1f64.powi(k))
            .all(|r| (frame.sigma() * r).sqrt().cosh() > r));
        let test = FastEscapeTest::new(&f, &frame, &model, R_STAR, R_STAR, 64, &cfg);
        Fixture {
            f,
            frame,
            model,
            test,
        }
    })
}

fn orbit_cfg(n_max: usize) -> OrbitConfig<f64> {
    OrbitConfig {
        n_max,
        trap: Some(fixture().test.trap()),
        ..OrbitConfig::default()
    }
}

fn levels(deltas: &[f64], log_d0: f64) -> Vec<NestingLevel<f64>> {
    deltas
        .iter()
        .enumerate()
        .map(|(i, &d)| NestingLevel::new(i + 1, d, (log_d0 * (i + 1) as f64).exp(), "p").unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ext_tracks_native_arithmetic(a in -1e6f64..1e6, b in -1e6f64..1e6) {
        let (x, y) = (Ext::from_real(a), Ext::from_real(b));
        prop_assert!(((x + y).to_real() - (a + b)).abs() <= 1e-12 * (a.abs() + b.abs()).max(1e-300));
        prop_assert!(((x * y).to_real() - a * b).abs() <= 1e-12 * (a * b).abs().max(1e-300));
        prop_assert_eq!(x.partial_cmp(&y), a.partial_cmp(&b));
    }

    #[test]
    fn logmag_products_invert(a in 1e-200f64..1e200, b in 1e-200f64..1e200) {
        let (x, y) = (Mag::from_value(a), Mag::from_value(b));
        let back = x.mul(y).div(y).value().unwrap();
        prop_assert!((back - a).abs() <= 1e-9 * a);
    }

    #[test]
    fn mcmullen_bound_is_monotone_in_density(
        deltas in prop::collection::vec(0.01f64..1.0, 1..6),
        pick in 0usize..6,
        bump in 0.0f64..1.0,
        log_d0 in -5.0f64..-0.1,
    ) {
        let base = mcmullen_bound(&levels(&deltas, log_d0)).unwrap().bound;
        prop_assert!(base <= 2.0);
        prop_assert!(base.is_finite());
        let mut more = deltas.clone();
        let k = pick % more.len();
        more[k] += (1.0 - more[k]) * bump;
        let raised = mcmullen_bound(&levels(&more, log_d0)).unwrap().bound;
        prop_assert!(raised >= base - 1e-12);
    }

    #[test]
    fn bound_is_two_only_for_unit_densities(n in 1usize..6, log_d0 in -5.0f64..-0.1, d in 0.01f64..0.999) {
        let ones = vec![1.0; n];
        prop_assert_eq!(mcmullen_bound(&levels(&ones, log_d0)).unwrap().bound, 2.0);
        let mut some = ones.clone();
        some[n - 1] = d;
        prop_assert!(mcmullen_bound(&levels(&some, log_d0)).unwrap().bound < 2.0);
    }

    #[test]
    fn conjugate_points_share_a_class(re in -60.0f64..120.0, im in 0.001f64..40.0) {
        let fx = fixture();
        let z = Complex::new(re, im);
        prop_assert_eq!(fx.f.eval(z.conj()).unwrap(), fx.f.eval(z).unwrap().conj());
        let a = iterate_orbit(&fx.f, z, &orbit_cfg(48));
        let b = iterate_orbit(&fx.f, z.conj(), &orbit_cfg(48));
        prop_assert_eq!(fx.test.classify(&a), fx.test.classify(&b));
        prop_assert_eq!(a.termination, b.termination);
    }

    #[test]
    fn certified_orbits_outgrow_iterated_mu(x0 in 1.0f64..2e4) {
        let fx = fixture();
        let rec = iterate_orbit(&fx.f, Complex::new(x0, 0.0), &orbit_cfg(32));
        if let Some(l) = rec.certified_at {
            let start = rec.points[l].modulus.unwrap();
            let mu = iterate_mu(&fx.f, &fx.frame, &fx.model, start, rec.points.len() - l, &CircleConfig::default());
            for (n, p) in rec.points[l..].iter().enumerate() {
                let m = p.modulus.unwrap();
                let want = mu.values[n].magnitude.unwrap();
                prop_assert!(m.log_real() >= want.log_real() * (1.0 - 1e-12), "n={} {} < {}", n, m, want);
            }
        } else {
            prop_assert!(x0 < R_STAR || rec.points.iter().all(|p| p.z.is_none_or(|z| z.re < R_STAR)));
        }
    }

    #[test]
    fn certification_survives_longer_horizons(x0 in 1.0f64..200.0, n in 1usize..6, extra in 1usize..30) {
        let fx = fixture();
        let short = iterate_orbit(&fx.f, Complex::new(x0, 0.0), &orbit_cfg(n));
        let long = iterate_orbit(&fx.f, Complex::new(x0, 0.0), &orbit_cfg(n + extra));
        if short.certified_at.is_some() {
            prop_assert_eq!(short.certified_at, long.certified_at);
        }
    }

    #[test]
    fn packed_discs_are_disjoint_and_inside(log_r in 0.0f64..18.0, frac in 0.002f64..0.05, want in 1usize..40) {
        let frame = Frame::default();
        let r = 10f64.powf(log_r);
        let t = frac * r;
        if let Ok(p) = pack_discs(&frame, r, t, want) {
            prop_assert!(p.centres.len() >= want);
            for (i, a) in p.centres.iter().enumerate() {
                let m = a.norm();
                prop_assert!(m - 3.0 * t >= r * (1.0 - 1e-12) && m + 3.0 * t <= 2.0 * r * (1.0 + 1e-12));
                prop_assert!(a.arg().abs() + (3.0 * t / m).asin() <= frame.alpha() + 1e-12);
                for b in &p.centres[i + 1..] {
                    prop_assert!((a - b).norm() > 6.0 * t);
                }
            }
        }
    }

    #[test]
    fn regular_polygon_area(n in 3usize..200, radius in 1e-3f64..1e6) {
        let pts: Vec<Complex> = (0..n)
            .map(|k| Complex::from_polar(radius, std::f64::consts::TAU * k as f64 / n as f64))
            .collect();
        let want = 0.5 * n as f64 * (std::f64::consts::TAU / n as f64).sin() * radius * radius;
        prop_assert!((polygon_area(&pts) - want).abs() <= 1e-10 * want);
    }

    #[test]
    fn h_decreases(x in 1e-3f64..1e3, step in 1.0001f64..10.0) {
        prop_assert!(h(x) > h(x * step));
    }
}

#[test]
fn union_dimension_is_at_least_each_part() {
    let n = 600;
    let square: Vec<(f64, f64)> = (0..n * n)
        .map(|k| {
            (
                ((k % n) as f64 + 0.5) / n as f64 * 0.5,
                ((k / n) as f64 + 0.5) / n as f64 * 0.5,
            )
        })
        .collect();
    let segment: Vec<(f64, f64)> = (0..20_000).map(|k| (0.6 + k as f64 / 4e5, 0.9)).collect();
    // Coarse windows mix the two parts and flatten the slope; start where the
    // square already dominates the count.
    let scales = dyadic_scales(1.0, 3, 8);
    let a = box_counting(&square, &scales).unwrap().dimension;
    let b = box_counting(&segment, &scales).unwrap().dimension;
    let both: Vec<(f64, f64)> = square.iter().chain(&segment).copied().collect();
    let u = box_counting(&both, &scales).unwrap().dimension;
    assert!(u >= a.max(b) - 0.05, "union {u} vs {a}, {b}");
}
