//! Closed-form and independently computed reference values.

use fastescape::dimension::{dn_model, mcmullen_bound, NestingLevel};
use fastescape::dynamics::{iterate_orbit, julia_criterion, OrbitConfig};
use fastescape::function::{canonical, FamilyParams};
use fastescape::islands::{c2, find_positive_point, m_of_r, pack_discs, t_of_r};
use fastescape::modulus::{circle_max, CircleConfig, GrowthModel};
use fastescape::verify::{self, h, reproduce, CheckId};
use fastescape::{Complex, Error, Frame, Function};

fn cosh() -> Function {
    canonical("cosh-sqrt", &FamilyParams::default()).unwrap()
}

fn sigma() -> f64 {
    0.8f64.cos()
}

#[test]
fn product_matches_cosh_sqrt_off_axis() {
    let f = cosh();
    for (r, th) in [
        (0.5, 0.3),
        (7.0, 1.0),
        (150.0, 2.5),
        (3e4, 0.2),
        (2e6, -0.4),
    ] {
        let z = Complex::from_polar(r, th);
        let s = z.sqrt();
        // log cosh s = s + log(1 + e^{-2s}) - log 2, fine for Re s > 0.
        let want = s + ((-s * 2.0).exp() + 1.0).ln() - std::f64::consts::LN_2;
        let got = f.eval(z).unwrap();
        assert!(
            (got.re - want.re).abs() <= 1e-10 * (1.0 + want.re.abs()),
            "{z}: {got} vs {want}"
        );
        let k = ((want.im - got.im) / std::f64::consts::TAU).round();
        assert!((got.im + k * std::f64::consts::TAU - want.im).abs() < 1e-9);
    }
}

#[test]
fn log_derivative_matches_tanh() {
    let f = cosh();
    for z in [
        Complex::new(3.0, 1.0),
        Complex::new(400.0, -50.0),
        Complex::new(1e5, 3e4),
    ] {
        let s = z.sqrt();
        let want = s.tanh() / (s * 2.0);
        let got = f.eval_log_derivative(z).unwrap();
        assert!((got - want).norm() <= 1e-12 * want.norm());
    }
}

#[test]
fn max_modulus_sits_on_the_positive_axis() {
    let f = cosh();
    let cfg = CircleConfig::default();
    for r in [2.0, 50.0, 1e3, 1e5] {
        let cm = circle_max(&f, r, &cfg).unwrap();
        let want = f64::sqrt(r).cosh().ln();
        assert!((cm.log_max - want).abs() <= 1e-10 * want.abs().max(1.0));
        assert!(cm.angle.abs() < 1e-6);
    }
}

#[test]
fn frame_constants() {
    let s = sigma();
    assert!((s - 0.6967067).abs() < 1e-7);
    assert!((s.powi(4) / 4.0 - 0.0589).abs() < 1e-4);
    assert!((s.powi(2) / 8.0 - 0.06067).abs() < 1e-5);
    assert!((s.powi(6) / 64.0 - 0.001786).abs() < 1e-6);
    let want_c2 = 0.5 * s.powi(16) * 2f64.ln() / 512.0;
    assert!((c2(&Frame::default(), 1.0) - want_c2).abs() <= 1e-18);
}

#[test]
fn t_of_r_closed_form() {
    let f = cosh();
    let fr = Frame::default();
    let r = 1e6f64;
    // |f/f'| = 2√r / tanh √r.
    let want = 8.0 / sigma().powi(4) * 2.0 * r.sqrt() / r.sqrt().tanh();
    let got = t_of_r(&f, &fr, r, 30.0, 1.0).unwrap();
    assert!((got - want).abs() <= 1e-10 * want);
    // The quoted figure 67924 is a rounded estimate; the closed form gives 67907.85.
    assert!((got - 67924.0).abs() < 1e-3 * 67924.0);
    assert!((t_of_r(&f, &fr, r, 30.0, 2.0).unwrap() - 2.0 * got).abs() <= 1e-9 * got);
    assert!(matches!(
        t_of_r(&f, &fr, 10.0, 30.0, 1.0),
        Err(Error::ThresholdViolation { .. })
    ));
}

#[test]
fn island_count_at_ten_million() {
    let f = cosh();
    let fr = Frame::default();
    let r = 1e7f64;
    let t = 8.0 / sigma().powi(4) * 2.0 * r.sqrt() / r.sqrt().tanh();
    assert!((t - 2.148e5).abs() < 1e3);
    let want = (1e-3 * (r / t).powi(2)).floor() as usize;
    assert_eq!(want, 2);
    assert_eq!(m_of_r(&f, &fr, r, 30.0, 1e-3, 1.0).unwrap(), want);
    assert!(matches!(
        m_of_r(&f, &fr, r, 30.0, 0.0, 1.0),
        Err(Error::TooFewIslands)
    ));
}

#[test]
fn packing_counts() {
    let fr = Frame::default();
    let p = pack_discs(&fr, 1.0f64, 0.01, 50).unwrap();
    assert!(p.centres.len() >= 50);
    for (i, a) in p.centres.iter().enumerate() {
        for b in &p.centres[i + 1..] {
            assert!((a - b).norm() > 0.06);
        }
    }
    assert!(matches!(
        pack_discs(&fr, 1.0f64, 2.0, 1),
        Err(Error::PackingImpossible(_))
    ));
}

#[test]
fn positive_point_off_axis_at_ten_million() {
    let f = cosh();
    let r = 1e7f64;
    let t = 8.0 / sigma().powi(4) * 2.0 * r.sqrt() / r.sqrt().tanh();
    let beta = Complex::from_polar(r, 0.05);
    let p = find_positive_point(&f, beta, t).unwrap();
    assert!(p.iterations <= 20);
    assert!(p.residual < 1e-10);
    assert!((p.b - beta).norm() < t);
    let im = f.eval(p.b).unwrap().im;
    let wrapped = im - std::f64::consts::TAU * (im / std::f64::consts::TAU).round();
    assert!(wrapped.abs() < 1e-10);
}

#[test]
fn h_reference_values() {
    assert!((h(0.5f64) - 1.6479184).abs() < 1e-6);
    assert!((h(1.0f64) - 1.3862944).abs() < 1e-7);
    assert!(h(1.0f64) < h(0.5f64));
    assert!((h(1e6f64) - 1.0).abs() < 1e-6);
}

#[test]
fn witnesses_reproduce_their_margins() {
    let f = cosh();
    let fr = Frame::default();
    let cfg = CircleConfig::default();
    let radii = [100.0, 1e3, 1e4];
    for id in verify::SUITE {
        let out = verify::run_check(&f, &fr, id, &radii, 1.25, 500, &cfg).unwrap();
        let again = reproduce(&f, &fr, &out.report, &cfg).unwrap();
        let m = out.report.min_margin;
        assert!(
            (again - m).abs() <= 1e-9 * m.abs().max(1e-300),
            "{id}: {again} vs {m}"
        );
    }
    let out = verify::run_check(&f, &fr, CheckId::HDecreasing, &[], 1.0, 1000, &cfg).unwrap();
    assert_eq!(
        reproduce(&f, &fr, &out.report, &cfg).unwrap(),
        out.report.min_margin
    );
}

#[test]
fn orbit_of_twenty_by_direct_iteration() {
    let f = cosh();
    let rec = iterate_orbit(&f, Complex::new(20.0, 0.0), &OrbitConfig::default());
    let mut x = 20.0f64;
    for p in rec.points.iter().take(4) {
        let z = p.z.unwrap();
        assert!((z.re - x).abs() <= 1e-12 * x && z.im == 0.0);
        let zg = x.sqrt() * x.sqrt().tanh() / 2.0;
        assert!((p.zg.unwrap() - zg).abs() <= 1e-12 * zg);
        x = x.sqrt().cosh();
    }
    // The fifth point overflows f64; only its logarithm is kept.
    let last = rec.points[4];
    assert!(last.z.is_none());
    let log_last = rec.points[3].z.unwrap().re.sqrt() - std::f64::consts::LN_2;
    assert!((last.modulus.unwrap().log_real() - log_last).abs() <= 1e-9 * log_last);
    assert!(julia_criterion(&rec, 2.0, 0));
}

#[test]
fn mcmullen_fixtures() {
    let quarter: Vec<_> = (1..=10)
        .map(|n| NestingLevel::new(n, 0.25, 4f64.powi(-(n as i32)), "q").unwrap())
        .collect();
    assert!((mcmullen_bound(&quarter).unwrap().bound - 1.0).abs() < 1e-12);
    let bad = vec![NestingLevel::new(1, 0.5, 2.0, "d").unwrap()];
    assert!(matches!(
        mcmullen_bound(&bad),
        Err(Error::DegenerateDiameter { .. })
    ));
}

#[test]
fn dn_model_constants() {
    let f = cosh();
    let fr = Frame::default();
    let cfg = CircleConfig::default();
    let model = GrowthModel::fit(&f, &cfg).unwrap();
    let (rho0, big_r1) = (1.2e7, 4800.0);
    let dn = dn_model(&f, &fr, &model, 1.0, rho0, big_r1, 4, &cfg).unwrap();
    let s6 = sigma().powi(6);
    assert!((dn.c4 - s6 / 64.0).abs() < 1e-15);
    assert!((dn.c5 - 1536.0 * rho0 / s6).abs() <= 1e-9 * dn.c5);
    assert!((dn.c6 - (24.0 * rho0 * big_r1.ln()).ln()).abs() < 1e-12);
    // log d₁ = c₆ - log c₄ - log log M(R₁), with M(R₁) = cosh √R₁.
    let want = dn.c6 - dn.c4.ln() - big_r1.sqrt().cosh().ln().ln();
    assert!((dn.terms[0].log_d.to_real() - want).abs() < 1e-9);
    assert!(dn.dominated);
}
