//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL line
//! each, and exits non-zero if any failed.

use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use fastescape::dimension::{
    box_counting, dn_model, dyadic_scales, mcmullen_bound, mcmullen_trend, NestingLevel,
};
use fastescape::dynamics::{
    iterate_orbit, julia_criterion, render_grid, Class, FastEscapeTest, OrbitConfig, Termination,
};
use fastescape::function::{canonical, FamilyParams};
use fastescape::io::pgm;
use fastescape::lattice::geometric;
use fastescape::modulus::{growth_diagnostic, max_modulus_log, strictly_increasing, CircleConfig};
use fastescape::nesting::{construct, ConstructConfig};
use fastescape::thresholds::{find_thresholds, rhobig_chain, ScanConfig, ThresholdReport};
use fastescape::verify::{h, run_check, CheckId, SUITE};
use fastescape::{Complex, Frame, Function, Mag};

struct Ctx {
    f: Function,
    frame: Frame,
    scan: ScanConfig<f64>,
    report: OnceLock<ThresholdReport<f64>>,
}

impl Ctx {
    fn thresholds(&self) -> &ThresholdReport<f64> {
        self.report.get_or_init(|| {
            let t = Instant::now();
            let rep = find_thresholds(&self.f, &self.frame, &self.scan).expect("thresholds");
            println!("  (threshold scan took {:.1} s)", t.elapsed().as_secs_f64());
            rep
        })
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(t: Instant, budget: Duration) -> (bool, String) {
    let e = t.elapsed();
    (
        e < budget,
        format!("{:.2} s of {} s", e.as_secs_f64(), budget.as_secs()),
    )
}

/// `log cosh x` without overflow.
fn log_cosh(x: f64) -> f64 {
    x + (-2.0 * x).exp().ln_1p() - std::f64::consts::LN_2
}

fn closed_form_modulus(ctx: &Ctx) -> Outcome {
    let t = Instant::now();
    let f = canonical("cosh-sqrt", &FamilyParams::<f64>::default()).unwrap();
    let cfg = CircleConfig::default();
    let mut worst = 0.0f64;
    for r in [1.0, 4.0, 1e2, 1e4, 1e6] {
        let got = max_modulus_log(&f, Mag::from_value(r), &cfg)
            .unwrap()
            .log_real();
        let want = log_cosh(f64::sqrt(r));
        worst = worst.max((got - want).abs() / want.abs());
    }
    let _ = ctx;
    let (fast, time) = within(t, Duration::from_secs(1));
    outcome(
        worst <= 1e-9 && fast,
        format!("max relative error {worst:.2e}, {time}"),
    )
}

fn inequality_suite(ctx: &Ctx) -> Outcome {
    let r1 = ctx.thresholds().thresholds.r1.value().unwrap();
    let radii = geometric(r1, 10.0 * r1, 1.25);
    let t = Instant::now();
    let mut all = true;
    let mut parts = Vec::new();
    for id in SUITE {
        let out = run_check(
            &ctx.f,
            &ctx.frame,
            id,
            &radii,
            1.25,
            10_000,
            &ctx.scan.circle,
        )
        .unwrap();
        all &= out.report.pass && out.report.min_margin >= 0.0;
        parts.push(format!("{}={:.3e}", id, out.report.min_margin));
    }
    let (fast, time) = within(t, Duration::from_secs(60));
    outcome(
        all && fast,
        format!(
            "r1={r1:.4}, {} radii, min margins [{}], {time}",
            radii.len(),
            parts.join(" ")
        ),
    )
}

fn scalar_claims(ctx: &Ctx) -> Outcome {
    let hd = run_check(
        &ctx.f,
        &ctx.frame,
        CheckId::HDecreasing,
        &[],
        1.0,
        10_000,
        &ctx.scan.circle,
    )
    .unwrap();
    let floor = 3f64.powf(1.5);
    let radii = geometric(floor, 1e10, 1.25);
    let lr = run_check(
        &ctx.f,
        &ctx.frame,
        CheckId::LogRatio,
        &radii,
        1.25,
        0,
        &ctx.scan.circle,
    )
    .unwrap();
    let h_half = h(0.5f64);
    let h_ok = (h_half - 1.6479184).abs() <= 1e-6 && (h_half - 1.5 * 3f64.ln()).abs() <= 1e-15;
    outcome(
        hd.report.pass && lr.report.pass && h_ok,
        format!(
            "h decreasing margin {:.3e} over {} points; log-ratio margin {:.3e} over {} (r, n) pairs; h(1/2) = {h_half:.9}",
            hd.report.min_margin, hd.report.sample_count + 1, lr.report.min_margin, lr.report.sample_count
        ),
    )
}

fn threshold_chain(ctx: &Ctx) -> Outcome {
    let frame = ctx.frame;
    let rep = ctx.thresholds();
    let th = &rep.thresholds;
    let s2 = frame.sigma() * frame.sigma();
    let rho0 = th.rho0.value().unwrap();
    let dominates = s2 * rho0 >= th.r2.value().unwrap().max(th.big_r1.value().unwrap());
    let chain = rhobig_chain(&ctx.f, &frame, &rep.model, th, 3, &ctx.scan.circle);
    let chain_ok = chain.len() == 3 && chain.iter().all(|s| s.holds());
    let levels: Vec<String> = chain
        .iter()
        .map(|s| format!("k={} {:?}", s.k, s.level))
        .collect();
    outcome(
        th.ordered() && dominates && th.rho0_dominates(&frame) && chain_ok,
        format!(
            "r0={:.4} r1={:.4} r2={:.4e} R1={:.4e} rho0={:.4e}; chain [{}]",
            th.r0.value().unwrap(),
            th.r1.value().unwrap(),
            th.r2.value().unwrap(),
            th.big_r1.value().unwrap(),
            rho0,
            levels.join(", ")
        ),
    )
}

fn island_construction(ctx: &Ctx) -> Outcome {
    let r1 = ctx.thresholds().thresholds.r1.value().unwrap();
    let t = Instant::now();
    let cfg = ConstructConfig::new(1e7, r1);
    let c = match construct(&ctx.f, &ctx.frame, &cfg) {
        Ok(c) => c,
        Err(e) => return outcome(false, format!("construction failed: {e}")),
    };
    let sigma = 0.8f64.cos();
    let c2 = 0.5 * sigma.powi(16) * 2f64.ln() / 512.0;
    let ok_islands = c
        .islands
        .iter()
        .zip(&c.koebe)
        .filter(|(i, k)| {
            i.forward_residual < 1e-8 && i.area / (i.t * i.t) >= c2 && k.pass && k.max_ratio <= 12.0
        })
        .count();
    let min_ratio = c
        .islands
        .iter()
        .map(|i| i.area / (i.t * i.t))
        .fold(f64::INFINITY, f64::min);
    let worst_res = c
        .islands
        .iter()
        .map(|i| i.forward_residual)
        .fold(0.0, f64::max);
    let koebe = c.koebe.iter().map(|k| k.max_ratio).fold(0.0, f64::max);
    let (fast, time) = within(t, Duration::from_secs(300));
    outcome(
        c.islands.len() >= 2 && ok_islands == c.islands.len() && fast,
        format!(
            "{} islands, residual <= {worst_res:.2e}, area/t^2 >= {min_ratio:.3e} (c2 = {c2:.4e}), Koebe ratio <= {koebe:.3}, {time}",
            c.islands.len()
        ),
    )
}

fn mcmullen_oracles(ctx: &Ctx) -> Outcome {
    let quarter: Vec<_> = (1..=10)
        .map(|n| NestingLevel::new(n, 0.25, 4f64.powi(-(n as i32)), "fixture").unwrap())
        .collect();
    let b1 = mcmullen_bound(&quarter).unwrap().bound;
    let ones: Vec<_> = (1..=10)
        .map(|n| NestingLevel::new(n, 1.0, 4f64.powi(-(n as i32)), "fixture").unwrap())
        .collect();
    let b2 = mcmullen_bound(&ones).unwrap().bound;

    let frame = ctx.frame;
    let rep = ctx.thresholds();
    let th = &rep.thresholds;
    let sigma = frame.sigma();
    // c₃ with c₁ = 10⁻³, c₂ from its formula at ν = 1 and C = 1.
    let c2 = frame.alpha() * sigma.powi(16) * 2f64.ln() / 512.0;
    let c3 = 1e-3 * c2 / (8.0 * frame.alpha() * 2f64.ln());
    let model = dn_model(
        &ctx.f,
        &frame,
        &rep.model,
        1.0,
        th.rho0.value().unwrap(),
        th.big_r1.value().unwrap(),
        4,
        &ctx.scan.circle,
    )
    .unwrap();
    let levels: Vec<_> = model
        .terms
        .iter()
        .map(|t| NestingLevel::from_log_d(t.n, c3, t.log_d, "dn model").unwrap())
        .collect();
    let trend = mcmullen_trend(&levels).unwrap();
    let ratios: Vec<_> = trend
        .iter()
        .filter(|p| (2..=4).contains(&p.n))
        .map(|p| p.ratio)
        .collect();
    let decreasing = ratios.len() == 3
        && ratios.iter().all(Option::is_some)
        && ratios.windows(2).all(|w| w[1].unwrap() < w[0].unwrap());
    let shown: Vec<String> = ratios
        .iter()
        .map(|r| r.map_or("-".into(), |x| x.to_scientific(3)))
        .collect();
    outcome(
        (b1 - 1.0).abs() <= 1e-9 && b2 == 2.0 && decreasing,
        format!(
            "quarter bound {b1:.12}, unit bound {b2}, c3 = {c3:.3e}, ratios n=2..4 [{}]",
            shown.join(", ")
        ),
    )
}

fn cantor_dust(depth: u32) -> Vec<(f64, f64)> {
    let mut line = vec![0.0f64];
    let mut w = 1.0;
    for _ in 0..depth {
        w /= 3.0;
        line = line.iter().flat_map(|&a| [a, a + 2.0 * w]).collect();
    }
    let centres: Vec<f64> = line.iter().map(|a| a + w / 2.0).collect();
    // The corner (0, 0) belongs to the set and anchors the box grid at the
    // origin, keeping every centre strictly inside its triadic box.
    let mut pts = vec![(0.0, 0.0)];
    pts.extend(
        centres
            .iter()
            .flat_map(|&x| centres.iter().map(move |&y| (x, y))),
    );
    pts
}

fn box_counting_oracles(_ctx: &Ctx) -> Outcome {
    let n = 1000;
    let square: Vec<(f64, f64)> = (0..n * n)
        .map(|k| {
            (
                ((k % n) as f64 + 0.5) / n as f64,
                ((k / n) as f64 + 0.5) / n as f64,
            )
        })
        .collect();
    let d_sq = box_counting(&square, &dyadic_scales(1.0, 1, 6))
        .unwrap()
        .dimension;
    let segment: Vec<(f64, f64)> = (0..100_000)
        .map(|k| k as f64 / 1e5)
        .map(|t| (t, 0.5 * t))
        .collect();
    let d_seg = box_counting(&segment, &dyadic_scales(1.0, 1, 10))
        .unwrap()
        .dimension;
    let triadic: Vec<f64> = (1..=6).map(|k| 3f64.powi(-k)).collect();
    let d_cantor = box_counting(&cantor_dust(8), &triadic).unwrap().dimension;
    let cantor = 4f64.ln() / 3f64.ln();
    outcome(
        (d_sq - 2.0).abs() <= 0.05
            && (d_seg - 1.0).abs() <= 0.05
            && (d_cantor - cantor).abs() <= 0.05,
        format!(
            "square {d_sq:.4}, segment {d_seg:.4}, Cantor dust {d_cantor:.4} (want {cantor:.4})"
        ),
    )
}

/// Root of `cosh √x = x` in `[2, 3]` by bisection.
fn fixed_point() -> f64 {
    let phi = |x: f64| x.sqrt().cosh() - x;
    let (mut a, mut b) = (2.0, 3.0);
    assert!(phi(a) > 0.0 && phi(b) < 0.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if phi(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn classification_oracles(ctx: &Ctx) -> Outcome {
    let rep = ctx.thresholds();
    let th = &rep.thresholds;
    let test = FastEscapeTest::new(
        &ctx.f,
        &ctx.frame,
        &rep.model,
        th.r1.value().unwrap(),
        th.r0.value().unwrap(),
        64,
        &ctx.scan.circle,
    );
    let cfg = OrbitConfig {
        trap: Some(test.trap()),
        ..OrbitConfig::default()
    };
    let x_star = fixed_point();
    let one = iterate_orbit(&ctx.f, Complex::new(1.0, 0.0), &cfg);
    let last = one.points.last().unwrap().z.unwrap();
    let gap = (last - x_star).norm();
    let one_ok = one.termination == Termination::BoundedWindow
        && test.classify(&one) == Class::BoundedWindow
        && gap < 1e-6;

    let twenty = iterate_orbit(&ctx.f, Complex::new(20.0, 0.0), &cfg);
    let z1 = twenty.points[1].z.unwrap();
    let z1_ok = (z1.re - 20f64.sqrt().cosh()).abs() <= 1e-12 * z1.re;
    let twenty_ok =
        test.classify(&twenty) == Class::ACertified && julia_criterion(&twenty, 2.0, 0) && z1_ok;

    let (lo, hi) = (Complex::new(-40.0, -30.0), Complex::new(80.0, 30.0));
    let raster = || {
        let g = render_grid(
            &ctx.f,
            &test,
            lo,
            hi,
            96,
            48,
            1 << 20,
            &OrbitConfig::default(),
        )
        .unwrap();
        let codes: Vec<u16> = g.classes.iter().map(|c| u16::from(c.code()) * 85).collect();
        pgm(g.width, g.height, 255, &codes)
    };
    let identical = raster() == raster();
    outcome(
        one_ok && twenty_ok && identical,
        format!(
            "z0=1 -> {} at distance {gap:.1e} from x* = {x_star:.10}; z0=20 -> {} (z1 = {:.4}); rasters identical: {identical}",
            test.classify(&one).label(),
            test.classify(&twenty).label(),
            z1.re
        ),
    )
}

/// `log log Mⁿ(R)` for `M(r) = cosh √r`, from the closed form.
fn cosh_tower(r: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut log_m = log_cosh(r.sqrt());
    for _ in 0..n_max {
        out.push(log_m.ln());
        // log M(M) = log cosh(exp(log_m / 2)); once that overflows, the
        // exponent alone is log log of the next value.
        let half = log_m / 2.0;
        log_m = if half < 700.0 {
            log_cosh(half.exp())
        } else {
            f64::INFINITY
        };
        if log_m.is_infinite() {
            out.push(half);
            break;
        }
    }
    out.truncate(n_max);
    out
}

fn growth_diagnostic_check(ctx: &Ctx) -> Outcome {
    let rep = ctx.thresholds();
    let big_r0 = rep.thresholds.big_r0;
    let terms = growth_diagnostic(&ctx.f, &rep.model, big_r0, 4, &ctx.scan.circle);
    let oracle: Vec<f64> = cosh_tower(big_r0.value().unwrap(), 4)
        .iter()
        .enumerate()
        .map(|(i, ll)| ll / (i + 1) as f64)
        .collect();
    let oracle_up = oracle.len() == 4 && oracle.windows(2).all(|w| w[1] > w[0]);
    let shown: Vec<String> = terms
        .iter()
        .zip(&oracle)
        .map(|(t, o)| {
            format!(
                "{}: {} (closed form {o:.4e})",
                t.n,
                t.value.map_or("-".into(), |v| v.to_scientific(4))
            )
        })
        .collect();
    outcome(
        terms.len() == 4 && strictly_increasing(&terms) && oracle_up,
        format!("R0={:.4}; {}", big_r0.value().unwrap(), shown.join("; ")),
    )
}

fn main() -> ExitCode {
    let ctx = Ctx {
        f: canonical("cosh-sqrt", &FamilyParams::default()).unwrap(),
        frame: Frame::default(),
        scan: ScanConfig::default(),
        report: OnceLock::new(),
    };
    type Criterion = fn(&Ctx) -> Outcome;
    let criteria: [(&str, Criterion); 9] = [
        ("closed-form modulus oracle", closed_form_modulus),
        ("inequality suite on [r1, 10 r1]", inequality_suite),
        ("scalar claims (h, log ratio)", scalar_claims),
        ("threshold chain", threshold_chain),
        ("island construction at r = 1e7", island_construction),
        ("McMullen estimator oracles", mcmullen_oracles),
        ("box-counting oracles", box_counting_oracles),
        ("classification oracles", classification_oracles),
        ("growth diagnostic", growth_diagnostic_check),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run(&ctx);
        failed += usize::from(!o.pass);
        println!(
            "{} {}. {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
