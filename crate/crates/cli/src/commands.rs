use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use fastescape::dimension::{
    box_counting_raster, dn_model, mcmullen_bound, mcmullen_bound_tail, BoxFit, McMullenReport,
    NestingLevel,
};
use fastescape::dynamics::{
    first_entry, iterate_orbit, julia_criterion, render_grid, Class, FastEscapeTest, OrbitConfig,
};
use fastescape::function::FAMILIES;
use fastescape::io::{csv, num, parse_pgm, pgm, write_atomic, Manifest};
use fastescape::islands::{c2, TraceConfig};
use fastescape::lattice::geometric;
use fastescape::modulus::{GrowthModel, Iterate};
use fastescape::nesting::{construct as build, C3Inputs, ConstructConfig, Construction};
use fastescape::thresholds::{find_thresholds, rhobig_chain, ThresholdReport};
use fastescape::verify::{run_check, CheckId};
use fastescape::{Complex, Error, Frame, Function, Mag};

use crate::config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments.
    Config(String),
    /// A check ran and failed.
    Check(String),
    /// The requested construction cannot exist for these parameters.
    Infeasible(String),
    /// A numerical step gave up.
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Check(_) | CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration: {m}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
            CliError::Infeasible(m) => write!(f, "infeasible: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::TooFewIslands | Error::PackingImpossible(_) => {
                CliError::Infeasible(e.to_string())
            }
            Error::InvalidArgument(_)
            | Error::InvalidFrame(_)
            | Error::InvalidSequence(_)
            | Error::UnknownFamily(_)
            | Error::SectorViolation { .. }
            | Error::InsufficientScales(_)
            | Error::ThresholdViolation { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

type Result<T> = std::result::Result<T, CliError>;

struct Out<'a> {
    dir: &'a Path,
}

impl<'a> Out<'a> {
    fn open(cfg: &'a RunConfig) -> Result<Self> {
        let dir = cfg.run.output.as_path();
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir })
    }

    fn write(&self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        write_atomic(&path, text.as_bytes())
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

fn mag(m: Mag) -> String {
    m.value().map_or_else(|| m.to_string(), num)
}

fn iterate(it: &Iterate<f64>) -> String {
    match (it.magnitude, it.log_log) {
        (Some(m), _) => mag(m),
        (None, Some(ll)) => format!("loglog:{ll}"),
        _ => "-".into(),
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".into(), |x| x.to_string())
}

fn real(m: Mag, name: &str) -> Result<f64> {
    m.value()
        .ok_or_else(|| CliError::Numeric(format!("{name} = {m} does not fit a float")))
}

struct Setup {
    f: Function,
    frame: Frame,
}

fn setup(cfg: &RunConfig) -> Result<Setup> {
    Ok(Setup {
        f: cfg.function()?,
        frame: cfg.frame()?,
    })
}

/// Scans the thresholds and records them in `thresholds.txt`.
fn thresholds(cfg: &RunConfig, s: &Setup, out: &Out) -> Result<ThresholdReport<f64>> {
    let rep = find_thresholds(&s.f, &s.frame, &cfg.scan())?;
    let mut m = Manifest::new();
    for (name, v) in rep.thresholds.entries() {
        m.push(name, mag(v));
    }
    m.push("n0", rep.thresholds.n0)
        .push("ordered", rep.thresholds.ordered())
        .push("rho0_dominates", rep.thresholds.rho0_dominates(&s.frame))
        .push("islands_at_r2", rep.islands_at_r2)
        .push("achieved_c1", num(rep.achieved_c1))
        .push("scan_rows", rep.rows.len());
    out.write("thresholds.txt", &m.render())?;
    Ok(rep)
}

pub fn verify(cfg: &RunConfig) -> Result<()> {
    let s = setup(cfg)?;
    let out = Out::open(cfg)?;
    let v = &cfg.verify;
    let circle = cfg.circle();
    let (ids, chain) = cfg.selected_checks();
    let needs_radii = ids
        .iter()
        .any(|id| !matches!(id, CheckId::SectorCosine | CheckId::HDecreasing));
    let rep = if needs_radii || chain {
        Some(thresholds(cfg, &s, &out)?)
    } else {
        None
    };
    let radii = match &rep {
        Some(r) => {
            let r1 = real(r.thresholds.r1, "r1")?;
            geometric(r1, v.span * r1, v.ratio)
        }
        None => Vec::new(),
    };

    let mut m = Manifest::new();
    m.push("radii", radii.len());
    let mut failed = Vec::new();
    for id in &ids {
        let o = run_check(&s.f, &s.frame, *id, &radii, v.ratio, v.samples, &circle)?;
        let r = &o.report;
        let name = id.name();
        m.push(format!("{name}.pass"), r.pass)
            .push(format!("{name}.samples"), r.sample_count)
            .push(format!("{name}.min_margin"), num(r.min_margin))
            .push(format!("{name}.lhs"), num(r.lhs))
            .push(format!("{name}.rhs"), num(r.rhs))
            .push(format!("{name}.witness"), r.witness);
        println!(
            "{:<24} {} margin {:.4e}",
            name,
            if r.pass { "pass" } else { "FAIL" },
            r.min_margin
        );
        if !r.pass {
            failed.push(name.to_string());
        }
        if v.write_rows {
            let rows = o.rows.iter().enumerate().map(|(i, row)| {
                vec![
                    i.to_string(),
                    num(row.point.re),
                    num(row.point.im),
                    num(row.lhs),
                    num(row.rhs),
                    num(row.margin),
                ]
            });
            out.write(
                &format!("check-{name}.csv"),
                &csv(&["sample", "re", "im", "lhs", "rhs", "margin"], rows),
            )?;
        }
    }

    if chain {
        let rep = rep.as_ref().expect("scanned when the chain is selected");
        let steps = rhobig_chain(
            &s.f,
            &s.frame,
            &rep.model,
            &rep.thresholds,
            v.chain_k,
            &circle,
        );
        let holds = steps.len() == v.chain_k && steps.iter().all(|st| st.holds());
        let rows = steps.iter().map(|st| {
            vec![
                st.k.to_string(),
                iterate(&st.mu_rho0),
                iterate(&st.m_scaled),
                iterate(&st.m_r1),
                st.left.to_string(),
                st.right.to_string(),
                format!("{:?}", st.level).to_lowercase(),
                st.certified.to_string(),
            ]
        });
        out.write(
            "rhobig-chain.csv",
            &csv(
                &[
                    "k",
                    "mu_rho0",
                    "m_scaled",
                    "m_r1",
                    "left",
                    "right",
                    "level",
                    "certified",
                ],
                rows,
            ),
        )?;
        m.push("rhobig-chain.pass", holds)
            .push("rhobig-chain.k", v.chain_k);
        println!(
            "{:<24} {}",
            "rhobig-chain",
            if holds { "pass" } else { "FAIL" }
        );
        if !holds {
            failed.push("rhobig-chain".into());
        }
    }
    m.push("failed", failed.len());
    out.write("verify.txt", &m.render())?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(failed.join(", ")))
    }
}

fn run_construction(cfg: &RunConfig, s: &Setup, out: &Out) -> Result<Construction<f64>> {
    let c = &cfg.construct;
    let r1 = match c.r1 {
        Some(r1) => r1,
        None => real(thresholds(cfg, s, out)?.thresholds.r1, "r1")?,
    };
    let cc = ConstructConfig {
        nu: cfg.constants.nu,
        c1: cfg.constants.c1,
        trace: TraceConfig {
            mesh: c.mesh,
            ..TraceConfig::default()
        },
        koebe_samples: c.koebe_samples,
        distortion_samples: c.distortion_samples,
        levels: c.levels,
        ..ConstructConfig::new(c.radius, r1)
    };
    Ok(build(&s.f, &s.frame, &cc)?)
}

pub fn construct(cfg: &RunConfig) -> Result<()> {
    let s = setup(cfg)?;
    let out = Out::open(cfg)?;
    let c = run_construction(cfg, &s, &out)?;

    let rows = c.islands.iter().enumerate().flat_map(|(i, isl)| {
        isl.boundary
            .iter()
            .enumerate()
            .map(move |(k, z)| vec![i.to_string(), k.to_string(), num(z.re), num(z.im)])
    });
    out.write("islands.csv", &csv(&["island", "vertex", "re", "im"], rows))?;

    let rows = c.levels.iter().map(|lv| {
        vec![
            lv.level.to_string(),
            lv.parents.to_string(),
            lv.count.to_string(),
            num(lv.density),
            num(lv.parent_diameter),
            num(lv.max_child_diameter),
            num(lv.c3),
            num(lv.density_margin),
            opt(lv.fdiam_margin.map(num)),
            lv.all_contained.to_string(),
            lv.synthetic.to_string(),
        ]
    });
    out.write(
        "nesting.csv",
        &csv(
            &[
                "level",
                "parents",
                "count",
                "density",
                "parent_diameter",
                "max_child_diameter",
                "c3",
                "density_margin",
                "fdiam_margin",
                "all_contained",
                "synthetic",
            ],
            rows,
        ),
    )?;

    let rows = c.children.iter().enumerate().flat_map(|(p, kids)| {
        kids.iter().enumerate().map(move |(k, ch)| {
            vec![
                p.to_string(),
                k.to_string(),
                num(ch.area),
                num(ch.diameter),
                opt(ch.fdiam_bound.map(num)),
                ch.contained.to_string(),
            ]
        })
    });
    out.write(
        "children.csv",
        &csv(
            &[
                "parent",
                "child",
                "area",
                "diameter",
                "fdiam_bound",
                "contained",
            ],
            rows,
        ),
    )?;

    let mut m = Manifest::new();
    m.push("r", num(c.r))
        .push("t", num(c.t))
        .push("m", c.m)
        .push("packed", c.packed)
        .push("traced", c.islands.len())
        .push("failures", c.failures.len())
        .push("c2_formula", num(c.c2_formula))
        .push("c1_measured", num(c.c3.c1))
        .push("c2_measured", num(c.c3.c2))
        .push("distortion", num(c.c3.distortion))
        .push("c3", num(c.c3.c3(&s.frame)))
        .push("next_level_precision", num(c.next_level_precision))
        .push("all_pass", c.all_pass());
    for (i, (isl, k)) in c.islands.iter().zip(&c.koebe).enumerate() {
        m.push(
            format!("island.{i}.b"),
            format!("{} {}", num(isl.b.re), num(isl.b.im)),
        )
        .push(format!("island.{i}.area_ratio"), num(isl.area_ratio()))
        .push(
            format!("island.{i}.forward_residual"),
            num(isl.forward_residual),
        )
        .push(format!("island.{i}.koebe_ratio"), num(k.max_ratio))
        .push(
            format!("island.{i}.pass"),
            isl.passes(c.c2_formula) && k.pass,
        );
    }
    for (i, (z, e)) in c.failures.iter().enumerate() {
        m.push(
            format!("failure.{i}"),
            format!("{} {}: {e}", num(z.re), num(z.im)),
        );
    }
    out.write("islands.txt", &m.render())?;

    println!(
        "r = {:e}: t = {:.6e}, m = {}, {} of {} packed discs traced",
        c.r,
        c.t,
        c.m,
        c.islands.len(),
        c.packed
    );
    for lv in &c.levels {
        println!(
            "level {}: {} sets, density {:.3e} (margin {:.3e}), max diameter {:.3e}",
            lv.level, lv.count, lv.density, lv.density_margin, lv.max_child_diameter
        );
    }
    if c.all_pass() {
        Ok(())
    } else {
        Err(CliError::Check(format!(
            "{} trace failures, {} islands below the bounds",
            c.failures.len(),
            c.islands
                .iter()
                .zip(&c.koebe)
                .filter(|(i, k)| !(i.passes(c.c2_formula) && k.pass))
                .count()
        )))
    }
}

pub fn render(cfg: &RunConfig) -> Result<()> {
    let s = setup(cfg)?;
    let out = Out::open(cfg)?;
    let r = &cfg.render;
    let circle = cfg.circle();
    let (r_star, base, model) = match (r.r_star, r.base) {
        (Some(a), Some(b)) => (a, b, GrowthModel::fit(&s.f, &circle)?),
        (a, b) => {
            let rep = thresholds(cfg, &s, &out)?;
            let r_star = match a {
                Some(v) => v,
                None => real(rep.thresholds.r1, "r1")?,
            };
            let base = match b {
                Some(v) => v,
                None => real(rep.thresholds.r0, "r0")?,
            };
            (r_star, base, rep.model)
        }
    };
    let test = FastEscapeTest::new(&s.f, &s.frame, &model, r_star, base, r.n_max, &circle);
    let orbit = OrbitConfig {
        n_max: r.n_max,
        bounded_radius: r.bounded_radius,
        ..OrbitConfig::default()
    };
    let (lo, hi) = (
        Complex::new(r.lo[0], r.lo[1]),
        Complex::new(r.hi[0], r.hi[1]),
    );
    let g = render_grid(&s.f, &test, lo, hi, r.width, r.height, r.max_pixels, &orbit)?;

    let codes: Vec<u16> = g.classes.iter().map(|c| u16::from(c.code()) * 85).collect();
    out.write("classes.pgm", &pgm(g.width, g.height, 255, &codes))?;
    // 0 marks no escape; otherwise the escape time plus one.
    let cap = u16::try_from(r.n_max + 1).unwrap_or(u16::MAX);
    let times: Vec<u16> = g
        .escape
        .iter()
        .map(|e| e.map_or(0, |n| u16::try_from(n + 1).unwrap_or(cap).min(cap)))
        .collect();
    out.write("escape.pgm", &pgm(g.width, g.height, cap.max(1), &times))?;

    let classes = [
        Class::Unknown,
        Class::BoundedWindow,
        Class::EscapeEmpirical,
        Class::ACertified,
    ];
    let mut m = Manifest::new();
    m.push("width", g.width)
        .push("height", g.height)
        .push("lo", format!("{} {}", num(lo.re), num(lo.im)))
        .push("hi", format!("{} {}", num(hi.re), num(hi.im)))
        .push("r_star", num(r_star))
        .push("base", num(base))
        .push("n_max", r.n_max);
    for c in classes {
        m.push(format!("count.{}", c.label()), g.count(c));
        println!("{:<18} {}", c.label(), g.count(c));
    }
    out.write("render.txt", &m.render())?;

    if !r.points.is_empty() {
        let cfg_trap = OrbitConfig {
            trap: Some(test.trap()),
            ..orbit
        };
        let rows = r.points.iter().map(|p| {
            let z0 = Complex::new(p[0], p[1]);
            let rec = iterate_orbit(&s.f, z0, &cfg_trap);
            let entry = first_entry(&rec, &s.frame, r_star);
            let julia = entry.map(|n| julia_criterion(&rec, r.lambda, n));
            vec![
                num(z0.re),
                num(z0.im),
                test.classify(&rec).label().to_string(),
                rec.termination.label().to_string(),
                opt(rec.certified_at),
                opt(rec.escape_time),
                opt(entry),
                opt(julia),
                match julia {
                    Some(true) if r.no_multiply_connected => "julia",
                    Some(true) => "julia-or-multiply-connected",
                    _ => "-",
                }
                .to_string(),
            ]
        });
        out.write(
            "points.csv",
            &csv(
                &[
                    "re",
                    "im",
                    "class",
                    "termination",
                    "certified_at",
                    "escape_time",
                    "first_entry",
                    "criterion",
                    "conclusion",
                ],
                rows,
            ),
        )?;
    }
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// `n,delta,d` rows after a header line.
fn parse_levels(text: &str) -> Result<Vec<NestingLevel<f64>>> {
    let bad = |line: usize, what: &str| CliError::Config(format!("levels line {line}: {what}"));
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let cells: Vec<&str> = l.split(',').map(str::trim).collect();
            let [n, delta, d] = cells[..] else {
                return Err(bad(i + 1, "expected n,delta,d"));
            };
            let n: usize = n.parse().map_err(|_| bad(i + 1, "bad n"))?;
            let delta: f64 = delta.parse().map_err(|_| bad(i + 1, "bad delta"))?;
            let d: f64 = d.parse().map_err(|_| bad(i + 1, "bad d"))?;
            Ok(NestingLevel::new(n, delta, d, format!("line {}", i + 1))?)
        })
        .collect()
}

fn write_mcmullen(out: &Out, m: &mut Manifest, rep: &McMullenReport<f64>) -> Result<()> {
    let rows = rep.trend.iter().map(|p| {
        vec![
            p.n.to_string(),
            num(p.sum_log_delta),
            p.log_d.to_string(),
            opt(p.ratio),
        ]
    });
    out.write(
        "dimension.csv",
        &csv(&["n", "sum_log_delta", "log_d", "ratio"], rows),
    )?;
    m.push("bound", num(rep.bound)).push("worst_n", rep.worst_n);
    println!(
        "McMullen lower bound {:.6} (worst n = {})",
        rep.bound, rep.worst_n
    );
    Ok(())
}

fn write_box(out: &Out, m: &mut Manifest, fit: &BoxFit<f64>) -> Result<()> {
    let rows = fit
        .counts
        .iter()
        .map(|(eps, n)| vec![num(*eps), n.to_string()]);
    out.write("dimension.csv", &csv(&["eps", "count"], rows))?;
    m.push("dimension", num(fit.dimension))
        .push("intercept", num(fit.intercept))
        .push("residual_rms", num(fit.residual_rms))
        .push("max_residual", num(fit.max_residual));
    println!(
        "box-counting dimension {:.6} over {} scales",
        fit.dimension,
        fit.counts.len()
    );
    Ok(())
}

pub fn dimension(cfg: &RunConfig) -> Result<()> {
    let d = &cfg.dimension;
    let out = Out::open(cfg)?;
    let mut m = Manifest::new();
    m.push("source", &d.source);
    match d.source.as_str() {
        "levels" => {
            let text = read(d.input.as_deref().expect("validated"))?;
            let levels = parse_levels(&text)?;
            write_mcmullen(&out, &mut m, &mcmullen_bound(&levels)?)?;
        }
        "raster" => {
            let text = read(d.input.as_deref().expect("validated"))?;
            let (w, h, _, values) = parse_pgm(&text)
                .ok_or_else(|| CliError::Config("input is not a P2 greymap".into()))?;
            let mask: Vec<bool> = values.iter().map(|&v| v >= d.threshold).collect();
            m.push("pixels", mask.iter().filter(|&&b| b).count());
            write_box(&out, &mut m, &box_counting_raster(&mask, w, h)?)?;
        }
        "construct" => {
            let s = setup(cfg)?;
            let c = run_construction(cfg, &s, &out)?;
            let levels = c.nesting_levels(&s.frame)?;
            m.push("levels", levels.len())
                .push("all_pass", c.all_pass());
            write_mcmullen(&out, &mut m, &mcmullen_bound_tail(&levels)?)?;
        }
        "model" => {
            let s = setup(cfg)?;
            let rep = thresholds(cfg, &s, &out)?;
            let th = &rep.thresholds;
            let nu = cfg.constants.nu;
            let c3 = C3Inputs {
                c1: cfg.constants.c1,
                c2: c2(&s.frame, nu),
                distortion: 1.0,
            }
            .c3(&s.frame);
            let model = dn_model(
                &s.f,
                &s.frame,
                &rep.model,
                nu,
                real(th.rho0, "rho0")?,
                real(th.big_r1, "R1")?,
                d.n_max,
                &cfg.circle(),
            )?;
            let levels = model
                .terms
                .iter()
                .map(|t| NestingLevel::from_log_d(t.n, c3, t.log_d, "diameter model"))
                .collect::<fastescape::Result<Vec<_>>>()?;
            m.push("c3", num(c3))
                .push("c4", num(model.c4))
                .push("c5", num(model.c5))
                .push("c6", num(model.c6))
                .push("dominated", model.dominated)
                .push("certified", model.terms.iter().all(|t| t.certified));
            let rep = mcmullen_bound_tail(&levels)?;
            // The lim sup only sees the tail: the ratios should fall towards
            // zero, and the last one is the best finite estimate.
            let ratios: Vec<_> = rep.trend.iter().filter_map(|p| p.ratio).collect();
            let falling = ratios.windows(2).all(|w| w[1] < w[0]);
            let last = ratios.last().map(|r| 2.0 - r.to_real());
            write_mcmullen(&out, &mut m, &rep)?;
            m.push("ratios_decreasing", falling)
                .push("last_level_estimate", opt(last.map(num)));
            if let Some(e) = last {
                println!("last-level estimate {e:.6} (ratios decreasing: {falling})");
            }
        }
        other => unreachable!("validated source {other}"),
    }
    out.write("dimension.txt", &m.render())?;
    Ok(())
}

pub fn info(cfg: &RunConfig) -> Result<()> {
    let mut text = format!(
        "fastescape {}\nfamilies: {}\n",
        env!("CARGO_PKG_VERSION"),
        FAMILIES.join(", ")
    );
    match cfg.frame() {
        Ok(fr) => {
            text += &format!(
            "frame: sigma = {:.10}, alpha = {:.10}, doubling factor = {:.10}, c2(nu) = {:.6e}\n",
            fr.sigma(),
            fr.alpha(),
            fr.doubling_factor(),
            c2(&fr, cfg.constants.nu)
        )
        }
        Err(e) => text += &format!("frame: {e}\n"),
    }
    match cfg.function() {
        Ok(f) => {
            text += &format!(
                "function: q = {}, preserves positive axis: {}, evaluation radius {:.6e}\n",
                f.q(),
                f.preserves_positive_axis(),
                f.evaluation_radius()
            )
        }
        Err(e) => text += &format!("function: {e}\n"),
    }
    text += "\n";
    text += &cfg.canonical();
    // A closed pipe (`info | head`) is not an error.
    let _ = std::io::stdout().write_all(text.as_bytes());
    Ok(())
}
