//! Run configuration: TOML-style `[section]` blocks of `key = value` lines.
//! Every key has a default except `function.family`.

use std::path::PathBuf;

use fastescape::function::{canonical, FamilyParams, FAMILIES};
use fastescape::modulus::CircleConfig;
use fastescape::thresholds::ScanConfig;
use fastescape::verify::CheckId;
use fastescape::{Complex, Frame, Function};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub function: FunctionSection,
    pub frame: FrameSection,
    pub constants: ConstantsSection,
    pub scan: ScanSection,
    pub circle: CircleSection,
    pub verify: VerifySection,
    pub construct: ConstructSection,
    pub render: RenderSection,
    pub dimension: DimensionSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub output: PathBuf,
    /// Worker threads; 0 means one per core.
    pub workers: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            output: PathBuf::from("out"),
            workers: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FunctionSection {
    pub family: Option<String>,
    pub c: f64,
    pub q: u32,
    pub coefficient: f64,
    pub exponent: f64,
    pub shift: f64,
    pub arg: f64,
    /// Leading zeros as `[re, im]` pairs.
    pub head: Vec<[f64; 2]>,
}

impl Default for FunctionSection {
    fn default() -> Self {
        let p = FamilyParams::<f64>::default();
        Self {
            family: None,
            c: p.c.re,
            q: p.q,
            coefficient: p.coefficient,
            exponent: p.exponent,
            shift: p.shift,
            arg: p.arg,
            head: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameSection {
    pub theta2: f64,
    pub psi: f64,
    pub psi_prime: f64,
}

impl Default for FrameSection {
    fn default() -> Self {
        Self {
            theta2: 0.1,
            psi: 0.6,
            psi_prime: 0.8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsSection {
    pub nu: f64,
    pub c1: f64,
}

impl Default for ConstantsSection {
    fn default() -> Self {
        Self { nu: 1.0, c1: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub r_min: f64,
    pub ratio: f64,
    pub r_max: f64,
    pub samples: usize,
    pub far_samples: usize,
    pub sampled_max: f64,
    pub growth_levels: usize,
}

impl Default for ScanSection {
    fn default() -> Self {
        let s = ScanConfig::<f64>::default();
        Self {
            r_min: s.r_min,
            ratio: s.ratio,
            r_max: s.r_max,
            samples: s.samples,
            far_samples: s.far_samples,
            sampled_max: s.sampled_max,
            growth_levels: s.growth_levels,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircleSection {
    pub samples: usize,
    pub tol: f64,
    pub refine: usize,
}

impl Default for CircleSection {
    fn default() -> Self {
        let c = CircleConfig::<f64>::default();
        Self {
            samples: c.samples,
            tol: c.tol,
            refine: c.refine,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    /// Check names, `rhobig-chain`, or `all`.
    pub checks: Vec<String>,
    /// Radii run from `r₁` to `span · r₁`.
    pub span: f64,
    pub ratio: f64,
    pub samples: usize,
    pub chain_k: usize,
    pub write_rows: bool,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            checks: vec!["all".into()],
            span: 10.0,
            ratio: 1.25,
            samples: 10_000,
            chain_k: 3,
            write_rows: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstructSection {
    pub radius: f64,
    /// `r₁`; found by a threshold scan when absent.
    pub r1: Option<f64>,
    pub mesh: usize,
    pub levels: usize,
    pub koebe_samples: usize,
    pub distortion_samples: usize,
}

impl Default for ConstructSection {
    fn default() -> Self {
        Self {
            radius: 1e7,
            r1: None,
            mesh: 512,
            levels: 2,
            koebe_samples: 400,
            distortion_samples: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderSection {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub width: usize,
    pub height: usize,
    pub max_pixels: usize,
    pub n_max: usize,
    pub bounded_radius: f64,
    /// Trap radius and base `R` of `μⁿ(R)`; thresholds are scanned when absent.
    pub r_star: Option<f64>,
    pub base: Option<f64>,
    /// `λ` of the derivative criterion applied to `points`.
    pub lambda: f64,
    /// Caller's hypothesis that `f` has no multiply connected Fatou
    /// components, which turns the derivative criterion into `z ∈ J(f)`.
    pub no_multiply_connected: bool,
    /// Extra points reported orbit by orbit.
    pub points: Vec<[f64; 2]>,
}

impl Default for RenderSection {
    fn default() -> Self {
        Self {
            lo: [-40.0, -30.0],
            hi: [80.0, 30.0],
            width: 240,
            height: 120,
            max_pixels: 1 << 22,
            n_max: 64,
            bounded_radius: 1e3,
            r_star: None,
            base: None,
            lambda: 2.0,
            no_multiply_connected: false,
            points: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DimensionSection {
    /// `levels` (CSV of `n,delta,d`), `raster` (PGM), `construct` or `model`.
    pub source: String,
    pub input: Option<PathBuf>,
    /// Raster pixels at or above this value form the set.
    pub threshold: u16,
    pub n_max: usize,
}

impl Default for DimensionSection {
    fn default() -> Self {
        Self {
            source: "construct".into(),
            input: None,
            threshold: 255,
            n_max: 4,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Parses `--section.key value` / `--section.key=value` pairs.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let Some(flag) = a.strip_prefix("--") else {
            return Err(bad(format!("unexpected argument `{a}`")));
        };
        let (key, value) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| bad(format!("--{flag} needs a value")))?;
                (flag.to_string(), v.clone())
            }
        };
        if key.split('.').count() != 2 {
            return Err(bad(format!("override `--{key}` must be --section.key")));
        }
        out.push((key, value));
    }
    Ok(out)
}

/// A value given on the command line: TOML literal if it parses as one,
/// otherwise a bare string.
fn literal(text: &str) -> toml::Value {
    let probe = format!("v = {text}");
    match probe.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("probe key"),
        Err(_) => toml::Value::String(text.to_string()),
    }
}

impl RunConfig {
    pub fn load(text: &str, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let cfg = Self::load_unchecked(text, overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses without the semantic checks (for `info`).
    pub fn load_unchecked(text: &str, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e| bad(format!("config syntax: {e}")))?;
        for (key, value) in overrides {
            let (section, name) = key.split_once('.').expect("checked by parse_overrides");
            let entry = table
                .entry(section.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            let toml::Value::Table(sec) = entry else {
                return Err(bad(format!("`{section}` is not a section")));
            };
            sec.insert(name.to_string(), literal(value));
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| bad(format!("config: {}", e.message())))?;
        Ok(cfg)
    }

    /// Canonical text: every key, fixed order.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Semantic checks. A missing `function.family` is left to the commands
    /// that need a function; `dimension` on levels or a raster does not.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.function.family.is_some() {
            self.function()?;
        }
        self.frame()?;
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(bad(format!("{name} must be positive and finite, got {v}")))
            }
        };
        pos("constants.nu", self.constants.nu)?;
        if !(self.constants.c1 >= 0.0) {
            return Err(bad("constants.c1 must be >= 0"));
        }
        pos("scan.r_min", self.scan.r_min)?;
        pos("scan.r_max", self.scan.r_max)?;
        if !(self.scan.ratio > 1.0) || !(self.verify.ratio > 1.0) {
            return Err(bad("grid ratios must exceed 1"));
        }
        if !(self.verify.span >= 1.0) {
            return Err(bad("verify.span must be >= 1"));
        }
        pos("construct.radius", self.construct.radius)?;
        if let Some(r1) = self.construct.r1 {
            pos("construct.r1", r1)?;
        }
        for c in &self.verify.checks {
            if c != "all" && c != "rhobig-chain" && CheckId::parse(c).is_none() {
                return Err(bad(format!("unknown check `{c}`")));
            }
        }
        let r = &self.render;
        if !(r.lo[0] < r.hi[0] && r.lo[1] < r.hi[1])
            || r.lo.iter().chain(&r.hi).any(|v| !v.is_finite())
        {
            return Err(bad("render.lo must lie below and left of render.hi"));
        }
        if r.width == 0 || r.height == 0 || r.width.saturating_mul(r.height) > r.max_pixels {
            return Err(bad(format!(
                "render resolution {}x{} outside 1..={} pixels",
                r.width, r.height, r.max_pixels
            )));
        }
        if !["levels", "raster", "construct", "model"].contains(&self.dimension.source.as_str()) {
            return Err(bad(format!(
                "unknown dimension.source `{}`",
                self.dimension.source
            )));
        }
        if matches!(self.dimension.source.as_str(), "levels" | "raster")
            && self.dimension.input.is_none()
        {
            return Err(bad("dimension.input is required for this source"));
        }
        Ok(())
    }

    pub fn function(&self) -> Result<Function, ConfigError> {
        let s = &self.function;
        let family = s.family.as_deref().ok_or_else(|| {
            bad(format!(
                "function.family is required (one of {})",
                FAMILIES.join(", ")
            ))
        })?;
        let params = FamilyParams {
            c: Complex::new(s.c, 0.0),
            q: s.q,
            coefficient: s.coefficient,
            exponent: s.exponent,
            shift: s.shift,
            arg: s.arg,
            head: s.head.iter().map(|p| Complex::new(p[0], p[1])).collect(),
        };
        canonical(family, &params).map_err(|e| bad(format!("function: {e}")))
    }

    pub fn frame(&self) -> Result<Frame, ConfigError> {
        let f = &self.frame;
        Frame::new(f.theta2, f.psi, f.psi_prime).map_err(|e| bad(e.to_string()))
    }

    pub fn circle(&self) -> CircleConfig<f64> {
        CircleConfig {
            samples: self.circle.samples,
            tol: self.circle.tol,
            refine: self.circle.refine,
        }
    }

    pub fn scan(&self) -> ScanConfig<f64> {
        let s = &self.scan;
        ScanConfig {
            r_min: s.r_min,
            ratio: s.ratio,
            r_max: s.r_max,
            samples: s.samples,
            far_samples: s.far_samples,
            sampled_max: s.sampled_max,
            nu: self.constants.nu,
            c1: self.constants.c1,
            growth_levels: s.growth_levels,
            circle: self.circle(),
        }
    }

    /// Checks named in `verify.checks`, in canonical order.
    pub fn selected_checks(&self) -> (Vec<CheckId>, bool) {
        let all = self.verify.checks.iter().any(|c| c == "all");
        let ids = CheckId::ALL
            .into_iter()
            .filter(|id| all || self.verify.checks.iter().any(|c| c == id.name()))
            .collect();
        let chain = all || self.verify.checks.iter().any(|c| c == "rhobig-chain");
        (ids, chain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[function]\nfamily = \"cosh-sqrt\"\n";

    #[test]
    fn canonical_text_round_trips() {
        let cfg = RunConfig::load(MINIMAL, &[]).unwrap();
        let text = cfg.canonical();
        let again = RunConfig::load(&text, &[]).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.canonical(), text);
    }

    #[test]
    fn overrides_win_over_file() {
        let ov = parse_overrides(&[
            "--constants.nu".into(),
            "2.5".into(),
            "--verify.checks=[\"log-ratio\"]".into(),
        ])
        .unwrap();
        let cfg = RunConfig::load(MINIMAL, &ov).unwrap();
        assert_eq!(cfg.constants.nu, 2.5);
        assert_eq!(cfg.selected_checks(), (vec![CheckId::LogRatio], false));
        let ov = parse_overrides(&["--dimension.source".into(), "model".into()]).unwrap();
        assert_eq!(
            RunConfig::load(MINIMAL, &ov).unwrap().dimension.source,
            "model"
        );
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::load("", &[]).unwrap().function().is_err());
        assert!(RunConfig::load("[function]\nfamily = \"nope\"\n", &[]).is_err());
        assert!(RunConfig::load("[function]\nfamily = \"cosh-sqrt\"\ncolour = 1\n", &[]).is_err());
        let ov = parse_overrides(&["--frame.psi".into(), "0.05".into()]).unwrap();
        assert!(RunConfig::load(MINIMAL, &ov).is_err());
        assert!(parse_overrides(&["--nosection".into(), "1".into()]).is_err());
    }
}
