//! Line-oriented experiment configuration.
//!
//! ```text
//! # comment
//! alpha = 0.5
//! grid.d = 2
//! grid.n = 128
//! t_end = 10
//! scheme.cfl = 0.5
//! initial.preset = perturbed_stratification
//! diagnostics.besov = 0:inf:1, 0.5:inf:1
//! ```
//!
//! Parsing reports every problem it finds, each tagged with its line.
//! [`SimConfig::serialize`] writes all keys with defaults materialized and
//! reparses to an identical configuration.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::diagnostics::{BlowupProxyConfig, DiagnosticsConfig};
use crate::harness::presets::{InitialDatum, Preset, Profile};
use crate::littlewood_paley::BesovParams;
use crate::spectral::Grid;
use crate::transport::{DtRule, SchemeConfig};
use crate::velocity::{EquilibriumProfile, Regularization};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line of the offending key; `None` for missing keys and
    /// checks on programmatically built configs.
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn new(line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSettings {
    pub dt_rule: DtRule,
    pub regularization: Regularization,
}

impl Default for SchemeSettings {
    fn default() -> Self {
        Self {
            dt_rule: DtRule::CflAdaptive(0.5),
            regularization: Regularization::None,
        }
    }
}

/// Background profile `amplitude · R(x_d)` for perturbation runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumSpec {
    pub profile: Profile,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputSettings {
    pub dir: Option<PathBuf>,
    /// Times at which `ρ` is written to disk.
    pub snapshots: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub alpha: f64,
    pub grid: Grid,
    pub t_end: f64,
    pub seed: u64,
    pub scheme: SchemeSettings,
    pub initial: InitialDatum,
    pub equilibrium: Option<EquilibriumSpec>,
    pub diagnostics: DiagnosticsConfig,
    pub output: OutputSettings,
}

impl SimConfig {
    /// A configuration with every optional setting at its default.
    pub fn new(grid: Grid, alpha: f64, t_end: f64) -> Self {
        Self {
            alpha,
            grid,
            t_end,
            seed: 0,
            scheme: SchemeSettings::default(),
            initial: InitialDatum::default(),
            equilibrium: None,
            diagnostics: DiagnosticsConfig::default(),
            output: OutputSettings::default(),
        }
    }

    /// Range and consistency checks, reported all at once.
    pub fn validate(&self) -> Result<()> {
        let errors = self.check(&HashMap::new());
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors))
        }
    }

    fn check(&self, lines: &HashMap<&str, usize>) -> Vec<ConfigError> {
        let mut errors = Vec::new();
        let mut err = |key: &str, msg: String| {
            errors.push(ConfigError::new(lines.get(key).copied(), msg));
        };
        let d = self.grid.dim();
        if !(0.0..=d as f64).contains(&self.alpha) {
            err("alpha", format!("alpha must lie in [0, d] (alpha = {}, d = {d})", self.alpha));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            err("t_end", format!("t_end must be finite and nonnegative, got {}", self.t_end));
        }
        match self.scheme.dt_rule {
            DtRule::CflAdaptive(c) if !(c.is_finite() && c > 0.0) => {
                err("scheme.cfl", format!("scheme.cfl must be positive, got {c}"))
            }
            DtRule::Fixed(dt) if !(dt.is_finite() && dt > 0.0) => {
                err("scheme.dt", format!("scheme.dt must be positive, got {dt}"))
            }
            _ => {}
        }
        match self.scheme.regularization {
            Regularization::Friedrichs { n_cut } if !(n_cut.is_finite() && n_cut > 0.0) => {
                err("scheme.n_cut", format!("scheme.n_cut must be positive, got {n_cut}"))
            }
            Regularization::Bandpass { blocks } if blocks == 0 => {
                err("scheme.bandpass_blocks", "scheme.bandpass_blocks must be at least 1".into())
            }
            _ => {}
        }
        let init = &self.initial;
        if !init.amplitude.is_finite() {
            err("initial.amplitude", format!("initial.amplitude must be finite, got {}", init.amplitude));
        }
        if !(init.epsilon.is_finite() && init.epsilon >= 0.0) {
            err("initial.epsilon", format!("initial.epsilon must be nonnegative, got {}", init.epsilon));
        }
        if !(init.width.is_finite() && init.width > 0.0) {
            err("initial.width", format!("initial.width must be positive, got {}", init.width));
        }
        if init.preset == Preset::FromFile {
            match &init.file {
                None => err("initial.preset", "preset from_file requires initial.file".into()),
                Some(p) if !p.is_file() => {
                    err("initial.file", format!("file {} does not exist", p.display()))
                }
                Some(_) => {}
            }
        }
        if let Some(eq) = &self.equilibrium {
            if !eq.amplitude.is_finite() {
                err(
                    "equilibrium.amplitude",
                    format!("equilibrium.amplitude must be finite, got {}", eq.amplitude),
                );
            }
        }
        let diag = &self.diagnostics;
        if diag.cadence == 0 {
            err("diagnostics.cadence", "diagnostics.cadence must be at least 1".into());
        }
        for &p in &diag.lp {
            if !(p >= 1.0) {
                err("diagnostics.lp", format!("Lebesgue exponent {p} must be at least 1"));
            }
        }
        for b in &diag.besov {
            if let Err(e) = b.validate(d) {
                err("diagnostics.besov", e.to_string());
            }
        }
        if let Some(s) = diag.regularity {
            if !s.is_finite() {
                err("diagnostics.regularity", format!("regularity must be finite, got {s}"));
            }
        }
        if !(diag.proxy.norm_factor.is_finite() && diag.proxy.norm_factor > 1.0) {
            err(
                "proxy.norm_factor",
                format!("proxy.norm_factor must exceed 1, got {}", diag.proxy.norm_factor),
            );
        }
        if !(diag.proxy.tail_threshold > 0.0 && diag.proxy.tail_threshold < 1.0) {
            err(
                "proxy.tail_threshold",
                format!("proxy.tail_threshold must lie in (0, 1), got {}", diag.proxy.tail_threshold),
            );
        }
        for &t in &self.output.snapshots {
            if !(t.is_finite() && t >= 0.0) {
                err("output.snapshots", format!("snapshot time {t} must be finite and nonnegative"));
            }
        }
        errors
    }

    /// Solver settings, with the equilibrium profile sampled on the grid.
    pub fn scheme_config(&self) -> Result<SchemeConfig> {
        let equilibrium = match self.equilibrium {
            Some(eq) => Some(EquilibriumProfile::from_fn(self.grid, |x| {
                eq.amplitude * eq.profile.eval(x)
            })?),
            None => None,
        };
        Ok(SchemeConfig {
            dt_rule: self.scheme.dt_rule,
            regularization: self.scheme.regularization,
            equilibrium,
        })
    }

    /// Every key with its resolved value.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("alpha", num(self.alpha));
        put("grid.d", self.grid.dim().to_string());
        put("grid.n", self.grid.n().to_string());
        put("t_end", num(self.t_end));
        put("seed", self.seed.to_string());
        match self.scheme.dt_rule {
            DtRule::CflAdaptive(c) => {
                put("scheme.dt_rule", "cfl".into());
                put("scheme.cfl", num(c));
            }
            DtRule::Fixed(dt) => {
                put("scheme.dt_rule", "fixed".into());
                put("scheme.dt", num(dt));
            }
        }
        match self.scheme.regularization {
            Regularization::None => put("scheme.regularization", "none".into()),
            Regularization::Friedrichs { n_cut } => {
                put("scheme.regularization", "friedrichs".into());
                put("scheme.n_cut", num(n_cut));
            }
            Regularization::Bandpass { blocks } => {
                put("scheme.regularization", "bandpass".into());
                put("scheme.bandpass_blocks", blocks.to_string());
            }
        }
        let init = &self.initial;
        put("initial.preset", init.preset.name().into());
        put("initial.amplitude", num(init.amplitude));
        put("initial.epsilon", num(init.epsilon));
        put("initial.width", num(init.width));
        put("initial.profile", init.profile.name().into());
        if let Some(f) = &init.file {
            put("initial.file", f.display().to_string());
        }
        match &self.equilibrium {
            None => put("equilibrium.profile", "none".into()),
            Some(eq) => {
                put("equilibrium.profile", eq.profile.name().into());
                put("equilibrium.amplitude", num(eq.amplitude));
            }
        }
        let diag = &self.diagnostics;
        put("diagnostics.cadence", diag.cadence.to_string());
        put("diagnostics.lp", list(diag.lp.iter().map(|&p| num(p))));
        put(
            "diagnostics.besov",
            list(diag.besov.iter().map(|b| {
                let mut s = format!("{}:{}:{}", num(b.s), num(b.p), num(b.r));
                if b.homogeneous {
                    s.push_str(":h");
                }
                s
            })),
        );
        put(
            "diagnostics.regularity",
            diag.regularity.map_or_else(|| "auto".into(), num),
        );
        put("proxy.norm_factor", num(diag.proxy.norm_factor));
        put("proxy.tail_threshold", num(diag.proxy.tail_threshold));
        if let Some(dir) = &self.output.dir {
            put("output.dir", dir.display().to_string());
        }
        put("output.snapshots", list(self.output.snapshots.iter().map(|&t| num(t))));
        out
    }
}

/// Shortest representation that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn list(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(", ")
}

const KEYS: &[&str] = &[
    "alpha",
    "grid.d",
    "grid.n",
    "t_end",
    "seed",
    "scheme.dt_rule",
    "scheme.cfl",
    "scheme.dt",
    "scheme.regularization",
    "scheme.n_cut",
    "scheme.bandpass_blocks",
    "initial.preset",
    "initial.amplitude",
    "initial.epsilon",
    "initial.width",
    "initial.profile",
    "initial.file",
    "equilibrium.profile",
    "equilibrium.amplitude",
    "diagnostics.cadence",
    "diagnostics.lp",
    "diagnostics.besov",
    "diagnostics.regularity",
    "proxy.norm_factor",
    "proxy.tail_threshold",
    "output.dir",
    "output.snapshots",
];

struct Entries<'a> {
    values: HashMap<&'static str, (usize, &'a str)>,
    errors: Vec<ConfigError>,
}

impl<'a> Entries<'a> {
    fn line(&self, key: &str) -> Option<usize> {
        self.values.get(key).map(|&(l, _)| l)
    }

    fn get<T>(&mut self, key: &'static str, what: &str, parse: impl Fn(&str) -> Option<T>) -> Option<T> {
        let &(line, raw) = self.values.get(key)?;
        let parsed = parse(raw);
        if parsed.is_none() {
            self.errors.push(ConfigError::new(
                Some(line),
                format!("{key}: expected {what}, got `{raw}`"),
            ));
        }
        parsed
    }

    fn float(&mut self, key: &'static str) -> Option<f64> {
        self.get(key, "a number", |s| s.parse().ok())
    }

    fn uint<T: std::str::FromStr>(&mut self, key: &'static str) -> Option<T> {
        self.get(key, "a nonnegative integer", |s| s.parse().ok())
    }

    fn float_list(&mut self, key: &'static str) -> Option<Vec<f64>> {
        self.get(key, "a comma-separated list of numbers", |s| {
            split_list(s).map(|x| x.parse().ok()).collect()
        })
    }

    fn require<T>(&mut self, key: &'static str, v: Option<T>) -> Option<T> {
        if v.is_none() && !self.values.contains_key(key) {
            self.errors
                .push(ConfigError::new(None, format!("missing required key `{key}`")));
        }
        v
    }
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty())
}

fn parse_besov(s: &str) -> Option<BesovParams> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let nums: Option<Vec<f64>> = parts.iter().take(3).map(|x| x.parse().ok()).collect();
    let nums = nums?;
    match (nums.as_slice(), parts.get(3)) {
        ([s, p, r], None) if parts.len() == 3 => Some(BesovParams::new(*s, *p, *r)),
        ([s, p, r], Some(&"h")) if parts.len() == 4 => Some(BesovParams::homogeneous(*s, *p, *r)),
        _ => None,
    }
}

/// Parses and validates a configuration. Relative `initial.file` paths are
/// taken as given.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    parse_config_in(text, None)
}

/// Like [`parse_config`], resolving relative `initial.file` and `output.dir`
/// paths against `base`.
pub fn parse_config_in(text: &str, base: Option<&Path>) -> Result<SimConfig> {
    let mut entries = Entries {
        values: HashMap::new(),
        errors: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            entries
                .errors
                .push(ConfigError::new(Some(line), format!("expected `key = value`, got `{content}`")));
            continue;
        };
        let key = key.trim();
        let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
            entries
                .errors
                .push(ConfigError::new(Some(line), format!("unknown key `{key}`")));
            continue;
        };
        if let Some(&(first, _)) = entries.values.get(known) {
            entries.errors.push(ConfigError::new(
                Some(line),
                format!("duplicate key `{key}` (first set on line {first})"),
            ));
            continue;
        }
        entries.values.insert(known, (line, value.trim()));
    }

    let e = &mut entries;
    let alpha = e.float("alpha");
    let alpha = e.require("alpha", alpha);
    let d = e.uint::<usize>("grid.d").or(Some(2));
    let n = e.uint::<usize>("grid.n");
    let n = e.require("grid.n", n);
    let t_end = e.float("t_end");
    let t_end = e.require("t_end", t_end);
    let seed = e.uint::<u64>("seed").unwrap_or(0);

    let dt_rule = match e.values.get("scheme.dt_rule").copied() {
        None | Some((_, "cfl")) => {
            let c = e.float("scheme.cfl").unwrap_or(0.5);
            Some(DtRule::CflAdaptive(c))
        }
        Some((_, "fixed")) => {
            let dt = e.float("scheme.dt");
            e.require("scheme.dt", dt).map(DtRule::Fixed)
        }
        Some((l, other)) => {
            e.errors.push(ConfigError::new(
                Some(l),
                format!("scheme.dt_rule: expected cfl or fixed, got `{other}`"),
            ));
            None
        }
    };
    let regularization = match e.values.get("scheme.regularization").copied() {
        None | Some((_, "none")) => Some(Regularization::None),
        Some((_, "friedrichs")) => {
            let n_cut = e.float("scheme.n_cut");
            e.require("scheme.n_cut", n_cut)
                .map(|n_cut| Regularization::Friedrichs { n_cut })
        }
        Some((_, "bandpass")) => {
            let blocks = e.uint::<usize>("scheme.bandpass_blocks");
            e.require("scheme.bandpass_blocks", blocks)
                .map(|blocks| Regularization::Bandpass { blocks })
        }
        Some((l, other)) => {
            e.errors.push(ConfigError::new(
                Some(l),
                format!("scheme.regularization: expected none, friedrichs or bandpass, got `{other}`"),
            ));
            None
        }
    };

    let mut initial = InitialDatum::default();
    if let Some(p) = e.get("initial.preset", "a preset name", |s| s.parse::<Preset>().ok()) {
        initial.preset = p;
    }
    if let Some(v) = e.float("initial.amplitude") {
        initial.amplitude = v;
    }
    if let Some(v) = e.float("initial.epsilon") {
        initial.epsilon = v;
    }
    if let Some(v) = e.float("initial.width") {
        initial.width = v;
    }
    if let Some(p) = e.get("initial.profile", "sin or cos", |s| s.parse::<Profile>().ok()) {
        initial.profile = p;
    }
    let resolve = |p: &str| {
        let p = PathBuf::from(p);
        match base {
            Some(b) if p.is_relative() => b.join(p),
            _ => p,
        }
    };
    initial.file = e.values.get("initial.file").map(|&(_, v)| resolve(v));

    let equilibrium = match e.values.get("equilibrium.profile").copied() {
        None | Some((_, "none")) => None,
        Some((l, v)) => match v.parse::<Profile>() {
            Ok(profile) => Some(EquilibriumSpec {
                profile,
                amplitude: e.float("equilibrium.amplitude").unwrap_or(1.0),
            }),
            Err(msg) => {
                e.errors
                    .push(ConfigError::new(Some(l), format!("equilibrium.profile: {msg} or none")));
                None
            }
        },
    };

    let mut diagnostics = DiagnosticsConfig::default();
    if let Some(c) = e.uint::<usize>("diagnostics.cadence") {
        diagnostics.cadence = c;
    }
    if let Some(lp) = e.float_list("diagnostics.lp") {
        diagnostics.lp = lp;
    }
    if let Some(b) = e.get("diagnostics.besov", "a list of s:p:r[:h] triples", |s| {
        split_list(s).map(parse_besov).collect()
    }) {
        diagnostics.besov = b;
    }
    if let Some(r) = e.get("diagnostics.regularity", "a number or auto", |s| match s {
        "auto" => Some(None),
        s => s.parse().ok().map(Some),
    }) {
        diagnostics.regularity = r;
    }
    let mut proxy = BlowupProxyConfig::default();
    if let Some(v) = e.float("proxy.norm_factor") {
        proxy.norm_factor = v;
    }
    if let Some(v) = e.float("proxy.tail_threshold") {
        proxy.tail_threshold = v;
    }
    diagnostics.proxy = proxy;

    let output = OutputSettings {
        dir: e.values.get("output.dir").map(|&(_, v)| resolve(v)),
        snapshots: e.float_list("output.snapshots").unwrap_or_default(),
    };

    let grid = match (d, n) {
        (Some(d), Some(n)) => match Grid::new(d, n) {
            Ok(g) => Some(g),
            Err(err) => {
                let line = e.line("grid.n").or(e.line("grid.d"));
                e.errors.push(ConfigError::new(line, err.to_string()));
                None
            }
        },
        _ => None,
    };

    let mut errors = std::mem::take(&mut e.errors);
    if let (Some(alpha), Some(grid), Some(t_end), Some(dt_rule), Some(regularization)) =
        (alpha, grid, t_end, dt_rule, regularization)
    {
        let config = SimConfig {
            alpha,
            grid,
            t_end,
            seed,
            scheme: SchemeSettings {
                dt_rule,
                regularization,
            },
            initial,
            equilibrium,
            diagnostics,
            output,
        };
        let lines: HashMap<&str, usize> = entries.values.iter().map(|(&k, &(l, _))| (k, l)).collect();
        errors.extend(config.check(&lines));
        if errors.is_empty() {
            return Ok(config);
        }
    } else if let (Some(alpha), Some(d)) = (alpha, d) {
        // still report the range error when other keys failed
        if !(0.0..=d as f64).contains(&alpha) {
            errors.push(ConfigError::new(
                entries.line("alpha"),
                format!("alpha must lie in [0, d] (alpha = {alpha}, d = {d})"),
            ));
        }
    }
    errors.sort_by_key(|e| e.line.unwrap_or(0));
    Err(Error::Config(errors))
}
