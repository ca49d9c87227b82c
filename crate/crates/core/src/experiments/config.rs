//! Flat `key = value` scenario files.
//!
//! One key per line; `#` starts a comment; blank lines are ignored. Lists are
//! comma separated, and numeric grids also accept `start:step:stop`
//! (inclusive). Keys not given keep the defaults of the experiment kind.
//!
//! | key | value |
//! |-----|-------|
//! | `kind` | `identification`, `stability-table`, `sd-comparison`, `rho-sweep`, `chaos-sweep` |
//! | `order` | `K >= 1` |
//! | `memory` | `M >= 1` |
//! | `window` | default `L` for `sml-true-lms` roster entries without one |
//! | `mu` | absolute step size (all filters) |
//! | `mu_factor` | step as a multiple of each filter's bound (`mu0` for SML filters) |
//! | `mu_grid` | stability: multiples of the bound; chaos: absolute step sizes |
//! | `noise_var` | `σ_v² >= 0` |
//! | `realizations`, `iterations` | counts `>= 1` |
//! | `seed` | master seed (`u64`) |
//! | `plant` | `random-decomposable`, `gaussian-rho(ρ[, width])`, `smooth`, `file:<path>` |
//! | `plant_centered` | `true` centers the Gaussian-ρ bell mid-grid, `false` uses the corner origin |
//! | `rho_grid` | ρ values for the sweep, each in `[0, 1)` |
//! | `width` | Gaussian-ρ width for the sweep |
//! | `filters` | roster: `sml-lms`, `sml-true-lms(L)`, `volterra-lms`, `pf-lms`, `sv-lms(D)` |
//! | `stabilize` | MAX rule on (`true`) or off |
//! | `halve_true_lms_max` | TRUE-LMS with `L >= 4` uses half of MAX (off for the stability table) |
//! | `emse` | `exact` or `probe` |
//! | `probes` | probe regressors for the Monte Carlo EMSE |
//! | `bound_samples` | Monte Carlo samples for `mu0` (`>= 10000`) |
//! | `transient`, `record` | chaos sweep: discarded and recorded iterations |
//! | `dump_mu` | chaos sweep: step sizes whose full trajectory is written |
//! | `trace_realization` | identification: realization index dumped as a trace CSV |
//! | `out` | output directory |

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Identification,
    StabilityTable,
    SdComparison,
    RhoSweep,
    ChaosSweep,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Identification => "identification",
            ExperimentKind::StabilityTable => "stability-table",
            ExperimentKind::SdComparison => "sd-comparison",
            ExperimentKind::RhoSweep => "rho-sweep",
            ExperimentKind::ChaosSweep => "chaos-sweep",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "identification" => ExperimentKind::Identification,
            "stability-table" => ExperimentKind::StabilityTable,
            "sd-comparison" => ExperimentKind::SdComparison,
            "rho-sweep" => ExperimentKind::RhoSweep,
            "chaos-sweep" => ExperimentKind::ChaosSweep,
            _ => return Err(format!("unknown experiment kind '{s}'")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlantSpec {
    /// i.i.d. normal factors scaled to unit output power.
    RandomDecomposable,
    /// Bivariate Gaussian bell (`K = 2`), unit output power.
    GaussianRho { rho: f64, width: f64 },
    /// Smooth non-decomposable second-order kernel, unit output power.
    Smooth,
    /// Dense kernel CSV, used as is.
    File(PathBuf),
}

impl PlantSpec {
    fn parse(s: &str) -> std::result::Result<Self, String> {
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(PlantSpec::File(PathBuf::from(path.trim())));
        }
        if let Some(args) = call_args(s, "gaussian-rho")? {
            let nums = parse_list::<f64>(args)?;
            return match nums[..] {
                [rho] => Ok(PlantSpec::GaussianRho { rho, width: DEFAULT_WIDTH }),
                [rho, width] => Ok(PlantSpec::GaussianRho { rho, width }),
                _ => Err(format!("gaussian-rho takes (rho) or (rho, width), got '{s}'")),
            };
        }
        match s {
            "random-decomposable" => Ok(PlantSpec::RandomDecomposable),
            "smooth" => Ok(PlantSpec::Smooth),
            _ => Err(format!("unknown plant '{s}'")),
        }
    }

    fn render(&self) -> String {
        match self {
            PlantSpec::RandomDecomposable => "random-decomposable".into(),
            PlantSpec::GaussianRho { rho, width } => format!("gaussian-rho({rho}, {width})"),
            PlantSpec::Smooth => "smooth".into(),
            PlantSpec::File(p) => format!("file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterSpec {
    SmlLms,
    SmlTrueLms { window: usize },
    VolterraLms,
    PfLms,
    SvLms { diagonals: usize },
}

impl FilterSpec {
    /// Name used in CSV output.
    pub fn name(&self) -> String {
        match self {
            FilterSpec::SmlLms => "sml-lms".into(),
            FilterSpec::SmlTrueLms { window } => format!("sml-true-lms({window})"),
            FilterSpec::VolterraLms => "volterra-lms".into(),
            FilterSpec::PfLms => "pf-lms".into(),
            FilterSpec::SvLms { diagonals } => format!("sv-lms({diagonals})"),
        }
    }

    pub fn is_sml(&self) -> bool {
        matches!(self, FilterSpec::SmlLms | FilterSpec::SmlTrueLms { .. })
    }

    fn parse(s: &str, default_window: usize) -> std::result::Result<Self, String> {
        if let Some(args) = call_args(s, "sml-true-lms")? {
            let window = args.trim().parse().map_err(|_| format!("bad window in '{s}'"))?;
            return Ok(FilterSpec::SmlTrueLms { window });
        }
        if let Some(args) = call_args(s, "sv-lms")? {
            let diagonals = args.trim().parse().map_err(|_| format!("bad diagonal count in '{s}'"))?;
            return Ok(FilterSpec::SvLms { diagonals });
        }
        match s {
            "sml-lms" => Ok(FilterSpec::SmlLms),
            "sml-true-lms" => Ok(FilterSpec::SmlTrueLms { window: default_window }),
            "volterra-lms" => Ok(FilterSpec::VolterraLms),
            "pf-lms" => Ok(FilterSpec::PfLms),
            _ => Err(format!("unknown filter '{s}'")),
        }
    }
}

/// How step sizes are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSpec {
    Absolute(f64),
    /// Multiple of each filter's bound.
    Relative(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmseMode {
    /// Closed form when the correlation fits under the cap, probe otherwise.
    Exact,
    Probe,
}

pub const DEFAULT_WIDTH: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ExperimentKind,
    pub order: usize,
    pub memory: usize,
    pub window: usize,
    pub step: StepSpec,
    pub mu_grid: Vec<f64>,
    pub noise_var: f64,
    pub realizations: usize,
    pub iterations: usize,
    pub seed: u64,
    pub plant: PlantSpec,
    pub plant_centered: bool,
    pub rho_grid: Vec<f64>,
    pub width: f64,
    pub filters: Vec<FilterSpec>,
    pub stabilize: bool,
    pub halve_true_lms_max: bool,
    pub emse: EmseMode,
    pub probes: usize,
    pub bound_samples: usize,
    pub transient: usize,
    pub record: usize,
    pub dump_mu: Vec<f64>,
    pub trace_realization: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ScenarioConfig {
    /// Defaults for `kind`.
    pub fn new(kind: ExperimentKind) -> Self {
        let base = Self {
            kind,
            order: 2,
            memory: 10,
            window: 4,
            step: StepSpec::Relative(0.5),
            mu_grid: Vec::new(),
            noise_var: 1e-3,
            realizations: 100,
            iterations: 5000,
            seed: 1,
            plant: PlantSpec::RandomDecomposable,
            plant_centered: true,
            rho_grid: Vec::new(),
            width: DEFAULT_WIDTH,
            filters: vec![FilterSpec::SmlLms],
            stabilize: true,
            halve_true_lms_max: true,
            emse: EmseMode::Exact,
            probes: 10_000,
            bound_samples: 100_000,
            transient: 10_000,
            record: 1000,
            dump_mu: Vec::new(),
            trace_realization: None,
            out: None,
        };
        match kind {
            ExperimentKind::Identification => base,
            ExperimentKind::StabilityTable => Self {
                mu_grid: vec![0.5, 0.9, 1.0, 1.5, 2.0],
                realizations: 1000,
                filters: vec![
                    FilterSpec::SmlLms,
                    FilterSpec::SmlTrueLms { window: 4 },
                    FilterSpec::SmlTrueLms { window: 8 },
                ],
                halve_true_lms_max: false,
                ..base
            },
            ExperimentKind::SdComparison => Self {
                step: StepSpec::Relative(0.01),
                realizations: 10_000,
                iterations: 120_000,
                ..base
            },
            ExperimentKind::RhoSweep => Self {
                rho_grid: (0..10).map(|k| k as f64 / 10.0).collect(),
                iterations: 20_000,
                ..base
            },
            ExperimentKind::ChaosSweep => Self {
                memory: 1,
                step: StepSpec::Absolute(0.005),
                mu_grid: grid_range(0.0, 1e-4, 0.03).expect("static grid"),
                noise_var: 0.0,
                realizations: 1,
                stabilize: false,
                dump_mu: vec![0.005, 0.016, 0.03],
                ..base
            },
        }
    }

    /// Parse a whole file; it must name its `kind`.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let kind_line = text
            .lines()
            .enumerate()
            .find_map(|(n, l)| {
                let (k, v) = split_line(l)?;
                (k == "kind").then(|| (n + 1, v.to_string()))
            })
            .ok_or_else(|| config_err(path, 0, "missing 'kind'"))?;
        let kind = kind_line
            .1
            .parse()
            .map_err(|e: String| config_err(path, kind_line.0, e))?;
        let mut cfg = Self::new(kind);
        cfg.apply(text, path)?;
        Ok(cfg)
    }

    /// Parse a file on top of the defaults for `kind`. A `kind` key in the
    /// file must agree.
    pub fn parse_for(kind: ExperimentKind, text: &str, path: &Path) -> Result<Self> {
        let mut cfg = Self::new(kind);
        cfg.apply(text, path)?;
        Ok(cfg)
    }

    pub fn load_for(kind: ExperimentKind, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse_for(kind, &text, path)
    }

    fn apply(&mut self, text: &str, path: &Path) -> Result<()> {
        let mut filters_raw = None;
        for (n, line) in text.lines().enumerate() {
            let Some((key, value)) = split_line(line) else {
                continue;
            };
            if key == "filters" {
                // Resolved after the loop so `window` may come later.
                filters_raw = Some((n + 1, value.to_string()));
                continue;
            }
            self.set(key, value).map_err(|e| config_err(path, n + 1, e))?;
        }
        if let Some((n, raw)) = filters_raw {
            self.filters = parse_roster(&raw, self.window).map_err(|e| config_err(path, n, e))?;
        }
        self.validate()
            .map_err(|e| config_err(path, 0, e.to_string()))
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("bad value '{v}' for '{key}'"))
        }
        match key {
            "kind" => {
                let kind: ExperimentKind = value.parse()?;
                if kind != self.kind {
                    return Err(format!(
                        "file is for '{}', expected '{}'",
                        kind.name(),
                        self.kind.name()
                    ));
                }
            }
            "order" => self.order = num(key, value)?,
            "memory" => self.memory = num(key, value)?,
            "window" => self.window = num(key, value)?,
            "mu" => self.step = StepSpec::Absolute(num(key, value)?),
            "mu_factor" => self.step = StepSpec::Relative(num(key, value)?),
            "mu_grid" => self.mu_grid = parse_grid(value)?,
            "noise_var" => self.noise_var = num(key, value)?,
            "realizations" => self.realizations = num(key, value)?,
            "iterations" => self.iterations = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "plant" => self.plant = PlantSpec::parse(value)?,
            "plant_centered" => self.plant_centered = num(key, value)?,
            "rho_grid" => self.rho_grid = parse_grid(value)?,
            "width" => self.width = num(key, value)?,
            "stabilize" => self.stabilize = num(key, value)?,
            "halve_true_lms_max" => self.halve_true_lms_max = num(key, value)?,
            "emse" => {
                self.emse = match value {
                    "exact" => EmseMode::Exact,
                    "probe" => EmseMode::Probe,
                    _ => return Err(format!("emse must be 'exact' or 'probe', got '{value}'")),
                }
            }
            "probes" => self.probes = num(key, value)?,
            "bound_samples" => self.bound_samples = num(key, value)?,
            "transient" => self.transient = num(key, value)?,
            "record" => self.record = num(key, value)?,
            "dump_mu" => self.dump_mu = parse_grid(value)?,
            "trace_realization" => self.trace_realization = Some(num(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.order == 0 || self.memory == 0 || self.window == 0 {
            return bad("order, memory and window must be >= 1".into());
        }
        if self.realizations == 0 || self.iterations == 0 {
            return bad("realizations and iterations must be >= 1".into());
        }
        if !(self.noise_var >= 0.0) || !self.noise_var.is_finite() {
            return bad(format!("noise_var {} must be finite and >= 0", self.noise_var));
        }
        match self.step {
            StepSpec::Absolute(mu) | StepSpec::Relative(mu) if !(mu > 0.0) || !mu.is_finite() => {
                return bad(format!("step {mu} must be positive"))
            }
            _ => {}
        }
        if self.filters.is_empty() {
            return bad("filter roster is empty".into());
        }
        for f in &self.filters {
            match *f {
                FilterSpec::SmlTrueLms { window: 0 } => return bad("TRUE-LMS window must be >= 1".into()),
                FilterSpec::SvLms { diagonals } if diagonals == 0 || diagonals > self.memory => {
                    return bad(format!("sv-lms diagonals must be in 1..={}", self.memory))
                }
                _ => {}
            }
        }
        let needs_grid = matches!(
            self.kind,
            ExperimentKind::StabilityTable | ExperimentKind::ChaosSweep
        );
        if needs_grid && self.mu_grid.is_empty() {
            return bad("mu_grid is empty".into());
        }
        if self.mu_grid.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return bad("mu_grid values must be finite and >= 0".into());
        }
        if self.kind == ExperimentKind::RhoSweep && self.rho_grid.is_empty() {
            return bad("rho_grid is empty".into());
        }
        if self.rho_grid.iter().any(|r| !(0.0..1.0).contains(r)) {
            return bad("rho values must lie in [0, 1)".into());
        }
        if let PlantSpec::GaussianRho { rho, width } = self.plant {
            if !(0.0..1.0).contains(&rho) {
                return bad(format!("rho {rho} must lie in [0, 1)"));
            }
            if !(width > 0.0) {
                return bad(format!("width {width} must be positive"));
            }
        }
        if !(self.width > 0.0) {
            return bad(format!("width {} must be positive", self.width));
        }
        if self.probes == 0 {
            return bad("probes must be >= 1".into());
        }
        if self.kind == ExperimentKind::ChaosSweep && self.record == 0 {
            return bad("record must be >= 1".into());
        }
        Ok(())
    }

    /// Render as a config file that parses back to `self`.
    pub fn to_config_string(&self) -> String {
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("kind", self.kind.name().into());
        kv("order", self.order.to_string());
        kv("memory", self.memory.to_string());
        kv("window", self.window.to_string());
        match self.step {
            StepSpec::Absolute(mu) => kv("mu", mu.to_string()),
            StepSpec::Relative(f) => kv("mu_factor", f.to_string()),
        }
        if !self.mu_grid.is_empty() {
            kv("mu_grid", list(&self.mu_grid));
        }
        kv("noise_var", self.noise_var.to_string());
        kv("realizations", self.realizations.to_string());
        kv("iterations", self.iterations.to_string());
        kv("seed", self.seed.to_string());
        kv("plant", self.plant.render());
        kv("plant_centered", self.plant_centered.to_string());
        if !self.rho_grid.is_empty() {
            kv("rho_grid", list(&self.rho_grid));
        }
        kv("width", self.width.to_string());
        kv(
            "filters",
            self.filters.iter().map(FilterSpec::name).collect::<Vec<_>>().join(", "),
        );
        kv("stabilize", self.stabilize.to_string());
        kv("halve_true_lms_max", self.halve_true_lms_max.to_string());
        kv(
            "emse",
            match self.emse {
                EmseMode::Exact => "exact".into(),
                EmseMode::Probe => "probe".into(),
            },
        );
        kv("probes", self.probes.to_string());
        kv("bound_samples", self.bound_samples.to_string());
        kv("transient", self.transient.to_string());
        kv("record", self.record.to_string());
        if !self.dump_mu.is_empty() {
            kv("dump_mu", list(&self.dump_mu));
        }
        if let Some(r) = self.trace_realization {
            kv("trace_realization", r.to_string());
        }
        if let Some(out) = &self.out {
            kv("out", out.display().to_string());
        }
        s
    }
}

fn config_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Config {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn split_line(line: &str) -> Option<(&str, &str)> {
    let line = line.split('#').next().unwrap_or("").trim();
    if line.is_empty() {
        return None;
    }
    match line.split_once('=') {
        Some((k, v)) => Some((k.trim(), v.trim())),
        None => Some((line, "")),
    }
}

/// `name(args)` → `Some(args)`; `name` alone or other text → `None`.
fn call_args<'a>(s: &'a str, name: &str) -> std::result::Result<Option<&'a str>, String> {
    let Some(rest) = s.strip_prefix(name) else {
        return Ok(None);
    };
    let rest = rest.trim_start();
    if rest.is_empty() {
        return Ok(None);
    }
    rest.strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .map(Some)
        .ok_or_else(|| format!("malformed '{s}'"))
}

fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| format!("bad number '{t}'")))
        .collect()
}

/// `a, b, c` or `start:step:stop`.
pub fn parse_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts[..] {
        [_] => parse_list(s),
        [a, b, c] => {
            let p = |t: &str| t.parse::<f64>().map_err(|_| format!("bad number '{t}'"));
            grid_range(p(a)?, p(b)?, p(c)?)
        }
        _ => Err(format!("grid '{s}' must be a list or start:step:stop")),
    }
}

/// `start + k·step` for `k = 0..=round((stop − start)/step)`.
pub fn grid_range(start: f64, step: f64, stop: f64) -> std::result::Result<Vec<f64>, String> {
    if !(step > 0.0) || !(stop >= start) {
        return Err(format!("grid {start}:{step}:{stop} needs step > 0 and stop >= start"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    // Twelve significant digits keep `0.0003` from printing as `0.00030000000000000003`.
    Ok((0..=n)
        .map(|k| {
            let v = start + k as f64 * step;
            format!("{v:.11e}").parse().expect("formatted float parses")
        })
        .collect())
}

/// Comma-separated roster; parentheses may contain commas.
pub fn parse_roster(s: &str, default_window: usize) -> std::result::Result<Vec<FilterSpec>, String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out.into_iter()
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| FilterSpec::parse(t, default_window))
        .collect()
}
