//! Experiment configuration: a TOML file that fixes every artifact.
//!
//! The provenance hash is the SHA-256 of the configuration rendered as JSON
//! with sorted keys, after dropping `out_dir` (where files go does not change
//! what they contain).

use std::path::{Path, PathBuf};

use maxbranch_core::asymptotics::Tolerances;
use maxbranch_core::branching::SimLimits;
use maxbranch_core::fixedpoint::Grid;
use maxbranch_core::levy::LevyModel;
use maxbranch_core::offspring::{OffspringLaw, OffspringSpec};
use maxbranch_core::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub runs: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    pub model: LevyModel,
    pub offspring: OffspringSpec,
    #[serde(default)]
    pub limits: LimitsSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default = "default_x_grid")]
    pub x_grid: GridSpec,
    #[serde(default = "default_t_grid")]
    pub t_grid: GridSpec,
    #[serde(default)]
    pub fit: FitSpec,
    #[serde(default = "default_tolerances")]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub predict: PredictSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsSpec {
    pub particle_cap: u64,
}

impl Default for LimitsSpec {
    fn default() -> Self {
        Self {
            particle_cap: SimLimits::default().particle_cap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelSpec {
    /// Exact product-exponential law; Brownian models only.
    Analytic,
    /// Frozen sample of killed pairs.
    Empirical { pairs: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub h: f64,
    pub x_max: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub kernel: KernelSpec,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            h: 0.05,
            x_max: 200.0,
            tol: 1e-8,
            max_iter: 10_000,
            kernel: KernelSpec::Analytic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "spacing", rename_all = "lowercase", deny_unknown_fields)]
pub enum GridSpec {
    Linear { start: f64, stop: f64, step: f64 },
    /// `points` log-spaced values on `[start, stop]`, preceded by 0.
    Log { start: f64, stop: f64, points: usize },
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            GridSpec::Linear { start, stop, step } => {
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|i| start + i as f64 * step).collect()
            }
            GridSpec::Log { start, stop, points } => {
                let mut v = vec![0.0];
                let (a, b) = (start.ln(), stop.ln());
                let d = (b - a) / (points - 1) as f64;
                v.extend((0..points).map(|i| (a + i as f64 * d).exp()));
                v
            }
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        match *self {
            GridSpec::Linear { start, stop, step } => {
                if !(start >= 0.0 && stop > start && step > 0.0) {
                    return Err(format!("linear grid needs 0 <= start < stop and step > 0 (start = {start}, stop = {stop}, step = {step})"));
                }
                if (stop - start) / step > 1e7 {
                    return Err("linear grid has more than 10^7 points".into());
                }
            }
            GridSpec::Log { start, stop, points } => {
                if !(start > 0.0 && stop > start && points >= 2) {
                    return Err(format!("log grid needs 0 < start < stop and points >= 2 (start = {start}, stop = {stop}, points = {points})"));
                }
            }
        }
        Ok(())
    }
}

/// How a route chooses its fit window. With neither field set the window is
/// chosen automatically.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(f64, f64)>,
    /// Points whose value lies in this range.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    #[serde(default)]
    pub monte_carlo: WindowSpec,
    #[serde(default)]
    pub solver: WindowSpec,
    /// Extinction-time window, clipped to points with usable signal.
    #[serde(default = "default_extinction_window")]
    pub extinction_window: (f64, f64),
    /// Pointwise solver/Monte Carlo agreement is checked for `x` up to this.
    #[serde(default = "default_agreement_limit")]
    pub agreement_x_max: f64,
}

impl Default for FitSpec {
    fn default() -> Self {
        Self {
            monte_carlo: WindowSpec::default(),
            solver: WindowSpec::default(),
            extinction_window: default_extinction_window(),
            agreement_x_max: default_agreement_limit(),
        }
    }
}

/// Overrides applied to the prediction only (the simulated law is unchanged).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_x_grid() -> GridSpec {
    GridSpec::Linear {
        start: 0.0,
        stop: 200.0,
        step: 0.05,
    }
}

fn default_t_grid() -> GridSpec {
    GridSpec::Log {
        start: 0.1,
        stop: 1000.0,
        points: 161,
    }
}

fn default_tolerances() -> Tolerances {
    Tolerances {
        decay_abs: 0.15,
        constant_rel: 0.25,
    }
}

fn default_extinction_window() -> (f64, f64) {
    (10.0, 1000.0)
}

fn default_agreement_limit() -> f64 {
    50.0
}

impl ExperimentConfig {
    /// Positive-drift Brownian reference configuration.
    pub fn reference() -> Self {
        Self {
            seed: 1,
            runs: 1_000_000,
            out_dir: default_out_dir(),
            model: LevyModel::BrownianWithDrift { mu: 1.0, eta: 1.0 },
            offspring: OffspringSpec::Canonical { beta: 1.5, c: 0.5 },
            limits: LimitsSpec::default(),
            solver: SolverSpec::default(),
            x_grid: default_x_grid(),
            t_grid: default_t_grid(),
            fit: FitSpec::default(),
            tolerances: default_tolerances(),
            predict: PredictSpec::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::MissingInput {
            path: path.display().to_string(),
            hint: format!("cannot read config: {e}"),
        })?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Parse and validate; errors carry the line of the offending key.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            match e.span() {
                Some(span) => {
                    let mut line = line_of_offset(text, span.start);
                    // Inside tagged tables the span is the whole table; narrow
                    // it to the named field when there is one.
                    if let Some(field) = msg.split('`').nth(1) {
                        if let Some(l) = locate(&text[span.start..], field) {
                            line += l - 1;
                        }
                    }
                    Error::Config(format!("line {line}: {msg}"))
                }
                None => Error::Config(msg),
            }
        })?;
        cfg.validate().map_err(|(key, msg)| match locate(text, key) {
            Some(line) => Error::Config(format!("line {line}: {key}: {msg}")),
            None => Error::Config(format!("{key}: {msg}")),
        })?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.runs == 0 {
            return Err(("runs", "must be at least 1".into()));
        }
        self.model.validate().map_err(|e| ("model", e.to_string()))?;
        self.offspring.build().map_err(|e| ("offspring", e.to_string()))?;
        if self.limits.particle_cap == 0 {
            return Err(("particle_cap", "must be at least 1".into()));
        }
        let s = &self.solver;
        Grid::new(s.h, s.x_max).map_err(|e| ("solver", e.to_string()))?;
        if !(s.tol > 0.0) {
            return Err(("tol", format!("must be positive, got {}", s.tol)));
        }
        if s.max_iter == 0 {
            return Err(("max_iter", "must be at least 1".into()));
        }
        match s.kernel {
            KernelSpec::Analytic if !matches!(self.model, LevyModel::BrownianWithDrift { .. }) => {
                return Err(("kernel", "the analytic kernel needs a Brownian model (variant = \"bm\")".into()));
            }
            KernelSpec::Empirical { pairs: 0 } => return Err(("pairs", "must be at least 1".into())),
            _ => {}
        }
        self.x_grid.validate().map_err(|e| ("x_grid", e))?;
        self.t_grid.validate().map_err(|e| ("t_grid", e))?;
        for (key, w) in [("monte_carlo", &self.fit.monte_carlo), ("solver", &self.fit.solver)] {
            if w.window.is_some() && w.value_window.is_some() {
                return Err((key, "set either window or value_window, not both".into()));
            }
            if let Some((a, b)) = w.window.or(w.value_window) {
                if !(a > 0.0 && b > a) {
                    return Err((key, format!("window ({a}, {b}) needs 0 < lo < hi")));
                }
            }
        }
        let (a, b) = self.fit.extinction_window;
        if !(a > 0.0 && b > a) {
            return Err(("extinction_window", format!("({a}, {b}) needs 0 < lo < hi")));
        }
        let t = self.tolerances;
        if !(t.decay_abs >= 0.0 && t.constant_rel >= 0.0) {
            return Err(("tolerances", "must be nonnegative".into()));
        }
        if let Some(b) = self.predict.beta {
            if !(b > 1.0 && b < 2.0) {
                return Err(("beta", format!("prediction override {b} is outside (1, 2)")));
            }
        }
        Ok(())
    }

    pub fn law(&self) -> Result<OffspringLaw> {
        self.offspring.build()
    }

    pub fn limits(&self) -> Result<SimLimits> {
        SimLimits::new(self.limits.particle_cap)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.solver.h, self.solver.x_max)
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes to JSON");
        if let Some(map) = value.as_object_mut() {
            map.remove("out_dir");
        }
        // serde_json maps are ordered by key, so this text is canonical.
        let text = serde_json::to_string(&value).expect("JSON value serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of the first `key = ...` assignment or `[...key]` header.
fn locate(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|line| {
        let t = line.trim_start();
        let assigns = t
            .strip_prefix(key)
            .map(|rest| rest.trim_start().starts_with('='))
            .unwrap_or(false);
        let header = t.starts_with('[') && t.trim_end().trim_end_matches(']').ends_with(key);
        assigns || header
    })
    .map(|i| i + 1)
}
