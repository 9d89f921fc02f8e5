//! The six experiment commands. Each reads the config, writes its artifacts
//! under the output directory and returns a summary for the terminal.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use maxbranch_core::asymptotics::{
    compare, fit_exponential_tail, fit_power_tail, predict, Check, Comparison, Decay, FitResult, TailCurve,
    TheoryPrediction, Tolerances,
};
use maxbranch_core::branching::{censored_fraction, estimate_tail, extinction_tail, simulate_runs};
use maxbranch_core::fixedpoint::{FixedPointProblem, Grid, Kernel, KernelDescriptor, SolverSolution};
use maxbranch_core::offspring::{OffspringLaw, OffspringSpec};
use maxbranch_core::{rng, Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{ExperimentConfig, KernelSpec, WindowSpec};
use crate::io::{self, fmt_f64};

/// Stream tag for the frozen empirical kernel sample.
const KERNEL_TAG: u64 = 0x6b65726e;

pub const OUTCOMES_CSV: &str = "outcomes.csv";
pub const OUTCOMES_JSON: &str = "outcomes.json";
pub const TAIL_CSV: &str = "tail.csv";
pub const EXTINCTION_CSV: &str = "extinction.csv";
pub const SOLUTION_CSV: &str = "solution.csv";
pub const SOLUTION_JSON: &str = "solution.json";
pub const PREDICTION_JSON: &str = "prediction.json";
pub const FIT_JSON: &str = "fit.json";
pub const REPORT_JSON: &str = "report.json";
pub const CURVES_CSV: &str = "curves.csv";

pub struct Context {
    pub config: ExperimentConfig,
    pub hash: String,
    pub threads: usize,
    /// Shown in hints for missing inputs.
    pub config_path: Option<PathBuf>,
}

impl Context {
    pub fn new(config: ExperimentConfig, threads: usize) -> Self {
        let hash = config.hash();
        Self {
            config,
            hash,
            threads: threads.max(1),
            config_path: None,
        }
    }

    pub fn out_dir(&self) -> &Path {
        &self.config.out_dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.config.out_dir.join(name)
    }

    fn prepare(&self) -> Result<()> {
        std::fs::create_dir_all(self.out_dir())?;
        Ok(())
    }

    fn missing(&self, name: &str, commands: &[&str]) -> Error {
        let cfg = self
            .config_path
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "<config>".into());
        Error::MissingInput {
            path: self.path(name).display().to_string(),
            hint: format!(
                "run {} first with the same config and --out",
                commands
                    .iter()
                    .map(|c| format!("`maxbranch {c} --config {cfg}`"))
                    .collect::<Vec<_>>()
                    .join(" and/or ")
            ),
        }
    }
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub runs: u64,
    pub censored_fraction: f64,
    pub wall_time_seconds: f64,
}

fn tail_rows(curve: &TailCurve) -> impl Iterator<Item = Vec<String>> + '_ {
    (0..curve.len()).map(move |i| {
        let upper = curve.upper.as_ref().map(|u| u[i]).unwrap_or(curve.value[i]);
        vec![
            fmt_f64(curve.x[i]),
            fmt_f64(curve.value[i]),
            fmt_f64(curve.stderr[i]),
            fmt_f64(curve.value[i]),
            fmt_f64(upper),
        ]
    })
}

pub fn simulate(ctx: &Context) -> Result<SimulateSummary> {
    let cfg = &ctx.config;
    ctx.prepare()?;
    let law = cfg.law()?;
    let start = Instant::now();
    let outcomes = simulate_runs(&cfg.model, &law, cfg.seed, cfg.runs, cfg.limits()?, ctx.threads)?;
    let wall = start.elapsed().as_secs_f64();
    let censored = censored_fraction(&outcomes);

    io::write_csv(
        &ctx.path(OUTCOMES_CSV),
        &ctx.hash,
        &["run_index", "max", "extinction_time", "particles", "censored"],
        outcomes.iter().enumerate().map(|(i, o)| {
            vec![
                i.to_string(),
                fmt_f64(o.max),
                fmt_f64(o.extinction_time),
                o.particles.to_string(),
                u8::from(o.censored).to_string(),
            ]
        }),
    )?;
    let tail = estimate_tail(&outcomes, &cfg.x_grid.values())?;
    io::write_csv(&ctx.path(TAIL_CSV), &ctx.hash, &["x", "value", "stderr", "lower", "upper"], tail_rows(&tail))?;
    let ext = extinction_tail(&outcomes, &cfg.t_grid.values())?;
    io::write_csv(&ctx.path(EXTINCTION_CSV), &ctx.hash, &["t", "value", "stderr", "lower", "upper"], tail_rows(&ext))?;
    io::write_json(
        &ctx.path(OUTCOMES_JSON),
        &ctx.hash,
        &json!({
            "seed": cfg.seed,
            "runs": cfg.runs,
            "particle_cap": cfg.limits.particle_cap,
            "censored_fraction": censored,
            "model": cfg.model,
            "offspring": cfg.offspring,
            "wall_time_seconds": wall,
            "created_unix": now_unix(),
        }),
    )?;
    Ok(SimulateSummary {
        runs: cfg.runs,
        censored_fraction: censored,
        wall_time_seconds: wall,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub iterations: usize,
    pub residual: f64,
    /// Largest change of `u` on the original grid when `x_max` is doubled.
    pub truncation_shift: f64,
    pub mean_max_truncated: f64,
}

fn build_kernel(cfg: &ExperimentConfig) -> Result<Kernel> {
    match cfg.solver.kernel {
        KernelSpec::Analytic => Kernel::analytic(&cfg.model),
        KernelSpec::Empirical { pairs } => {
            let mut r = rng::tagged_stream(cfg.seed, KERNEL_TAG, 0);
            Kernel::sampled(&cfg.model, pairs, &mut r)
        }
    }
}

/// Solve on the configured grid; returns the problem, solution and kernel.
pub fn solve_problem(cfg: &ExperimentConfig, grid: Grid, kernel: Kernel) -> Result<(FixedPointProblem, SolverSolution)> {
    let problem = FixedPointProblem::new(grid, kernel, cfg.law()?);
    let solution = problem.solve(cfg.solver.tol, cfg.solver.max_iter)?;
    Ok((problem, solution))
}

pub fn solve(ctx: &Context) -> Result<SolveSummary> {
    let cfg = &ctx.config;
    ctx.prepare()?;
    let grid = cfg.grid()?;
    let kernel = build_kernel(cfg)?;
    let descriptor: KernelDescriptor = kernel.descriptor();
    let start = Instant::now();
    let (problem, solution) = solve_problem(cfg, grid, kernel.clone())?;
    let wall = start.elapsed().as_secs_f64();
    let remainder = problem.remainder_curve(&solution)?;
    let sup = problem.sup_survival();

    let wide = Grid::new(grid.h, 2.0 * grid.x_max)?;
    let (_, wide_solution) = solve_problem(cfg, wide, kernel)?;
    let truncation_shift = solution
        .u
        .iter()
        .zip(&wide_solution.u)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let xs = grid.points();
    io::write_csv(
        &ctx.path(SOLUTION_CSV),
        &ctx.hash,
        &["x", "u", "remainder", "sup_survival"],
        (0..grid.len()).map(|j| vec![fmt_f64(xs[j]), fmt_f64(solution.u[j]), fmt_f64(remainder[j]), fmt_f64(sup[j])]),
    )?;
    let summary = SolveSummary {
        iterations: solution.iterations,
        residual: solution.residual,
        truncation_shift,
        mean_max_truncated: solution.integral(),
    };
    io::write_json(
        &ctx.path(SOLUTION_JSON),
        &ctx.hash,
        &json!({
            "grid": grid,
            "tol": cfg.solver.tol,
            "max_iter": cfg.solver.max_iter,
            "iterations": summary.iterations,
            "residual": summary.residual,
            "kernel": descriptor,
            "truncation_shift": truncation_shift,
            "mean_max_truncated": summary.mean_max_truncated,
            "wall_time_seconds": wall,
            "created_unix": now_unix(),
        }),
    )?;
    Ok(summary)
}

/// Prediction under the config, with the optional index override.
pub fn prediction(cfg: &ExperimentConfig) -> Result<TheoryPrediction> {
    let law = match (cfg.predict.beta, &cfg.offspring) {
        (None, _) => cfg.law()?,
        (Some(beta), OffspringSpec::Canonical { c, .. }) => OffspringLaw::canonical(beta, *c)?,
        (Some(_), OffspringSpec::Table { .. }) => {
            return Err(Error::Unsupported("prediction index override for a tabulated law"))
        }
    };
    predict(&cfg.model, &law)
}

fn prediction_beta(cfg: &ExperimentConfig) -> Result<f64> {
    Ok(cfg.predict.beta.unwrap_or(cfg.law()?.beta()))
}

pub fn predict_cmd(ctx: &Context) -> Result<TheoryPrediction> {
    ctx.prepare()?;
    let p = prediction(&ctx.config)?;
    io::write_json(&ctx.path(PREDICTION_JSON), &ctx.hash, &p)?;
    Ok(p)
}

/// A fitted curve with the window it was fitted on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteFit {
    pub fitted: FitResult,
    pub window: (f64, f64),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<RouteFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<RouteFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extinction: Option<RouteFit>,
    /// Routes with data but no usable fit, with the reason.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<(String, String)>,
}

fn read_checked_csv(ctx: &Context, name: &str) -> Result<Option<io::Csv>> {
    let path = ctx.path(name);
    if !path.exists() {
        return Ok(None);
    }
    let csv = io::read_csv(&path)?;
    io::check_hash(&ctx.hash, &csv.hash, &path)?;
    Ok(Some(csv))
}

fn bracketed_curve(csv: &io::Csv, x: &str) -> Result<TailCurve> {
    Ok(TailCurve {
        x: csv.floats(x)?,
        value: csv.floats("value")?,
        stderr: csv.floats("stderr")?,
        upper: Some(csv.floats("upper")?),
    })
}

/// Curves read back from the output directory.
pub struct Inputs {
    pub monte_carlo: Option<TailCurve>,
    pub extinction: Option<TailCurve>,
    pub solver: Option<TailCurve>,
}

pub fn load_inputs(ctx: &Context) -> Result<Inputs> {
    let monte_carlo = read_checked_csv(ctx, TAIL_CSV)?
        .map(|c| bracketed_curve(&c, "x"))
        .transpose()?;
    let extinction = read_checked_csv(ctx, EXTINCTION_CSV)?
        .map(|c| bracketed_curve(&c, "t"))
        .transpose()?;
    let solver = read_checked_csv(ctx, SOLUTION_CSV)?
        .map(|c| Ok::<_, Error>(TailCurve::exact(c.floats("x")?, c.floats("u")?)))
        .transpose()?;
    for meta in [OUTCOMES_JSON, SOLUTION_JSON] {
        let path = ctx.path(meta);
        if path.exists() {
            let v = io::read_json(&path)?;
            io::check_hash(&ctx.hash, &io::json_hash(&v, &path)?, &path)?;
        }
    }
    if monte_carlo.is_none() && solver.is_none() {
        return Err(ctx.missing(TAIL_CSV, &["simulate", "solve"]));
    }
    Ok(Inputs {
        monte_carlo,
        extinction,
        solver,
    })
}

fn choose_window(curve: &TailCurve, spec: &WindowSpec, fallback: Option<(f64, f64)>) -> Result<(f64, f64)> {
    if let Some(w) = spec.window {
        return Ok(w);
    }
    if let Some((lo, hi)) = spec.value_window {
        return curve
            .window_by_value(lo, hi)
            .ok_or(Error::Empty("no curve values inside value_window"));
    }
    fallback
        .or_else(|| curve.auto_window())
        .ok_or(Error::Empty("no usable automatic fit window"))
}

fn fit_family(decay: &Decay, curve: &TailCurve, window: (f64, f64)) -> Result<RouteFit> {
    let fitted = match decay {
        Decay::Power { .. } => FitResult::Power(fit_power_tail(curve, window.0, window.1)?),
        Decay::Exponential { .. } => FitResult::Exponential(fit_exponential_tail(curve, window.0, window.1)?),
    };
    Ok(RouteFit { fitted, window })
}

/// Fit every available route.
pub fn fit_inputs(cfg: &ExperimentConfig, inputs: &Inputs, decay: &Decay) -> FitReport {
    let mut report = FitReport::default();
    let mut skipped = Vec::new();
    let mut mc_window = None;
    if let Some(curve) = &inputs.monte_carlo {
        match choose_window(curve, &cfg.fit.monte_carlo, None).and_then(|w| {
            mc_window = Some(w);
            fit_family(decay, curve, w)
        }) {
            Ok(f) => report.monte_carlo = Some(f),
            Err(e) => skipped.push(report_skip("monte_carlo", e)),
        }
    }
    if let Some(curve) = &inputs.solver {
        // Without Monte Carlo data, stay clear of the truncation at x_max.
        let own = curve.signal_window(
            curve.x[curve.value.iter().position(|&v| v <= 0.05).unwrap_or(0)],
            0.5 * cfg.solver.x_max,
        );
        match choose_window(curve, &cfg.fit.solver, mc_window.or(own)).and_then(|w| fit_family(decay, curve, w)) {
            Ok(f) => report.solver = Some(f),
            Err(e) => skipped.push(report_skip("solver", e)),
        }
    }
    if let Some(curve) = &inputs.extinction {
        let (lo, hi) = cfg.fit.extinction_window;
        let power = Decay::Power { exponent: 1.0 };
        match curve
            .signal_window(lo, hi)
            .ok_or(Error::Empty("no extinction-time points with usable signal"))
            .and_then(|w| fit_family(&power, curve, w))
        {
            Ok(f) => report.extinction = Some(f),
            Err(e) => skipped.push(report_skip("extinction", e)),
        }
    }
    report.skipped = skipped;
    report
}

fn report_skip(route: &str, e: Error) -> (String, String) {
    (route.to_string(), e.to_string())
}

pub fn fit(ctx: &Context) -> Result<FitReport> {
    let inputs = load_inputs(ctx)?;
    let pred = prediction(&ctx.config)?;
    let report = fit_inputs(&ctx.config, &inputs, &pred.decay);
    io::write_json(&ctx.path(FIT_JSON), &ctx.hash, &report)?;
    Ok(report)
}

/// Pointwise solver vs Monte Carlo agreement: at each Monte Carlo grid `x`
/// the band `[lower - 3 se, upper + 3 se]` must meet the solver values over
/// `[x - 2h, x + 2h]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub x_max: f64,
    pub points: usize,
    pub violations: usize,
    /// Largest distance from the band, in units of the Monte Carlo stderr.
    pub worst_excess: f64,
    pub worst_x: Option<f64>,
    pub pass: bool,
}

pub fn agreement(mc: &TailCurve, solver: &SolverCurve, x_limit: f64) -> Agreement {
    let upper = mc.upper.clone().unwrap_or_else(|| mc.value.clone());
    let (mut points, mut violations) = (0, 0);
    let (mut worst_excess, mut worst_x) = (0.0f64, None);
    let x_limit = x_limit.min(solver.x_max);
    for i in 0..mc.len() {
        let x = mc.x[i];
        if x > x_limit {
            break;
        }
        points += 1;
        let se = mc.stderr[i];
        let hi_s = solver.at((x - 2.0 * solver.h).max(0.0));
        let lo_s = solver.at(x + 2.0 * solver.h);
        let band_lo = mc.value[i] - 3.0 * se;
        let band_hi = upper[i] + 3.0 * se;
        let gap = (lo_s - band_hi).max(band_lo - hi_s).max(0.0);
        if gap > 0.0 {
            violations += 1;
            let excess = if se > 0.0 { gap / se } else { f64::INFINITY };
            if excess > worst_excess {
                worst_excess = excess;
                worst_x = Some(x);
            }
        }
    }
    Agreement {
        x_max: x_limit,
        points,
        violations,
        worst_excess,
        worst_x,
        pass: violations == 0 && points > 0,
    }
}

/// Solver values with their grid, for interpolation.
pub struct SolverCurve {
    pub h: f64,
    pub x_max: f64,
    pub u: Vec<f64>,
}

impl SolverCurve {
    pub fn from_curve(curve: &TailCurve) -> Result<Self> {
        if curve.len() < 2 {
            return Err(Error::Empty("solver curve has fewer than two nodes"));
        }
        let h = curve.x[1] - curve.x[0];
        Ok(Self {
            h,
            x_max: *curve.x.last().unwrap(),
            u: curve.value.clone(),
        })
    }

    pub fn at(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        Grid { h: self.h, x_max: self.x_max }.interpolate(&self.u, x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub regime: maxbranch_core::asymptotics::Regime,
    pub predicted: TheoryPrediction,
    /// Fit of the primary route (Monte Carlo when present, else solver).
    pub fitted: FitResult,
    pub window: (f64, f64),
    pub tolerances: Tolerances,
    pub pass: bool,
    pub routes: Routes,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement: Option<Agreement>,
    /// Routes that had data but could not be fitted; any entry fails.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<(String, String)>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Routes {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<Comparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<Comparison>,
    /// Extinction-time slope against `1/(β - 1)`; the constant is not checked.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extinction: Option<Comparison>,
}

/// Compare all routes against the prediction.
pub fn evaluate(cfg: &ExperimentConfig, inputs: &Inputs) -> Result<Report> {
    let pred = prediction(cfg)?;
    let fits = fit_inputs(cfg, inputs, &pred.decay);
    let tol = cfg.tolerances;
    let mut routes = Routes::default();
    if let Some(f) = &fits.monte_carlo {
        routes.monte_carlo = Some(compare(&pred, &f.fitted, tol)?);
    }
    if let Some(f) = &fits.solver {
        routes.solver = Some(compare(&pred, &f.fitted, tol)?);
    }
    if let Some(f) = &fits.extinction {
        let ext_pred = TheoryPrediction {
            regime: pred.regime,
            decay: Decay::Power {
                exponent: 1.0 / (prediction_beta(cfg)? - 1.0),
            },
            constant: None,
        };
        routes.extinction = Some(compare(&ext_pred, &f.fitted, tol)?);
    }
    let agreement = match (&inputs.monte_carlo, &inputs.solver) {
        (Some(mc), Some(s)) => Some(agreement(mc, &SolverCurve::from_curve(s)?, cfg.fit.agreement_x_max)),
        _ => None,
    };
    let primary = fits
        .monte_carlo
        .as_ref()
        .or(fits.solver.as_ref())
        .ok_or(Error::Empty("neither the Monte Carlo nor the solver curve could be fitted"))?;
    let pass = fits.skipped.is_empty()
        && [&routes.monte_carlo, &routes.solver, &routes.extinction]
        .iter()
        .all(|c| c.as_ref().map(|c| c.pass).unwrap_or(true))
        && agreement.as_ref().map(|a| a.pass).unwrap_or(true);
    Ok(Report {
        regime: pred.regime,
        predicted: pred,
        fitted: primary.fitted,
        window: primary.window,
        tolerances: tol,
        pass,
        routes,
        agreement,
        skipped: fits.skipped,
    })
}

pub fn verify(ctx: &Context) -> Result<Report> {
    let inputs = load_inputs(ctx)?;
    let report = evaluate(&ctx.config, &inputs)?;
    io::write_json(&ctx.path(REPORT_JSON), &ctx.hash, &report)?;
    Ok(report)
}

/// Plot-ready curves on the Monte Carlo grid (or the solver grid without
/// simulation data) plus a text summary of the last verification.
pub fn report(ctx: &Context) -> Result<String> {
    let inputs = load_inputs(ctx)?;
    let pred = prediction(&ctx.config)?;
    let solver = inputs.solver.as_ref().map(SolverCurve::from_curve).transpose()?;
    let xs = match (&inputs.monte_carlo, &inputs.solver) {
        (Some(mc), _) => mc.x.clone(),
        (None, Some(s)) => s.x.clone(),
        (None, None) => unreachable!("load_inputs requires one route"),
    };
    let nan = || fmt_f64(f64::NAN);
    io::write_csv(
        &ctx.path(CURVES_CSV),
        &ctx.hash,
        &["x", "mc_value", "mc_stderr", "mc_lower", "mc_upper", "solver_u", "predicted"],
        xs.iter().enumerate().map(|(i, &x)| {
            let mut row = vec![fmt_f64(x)];
            match &inputs.monte_carlo {
                Some(mc) => {
                    let up = mc.upper.as_ref().map(|u| u[i]).unwrap_or(mc.value[i]);
                    row.extend([fmt_f64(mc.value[i]), fmt_f64(mc.stderr[i]), fmt_f64(mc.value[i]), fmt_f64(up)]);
                }
                None => row.extend([nan(), nan(), nan(), nan()]),
            }
            row.push(match &solver {
                Some(s) if x <= s.x_max => fmt_f64(s.at(x)),
                _ => nan(),
            });
            row.push(match pred.evaluate(x) {
                Some(v) if x > 0.0 => fmt_f64(v),
                _ => nan(),
            });
            row
        }),
    )?;

    let mut text = format!("config {}\nregime {}\n", ctx.hash, pred.regime.as_str());
    let report_path = ctx.path(REPORT_JSON);
    if report_path.exists() {
        let v = io::read_json(&report_path)?;
        io::check_hash(&ctx.hash, &io::json_hash(&v, &report_path)?, &report_path)?;
        let r: Report = serde_json::from_value(v)?;
        for (name, c) in [
            ("monte_carlo", &r.routes.monte_carlo),
            ("solver", &r.routes.solver),
            ("extinction", &r.routes.extinction),
        ] {
            if let Some(c) = c {
                text.push_str(&format!(
                    "{name:<12} {} window [{:.4}, {:.4}] decay {} constant {} -> {}\n",
                    describe(&c.fitted),
                    c.window.0,
                    c.window.1,
                    check_word(c.decay_check),
                    check_word(c.constant_check),
                    if c.pass { "pass" } else { "fail" }
                ));
            }
        }
        if let Some(a) = &r.agreement {
            text.push_str(&format!(
                "agreement    {} of {} points outside the band (x <= {}) -> {}\n",
                a.violations,
                a.points,
                a.x_max,
                if a.pass { "pass" } else { "fail" }
            ));
        }
        for (route, reason) in &r.skipped {
            text.push_str(&format!("{route:<12} not fitted: {reason}\n"));
        }
        text.push_str(&format!("overall {}\n", if r.pass { "pass" } else { "fail" }));
    } else {
        text.push_str("no report.json yet; run `maxbranch verify` for pass/fail\n");
    }
    text.push_str(&format!("curves written to {}\n", ctx.path(CURVES_CSV).display()));
    Ok(text)
}

fn check_word(c: Check) -> &'static str {
    match c {
        Check::Pass => "pass",
        Check::Fail => "fail",
        Check::Skipped => "skipped",
    }
}

pub fn describe(fit: &FitResult) -> String {
    match fit {
        FitResult::Power(p) => format!("exponent {:.4} constant {:.4}", p.exponent, p.constant),
        FitResult::Exponential(e) => format!("rate {:.4} constant {:.4}", e.rate, e.constant),
    }
}
