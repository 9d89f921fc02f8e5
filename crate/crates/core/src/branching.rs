//! Simulation of the critical branching Lévy process to extinction.
//!
//! Each particle lives an `Exp(1)` time, moves as the Lévy process and then
//! leaves an offspring-law number of children at its death position. A run
//! records the all-time maximum `M`, the extinction time and the number of
//! processed particles; a particle cap turns runaway populations into
//! explicitly censored outcomes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::TailCurve;
use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::offspring::OffspringLaw;
use crate::rng;

pub const DEFAULT_PARTICLE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimLimits {
    pub particle_cap: u64,
}

impl Default for SimLimits {
    fn default() -> Self {
        Self {
            particle_cap: DEFAULT_PARTICLE_CAP,
        }
    }
}

impl SimLimits {
    pub fn new(particle_cap: u64) -> Result<Self> {
        if particle_cap == 0 {
            return Err(Error::Parameter("particle_cap must be at least 1".into()));
        }
        Ok(Self { particle_cap })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    /// Largest `birth position + S_e` over processed particles.
    pub max: f64,
    /// Last death time; only a lower bound when `censored`.
    pub extinction_time: f64,
    pub particles: u64,
    pub censored: bool,
}

// `count` siblings born at the same place and time, still to be processed.
struct Pending {
    time: f64,
    position: f64,
    count: u64,
}

/// One realization, processed depth first (a child's subtree before its
/// siblings) so the stack stays shallow.
pub fn simulate_max<R: rand::Rng + ?Sized>(
    model: &LevyModel,
    law: &OffspringLaw,
    rng: &mut R,
    limits: SimLimits,
) -> RunOutcome {
    let mut stack = vec![Pending {
        time: 0.0,
        position: 0.0,
        count: 1,
    }];
    let mut max = 0.0f64;
    let mut extinction_time = 0.0f64;
    let mut particles = 0u64;
    while let Some(top) = stack.last_mut() {
        if particles == limits.particle_cap {
            break;
        }
        let (time, position) = (top.time, top.position);
        top.count -= 1;
        if top.count == 0 {
            stack.pop();
        }
        particles += 1;
        let (lifetime, pair) = model.sample_killed_with_lifetime(rng);
        max = max.max(position + pair.s);
        let death = time + lifetime;
        extinction_time = extinction_time.max(death);
        let children = law.sample(rng);
        if children > 0 {
            stack.push(Pending {
                time: death,
                position: position + pair.l,
                count: children,
            });
        }
    }
    RunOutcome {
        max,
        extinction_time,
        particles,
        censored: !stack.is_empty(),
    }
}

/// Runs `0..runs` under `seed`, each on its own stream; the result is in run
/// order and does not depend on `threads`.
pub fn simulate_runs(
    model: &LevyModel,
    law: &OffspringLaw,
    seed: u64,
    runs: u64,
    limits: SimLimits,
    threads: usize,
) -> Result<Vec<RunOutcome>> {
    simulate_run_range(model, law, seed, 0..runs, limits, threads)
}

pub fn simulate_run_range(
    model: &LevyModel,
    law: &OffspringLaw,
    seed: u64,
    range: std::ops::Range<u64>,
    limits: SimLimits,
    threads: usize,
) -> Result<Vec<RunOutcome>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        range
            .into_par_iter()
            .map(|i| {
                let mut r = rng::stream(seed, i);
                simulate_max(model, law, &mut r, limits)
            })
            .collect()
    }))
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::Parameter("grid values must be nonnegative".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("grid must be strictly increasing".into()));
    }
    Ok(())
}

fn binomial_se(p: f64, n: f64) -> f64 {
    (p * (1.0 - p) / n).max(0.0).sqrt()
}

/// Empirical `P(M >= x)` with censoring brackets.
///
/// The lower curve counts a censored run only where its observed maximum
/// already reaches `x`; the upper curve counts every censored run as
/// exceeding. The reported value is the lower curve.
pub fn estimate_tail(outcomes: &[RunOutcome], x_grid: &[f64]) -> Result<TailCurve> {
    if outcomes.is_empty() {
        return Err(Error::Empty("no run outcomes"));
    }
    check_grid(x_grid)?;
    let n = outcomes.len() as f64;
    let censored = outcomes.iter().filter(|o| o.censored).count() as f64;
    let mut maxima: Vec<(f64, bool)> = outcomes.iter().map(|o| (o.max, o.censored)).collect();
    maxima.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut value = Vec::with_capacity(x_grid.len());
    let mut stderr = Vec::with_capacity(x_grid.len());
    let mut upper = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let first = maxima.partition_point(|m| m.0 < x);
        let at_least = (maxima.len() - first) as f64;
        let censored_at_least = maxima[first..].iter().filter(|m| m.1).count() as f64;
        let lo = at_least / n;
        let up = (at_least + censored - censored_at_least) / n;
        value.push(lo);
        stderr.push(binomial_se(lo, n));
        upper.push(up);
    }
    Ok(TailCurve {
        x: x_grid.to_vec(),
        value,
        stderr,
        upper: Some(upper),
    })
}

/// Empirical `P(ζ > t)` with censoring brackets.
///
/// A censored run's recorded time is a lower bound for its extinction time,
/// so it enters the lower curve only where that bound already exceeds `t`.
pub fn extinction_tail(outcomes: &[RunOutcome], t_grid: &[f64]) -> Result<TailCurve> {
    if outcomes.is_empty() {
        return Err(Error::Empty("no run outcomes"));
    }
    check_grid(t_grid)?;
    let n = outcomes.len() as f64;
    let censored = outcomes.iter().filter(|o| o.censored).count() as f64;
    let mut times: Vec<(f64, bool)> = outcomes.iter().map(|o| (o.extinction_time, o.censored)).collect();
    times.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut value = Vec::with_capacity(t_grid.len());
    let mut stderr = Vec::with_capacity(t_grid.len());
    let mut upper = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let first = times.partition_point(|m| m.0 <= t);
        let above = (times.len() - first) as f64;
        let censored_above = times[first..].iter().filter(|m| m.1).count() as f64;
        let lo = above / n;
        value.push(lo);
        stderr.push(binomial_se(lo, n));
        upper.push((above + censored - censored_above) / n);
    }
    Ok(TailCurve {
        x: t_grid.to_vec(),
        value,
        stderr,
        upper: Some(upper),
    })
}

/// Fraction of censored runs.
pub fn censored_fraction(outcomes: &[RunOutcome]) -> f64 {
    if outcomes.is_empty() {
        return 0.0;
    }
    outcomes.iter().filter(|o| o.censored).count() as f64 / outcomes.len() as f64
}
