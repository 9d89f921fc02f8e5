//! Seeded statistical checks of the samplers, the estimators and the solver.

use std::f64::consts::PI;

use maxbranch_core::asymptotics::fit_power_tail;
use maxbranch_core::branching::{estimate_tail, extinction_tail, simulate_runs, RunOutcome, SimLimits};
use maxbranch_core::fixedpoint::{FixedPointProblem, Grid, Kernel};
use maxbranch_core::levy::LevyModel;
use maxbranch_core::offspring::OffspringLaw;
use maxbranch_core::rng;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn reference_law() -> OffspringLaw {
    OffspringLaw::canonical(1.5, 0.5).unwrap()
}

#[test]
fn offspring_sampler_chi_square() {
    let law = reference_law();
    let n = 1_000_000usize;
    let bins = 51usize;
    let mut counts = vec![0u64; bins + 1];
    let mut r = rng::stream(11, 0);
    for _ in 0..n {
        let k = law.sample(&mut r) as usize;
        counts[k.min(bins)] += 1;
    }
    let mut expected: Vec<f64> = (0..bins).map(|k| law.pmf(k as u64) * n as f64).collect();
    expected.push(law.tail_sum(bins as u64) * n as f64);
    let stat: f64 = counts
        .iter()
        .zip(&expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let p = 1.0 - ChiSquared::new(bins as f64).unwrap().cdf(stat);
    assert!(p > 1e-3, "chi-square {stat:.1} on {bins} dof, p = {p:.2e}");
}

#[test]
fn offspring_tail_constant() {
    let law = reference_law();
    let cb = law.stable_constant();
    let rel = |n: u64| ((n as f64).powf(1.5) * law.tail_sum(n) / cb - 1.0).abs();
    let errs = [rel(100), rel(1_000), rel(10_000)];
    assert!(errs[0] > errs[1] && errs[1] > errs[2] && errs[2] < 1e-2, "{errs:?}");

    let n = 1_000_000;
    let mut r = rng::stream(12, 0);
    let hits = (0..n).filter(|_| law.sample(&mut r) >= 100).count() as f64 / n as f64;
    let p = law.tail_sum(100);
    let se = (p * (1.0 - p) / n as f64).sqrt();
    assert!((hits - p).abs() < 4.0 * se, "P(N >= 100): {hits} vs {p}");
}

#[test]
fn offspring_truncated_mean() {
    // E[N] = 1 with infinite variance; min(N, 1000) has a finite one.
    let law = reference_law();
    let cap = 1000u64;
    let exact: f64 = (0..cap).map(|k| k as f64 * law.pmf(k)).sum::<f64>() + cap as f64 * law.tail_sum(cap);
    let second: f64 = (0..cap).map(|k| (k * k) as f64 * law.pmf(k)).sum::<f64>() + (cap * cap) as f64 * law.tail_sum(cap);
    let n = 1_000_000;
    let mut r = rng::stream(13, 0);
    let mean = (0..n).map(|_| law.sample(&mut r).min(cap) as f64).sum::<f64>() / n as f64;
    let se = ((second - exact * exact) / n as f64).sqrt();
    assert!((mean - exact).abs() < 4.0 * se, "{mean} vs {exact} (se {se})");
}

#[test]
fn fitted_power_tail_of_synthetic_outcomes() {
    // P(M >= x) = min(1, 16 / x²).
    let n = 400_000;
    let mut r = rng::stream(14, 0);
    let outcomes: Vec<RunOutcome> = (0..n)
        .map(|_| {
            let u: f64 = r.random();
            RunOutcome {
                max: 4.0 / (1.0 - u).sqrt(),
                extinction_time: 1.0,
                particles: 1,
                censored: false,
            }
        })
        .collect();
    let grid: Vec<f64> = (0..=400).map(|i| f64::from(i) * 0.5).collect();
    let tail = estimate_tail(&outcomes, &grid).unwrap();
    let (lo, hi) = tail.auto_window().unwrap();
    let fit = fit_power_tail(&tail, lo, hi).unwrap();
    // Neighbouring points share exceedances, so the regression stderr is too
    // small; the exceedance count above the window sets the real spread.
    let k = outcomes.iter().filter(|o| o.max >= lo).count() as f64;
    let se = 2.0 / k.sqrt();
    assert!((fit.exponent - 2.0).abs() < 4.0 * se, "{fit:?}, se {se}");
    assert!((fit.constant / 16.0 - 1.0).abs() < 0.1, "{fit:?}");
}

#[test]
fn cauchy_supremum_tail_constant() {
    // P(S_e >= x) ~ E[e] / (π x) for standard Cauchy.
    let model = LevyModel::cauchy(1e-2).unwrap();
    let n = 200_000;
    let x = 100.0;
    let mut r = rng::stream(15, 0);
    let hits = (0..n).filter(|_| model.sample_killed_pair(&mut r).s >= x).count() as f64 / n as f64;
    assert!((hits * x * PI - 1.0).abs() < 0.15, "x P(S_e >= x) π = {}", hits * x * PI);
}

#[test]
fn cauchy_mesh_halving() {
    let n = 100_000;
    let xs = [0.5, 1.0, 3.0, 10.0, 30.0, 100.0];
    let tail = |step: f64, index: u64| {
        let model = LevyModel::cauchy(step).unwrap();
        let mut r = rng::stream(16, index);
        let s: Vec<f64> = (0..n).map(|_| model.sample_killed_pair(&mut r).s).collect();
        xs.map(|x| s.iter().filter(|&&v| v >= x).count() as f64 / n as f64)
    };
    let (coarse, fine) = (tail(2e-3, 0), tail(1e-3, 1));
    for i in 0..xs.len() {
        let (a, b) = (coarse[i], fine[i]);
        let se = ((a * (1.0 - a) + b * (1.0 - b)) / n as f64).sqrt();
        assert!((a - b).abs() < 3.5 * se, "x = {}: {a} vs {b}", xs[i]);
    }
}

#[test]
fn extinction_tail_brackets_the_exact_curve() {
    // q(t) = (1 + c(β-1) t)^{-1/(β-1)} for Exp(1) lifetimes.
    let model = LevyModel::brownian(1.0, 1.0).unwrap();
    let outcomes = simulate_runs(&model, &reference_law(), 17, 100_000, SimLimits::new(100_000).unwrap(), 2).unwrap();
    let t = [0.5, 1.0, 3.0, 10.0, 30.0];
    let curve = extinction_tail(&outcomes, &t).unwrap();
    let upper = curve.upper.as_ref().unwrap();
    for i in 0..t.len() {
        let q = (1.0 + 0.25 * t[i]).powi(-2);
        let se = curve.stderr[i];
        assert!(q >= curve.value[i] - 4.0 * se && q <= upper[i] + 4.0 * se, "t = {}: {q} vs [{}, {}]", t[i], curve.value[i], upper[i]);
    }
}

#[test]
fn simulated_tail_matches_solver() {
    let model = LevyModel::brownian(1.0, 1.0).unwrap();
    let law = reference_law();
    let outcomes = simulate_runs(&model, &law, 18, 100_000, SimLimits::new(200_000).unwrap(), 2).unwrap();
    let xs = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
    let tail = estimate_tail(&outcomes, &xs).unwrap();
    let problem = FixedPointProblem::new(Grid::new(0.05, 200.0).unwrap(), Kernel::analytic(&model).unwrap(), law);
    let sol = problem.solve(1e-10, 10_000).unwrap();
    let upper = tail.upper.as_ref().unwrap();
    for i in 0..xs.len() {
        let u = sol.value_at(xs[i]);
        let se = tail.stderr[i];
        assert!(u >= tail.value[i] - 4.0 * se && u <= upper[i] + 4.0 * se, "x = {}: {u} vs {}", xs[i], tail.value[i]);
    }
}

#[test]
fn empirical_kernel_converges_to_analytic() {
    let model = LevyModel::brownian(1.0, 1.0).unwrap();
    let law = reference_law();
    let grid = Grid::new(0.1, 40.0).unwrap();
    let exact = FixedPointProblem::new(grid, Kernel::analytic(&model).unwrap(), law.clone())
        .solve(1e-9, 10_000)
        .unwrap();
    let errs: Vec<f64> = [500usize, 20_000]
        .iter()
        .map(|&m| {
            let mut r = rng::stream(19, m as u64);
            let kernel = Kernel::sampled(&model, m, &mut r).unwrap();
            let sol = FixedPointProblem::new(grid, kernel, law.clone()).solve(1e-9, 10_000).unwrap();
            [1.0, 3.0, 6.0]
                .iter()
                .map(|&x| (sol.value_at(x) / exact.value_at(x) - 1.0).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(errs[1] < 0.05, "{errs:?}");
    assert!(errs[1] < errs[0], "{errs:?}");
}

#[test]
fn mean_maximum_is_insensitive_to_truncation() {
    let model = LevyModel::brownian(1.0, 1.0).unwrap();
    let solve = |x_max: f64| {
        FixedPointProblem::new(Grid::new(0.1, x_max).unwrap(), Kernel::analytic(&model).unwrap(), reference_law())
            .solve(1e-10, 10_000)
            .unwrap()
            .integral()
    };
    let (a, b) = (solve(100.0), solve(200.0));
    assert!(b > a && (b / a - 1.0) < 0.05, "{a} vs {b}");
}
