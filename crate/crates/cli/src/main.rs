use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand};
use maxbranch::commands::{self, Context};
use maxbranch::config::ExperimentConfig;

/// Simulate and solve for the all-time maximum of a critical branching Lévy
/// process, and check the tail against its predicted asymptotics.
#[derive(Parser)]
#[command(name = "maxbranch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo runs: outcomes, survival tail and extinction tail.
    Simulate(Common),
    /// Fixed-point solution u(x) with remainder diagnostics.
    Solve(Common),
    /// Predicted regime, decay and constant.
    Predict(Common),
    /// Tail fits of the existing simulate/solve outputs.
    Fit(Common),
    /// Compare fits with the prediction; exits 1 on failure.
    Verify(Common),
    /// Plot-ready curves.csv and a summary of the last verification.
    Report(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads [default: MAXBRANCH_THREADS, else all cores].
    #[arg(long, value_name = "N", env = "MAXBRANCH_THREADS")]
    threads: Option<usize>,
    /// Override the config output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

impl Common {
    fn context(&self) -> anyhow::Result<Context> {
        let mut config = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.out_dir = out.clone();
        }
        let threads = self
            .threads
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
        let mut ctx = Context::new(config, threads);
        ctx.config_path = Some(self.config.clone());
        Ok(ctx)
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Simulate(c) => {
            let ctx = c.context()?;
            let s = commands::simulate(&ctx).context("simulate")?;
            println!(
                "{} runs in {:.1} s, censored fraction {:.3e}; wrote {}",
                s.runs,
                s.wall_time_seconds,
                s.censored_fraction,
                ctx.out_dir().display()
            );
        }
        Command::Solve(c) => {
            let ctx = c.context()?;
            let s = commands::solve(&ctx).context("solve")?;
            println!(
                "converged in {} iterations (residual {:.3e}), x_max doubling shifts u by {:.3e}; wrote {}",
                s.iterations,
                s.residual,
                s.truncation_shift,
                ctx.out_dir().display()
            );
        }
        Command::Predict(c) => {
            let ctx = c.context()?;
            let p = commands::predict_cmd(&ctx)?;
            println!("{}", serde_json::to_string_pretty(&p)?);
        }
        Command::Fit(c) => {
            let ctx = c.context()?;
            let f = commands::fit(&ctx)?;
            for (name, r) in [("monte_carlo", &f.monte_carlo), ("solver", &f.solver), ("extinction", &f.extinction)] {
                if let Some(r) = r {
                    println!(
                        "{name:<12} {} on [{:.4}, {:.4}]",
                        commands::describe(&r.fitted),
                        r.window.0,
                        r.window.1
                    );
                }
            }
            for (route, reason) in &f.skipped {
                println!("{route:<12} not fitted: {reason}");
            }
        }
        Command::Verify(c) => {
            let ctx = c.context()?;
            let r = commands::verify(&ctx)?;
            println!(
                "{}: {} on [{:.4}, {:.4}] -> {}",
                r.regime.as_str(),
                commands::describe(&r.fitted),
                r.window.0,
                r.window.1,
                if r.pass { "pass" } else { "FAIL" }
            );
            return Ok(r.pass);
        }
        Command::Report(c) => {
            let ctx = c.context()?;
            print!("{}", commands::report(&ctx)?);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
