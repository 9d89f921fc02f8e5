//! Parametric Lévy models and samplers for the exponentially killed pair
//! `(L_e, S_e)`, where `e ~ Exp(1)` is independent of the path and
//! `S_t = sup_{s <= t} L_s`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::gamma;

/// Default mesh for discretized stable paths.
pub const DEFAULT_STABLE_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase", deny_unknown_fields)]
pub enum LevyModel {
    /// `L_t = mu t + eta B_t`.
    #[serde(rename = "bm")]
    BrownianWithDrift { mu: f64, eta: f64 },
    /// Symmetric α-stable with `E[exp(i ξ L_1)] = exp(-(scale |ξ|)^α)`.
    #[serde(rename = "stable")]
    SymmetricStable {
        alpha: f64,
        scale: f64,
        #[serde(default = "default_step")]
        step: f64,
    },
}

fn default_step() -> f64 {
    DEFAULT_STABLE_STEP
}

/// One draw of `(L_e, S_e)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KilledPair {
    pub l: f64,
    pub s: f64,
}

/// Rough regular-variation class of `P(L_e >= x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailClass {
    /// All exponential moments near zero are finite.
    Light,
    /// `P(L_e >= x) ~ constant x^{-alpha}`.
    RegularlyVarying { alpha: f64, constant: f64 },
}

impl LevyModel {
    pub fn brownian(mu: f64, eta: f64) -> Result<Self> {
        let m = LevyModel::BrownianWithDrift { mu, eta };
        m.validate()?;
        Ok(m)
    }

    pub fn stable(alpha: f64, scale: f64, step: f64) -> Result<Self> {
        let m = LevyModel::SymmetricStable { alpha, scale, step };
        m.validate()?;
        Ok(m)
    }

    /// Standard symmetric Cauchy process at the given mesh.
    pub fn cauchy(step: f64) -> Result<Self> {
        Self::stable(1.0, 1.0, step)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LevyModel::BrownianWithDrift { mu, eta } => {
                if !mu.is_finite() {
                    return Err(Error::Parameter(format!("mu = {mu} must be finite")));
                }
                if !(eta > 0.0 && eta.is_finite()) {
                    return Err(Error::Parameter(format!("eta = {eta} must be positive")));
                }
            }
            LevyModel::SymmetricStable { alpha, scale, step } => {
                if !(alpha > 0.0 && alpha < 2.0) {
                    return Err(Error::Parameter(format!("alpha = {alpha} must lie in (0, 2)")));
                }
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(Error::Parameter(format!("scale = {scale} must be positive")));
                }
                if !(step > 0.0 && step.is_finite()) {
                    return Err(Error::Parameter(format!("step = {step} must be positive")));
                }
            }
        }
        Ok(())
    }

    /// Same model with a different discretization mesh (no-op for Brownian).
    pub fn with_step(self, step: f64) -> Self {
        match self {
            LevyModel::SymmetricStable { alpha, scale, .. } => {
                LevyModel::SymmetricStable { alpha, scale, step }
            }
            other => other,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LevyModel::BrownianWithDrift { .. } => "brownian-with-drift",
            LevyModel::SymmetricStable { .. } => "symmetric-stable",
        }
    }

    /// Laplace exponent `Ψ(λ) = log E[exp(λ L_1)]`.
    pub fn psi(&self, lambda: f64) -> Result<f64> {
        match *self {
            LevyModel::BrownianWithDrift { mu, eta } => Ok(mu * lambda + 0.5 * eta * eta * lambda * lambda),
            LevyModel::SymmetricStable { .. } => Err(Error::Unsupported(
                "symmetric stable (no finite exponential moments)",
            )),
        }
    }

    /// `E[L_1]`, or `None` when the first moment does not exist.
    pub fn mean(&self) -> Option<f64> {
        match *self {
            LevyModel::BrownianWithDrift { mu, .. } => Some(mu),
            LevyModel::SymmetricStable { alpha, .. } => (alpha > 1.0).then_some(0.0),
        }
    }

    /// `Var[L_1]` when finite.
    pub fn variance(&self) -> Option<f64> {
        match *self {
            LevyModel::BrownianWithDrift { eta, .. } => Some(eta * eta),
            LevyModel::SymmetricStable { .. } => None,
        }
    }

    /// Positive root `ω` of `Ψ(ω) = 0`.
    pub fn cramer_root(&self) -> Result<f64> {
        match *self {
            LevyModel::BrownianWithDrift { mu, eta } => {
                if mu >= 0.0 {
                    return Err(Error::NoRoot(format!("drift mu = {mu} is not negative")));
                }
                Ok(-2.0 * mu / (eta * eta))
            }
            LevyModel::SymmetricStable { .. } => Err(Error::NoRoot(
                "symmetric stable processes have no exponential moments".into(),
            )),
        }
    }

    /// Roots `(r₊, r₋)` of `Ψ(λ) = 1` and `Ψ(-λ) = 1`.
    ///
    /// `S_e ~ Exp(r₊)` and `S_e - L_e ~ Exp(r₋)`, independent.
    pub fn wiener_hopf_rates(&self) -> Result<(f64, f64)> {
        match *self {
            LevyModel::BrownianWithDrift { mu, eta } => {
                let e2 = eta * eta;
                let disc = (mu * mu + 2.0 * e2).sqrt();
                // Cancellation-free forms: r₊ r₋ = 2/η².
                let (r_plus, r_minus) = if mu >= 0.0 {
                    let rm = (mu + disc) / e2;
                    (2.0 / (e2 * rm), rm)
                } else {
                    let rp = (-mu + disc) / e2;
                    (rp, 2.0 / (e2 * rp))
                };
                Ok((r_plus, r_minus))
            }
            LevyModel::SymmetricStable { .. } => Err(Error::Unsupported(
                "symmetric stable (no Wiener-Hopf closed form)",
            )),
        }
    }

    pub fn tail_class(&self) -> TailClass {
        match *self {
            LevyModel::BrownianWithDrift { .. } => TailClass::Light,
            LevyModel::SymmetricStable { alpha, scale, .. } => TailClass::RegularlyVarying {
                alpha,
                constant: stable_tail_constant(alpha, scale),
            },
        }
    }

    /// Draw `(L_e, S_e)`.
    ///
    /// Brownian motion is sampled exactly via its Wiener-Hopf factors; stable
    /// paths are simulated on a grid of mesh `step` with a partial last step.
    pub fn sample_killed_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> KilledPair {
        match *self {
            LevyModel::BrownianWithDrift { .. } => {
                let (rp, rm) = self.wiener_hopf_rates().expect("brownian rates");
                let s: f64 = Exp1.sample(rng);
                let d: f64 = Exp1.sample(rng);
                let s = s / rp;
                KilledPair { l: s - d / rm, s }
            }
            LevyModel::SymmetricStable { alpha, scale, step } => {
                let lifetime: f64 = Exp1.sample(rng);
                stable_path_pair(alpha, scale, step, lifetime, rng)
            }
        }
    }

    /// Draw `(e, L_e, S_e)` jointly, lifetime included.
    ///
    /// Brownian motion uses the Gaussian endpoint and the bridge-maximum
    /// inversion `S = (y + sqrt(y² - 2η²t ln U)) / 2`; this is exact and keeps
    /// the lifetime available for extinction-time bookkeeping.
    pub fn sample_killed_with_lifetime<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, KilledPair) {
        let lifetime: f64 = Exp1.sample(rng);
        match *self {
            LevyModel::BrownianWithDrift { mu, eta } => {
                let z: f64 = rng.sample(StandardNormal);
                let y = mu * lifetime + eta * lifetime.sqrt() * z;
                let u = 1.0 - rng.random::<f64>();
                let s = 0.5 * (y + (y * y - 2.0 * eta * eta * lifetime * u.ln()).sqrt());
                (lifetime, KilledPair { l: y, s: s.max(0.0).max(y) })
            }
            LevyModel::SymmetricStable { alpha, scale, step } => {
                (lifetime, stable_path_pair(alpha, scale, step, lifetime, rng))
            }
        }
    }

    /// Draw the pair with an explicit lifetime by path discretization.
    /// Works for both variants; used as the oracle for the Brownian sampler.
    pub fn sample_path_pair<R: Rng + ?Sized>(&self, lifetime: f64, step: f64, rng: &mut R) -> KilledPair {
        match *self {
            LevyModel::BrownianWithDrift { mu, eta } => {
                let n = (lifetime / step).floor() as u64;
                let rem = lifetime - n as f64 * step;
                let sd = eta * step.sqrt();
                let mut x = 0.0f64;
                let mut sup = 0.0f64;
                for _ in 0..n {
                    let z: f64 = rng.sample(StandardNormal);
                    x += mu * step + sd * z;
                    sup = sup.max(x);
                }
                if rem > 0.0 {
                    let z: f64 = rng.sample(StandardNormal);
                    x += mu * rem + eta * rem.sqrt() * z;
                    sup = sup.max(x);
                }
                KilledPair { l: x, s: sup }
            }
            LevyModel::SymmetricStable { alpha, scale, .. } => {
                stable_path_pair(alpha, scale, step, lifetime, rng)
            }
        }
    }

    /// Path-discretized pair with a fresh `Exp(1)` lifetime.
    pub fn sample_killed_pair_on_mesh<R: Rng + ?Sized>(&self, step: f64, rng: &mut R) -> KilledPair {
        let lifetime: f64 = Exp1.sample(rng);
        self.sample_path_pair(lifetime, step, rng)
    }

    /// `P(S_e >= x)`: exact for Brownian motion (stderr 0), Monte Carlo with
    /// binomial standard error otherwise.
    pub fn survival_sup<R: Rng + ?Sized>(&self, x: f64, n_mc: usize, rng: &mut R) -> Result<(f64, f64)> {
        if x <= 0.0 {
            return Ok((1.0, 0.0));
        }
        match self {
            LevyModel::BrownianWithDrift { .. } => {
                let (rp, _) = self.wiener_hopf_rates()?;
                Ok(((-rp * x).exp(), 0.0))
            }
            LevyModel::SymmetricStable { .. } => {
                if n_mc == 0 {
                    return Err(Error::Empty("survival_sup needs n_mc > 0"));
                }
                let hits = (0..n_mc)
                    .filter(|_| self.sample_killed_pair(rng).s >= x)
                    .count();
                let p = hits as f64 / n_mc as f64;
                Ok((p, (p * (1.0 - p) / n_mc as f64).sqrt()))
            }
        }
    }
}

/// `lim x^α P(L_e >= x)` for a symmetric stable process with the given scale:
/// `scale^α Γ(α) sin(πα/2) / π` (since `E[e] = 1`).
pub fn stable_tail_constant(alpha: f64, scale: f64) -> f64 {
    scale.powf(alpha) * gamma(alpha) * (PI * alpha / 2.0).sin() / PI
}

/// Standard symmetric α-stable variate by Chambers-Mallows-Stuck.
#[inline]
pub fn sample_symmetric_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5);
    if alpha == 1.0 {
        return v.tan();
    }
    let w: f64 = Exp1.sample(rng);
    let av = alpha * v;
    av.sin() / v.cos().powf(1.0 / alpha) * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
}

fn stable_path_pair<R: Rng + ?Sized>(alpha: f64, scale: f64, step: f64, lifetime: f64, rng: &mut R) -> KilledPair {
    let n = (lifetime / step).floor() as u64;
    let rem = lifetime - n as f64 * step;
    let inc_scale = scale * step.powf(1.0 / alpha);
    let mut x = 0.0f64;
    let mut sup = 0.0f64;
    if alpha == 1.0 {
        // Cauchy fast path: a ratio of independent normals, about twice as
        // cheap as tan of a uniform angle.
        for _ in 0..n {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            x += inc_scale * (a / b);
            sup = sup.max(x);
        }
    } else {
        for _ in 0..n {
            x += inc_scale * sample_symmetric_stable(alpha, rng);
            sup = sup.max(x);
        }
    }
    if rem > 0.0 {
        x += scale * rem.powf(1.0 / alpha) * sample_symmetric_stable(alpha, rng);
        sup = sup.max(x);
    }
    KilledPair { l: x, s: sup }
}
