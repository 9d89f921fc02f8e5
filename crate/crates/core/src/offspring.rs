//! Critical offspring laws in the domain of attraction of a β-stable law.
//!
//! The built-in family has generating function `g(s) = s + c (1 - s)^β`,
//! so `F(z) = z - 1 + g(1 - z) = c z^β` exactly and every probability has a
//! closed form:
//!
//! * `p_0 = c`, `p_1 = 1 - cβ`,
//! * `p_k = c Γ(k - β) / (Γ(-β) Γ(k + 1))` for `k >= 2`,
//! * `P(N >= n) = c Γ(n - β) / (|Γ(1 - β)| Γ(n))` for `n >= 2`,
//!
//! giving `n^β P(N >= n) -> c (β - 1) / Γ(2 - β)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{gamma, ln_gamma_ratio};

/// Size of the cached tail table used by the inverse-CDF sampler.
pub const TABLE_CUTOFF: usize = 10_000;

/// Serialized form: `{family = "canonical", beta, c}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum OffspringSpec {
    Canonical { beta: f64, c: f64 },
    Table { beta: f64, c_beta: f64, pmf: Vec<f64> },
}

impl OffspringSpec {
    pub fn build(&self) -> Result<OffspringLaw> {
        match self {
            OffspringSpec::Canonical { beta, c } => OffspringLaw::canonical(*beta, *c),
            OffspringSpec::Table { beta, c_beta, pmf } => {
                OffspringLaw::from_table(*beta, *c_beta, pmf.clone())
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Family {
    Canonical { c: f64 },
    Table { pmf: Vec<f64>, c_beta: f64 },
}

/// A critical offspring distribution. Immutable once built.
#[derive(Debug, Clone)]
pub struct OffspringLaw {
    beta: f64,
    family: Family,
    // tail[k] = P(N >= k) for k in 0..tail.len()
    tail: Vec<f64>,
}

impl OffspringLaw {
    /// The family `g(s) = s + c (1 - s)^β` with `1 < β < 2`, `0 < c <= 1/β`.
    pub fn canonical(beta: f64, c: f64) -> Result<Self> {
        if !(beta > 1.0 && beta < 2.0) {
            return Err(Error::Parameter(format!("beta = {beta} must lie in (1, 2)")));
        }
        if !(c > 0.0 && c <= 1.0 / beta) {
            return Err(Error::Parameter(format!(
                "c = {c} must lie in (0, 1/beta] = (0, {}]",
                1.0 / beta
            )));
        }
        let mut tail = Vec::with_capacity(TABLE_CUTOFF + 2);
        tail.push(1.0);
        tail.push(1.0 - c);
        // P(N >= 2) = c(β - 1), then T(n + 1) = T(n) (n - β) / n.
        let mut t = c * (beta - 1.0);
        tail.push(t);
        for n in 2..=TABLE_CUTOFF {
            t *= (n as f64 - beta) / n as f64;
            tail.push(t);
        }
        Ok(Self {
            beta,
            family: Family::Canonical { c },
            tail,
        })
    }

    /// A user-supplied finite pmf with a declared tail constant `c_β`.
    ///
    /// The table must be normalized and critical, and `n^β P(N >= n)` at
    /// `n = len / 16` must be within 25% of `c_beta`.
    pub fn from_table(beta: f64, c_beta: f64, pmf: Vec<f64>) -> Result<Self> {
        if !(beta > 1.0 && beta < 2.0) {
            return Err(Error::Parameter(format!("beta = {beta} must lie in (1, 2)")));
        }
        if !(c_beta > 0.0) {
            return Err(Error::Parameter(format!("c_beta = {c_beta} must be positive")));
        }
        if pmf.len() < 16 {
            return Err(Error::Parameter("offspring table needs at least 16 entries".into()));
        }
        if pmf.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::Parameter("offspring table has a negative entry".into()));
        }
        let total: f64 = pmf.iter().sum();
        let mean: f64 = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!("offspring table sums to {total}")));
        }
        if (mean - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!("offspring table has mean {mean}, not 1")));
        }
        let mut tail = vec![0.0; pmf.len() + 1];
        for k in (0..pmf.len()).rev() {
            tail[k] = tail[k + 1] + pmf[k];
        }
        let probe = pmf.len() / 16;
        let observed = (probe as f64).powf(beta) * tail[probe];
        if ((observed - c_beta) / c_beta).abs() > 0.25 {
            return Err(Error::Parameter(format!(
                "declared c_beta = {c_beta} but n^beta P(N >= n) = {observed} at n = {probe}"
            )));
        }
        Ok(Self {
            beta,
            family: Family::Table { pmf, c_beta },
            tail,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `p_0 = P(N = 0)`.
    pub fn p0(&self) -> f64 {
        self.pmf(0)
    }

    pub fn spec(&self) -> OffspringSpec {
        match &self.family {
            Family::Canonical { c } => OffspringSpec::Canonical {
                beta: self.beta,
                c: *c,
            },
            Family::Table { pmf, c_beta } => OffspringSpec::Table {
                beta: self.beta,
                c_beta: *c_beta,
                pmf: pmf.clone(),
            },
        }
    }

    pub fn pmf(&self, k: u64) -> f64 {
        match &self.family {
            Family::Canonical { c } => canonical_pmf(self.beta, *c, k),
            Family::Table { pmf, .. } => pmf.get(k as usize).copied().unwrap_or(0.0),
        }
    }

    /// `P(N >= n)`, analytic for the canonical family.
    pub fn tail_sum(&self, n: u64) -> f64 {
        if let Some(t) = self.tail.get(n as usize) {
            return *t;
        }
        match &self.family {
            Family::Canonical { c } => canonical_tail(self.beta, *c, n),
            Family::Table { .. } => 0.0,
        }
    }

    /// The tail constant `c_β = lim n^β P(N >= n)`.
    pub fn stable_constant(&self) -> f64 {
        match &self.family {
            Family::Canonical { c } => c * (self.beta - 1.0) / gamma(2.0 - self.beta),
            Family::Table { c_beta, .. } => *c_beta,
        }
    }

    /// `lim F(z) / z^β = c_β Γ(2 - β) / (β - 1)`.
    pub fn small_z_constant(&self) -> f64 {
        self.stable_constant() * gamma(2.0 - self.beta) / (self.beta - 1.0)
    }

    /// `F(z) = z - 1 + Σ p_n (1 - z)^n` on `[0, 1]`.
    pub fn f_of(&self, z: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&z) {
            return Err(Error::Domain {
                value: z,
                domain: "[0, 1]",
            });
        }
        Ok(self.f_unchecked(z))
    }

    /// `F` without the domain check, for inner loops that already clamp.
    #[inline]
    pub fn f_unchecked(&self, z: f64) -> f64 {
        match &self.family {
            Family::Canonical { c } => c * z.powf(self.beta),
            Family::Table { pmf, .. } => table_f(pmf, z),
        }
    }

    /// Draw an offspring count by inverse CDF.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        // V in (0, 1]; N = max{n : P(N >= n) >= V}.
        let v = 1.0 - rng.random::<f64>();
        let last = self.tail.len() - 1;
        if v > self.tail[last] {
            // tail is decreasing: find the first index with tail < v.
            let idx = self.tail.partition_point(|&t| t >= v);
            return (idx - 1) as u64;
        }
        match &self.family {
            Family::Canonical { c } => self.invert_tail(*c, v, last as u64),
            Family::Table { .. } => (last - 1) as u64,
        }
    }

    fn invert_tail(&self, c: f64, v: f64, from: u64) -> u64 {
        let beta = self.beta;
        // Largest n >= from with T(n) >= v; T(from) >= v holds on entry.
        let guess = (self.stable_constant() / v).powf(1.0 / beta).floor();
        let mut lo = from;
        let mut hi = if guess.is_finite() && guess > from as f64 {
            (guess as u64).max(from + 1)
        } else {
            from + 1
        };
        while canonical_tail(beta, c, hi) >= v {
            lo = hi;
            hi = hi.saturating_mul(2);
            if hi == u64::MAX {
                return lo;
            }
        }
        if canonical_tail(beta, c, lo) < v {
            lo = from;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if canonical_tail(beta, c, mid) >= v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

fn canonical_pmf(beta: f64, c: f64, k: u64) -> f64 {
    match k {
        0 => c,
        1 => 1.0 - c * beta,
        _ => {
            // Γ(-β) = Γ(2 - β) / (β (β - 1)) > 0 for β in (1, 2).
            let kf = k as f64;
            let ln_gamma_neg_beta = (gamma(2.0 - beta) / (beta * (beta - 1.0))).ln();
            c * (ln_gamma_ratio(kf - beta, beta + 1.0) - ln_gamma_neg_beta).exp()
        }
    }
}

fn canonical_tail(beta: f64, c: f64, n: u64) -> f64 {
    match n {
        0 => 1.0,
        1 => 1.0 - c,
        _ => {
            let nf = n as f64;
            // |Γ(1 - β)| = Γ(2 - β) / (β - 1)
            let abs_g = gamma(2.0 - beta) / (beta - 1.0);
            c * ln_gamma_ratio(nf - beta, beta).exp() / abs_g
        }
    }
}

fn table_f(pmf: &[f64], z: f64) -> f64 {
    // Σ p_n (n z - 1 + (1 - z)^n): every summand is nonnegative.
    if z == 0.0 {
        return 0.0;
    }
    let log1mz = (-z).ln_1p();
    pmf.iter()
        .enumerate()
        .skip(2)
        .map(|(n, p)| {
            let nf = n as f64;
            p * (nf * z + (nf * log1mz).exp_m1())
        })
        .sum()
}
