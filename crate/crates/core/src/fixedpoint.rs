//! Monotone fixed-point solver for `u(x) = P(M >= x)`.
//!
//! `u` is the smallest solution in `[0, 1]` of
//!
//! ```text
//! u(x) = P(S_e >= x) + E[1{S_e < x} (u - F(u))(x - L_e)],    x >= 0,
//! ```
//!
//! with `u = 0` on the negative half-line. Iterating the right-hand side `T`
//! from `u ≡ 0` gives `u_n(x) = P(the maximum over the first n generations
//! reaches x)`, a pointwise nondecreasing sequence.
//!
//! On the grid `{0, h, ..., x_max}` the function `w = u - F(u)` is taken
//! piecewise linear between nodes and zero beyond `x_max`. Two kernels are
//! supported: a frozen sample of `(L_e, S_e)` pairs, and the exact
//! Brownian-with-drift law where `S_e` and `S_e - L_e` are independent
//! exponentials with rates `(r₊, r₋)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{KilledPair, LevyModel};
use crate::offspring::OffspringLaw;
use crate::special::GaussLegendre;

/// Nodes per cell for the outer convolution of the analytic kernel.
const CELL_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub h: f64,
    pub x_max: f64,
}

impl Grid {
    pub fn new(h: f64, x_max: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Parameter(format!("grid step h = {h} must be positive")));
        }
        if !(x_max > h) {
            return Err(Error::Parameter(format!("x_max = {x_max} must exceed h = {h}")));
        }
        let n = (x_max / h).round();
        if ((n * h) - x_max).abs() > 1e-9 * x_max {
            return Err(Error::Parameter(format!("x_max = {x_max} is not a multiple of h = {h}")));
        }
        Ok(Self { h, x_max })
    }

    /// Number of nodes, `x_max / h + 1`.
    pub fn len(&self) -> usize {
        (self.x_max / self.h).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.h
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.x(j)).collect()
    }

    /// Linear interpolation of nodal values, zero outside `[0, x_max]`.
    pub fn interpolate(&self, values: &[f64], y: f64) -> f64 {
        if !(0.0..=self.x_max).contains(&y) {
            return 0.0;
        }
        let t = y / self.h;
        let a = (t.floor() as usize).min(values.len() - 1);
        let frac = t - a as f64;
        let va = values[a];
        let vb = values.get(a + 1).copied().unwrap_or(0.0);
        va + (vb - va) * frac
    }
}

/// Descriptor stored with solver output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KernelDescriptor {
    ProductExponential { r_plus: f64, r_minus: f64 },
    Empirical { pairs: usize },
}

/// Joint law of `(L_e, S_e)` as seen by the operator.
#[derive(Debug, Clone)]
pub enum Kernel {
    ProductExponential { r_plus: f64, r_minus: f64 },
    Empirical { pairs: Vec<KilledPair> },
}

impl Kernel {
    /// Exact kernel for a Brownian model.
    pub fn analytic(model: &LevyModel) -> Result<Self> {
        match model {
            LevyModel::BrownianWithDrift { .. } => {
                let (r_plus, r_minus) = model.wiener_hopf_rates()?;
                Ok(Kernel::ProductExponential { r_plus, r_minus })
            }
            _ => Err(Error::Unsupported("analytic kernel for a non-Brownian model")),
        }
    }

    /// Frozen sample of `m` pairs drawn from `rng`.
    pub fn sampled<R: rand::Rng + ?Sized>(model: &LevyModel, m: usize, rng: &mut R) -> Result<Self> {
        if m == 0 {
            return Err(Error::Empty("empirical kernel needs at least one pair"));
        }
        let pairs = (0..m).map(|_| model.sample_killed_pair(rng)).collect();
        Self::empirical(pairs)
    }

    pub fn empirical(pairs: Vec<KilledPair>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Empty("empirical kernel needs at least one pair"));
        }
        if let Some(p) = pairs.iter().find(|p| !(p.s >= 0.0 && p.s >= p.l)) {
            return Err(Error::Parameter(format!("invalid pair (l = {}, s = {})", p.l, p.s)));
        }
        Ok(Kernel::Empirical { pairs })
    }

    pub fn descriptor(&self) -> KernelDescriptor {
        match self {
            Kernel::ProductExponential { r_plus, r_minus } => KernelDescriptor::ProductExponential {
                r_plus: *r_plus,
                r_minus: *r_minus,
            },
            Kernel::Empirical { pairs } => KernelDescriptor::Empirical { pairs: pairs.len() },
        }
    }
}

/// Grid-specific layout of an empirical kernel.
#[derive(Debug, Clone)]
struct EmpiricalLayout {
    m: f64,
    // Pairs sorted by activation index: a pair is active at node j once
    // x_j > s. Entries: (activation, offset k = floor(l/h), fraction f).
    entries: Vec<(usize, i64, f64)>,
    // active[j] = number of pairs with s < x_j.
    active: Vec<usize>,
    // Pairs sorted by s descending, for the remainder.
    by_s_desc: Vec<KilledPair>,
}

impl EmpiricalLayout {
    fn new(pairs: &[KilledPair], grid: &Grid) -> Self {
        let n = grid.len();
        let h = grid.h;
        let mut entries: Vec<(usize, i64, f64)> = pairs
            .iter()
            .filter_map(|p| {
                // smallest j with j h > s
                let mut act = (p.s / h).floor() as i64 + 1;
                while act > 0 && (act - 1) as f64 * h > p.s {
                    act -= 1;
                }
                while act as f64 * h <= p.s {
                    act += 1;
                }
                if act as usize >= n {
                    return None;
                }
                let t = p.l / h;
                let k = t.floor();
                Some((act as usize, k as i64, t - k))
            })
            .collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.total_cmp(&b.2)));
        let mut active = vec![0usize; n];
        let mut idx = 0;
        for (j, slot) in active.iter_mut().enumerate() {
            while idx < entries.len() && entries[idx].0 <= j {
                idx += 1;
            }
            *slot = idx;
        }
        let mut by_s_desc = pairs.to_vec();
        by_s_desc.sort_by(|a, b| b.s.total_cmp(&a.s));
        Self {
            m: pairs.len() as f64,
            entries,
            active,
            by_s_desc,
        }
    }
}

/// The operator `T` on a fixed grid, kernel and offspring law.
#[derive(Debug, Clone)]
pub struct FixedPointProblem {
    grid: Grid,
    kernel: Kernel,
    law: OffspringLaw,
    layout: Option<EmpiricalLayout>,
    gl: GaussLegendre,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSolution {
    pub x_max: f64,
    pub h: f64,
    pub u: Vec<f64>,
    /// Sup-norm of the last update.
    pub residual: f64,
    pub iterations: usize,
    /// Sup-norm of every update, in order.
    pub updates: Vec<f64>,
}

impl SolverSolution {
    pub fn grid(&self) -> Grid {
        Grid {
            h: self.h,
            x_max: self.x_max,
        }
    }

    pub fn x(&self) -> Vec<f64> {
        self.grid().points()
    }

    /// Interpolated `u(x)`, zero for negative `x` and beyond `x_max`.
    pub fn value_at(&self, x: f64) -> f64 {
        self.grid().interpolate(&self.u, x)
    }

    /// Trapezoidal `∫_0^{x_max} u`, a truncated `E[M]`.
    pub fn integral(&self) -> f64 {
        let n = self.u.len();
        self.h * (self.u.iter().sum::<f64>() - 0.5 * (self.u[0] + self.u[n - 1]))
    }
}

/// Tolerance for order checks after every iteration.
const ORDER_SLACK: f64 = 1e-12;

impl FixedPointProblem {
    pub fn new(grid: Grid, kernel: Kernel, law: OffspringLaw) -> Self {
        let layout = match &kernel {
            Kernel::Empirical { pairs } => Some(EmpiricalLayout::new(pairs, &grid)),
            Kernel::ProductExponential { .. } => None,
        };
        Self {
            grid,
            kernel,
            law,
            layout,
            gl: GaussLegendre::new(CELL_NODES),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn law(&self) -> &OffspringLaw {
        &self.law
    }

    fn w_of(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .map(|&z| {
                let z = z.clamp(0.0, 1.0);
                z - self.law.f_unchecked(z)
            })
            .collect()
    }

    /// `P(S_e >= x_j)` on the grid (empirical or exact).
    pub fn sup_survival(&self) -> Vec<f64> {
        match (&self.kernel, &self.layout) {
            (Kernel::ProductExponential { r_plus, .. }, _) => {
                (0..self.grid.len()).map(|j| (-r_plus * self.grid.x(j)).exp()).collect()
            }
            (Kernel::Empirical { .. }, Some(lay)) => lay.active.iter().map(|&a| 1.0 - a as f64 / lay.m).collect(),
            _ => unreachable!("empirical kernel without layout"),
        }
    }

    /// One application of `T`.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.grid.len() {
            return Err(Error::Mismatch(format!(
                "grid function has {} values, grid has {} nodes",
                u.len(),
                self.grid.len()
            )));
        }
        let w = self.w_of(u);
        let mut out = match (&self.kernel, &self.layout) {
            (Kernel::ProductExponential { r_plus, r_minus }, _) => self.apply_exponential(&w, *r_plus, *r_minus),
            (Kernel::Empirical { .. }, Some(lay)) => self.apply_empirical(&w, lay),
            _ => unreachable!("empirical kernel without layout"),
        };
        for v in out.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
        Ok(out)
    }

    fn apply_empirical(&self, w: &[f64], lay: &EmpiricalLayout) -> Vec<f64> {
        let n = self.grid.len();
        // Contribution of a pair with l = (k + f) h at node j:
        //   f w[j - k - 1] + (1 - f) w[j - k],
        // where the first term sits on (x_max, x_max + h) when j - k - 1 is the
        // last node, so it uses `w_inner` (last node zeroed). Weights are
        // accumulated by offset d = j - (node index) over d in [-n, n].
        let span = 2 * n + 2;
        let base = n as i64 + 1;
        let mut w_inner = w.to_vec();
        w_inner[n - 1] = 0.0;
        let mut hist_lower = vec![0.0f64; span];
        let mut hist_upper = vec![0.0f64; span];
        let (mut d_lo, mut d_hi) = (i64::MAX, i64::MIN);
        let mut next = 0usize;
        let mut out = vec![0.0; n];
        for (j, slot) in out.iter_mut().enumerate() {
            while next < lay.entries.len() && lay.entries[next].0 <= j {
                let (_, k, f) = lay.entries[next];
                next += 1;
                // Offsets outside [-n, n] never reach a node.
                if f > 0.0 && k + 1 >= -(n as i64) && k < n as i64 {
                    hist_lower[(k + 1 + base) as usize] += f;
                    d_lo = d_lo.min(k + 1);
                    d_hi = d_hi.max(k + 1);
                }
                if k >= -(n as i64) && k <= n as i64 {
                    hist_upper[(k + base) as usize] += 1.0 - f;
                    d_lo = d_lo.min(k);
                    d_hi = d_hi.max(k);
                }
            }
            let mut acc = 0.0;
            if d_lo <= d_hi {
                let jj = j as i64;
                // node index j - d must lie in [0, n - 1]
                let lo = d_lo.max(jj - (n as i64 - 1));
                let hi = d_hi.min(jj);
                for d in lo..=hi {
                    let a = (jj - d) as usize;
                    let b = (d + base) as usize;
                    acc += hist_lower[b] * w_inner[a] + hist_upper[b] * w[a];
                }
            }
            *slot = 1.0 - lay.active[j] as f64 / lay.m + acc / lay.m;
        }
        out
    }

    fn apply_exponential(&self, w: &[f64], rp: f64, rm: f64) -> Vec<f64> {
        let g = self.g_nodes(w, rm);
        let n = self.grid.len();
        let h = self.grid.h;
        let decay = (-rp * h).exp();
        let mut out = vec![0.0; n];
        out[0] = 1.0;
        let mut k = 0.0;
        for j in 0..n - 1 {
            let y0 = self.grid.x(j);
            let y1 = y0 + h;
            let slope = (w[j + 1] - w[j]) / h;
            let cell = self.gl.integrate(y0, y1, |y| {
                let tau = y - y0;
                let g_y = (-rm * (h - tau)).exp() * g[j + 1]
                    + (w[j] + slope * tau) * e0(rm, h - tau)
                    + slope * e1(rm, h - tau);
                rp * (-rp * (y1 - y)).exp() * g_y
            });
            k = decay * k + cell;
            out[j + 1] = (-rp * y1).exp() + k;
        }
        out
    }

    /// `G(y_j) = E[w(y_j + D)]`, `D ~ Exp(rm)`, exact for piecewise-linear `w`.
    fn g_nodes(&self, w: &[f64], rm: f64) -> Vec<f64> {
        let n = self.grid.len();
        let h = self.grid.h;
        let decay = (-rm * h).exp();
        let c0 = e0(rm, h);
        let c1 = e1(rm, h) / h;
        let mut g = vec![0.0; n];
        for j in (0..n - 1).rev() {
            g[j] = decay * g[j + 1] + w[j] * c0 + (w[j + 1] - w[j]) * c1;
        }
        g
    }

    /// Iterate `u_{n+1} = T(u_n)` from `u_0 ≡ 0` until the sup-norm update
    /// drops below `tol`.
    pub fn solve(&self, tol: f64, max_iter: usize) -> Result<SolverSolution> {
        if !(tol > 0.0) {
            return Err(Error::Parameter(format!("tol = {tol} must be positive")));
        }
        let mut u = vec![0.0; self.grid.len()];
        let mut updates = Vec::new();
        let mut residual = f64::INFINITY;
        for it in 1..=max_iter {
            let next = self.apply(&u)?;
            residual = 0.0;
            for (a, b) in next.iter().zip(&u) {
                debug_assert!(*a >= *b - ORDER_SLACK, "iteration is not monotone");
                residual = f64::max(residual, (a - b).abs());
            }
            debug_assert!(next.windows(2).all(|p| p[1] <= p[0] + ORDER_SLACK));
            u = next;
            updates.push(residual);
            if residual < tol {
                return Ok(SolverSolution {
                    x_max: self.grid.x_max,
                    h: self.grid.h,
                    u,
                    residual,
                    iterations: it,
                    updates,
                });
            }
        }
        Err(Error::NoConvergence {
            iterations: max_iter,
            residual,
        })
    }

    /// Remainder `R(x) = P(S_e >= x) - E[1{S_e >= x, L_e < x} w(x - L_e)]`
    /// for `x > 0`, evaluated with this kernel and the solution's `w`.
    pub fn remainder(&self, solution: &SolverSolution, x: f64) -> Result<f64> {
        if solution.u.len() != self.grid.len() {
            return Err(Error::Mismatch("solution grid differs from problem grid".into()));
        }
        if x <= 0.0 {
            return Err(Error::Parameter(format!("remainder is evaluated for x > 0, got {x}")));
        }
        let w = self.w_of(&solution.u);
        match (&self.kernel, &self.layout) {
            (Kernel::ProductExponential { r_plus, r_minus }, _) => {
                let g0 = self.g_nodes(&w, *r_minus)[0];
                Ok((-r_plus * x).exp() * (1.0 - r_plus / (r_plus + r_minus) * g0))
            }
            (Kernel::Empirical { .. }, Some(lay)) => {
                let mut tail = 0usize;
                let mut acc = 0.0;
                for p in lay.by_s_desc.iter().take_while(|p| p.s >= x) {
                    tail += 1;
                    if p.l < x {
                        acc += self.grid.interpolate(&w, x - p.l);
                    }
                }
                Ok((tail as f64 - acc) / lay.m)
            }
            _ => unreachable!("empirical kernel without layout"),
        }
    }

    /// `R(x_j)` for every grid node `j >= 1` (node 0 is reported as `NaN`).
    pub fn remainder_curve(&self, solution: &SolverSolution) -> Result<Vec<f64>> {
        let mut out = vec![f64::NAN; self.grid.len()];
        for (j, slot) in out.iter_mut().enumerate().skip(1) {
            *slot = self.remainder(solution, self.grid.x(j))?;
        }
        Ok(out)
    }
}

/// `∫_0^a r e^{-r t} dt`
#[inline]
fn e0(r: f64, a: f64) -> f64 {
    -(-r * a).exp_m1()
}

/// `∫_0^a r e^{-r t} t dt`
#[inline]
fn e1(r: f64, a: f64) -> f64 {
    let x = r * a;
    if x < 1e-3 {
        // r a² (1/2 - x/3 + x²/8 - x³/30)
        return r * a * a * (0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0);
    }
    (-(-x).exp_m1() - x * (-x).exp()) / r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn law() -> OffspringLaw {
        OffspringLaw::canonical(1.5, 0.5).unwrap()
    }

    #[test]
    fn grid_checks() {
        assert!(Grid::new(0.0, 1.0).is_err());
        assert!(Grid::new(0.3, 1.0).is_err());
        let g = Grid::new(0.05, 200.0).unwrap();
        assert_eq!(g.len(), 4001);
        assert_eq!(g.interpolate(&[1.0, 0.5, 0.0], -0.1), 0.0);
    }

    #[test]
    fn exponential_moments() {
        for &(r, a) in &[(2.0, 0.05), (0.5, 1e-5), (3.0, 2.0)] {
            let gl = GaussLegendre::new(16);
            let q0 = gl.integrate(0.0, a, |t| r * (-r * t).exp());
            let q1 = gl.integrate(0.0, a, |t| r * (-r * t).exp() * t);
            assert!((e0(r, a) - q0).abs() < 1e-15);
            assert!((e1(r, a) - q1).abs() < 1e-15 * q1.max(1e-300) + 1e-18);
        }
    }

    #[test]
    fn zero_input_gives_sup_survival() {
        let grid = Grid::new(0.1, 10.0).unwrap();
        let m = LevyModel::brownian(0.0, 1.0).unwrap();
        let p = FixedPointProblem::new(grid, Kernel::analytic(&m).unwrap(), law());
        let t0 = p.apply(&vec![0.0; grid.len()]).unwrap();
        for (a, b) in t0.iter().zip(p.sup_survival()) {
            assert!((a - b).abs() < 1e-15);
        }
        let mut r = rng::stream(1, 0);
        let k = Kernel::sampled(&m, 5000, &mut r).unwrap();
        let p = FixedPointProblem::new(grid, k, law());
        let t0 = p.apply(&vec![0.0; grid.len()]).unwrap();
        assert_eq!(t0, p.sup_survival());
        assert_eq!(t0[0], 1.0);
    }

    #[test]
    fn value_at_origin_is_one() {
        let grid = Grid::new(0.1, 10.0).unwrap();
        let m = LevyModel::brownian(1.0, 1.0).unwrap();
        let mut r = rng::stream(2, 0);
        for kernel in [Kernel::analytic(&m).unwrap(), Kernel::sampled(&m, 2000, &mut r).unwrap()] {
            let p = FixedPointProblem::new(grid, kernel, law());
            let u: Vec<f64> = (0..grid.len()).map(|j| (-(j as f64) * 0.03).exp()).collect();
            assert_eq!(p.apply(&u).unwrap()[0], 1.0);
        }
    }

    #[test]
    fn mismatch_and_parameter_errors() {
        let grid = Grid::new(0.1, 10.0).unwrap();
        let m = LevyModel::brownian(1.0, 1.0).unwrap();
        let p = FixedPointProblem::new(grid, Kernel::analytic(&m).unwrap(), law());
        assert!(matches!(p.apply(&[0.0; 3]), Err(Error::Mismatch(_))));
        assert!(p.solve(0.0, 10).is_err());
        assert!(matches!(p.solve(1e-30, 3), Err(Error::NoConvergence { iterations: 3, .. })));
        assert!(Kernel::analytic(&LevyModel::cauchy(1e-3).unwrap()).is_err());
        assert!(Kernel::empirical(vec![KilledPair { l: 1.0, s: 0.5 }]).is_err());
        assert!(Kernel::empirical(vec![]).is_err());
    }

    #[test]
    fn empirical_apply_matches_direct_sum() {
        // Aggregated-histogram evaluation vs the per-pair definition.
        let grid = Grid::new(0.25, 20.0).unwrap();
        let m = LevyModel::brownian(0.3, 1.2).unwrap();
        let mut r = rng::stream(3, 0);
        let kernel = Kernel::sampled(&m, 3000, &mut r).unwrap();
        let pairs = match &kernel {
            Kernel::Empirical { pairs } => pairs.clone(),
            _ => unreachable!(),
        };
        let l = law();
        let p = FixedPointProblem::new(grid, kernel, l.clone());
        let u: Vec<f64> = (0..grid.len()).map(|j| 1.0 / (1.0 + 0.2 * j as f64)).collect();
        let fast = p.apply(&u).unwrap();
        let w: Vec<f64> = u.iter().map(|&z| z - l.f_unchecked(z)).collect();
        for j in 0..grid.len() {
            let x = grid.x(j);
            let mut acc = 0.0;
            for q in &pairs {
                acc += if q.s >= x { 1.0 } else { grid.interpolate(&w, x - q.l) };
            }
            let direct = acc / pairs.len() as f64;
            assert!((fast[j] - direct).abs() < 1e-12, "j={j}: {} vs {direct}", fast[j]);
        }
    }

    #[test]
    fn solve_is_monotone_and_bracketed() {
        let grid = Grid::new(0.1, 40.0).unwrap();
        let m = LevyModel::brownian(1.0, 1.0).unwrap();
        let p = FixedPointProblem::new(grid, Kernel::analytic(&m).unwrap(), law());
        let sol = p.solve(1e-9, 10_000).unwrap();
        assert_eq!(sol.u[0], 1.0);
        assert!(sol.u.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(sol.u.windows(2).all(|w| w[1] <= w[0] + 1e-14));
        assert!(sol.residual < 1e-9);
        for w in sol.updates.windows(2).skip(1) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-15);
        }
        let rem = p.remainder_curve(&sol).unwrap();
        let sup = p.sup_survival();
        for j in 1..grid.len() {
            assert!(rem[j] >= -1e-12);
            assert!(rem[j] <= sup[j] + 1e-12);
            assert!(rem[j] <= sol.u[j] + 1e-12);
        }
    }
}
