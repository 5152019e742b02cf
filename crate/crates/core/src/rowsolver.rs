//! ADMM for a single row of the factor:
//!
//! `min_{β: β_r > 0} −2 log β_r + βᵀ S⁽ʳ⁾ β + λ P_r(β)`
//!
//! split as `β = γ`, with a closed-form `β`-step, the hierarchical proximal
//! map as `γ`-step and a scaled dual `u`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, LowerTriangular, SymMatrix};
use crate::penalty::{self, HierarchicalProx, WeightScheme};
use crate::scalar::Scalar;

/// Entries below this magnitude at the start of a row are set to zero in the
/// reported solution.
pub const SUPPORT_THRESHOLD: f64 = 1e-10;

/// Dual sweeps spent on deciding whether the diagonal solution is optimal.
pub const SCREENING_SWEEPS: usize = 500;

const MAX_POLISH_STEPS: usize = 50;
const POLISH_GROW_STEPS: usize = 3;
/// Warm-started rows whose final residual exceeds this are solved again
/// from a cold start.
const WARM_RESTART_KKT: f64 = 1e-6;
/// Polishing stops trying candidates once the residual is this small.
const POLISH_SETTLED: f64 = 1e-12;
/// Polishing tries dropping the leading entries below each of these
/// fractions of the row's largest off-diagonal entry.
const POLISH_DROP_RELATIVE: [f64; 5] = [0.0, 1e-8, 1e-6, 1e-4, 1e-3];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig<T> {
    pub eps_abs: T,
    pub eps_rel: T,
    pub max_iter: usize,
    pub rho_init: T,
    /// ρ is rebalanced every this many iterations.
    pub rho_check_period: usize,
    /// Tolerance of the dual sweeps inside the proximal step.
    pub prox_tol: T,
    pub prox_max_sweeps: usize,
    /// Dual sweeps allowed per ADMM iteration; the dual point carries over
    /// to the next iteration, so the proximal step may be inexact early on.
    pub prox_sweeps_per_iter: usize,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            eps_abs: T::admm_tol(),
            eps_rel: T::admm_tol(),
            max_iter: 10_000,
            rho_init: T::one(),
            rho_check_period: 10,
            prox_tol: T::prox_tol(),
            prox_max_sweeps: penalty::DEFAULT_MAX_SWEEPS,
            prox_sweeps_per_iter: 1,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: T| v > T::zero() && v.is_finite();
        if !positive(self.eps_abs) || !positive(self.eps_rel) {
            return Err(Error::InvalidArgument("ADMM tolerances must be positive".into()));
        }
        if !positive(self.rho_init) || !positive(self.prox_tol) {
            return Err(Error::InvalidArgument("rho_init and prox_tol must be positive".into()));
        }
        if self.max_iter == 0 || self.rho_check_period == 0 || self.prox_max_sweeps == 0 || self.prox_sweeps_per_iter == 0 {
            return Err(Error::InvalidArgument("iteration limits must be positive".into()));
        }
        Ok(())
    }
}

/// One row subproblem. `r` is the length of the row (1-based row index).
#[derive(Clone, Copy, Debug)]
pub struct RowProblem<'a, T> {
    gram: &'a SymMatrix<T>,
    r: usize,
    lambda: T,
    scheme: WeightScheme,
    known_lambda_max: Option<T>,
}

impl<'a, T: Scalar> RowProblem<'a, T> {
    /// `gram` may be the full `p × p` sample covariance; only its leading
    /// `r × r` block is read.
    pub fn new(gram: &'a SymMatrix<T>, r: usize, lambda: T, scheme: WeightScheme) -> Result<Self> {
        if r < 2 || r > gram.dim() {
            return Err(Error::InvalidArgument(format!(
                "row length {r} outside 2..={}",
                gram.dim()
            )));
        }
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidArgument("lambda must be finite and nonnegative".into()));
        }
        if !(gram.get(r - 1, r - 1) > T::zero()) {
            return Err(Error::ZeroVariance { column: r - 1 });
        }
        Ok(Self {
            gram,
            r,
            lambda,
            scheme,
            known_lambda_max: None,
        })
    }

    /// Supplies a precomputed [`RowProblem::lambda_max`], so that screening
    /// becomes a comparison.
    pub fn with_known_lambda_max(mut self, lambda_max: T) -> Self {
        self.known_lambda_max = Some(lambda_max);
        self
    }

    pub fn len(&self) -> usize {
        self.r
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn scheme(&self) -> WeightScheme {
        self.scheme
    }

    pub fn with_lambda(&self, lambda: T) -> Result<Self> {
        let mut next = Self::new(self.gram, self.r, lambda, self.scheme)?;
        next.known_lambda_max = self.known_lambda_max;
        Ok(next)
    }

    #[inline]
    pub fn s(&self, i: usize, j: usize) -> T {
        self.gram.get(i, j)
    }

    fn quad_form(&self, beta: &[T]) -> T {
        (0..self.r)
            .map(|i| beta[i] * dot(&self.gram.row(i)[..self.r], beta))
            .sum()
    }

    /// `−2 log β_r + βᵀSβ + λ P_r(β)`; `+∞` when `β_r ≤ 0`.
    pub fn objective(&self, beta: &[T]) -> T {
        let br = beta[self.r - 1];
        if !(br > T::zero()) {
            return T::infinity();
        }
        -T::lit(2.0) * br.ln()
            + self.quad_form(beta)
            + self.lambda * penalty::penalty_value(beta, self.scheme)
    }

    /// Gradient of the smooth part, `−(2/β_r) e_r + 2Sβ`.
    pub fn smooth_gradient(&self, beta: &[T]) -> Vec<T> {
        let two = T::lit(2.0);
        let mut g: Vec<T> = (0..self.r)
            .map(|i| two * dot(&self.gram.row(i)[..self.r], beta))
            .collect();
        g[self.r - 1] = g[self.r - 1] - two / beta[self.r - 1];
        g
    }

    /// Distance from `−∇(smooth part)` to `λ ∂P_r` at `row`: zero exactly at
    /// a minimizer.
    pub fn kkt_residual(&self, row: &[T]) -> Result<T> {
        let c: Vec<T> = self.smooth_gradient(row).into_iter().map(|g| -g).collect();
        penalty::subgradient_distance(&c, row, self.lambda, self.scheme)
    }

    /// [`RowProblem::kkt_residual`] with a cap on the dual sweeps; an upper
    /// bound on it.
    pub fn kkt_residual_within(&self, row: &[T], max_sweeps: usize) -> Result<T> {
        let c: Vec<T> = self.smooth_gradient(row).into_iter().map(|g| -g).collect();
        penalty::subgradient_distance_within(&c, row, self.lambda, self.scheme, max_sweeps)
    }

    /// `(0, …, 0, 1/√S_rr)`, the minimizer once λ reaches the row's λ_max.
    pub fn diagonal_solution(&self) -> Vec<T> {
        let mut row = vec![T::zero(); self.r];
        row[self.r - 1] = T::one() / self.s(self.r - 1, self.r - 1).sqrt();
        row
    }

    /// `−∇` of the smooth part at the diagonal solution, off-diagonal part,
    /// padded with a trailing zero.
    fn diagonal_residual(&self) -> Vec<T> {
        let b = T::one() / self.s(self.r - 1, self.r - 1).sqrt();
        let mut c: Vec<T> = (0..self.r - 1)
            .map(|i| -T::lit(2.0) * b * self.s(i, self.r - 1))
            .collect();
        c.push(T::zero());
        c
    }

    fn diagonal_optimal_at(&self, c: &[T], lambda: T) -> Result<bool> {
        if c[..self.r - 1].iter().all(|v| *v == T::zero()) {
            return Ok(true);
        }
        if !(lambda > T::zero()) {
            return Ok(false);
        }
        let zero_prefix = match self.scheme {
            WeightScheme::Unit => penalty::prox_unit(c, lambda).zero_prefix,
            s => {
                // an exactly zero iterate certifies dual feasibility; running
                // out of sweeps near the boundary answers "no"
                let mut prox = HierarchicalProx::new(self.r, s);
                prox.apply_within(c, lambda, SCREENING_SWEEPS)?;
                prox.zero_prefix()
            }
        };
        Ok(zero_prefix == self.r - 1)
    }

    /// Whether the diagonal solution satisfies the optimality condition at
    /// this problem's λ.
    pub fn diagonal_is_optimal(&self) -> Result<bool> {
        if let Some(lmax) = self.known_lambda_max {
            return Ok(self.lambda >= lmax);
        }
        self.diagonal_optimal_at(&self.diagonal_residual(), self.lambda)
    }

    /// Smallest λ (to relative precision `1e-12`, rounded up) at which the
    /// diagonal solution is optimal. Found by doubling/halving to a bracket,
    /// then bisection.
    pub fn lambda_max(&self) -> Result<T> {
        let c = self.diagonal_residual();
        let scale = crate::linalg::norm_inf(&c);
        if scale == T::zero() {
            return Ok(T::zero());
        }
        let two = T::lit(2.0);
        let mut hi = scale;
        let mut guard = 0;
        while !self.diagonal_optimal_at(&c, hi)? {
            hi = hi * two;
            guard += 1;
            if guard > 2000 {
                return Err(Error::NonConvergence {
                    what: "lambda_max bracket",
                    iterations: guard,
                });
            }
        }
        let mut lo = hi / two;
        while self.diagonal_optimal_at(&c, lo)? {
            hi = lo;
            lo = lo / two;
            guard += 1;
            if guard > 2000 || lo == T::zero() {
                return Ok(hi);
            }
        }
        let rel = T::lit(1e-12).max(T::epsilon() * T::lit(8.0));
        while hi - lo > rel * hi {
            let mid = T::lit(0.5) * (lo + hi);
            if self.diagonal_optimal_at(&c, mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// ADMM iterate for one row.
#[derive(Clone, Debug)]
pub struct RowState<T> {
    pub beta: Vec<T>,
    pub gamma: Vec<T>,
    /// Scaled dual `u / ρ`.
    pub u: Vec<T>,
    pub rho: T,
    pub primal_res: T,
    pub dual_res: T,
    pub iter: usize,
    prox: Option<HierarchicalProx<T>>,
}

impl<T: Scalar> RowState<T> {
    /// `β = γ = e_r`, `u = 0`.
    pub fn initial(r: usize, rho: T) -> Self {
        let mut e = vec![T::zero(); r];
        e[r - 1] = T::one();
        Self {
            beta: e.clone(),
            gamma: e,
            u: vec![T::zero(); r],
            rho,
            primal_res: T::zero(),
            dual_res: T::zero(),
            iter: 0,
            prox: None,
        }
    }

    fn prox_for(&mut self, r: usize, scheme: WeightScheme, cfg: &SolverConfig<T>) -> &mut HierarchicalProx<T> {
        let stale = match &self.prox {
            Some(p) => p.len() != r || p.scheme() != scheme,
            None => true,
        };
        if stale {
            self.prox =
                Some(HierarchicalProx::new(r, scheme).with_tolerance(cfg.prox_tol, cfg.prox_max_sweeps));
        }
        self.prox.as_mut().expect("prox initialised above")
    }
}

/// Cached factorization of `2 S_{−r,−r} + ρI` and the derived `A`
/// coefficient of the β-step; rebuilt only when ρ changes.
#[derive(Clone, Debug)]
pub struct BetaFactor<T> {
    rho: T,
    chol: LowerTriangular<T>,
    /// `(2 S_{−r,−r} + ρI)⁻¹ S_{−r,r}`
    v: Vec<T>,
    a: T,
}

impl<T: Scalar> BetaFactor<T> {
    pub fn new(prob: &RowProblem<'_, T>, rho: T) -> Result<Self> {
        let m = prob.r - 1;
        let two = T::lit(2.0);
        let mat = SymMatrix::from_fn(m, |i, j| {
            let base = two * prob.s(i, j);
            if i == j {
                base + rho
            } else {
                base
            }
        });
        let chol = mat.cholesky()?;
        let s_col: Vec<T> = (0..m).map(|i| prob.s(i, m)).collect();
        let v = chol.solve_transpose(&chol.solve(&s_col));
        let a = T::lit(4.0) * dot(&s_col, &v) - two * prob.s(m, m) - rho;
        if !(a < T::zero()) {
            return Err(Error::BetaUpdate(a.as_f64()));
        }
        Ok(Self { rho, chol, v, a })
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    /// Quadratic coefficients `(A, B)` of `A β_r² + B β_r + 2 = 0` for the
    /// current `γ` and unscaled dual `ρu`.
    pub fn coefficients(&self, gamma: &[T], u_scaled: &[T]) -> (T, T, Vec<T>) {
        let m = self.v.len();
        let rho = self.rho;
        // q = u_{−r} − ργ_{−r} with unscaled u = ρ·u_scaled
        let q: Vec<T> = (0..m).map(|i| rho * u_scaled[i] - rho * gamma[i]).collect();
        let minv_q = self.chol.solve_transpose(&self.chol.solve(&q));
        let b = T::lit(2.0) * dot(&self.v, &q) - rho * u_scaled[m] + rho * gamma[m];
        (self.a, b, minv_q)
    }
}

/// Closed-form minimizer of the augmented Lagrangian in β:
/// `−2 log β_r + βᵀSβ + (β − γ)ᵀu + (ρ/2)‖β − γ‖²`.
pub fn beta_update<T: Scalar>(
    state: &RowState<T>,
    prob: &RowProblem<'_, T>,
    factor: &mut BetaFactor<T>,
) -> Result<Vec<T>> {
    if factor.rho != state.rho {
        *factor = BetaFactor::new(prob, state.rho)?;
    }
    let (a, b, minv_q) = factor.coefficients(&state.gamma, &state.u);
    let disc = (b * b - T::lit(8.0) * a).sqrt();
    // positive root of Aβ² + Bβ + 2 = 0 with A < 0, in the form free of
    // cancellation for the sign of B
    let br = if b > T::zero() {
        (-b - disc) / (T::lit(2.0) * a)
    } else {
        T::lit(4.0) / (disc - b)
    };
    debug_assert!(br > T::zero(), "beta_r must stay positive");
    let m = prob.r - 1;
    let two = T::lit(2.0);
    let mut beta: Vec<T> = (0..m).map(|i| -(two * br * factor.v[i] + minv_q[i])).collect();
    beta.push(br);
    Ok(beta)
}

/// Rebalances ρ from the residual ratio: doubles when the primal residual
/// dominates by 10×, halves in the opposite case. The scaled dual is
/// rescaled so that `ρu` is unchanged. Returns whether ρ changed.
pub fn rho_update<T: Scalar>(state: &mut RowState<T>) -> bool {
    let ten = T::lit(10.0);
    let two = T::lit(2.0);
    if state.primal_res > ten * state.dual_res {
        state.rho = state.rho * two;
        state.u.iter_mut().for_each(|x| *x = *x / two);
        true
    } else if state.dual_res > ten * state.primal_res {
        state.rho = state.rho / two;
        state.u.iter_mut().for_each(|x| *x = *x * two);
        true
    } else {
        false
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowSolution<T> {
    /// `γ` at termination after polishing. Its zero pattern is a prefix, but
    /// leading entries may be arbitrarily small; see
    /// [`RowSolution::support_row`].
    pub row: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: T,
}

impl<T: Scalar> RowSolution<T> {
    /// The row with leading entries below [`SUPPORT_THRESHOLD`] set to zero.
    pub fn support_row(&self) -> Vec<T> {
        let mut row = self.row.clone();
        threshold_prefix(&mut row);
        row
    }

    /// `K̂_r` of [`RowSolution::support_row`].
    pub fn bandwidth(&self) -> usize {
        let r = self.row.len();
        r - 1 - leading_zeros(&self.support_row())
    }
}

fn threshold_prefix<T: Scalar>(row: &mut [T]) {
    let r = row.len();
    let thr = T::lit(SUPPORT_THRESHOLD);
    for v in row[..r - 1].iter_mut() {
        if v.abs() < thr {
            *v = T::zero();
        } else {
            break;
        }
    }
}

/// Gradient and Hessian of the objective in the coordinates `z..r`, with the
/// first `z` coordinates held at zero. `None` where a penalty group vanishes.
fn restricted_derivatives<T: Scalar>(
    prob: &RowProblem<'_, T>,
    weights: &penalty::GroupWeights<T>,
    x: &[T],
    z: usize,
    with_hessian: bool,
) -> Option<(Vec<T>, Option<SymMatrix<T>>)> {
    let r = prob.r;
    let m = r - z;
    let two = T::lit(2.0);
    let mut g: Vec<T> = (z..r).map(|i| two * dot(&prob.gram.row(i)[z..r], &x[z..r])).collect();
    g[m - 1] = g[m - 1] - two / x[r - 1];
    let mut h = with_hessian.then(|| {
        let mut h = SymMatrix::from_fn(m, |a, b| two * prob.s(z + a, z + b));
        h.set(m - 1, m - 1, h.get(m - 1, m - 1) + two / (x[r - 1] * x[r - 1]));
        h
    });
    for l in (z + 1)..r {
        let wx: Vec<T> = (z..l).map(|i| weights.get_sq(l, i) * x[i]).collect();
        let norm = (z..l).map(|i| weights.get(l, i) * x[i]).map(|v| v * v).sum::<T>().sqrt();
        if norm == T::zero() {
            return None;
        }
        let c = prob.lambda / norm;
        for a in 0..(l - z) {
            g[a] = g[a] + c * wx[a];
        }
        if let Some(h) = h.as_mut() {
            for a in 0..(l - z) {
                h.set(a, a, h.get(a, a) + c * weights.get_sq(l, z + a));
                for b in 0..=a {
                    h.set(a, b, h.get(a, b) - c * wx[a] * wx[b] / (norm * norm));
                }
            }
        }
    }
    Some((g, h))
}

/// Newton steps on the objective restricted to a fixed zero prefix of
/// length `z`, where it is smooth. Tiny leading entries make the objective
/// flat to working precision, so a step that cannot be told apart by value
/// is accepted when it shrinks the gradient. `None` if the restricted
/// Hessian is not positive definite.
fn polish_on_prefix<T: Scalar>(prob: &RowProblem<'_, T>, start: &[T], z: usize) -> Option<Vec<T>> {
    let r = prob.r;
    let m = r - z;
    let weights = penalty::GroupWeights::<T>::new(r, prob.scheme);
    let mut x = start.to_vec();
    for v in x[..z].iter_mut() {
        *v = T::zero();
    }
    if !(x[r - 1] > T::zero()) || (z < r - 1 && x[z] == T::zero()) {
        return None;
    }
    let mut f = prob.objective(&x);
    let (mut g, _) = restricted_derivatives(prob, &weights, &x, z, false)?;
    for _ in 0..MAX_POLISH_STEPS {
        let (_, h) = restricted_derivatives(prob, &weights, &x, z, true)?;
        let chol = h?.cholesky().ok()?;
        let d = chol.solve_transpose(&chol.solve(&g));
        let decrement = dot(&g, &d);
        if !(decrement > T::zero()) {
            break;
        }
        let gnorm = norm2(&g);
        if gnorm <= T::lit(256.0) * T::epsilon() {
            break;
        }
        let flat = T::lit(4.0) * T::epsilon() * f.abs().max(T::one());
        let mut t = T::one();
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial = x.clone();
            for a in 0..m {
                trial[z + a] = x[z + a] - t * d[a];
            }
            let ft = prob.objective(&trial);
            if ft.is_finite() && ft <= f + flat {
                if let Some((gt, _)) = restricted_derivatives(prob, &weights, &trial, z, false) {
                    let sufficient = ft <= f - T::lit(0.25) * t * decrement;
                    if (sufficient && ft < f) || norm2(&gt) < gnorm {
                        x = trial;
                        f = ft;
                        g = gt;
                        accepted = true;
                        break;
                    }
                }
            }
            t = t * T::lit(0.5);
        }
        if !accepted {
            break;
        }
    }
    Some(x)
}

/// Refines an ADMM row. Candidates are Newton solutions on the row's own
/// zero prefix, on longer prefixes that drop small leading entries, and on a
/// shorter prefix where the optimality condition asks for more support; the
/// one (including the unrefined row) with the smallest optimality residual
/// is kept.
fn polish<T: Scalar>(prob: &RowProblem<'_, T>, raw: Vec<T>) -> Result<(Vec<T>, T)> {
    let r = prob.r;
    let mut best = raw.clone();
    let mut best_kkt = prob.kkt_residual_within(&best, SCREENING_SWEEPS)?;
    let consider = |cand: Vec<T>, best: &mut Vec<T>, best_kkt: &mut T| -> Result<()> {
        let kkt = prob.kkt_residual_within(&cand, SCREENING_SWEEPS)?;
        if kkt < *best_kkt {
            *best_kkt = kkt;
            *best = cand;
        }
        Ok(())
    };
    let try_prefix = |start: &[T], z: usize, best: &mut Vec<T>, best_kkt: &mut T| -> Result<()> {
        if let Some(cand) = polish_on_prefix(prob, start, z) {
            let mut cut = cand.clone();
            threshold_prefix(&mut cut);
            if cut != cand {
                consider(cut, best, best_kkt)?;
            }
            consider(cand, best, best_kkt)?;
        }
        Ok(())
    };

    let mut cut = raw.clone();
    threshold_prefix(&mut cut);
    consider(cut.clone(), &mut best, &mut best_kkt)?;
    if r > 1 && best_kkt > T::lit(POLISH_SETTLED) {
        consider(prob.diagonal_solution(), &mut best, &mut best_kkt)?;
    }
    let scale = crate::linalg::norm_inf(&raw[..r - 1]);
    let mut tried = Vec::new();
    for drop in POLISH_DROP_RELATIVE {
        if best_kkt <= T::lit(POLISH_SETTLED) {
            let kkt = prob.kkt_residual(&best)?;
            return Ok((best, kkt));
        }
        let tiny = T::lit(drop) * scale;
        let z = raw[..r - 1]
            .iter()
            .position(|v| v.abs() > tiny)
            .unwrap_or(r - 1);
        if z < r - 1 && !tried.contains(&z) {
            tried.push(z);
            try_prefix(&raw, z, &mut best, &mut best_kkt)?;
        }
    }

    for _ in 0..POLISH_GROW_STEPS {
        let j = leading_zeros(&best);
        if j == 0 || best_kkt <= T::lit(POLISH_SETTLED) {
            break;
        }
        let c: Vec<T> = prob.smooth_gradient(&best).into_iter().map(|g| -g).collect();
        let (_, excess) = penalty::subgradient_parts(&c, &best, prob.lambda, prob.scheme)?;
        let Some(zg) = excess.iter().position(|v| *v != T::zero()) else {
            break;
        };
        let curvature = (0..r).fold(T::zero(), |m, i| m.max(prob.s(i, i)));
        let step = T::one() / (T::lit(2.0) * curvature);
        let mut start = best.clone();
        for i in zg..j {
            start[i] = step * excess[i];
        }
        if start[zg] == T::zero() {
            break;
        }
        let before = best_kkt;
        try_prefix(&start, zg, &mut best, &mut best_kkt)?;
        if !(best_kkt < before) {
            break;
        }
    }
    let kkt = prob.kkt_residual(&best)?;
    Ok((best, kkt))
}

fn leading_zeros<T: Scalar>(row: &[T]) -> usize {
    row[..row.len() - 1].iter().take_while(|v| **v == T::zero()).count()
}

/// Solves the row problem from the default starting point.
pub fn solve_row<T: Scalar>(prob: &RowProblem<'_, T>, cfg: &SolverConfig<T>) -> Result<RowSolution<T>> {
    let mut state = RowState::initial(prob.r, cfg.rho_init);
    solve_row_from(prob, cfg, &mut state)
}

/// Solves the row problem starting from `state`, which is left at the final
/// iterate for warm-starting the next problem on a λ path.
pub fn solve_row_from<T: Scalar>(
    prob: &RowProblem<'_, T>,
    cfg: &SolverConfig<T>,
    state: &mut RowState<T>,
) -> Result<RowSolution<T>> {
    let warm = state.iter > 0;
    let sol = admm(prob, cfg, state)?;
    if !warm || sol.kkt_residual <= T::lit(WARM_RESTART_KKT) {
        return Ok(sol);
    }
    // a carried-over ρ and dual can satisfy the stopping rule far from the
    // solution; a cold start settles the row
    let mut fresh = RowState::initial(prob.r, cfg.rho_init);
    let cold = admm(prob, cfg, &mut fresh)?;
    if cold.kkt_residual < sol.kkt_residual {
        *state = fresh;
        Ok(cold)
    } else {
        Ok(sol)
    }
}

fn admm<T: Scalar>(
    prob: &RowProblem<'_, T>,
    cfg: &SolverConfig<T>,
    state: &mut RowState<T>,
) -> Result<RowSolution<T>> {
    cfg.validate()?;
    let r = prob.r;
    if state.beta.len() != r {
        return Err(Error::DimensionMismatch {
            expected: r,
            found: state.beta.len(),
        });
    }
    if prob.diagonal_is_optimal()? {
        let row = prob.diagonal_solution();
        state.beta.clone_from(&row);
        state.gamma.clone_from(&row);
        state.iter = 0;
        let kkt = prob.kkt_residual(&row)?;
        return Ok(RowSolution {
            row,
            iterations: 0,
            converged: true,
            kkt_residual: kkt,
        });
    }

    let sqrt_r = T::of_usize(r).sqrt();
    let mut factor = BetaFactor::new(prob, state.rho)?;
    let mut best: Option<(T, Vec<T>)> = None;
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=cfg.max_iter {
        iterations = it;
        let beta = beta_update(state, prob, &mut factor)?;
        let y: Vec<T> = beta.iter().zip(&state.u).map(|(&b, &u)| b + u).collect();
        let tau = prob.lambda / state.rho;
        let gamma = match prob.scheme {
            WeightScheme::Unit => penalty::prox_unit(&y, tau).gamma,
            scheme => {
                let prox = state.prox_for(r, scheme, cfg);
                prox.apply_within(&y, tau, cfg.prox_sweeps_per_iter)?;
                prox.gamma().to_vec()
            }
        };

        let mut primal_sq = T::zero();
        let mut change_sq = T::zero();
        for i in 0..r {
            let d = beta[i] - gamma[i];
            state.u[i] = state.u[i] + d;
            primal_sq = primal_sq + d * d;
            let c = gamma[i] - state.gamma[i];
            change_sq = change_sq + c * c;
        }
        state.primal_res = primal_sq.sqrt();
        state.dual_res = state.rho * change_sq.sqrt();
        state.beta = beta;
        state.gamma = gamma;
        state.iter += 1;

        let eps_pri = cfg.eps_abs * sqrt_r + cfg.eps_rel * norm2(&state.beta).max(norm2(&state.gamma));
        let eps_dual = cfg.eps_abs * sqrt_r + cfg.eps_rel * state.rho * norm2(&state.u);
        if state.primal_res <= eps_pri && state.dual_res <= eps_dual {
            converged = true;
            break;
        }
        let score = (state.primal_res / eps_pri).max(state.dual_res / eps_dual);
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, state.gamma.clone()));
        }
        if it % cfg.rho_check_period == 0 && rho_update(state) {
            factor = BetaFactor::new(prob, state.rho)?;
        }
    }

    let mut row = if converged {
        state.gamma.clone()
    } else {
        best.map_or_else(|| state.gamma.clone(), |(_, g)| g)
    };
    if !(row[r - 1] > T::zero()) {
        row[r - 1] = state.beta[r - 1];
    }
    let (row, kkt_residual) = polish(prob, row)?;
    Ok(RowSolution {
        row,
        iterations,
        converged,
        kkt_residual,
    })
}
