//! Hierarchical group-lasso penalty on one row of the Cholesky factor and its
//! proximal operator.
//!
//! Row `r` (a vector of length `r`) carries `r − 1` nested groups: group `ℓ`
//! is the prefix `1..=ℓ`, weighted coordinate-wise by `w_{ℓm}`. The last
//! coordinate (the diagonal) is never penalized.
//!
//! Two proximal routines are provided:
//!
//! * [`prox_unit`]: the unit-weight fast path, a forward sweep of group
//!   soft-thresholds, `O(r)`.
//! * [`HierarchicalProx`] / [`prox_general`]: block coordinate descent on the
//!   dual problem. Each block update is an elliptical projection whose
//!   multiplier solves `h_ℓ(ν) = τ²` by safeguarded Newton on `1/h`. For unit
//!   weights the first forward sweep is already exact; for decaying weights
//!   sweeps are repeated until the primal iterate stops moving.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::scalar::Scalar;

/// Maximum safeguarded Newton iterations per root.
pub const NEWTON_MAX_ITER: usize = 200;

/// Default cap on dual sweeps per proximal evaluation.
pub const DEFAULT_MAX_SWEEPS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightScheme {
    /// `w_{ℓm} = 1 / (ℓ − m + 1)²`
    Quadratic,
    /// `w_{ℓm} = 1`
    Unit,
}

impl WeightScheme {
    /// Weight of coordinate `m` inside group `ℓ` (both 1-based, `m ≤ ℓ`).
    pub fn weight<T: Scalar>(self, group: usize, m: usize) -> T {
        debug_assert!(1 <= m && m <= group);
        self.by_distance(group - m)
    }

    /// Weight as a function of `ℓ − m`.
    pub fn by_distance<T: Scalar>(self, distance: usize) -> T {
        match self {
            WeightScheme::Unit => T::one(),
            WeightScheme::Quadratic => {
                let d = T::of_usize(distance + 1);
                T::one() / (d * d)
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WeightScheme::Quadratic => "quadratic",
            WeightScheme::Unit => "unit",
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quadratic" | "weighted" => Ok(WeightScheme::Quadratic),
            "unit" | "unweighted" => Ok(WeightScheme::Unit),
            other => Err(Error::InvalidArgument(format!("unknown weight scheme '{other}'"))),
        }
    }
}

/// Weights for every group of a length-`r` row, indexed by distance to the
/// group's last coordinate.
#[derive(Clone, Debug)]
pub struct GroupWeights<T> {
    scheme: WeightScheme,
    by_distance: Vec<T>,
    by_distance_sq: Vec<T>,
}

impl<T: Scalar> GroupWeights<T> {
    pub fn new(r: usize, scheme: WeightScheme) -> Self {
        let by_distance: Vec<T> = (0..r.max(1)).map(|d| scheme.by_distance(d)).collect();
        let by_distance_sq = by_distance.iter().map(|&w| w * w).collect();
        Self {
            scheme,
            by_distance,
            by_distance_sq,
        }
    }

    pub fn scheme(&self) -> WeightScheme {
        self.scheme
    }

    /// `w_{ℓ,i+1}` for 0-based coordinate `i < ℓ`.
    #[inline]
    pub fn get(&self, group: usize, i: usize) -> T {
        self.by_distance[group - 1 - i]
    }

    #[inline]
    pub fn get_sq(&self, group: usize, i: usize) -> T {
        self.by_distance_sq[group - 1 - i]
    }

    /// `W^{(ℓ)}` as an owned vector.
    pub fn group(&self, group: usize) -> Vec<T> {
        (0..group).map(|i| self.get(group, i)).collect()
    }
}

/// `P_r(row) = Σ_{ℓ=1}^{r−1} ‖W^{(ℓ)} ∗ row_{1:ℓ}‖₂`; zero for `r = 1`.
pub fn penalty_value<T: Scalar>(row: &[T], scheme: WeightScheme) -> T {
    let r = row.len();
    if r < 2 {
        return T::zero();
    }
    let weights = GroupWeights::new(r, scheme);
    group_norms(row, &weights).into_iter().sum()
}

/// `‖W^{(ℓ)} ∗ row_{1:ℓ}‖₂` for `ℓ = 1..r−1`.
pub fn group_norms<T: Scalar>(row: &[T], weights: &GroupWeights<T>) -> Vec<T> {
    let r = row.len();
    (1..r)
        .map(|l| {
            (0..l)
                .map(|i| {
                    let v = weights.get(l, i) * row[i];
                    v * v
                })
                .sum::<T>()
                .sqrt()
        })
        .collect()
}

/// Output of a proximal evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct ProxResult<T> {
    pub gamma: Vec<T>,
    /// `[ν̂_ℓ]₊` for `ℓ = 1..r−1`; zero marks a group set entirely to zero.
    pub nu: Vec<T>,
    /// `Ĵ`: `gamma[..zero_prefix]` is exactly zero.
    pub zero_prefix: usize,
    /// Dual sweeps performed (1 for the unit fast path).
    pub sweeps: usize,
}

fn leading_zeros<T: Scalar>(v: &[T]) -> usize {
    let r = v.len();
    if r < 2 {
        return 0;
    }
    v[..r - 1].iter().take_while(|x| **x == T::zero()).count()
}

/// Unit-weight proximal operator: for `ℓ = 1..r−1` in order, the prefix
/// `γ_{1:ℓ}` is scaled by `(1 − τ / ‖γ_{1:ℓ}‖₂)₊`.
///
/// The scalings compound, so the sweep runs on a running prefix norm and the
/// products are applied once at the end.
pub fn prox_unit<T: Scalar>(y: &[T], tau: T) -> ProxResult<T> {
    let r = y.len();
    if r < 2 || !(tau > T::zero()) {
        return ProxResult {
            gamma: y.to_vec(),
            nu: vec![T::infinity(); r.saturating_sub(1)],
            zero_prefix: leading_zeros(y),
            sweeps: 0,
        };
    }
    let mut factor = vec![T::zero(); r - 1];
    let mut nu = vec![T::zero(); r - 1];
    let mut norm_sq = T::zero();
    for l in 0..r - 1 {
        norm_sq = norm_sq + y[l] * y[l];
        let norm = norm_sq.sqrt();
        if norm > tau {
            factor[l] = T::one() - tau / norm;
            nu[l] = norm / tau - T::one();
            norm_sq = norm_sq * factor[l] * factor[l];
        } else {
            factor[l] = T::zero();
            norm_sq = T::zero();
        }
    }
    let mut gamma = y.to_vec();
    let mut scale = T::one();
    for m in (0..r - 1).rev() {
        scale = scale * factor[m];
        gamma[m] = if scale == T::zero() { T::zero() } else { y[m] * scale };
    }
    let zero_prefix = leading_zeros(&gamma);
    ProxResult {
        gamma,
        nu,
        zero_prefix,
        sweeps: 1,
    }
}

#[inline]
fn h_value<T: Scalar>(z: &[T], w_sq: &[T], nu: T) -> (T, T) {
    // h(ν) and −h'(ν)/2
    let mut h = T::zero();
    let mut dh = T::zero();
    for (&zm, &w2) in z.iter().zip(w_sq) {
        let d = w2 + nu;
        let t = w2 * zm * zm / (d * d);
        h = h + t;
        dh = dh + t / d;
    }
    (h, dh)
}

fn newton_root_sq<T: Scalar>(z: &[T], w_sq: &[T], tau: T, tol: T) -> Result<T> {
    newton_root_sq_from(z, w_sq, tau, tol, None)
}

/// As [`newton_root_sq`], starting from `guess` when it lies in the bracket.
fn newton_root_sq_from<T: Scalar>(z: &[T], w_sq: &[T], tau: T, tol: T, guess: Option<T>) -> Result<T> {
    let l = z.len();
    let dz = z
        .iter()
        .zip(w_sq)
        .map(|(&zm, &w2)| w2 * zm * zm)
        .sum::<T>()
        .sqrt();
    if l == 1 {
        // h(ν) = w² z² / (w² + ν)²
        return Ok((dz / tau - w_sq[0]).max(T::zero()));
    }
    let w_max_sq = w_sq.iter().fold(T::zero(), |m, &w| m.max(w));
    let mut hi = dz / tau;
    let mut lo = (hi - w_max_sq).max(T::zero());
    let target = tau * tau;
    let inv_target = T::one() / target;
    let eps4 = T::epsilon() * T::lit(4.0);

    let mut nu = match guess {
        Some(g) if g > lo && g < hi => g,
        _ => lo,
    };
    for _ in 0..NEWTON_MAX_ITER {
        let (h, half_neg_dh) = h_value(z, w_sq, nu);
        let gap = h - target;
        if gap.abs() <= tol * target {
            return Ok(nu);
        }
        if gap > T::zero() {
            lo = lo.max(nu);
        } else {
            hi = hi.min(nu);
        }
        if hi - lo <= eps4 * hi.max(T::one()) {
            return Ok(T::lit(0.5) * (lo + hi));
        }
        // Newton on φ(ν) = 1/h(ν) − 1/τ², φ'(ν) = 2 Σ w² z² / (w² + ν)³ / h²
        let phi = T::one() / h - inv_target;
        let dphi = T::lit(2.0) * half_neg_dh / (h * h);
        let step = nu - phi / dphi;
        nu = if step.is_finite() && step > lo && step < hi {
            step
        } else {
            T::lit(0.5) * (lo + hi)
        };
    }
    Err(Error::NonConvergence {
        what: "elliptical projection root",
        iterations: NEWTON_MAX_ITER,
    })
}

/// Root `ν̂ > 0` of `h(ν) = Σ w_m² z_m² / (w_m² + ν)² = τ²`.
///
/// Requires `‖D⁻¹z‖₂ > τ` with `D = diag(w)`, so that `h(0) > τ²`. The
/// search is confined to `[(‖Dz‖₂/τ − max w²)₊, ‖Dz‖₂/τ]`.
pub fn newton_root<T: Scalar>(z: &[T], weights: &[T], tau: T) -> Result<T> {
    if z.len() != weights.len() || z.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            found: z.len(),
        });
    }
    if !(tau > T::zero()) {
        return Err(Error::InvalidArgument("tau must be positive".into()));
    }
    let w_sq: Vec<T> = weights.iter().map(|&w| w * w).collect();
    let h0 = z.iter().zip(weights).map(|(&zm, &w)| (zm / w) * (zm / w)).sum::<T>();
    if !(h0 > tau * tau) {
        return Err(Error::InvalidArgument(
            "no positive root: ‖D⁻¹z‖₂ ≤ tau".into(),
        ));
    }
    newton_root_sq(z, &w_sq, tau, T::prox_tol())
}

/// Reusable dual block-coordinate solver for one row length and scheme.
///
/// Dual blocks persist between calls, so successive evaluations on nearby
/// inputs (consecutive ADMM iterations, neighbouring λ values) restart from
/// the previous dual point.
#[derive(Clone, Debug)]
pub struct HierarchicalProx<T> {
    r: usize,
    weights: GroupWeights<T>,
    /// Packed blocks: group `ℓ` occupies `ℓ(ℓ−1)/2 .. ℓ(ℓ+1)/2`.
    dual: Vec<T>,
    nu: Vec<T>,
    gamma: Vec<T>,
    previous: Vec<T>,
    zhat: Vec<T>,
    w_sq: Vec<T>,
    tol: T,
    max_sweeps: usize,
    sweeps: usize,
    zero_prefix: usize,
}

#[inline]
fn block_offset(group: usize) -> usize {
    group * (group - 1) / 2
}

impl<T: Scalar> HierarchicalProx<T> {
    pub fn new(r: usize, scheme: WeightScheme) -> Self {
        let groups = r.saturating_sub(1);
        Self {
            r,
            weights: GroupWeights::new(r, scheme),
            dual: vec![T::zero(); groups * r / 2],
            nu: vec![T::zero(); groups],
            gamma: vec![T::zero(); r],
            previous: vec![T::zero(); r],
            zhat: vec![T::zero(); r],
            w_sq: vec![T::zero(); r],
            tol: T::prox_tol(),
            max_sweeps: DEFAULT_MAX_SWEEPS,
            sweeps: 0,
            zero_prefix: 0,
        }
    }

    pub fn with_tolerance(mut self, tol: T, max_sweeps: usize) -> Self {
        self.tol = tol;
        self.max_sweeps = max_sweeps.max(1);
        self
    }

    pub fn len(&self) -> usize {
        self.r
    }

    pub fn is_empty(&self) -> bool {
        self.r == 0
    }

    pub fn scheme(&self) -> WeightScheme {
        self.weights.scheme()
    }

    /// Forgets the stored dual point.
    pub fn reset(&mut self) {
        self.dual.iter_mut().for_each(|a| *a = T::zero());
    }

    /// Dual block `â^{(ℓ)}` restricted to its group.
    pub fn dual_block(&self, group: usize) -> &[T] {
        let off = block_offset(group);
        &self.dual[off..off + group]
    }

    pub fn nu(&self) -> &[T] {
        &self.nu
    }

    pub fn zero_prefix(&self) -> usize {
        self.zero_prefix
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn gamma(&self) -> &[T] {
        &self.gamma
    }

    /// `γ = y − τ Σ_ℓ W^{(ℓ)} ∗ â^{(ℓ)}` from the stored dual point.
    fn primal_from_dual(&mut self, y: &[T], tau: T) {
        self.gamma.copy_from_slice(y);
        for l in 1..self.r {
            let off = block_offset(l);
            for i in 0..l {
                self.gamma[i] = self.gamma[i] - tau * self.weights.get(l, i) * self.dual[off + i];
            }
        }
    }

    /// One forward sweep `ℓ = 1..r−1`; returns the largest group that was
    /// projected inside its ellipse (set to zero), or 0.
    fn sweep(&mut self, tau: T) -> Result<usize> {
        let mut zeroed = 0;
        for l in 1..self.r {
            let off = block_offset(l);
            let mut scaled_sq = T::zero();
            for i in 0..l {
                let w = self.weights.get(l, i);
                let z = self.gamma[i] + tau * w * self.dual[off + i];
                self.zhat[i] = z;
                self.w_sq[i] = self.weights.get_sq(l, i);
                scaled_sq = scaled_sq + (z / w) * (z / w);
            }
            if scaled_sq.sqrt() <= tau {
                for i in 0..l {
                    self.dual[off + i] = self.zhat[i] / (tau * self.weights.get(l, i));
                    self.gamma[i] = T::zero();
                }
                self.nu[l - 1] = T::zero();
                zeroed = l;
            } else {
                let prev = self.nu[l - 1];
                let guess = (prev > T::zero() && prev.is_finite()).then_some(prev);
                let nu = newton_root_sq_from(&self.zhat[..l], &self.w_sq[..l], tau, self.tol, guess)?;
                for i in 0..l {
                    let w = self.weights.get(l, i);
                    let denom = self.w_sq[i] + nu;
                    self.dual[off + i] = w * self.zhat[i] / (tau * denom);
                    self.gamma[i] = self.zhat[i] * nu / denom;
                }
                self.nu[l - 1] = nu;
            }
        }
        Ok(zeroed)
    }

    /// Upper bound on the distance from `y − γ` to `τ ∂P_r(γ)` at the
    /// current iterate with its first `zeroed` entries set to zero. Groups
    /// with a nonzero entry use their unique subgradient, the others the
    /// stored dual block, which is always feasible.
    fn stationarity_bound(&mut self, y: &[T], tau: T, zeroed: usize) -> T {
        let r = self.r;
        let point = &mut self.zhat;
        point.copy_from_slice(&self.gamma);
        point[..zeroed].iter_mut().for_each(|v| *v = T::zero());
        let j = leading_zeros(point);
        let d = &mut self.w_sq;
        for i in 0..r {
            d[i] = point[i] - y[i];
        }
        for l in 1..r {
            let off = block_offset(l);
            if l <= j {
                for i in 0..l {
                    d[i] = d[i] + tau * self.weights.get(l, i) * self.dual[off + i];
                }
            } else {
                let norm = (0..l)
                    .map(|i| {
                        let v = self.weights.get(l, i) * point[i];
                        v * v
                    })
                    .sum::<T>()
                    .sqrt();
                for i in 0..l {
                    let w = self.weights.get(l, i);
                    d[i] = d[i] + tau * w * w * point[i] / norm;
                }
            }
        }
        let prefix = d[..j].iter().map(|v| *v * *v).sum::<T>().sqrt();
        d[j..].iter().fold(prefix, |m, v| m.max(v.abs()))
    }

    /// Proximal map of `τ P_r` at `y`, warm-started from the stored dual.
    /// Fails if the sweeps do not settle within the configured limit.
    pub fn apply(&mut self, y: &[T], tau: T) -> Result<&[T]> {
        if !self.apply_within(y, tau, self.max_sweeps)? {
            return Err(Error::NonConvergence {
                what: "dual block coordinate descent",
                iterations: self.max_sweeps,
            });
        }
        Ok(&self.gamma)
    }

    /// As [`apply`](Self::apply) but stops quietly after `max_sweeps`,
    /// returning whether the sweeps settled. The dual point is kept either
    /// way, so a following call continues from it.
    pub fn apply_within(&mut self, y: &[T], tau: T, max_sweeps: usize) -> Result<bool> {
        if y.len() != self.r {
            return Err(Error::DimensionMismatch {
                expected: self.r,
                found: y.len(),
            });
        }
        if self.r < 2 || !(tau > T::zero()) {
            self.gamma.copy_from_slice(y);
            self.nu.iter_mut().for_each(|v| *v = T::infinity());
            self.sweeps = 0;
            self.zero_prefix = leading_zeros(y);
            return Ok(true);
        }
        let scale = crate::linalg::norm_inf(y).max(T::min_positive_value());
        let tol_scale = T::lit(100.0) * scale.max(tau);
        self.primal_from_dual(y, tau);
        self.sweeps = 0;
        let mut settled = false;
        let mut small_step = false;
        let mut zeroed = 0;
        while self.sweeps < max_sweeps.max(1) {
            self.previous.copy_from_slice(&self.gamma);
            zeroed = self.sweep(tau)?;
            self.sweeps += 1;
            let change = self
                .gamma
                .iter()
                .zip(&self.previous)
                .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
            small_step = change <= self.tol * scale;
            if small_step {
                // a small step can hide a large stationarity gap when some
                // group norms are tiny
                let floor = T::epsilon() * T::lit(4.0) * scale;
                if change <= floor || self.stationarity_bound(y, tau, zeroed) <= self.tol * tol_scale {
                    settled = true;
                    break;
                }
            }
        }
        // without the stationarity certificate, a final small step still
        // counts as settled
        settled |= small_step;
        // the fixed point is exactly zero on every group projected inside its
        // ellipse during the last sweep
        for g in self.gamma[..zeroed].iter_mut() {
            *g = T::zero();
        }
        self.zero_prefix = leading_zeros(&self.gamma);
        Ok(settled)
    }

    pub fn result(&self) -> ProxResult<T> {
        ProxResult {
            gamma: self.gamma.clone(),
            nu: self.nu.clone(),
            zero_prefix: self.zero_prefix,
            sweeps: self.sweeps,
        }
    }
}

/// Proximal map of `τ P_r` for arbitrary weights, from a cold dual start.
pub fn prox_general<T: Scalar>(y: &[T], tau: T, scheme: WeightScheme) -> Result<ProxResult<T>> {
    let mut prox = HierarchicalProx::new(y.len(), scheme);
    prox.apply(y, tau)?;
    Ok(prox.result())
}

/// Roots `[ν̂_ℓ]₊` of a single forward pass of dual block updates from zero.
fn single_pass_roots<T: Scalar>(y: &[T], tau: T, weights: &GroupWeights<T>) -> Result<Vec<T>> {
    let r = y.len();
    let mut z = y.to_vec();
    let mut w_sq = vec![T::zero(); r];
    let mut nu = Vec::with_capacity(r.saturating_sub(1));
    for l in 1..r {
        let scaled = (0..l)
            .map(|i| {
                let s = z[i] / weights.get(l, i);
                s * s
            })
            .sum::<T>()
            .sqrt();
        let root = if scaled <= tau {
            T::zero()
        } else {
            for (i, w2) in w_sq.iter_mut().enumerate().take(l) {
                *w2 = weights.get_sq(l, i);
            }
            newton_root_sq(&z[..l], &w_sq[..l], tau, T::prox_tol())?
        };
        for (i, zi) in z.iter_mut().enumerate().take(l) {
            let w2 = weights.get_sq(l, i);
            *zi = if root == T::zero() { T::zero() } else { *zi * root / (w2 + root) };
        }
        nu.push(root);
    }
    Ok(nu)
}

/// Single forward pass of dual block coordinate descent started at zero,
/// returning the primal point through `γ = y − τ Σ W^{(ℓ)} ∗ â^{(ℓ)}`.
///
/// Exact when all weights in a group are equal (the unit scheme); with
/// decaying weights it is only the first sweep of [`prox_general`].
pub fn prox_single_pass<T: Scalar>(y: &[T], tau: T, scheme: WeightScheme) -> Result<ProxResult<T>> {
    let r = y.len();
    if r < 2 || !(tau > T::zero()) {
        return Ok(prox_unit(y, T::zero()));
    }
    let weights = GroupWeights::new(r, scheme);
    let mut dual: Vec<Vec<T>> = Vec::with_capacity(r - 1);
    let mut nu = Vec::with_capacity(r - 1);
    let mut w_sq = vec![T::zero(); r];
    for l in 1..r {
        // residual ẑ^{(ℓ)} = y − τ Σ_k W^{(k)} ∗ â^{(k)}, blocks k ≥ ℓ still zero
        let zhat: Vec<T> = (0..l)
            .map(|i| {
                dual.iter().enumerate().fold(y[i], |acc, (k, a): (usize, &Vec<T>)| {
                    let group = k + 1;
                    if i < group {
                        acc - tau * weights.get(group, i) * a[i]
                    } else {
                        acc
                    }
                })
            })
            .collect();
        let scaled = (0..l)
            .map(|i| (zhat[i] / weights.get(l, i)).powi(2))
            .sum::<T>()
            .sqrt();
        let root = if scaled <= tau {
            T::zero()
        } else {
            for (i, w2) in w_sq.iter_mut().enumerate().take(l) {
                *w2 = weights.get_sq(l, i);
            }
            newton_root_sq(&zhat, &w_sq[..l], tau, T::prox_tol())?
        };
        let block: Vec<T> = (0..l)
            .map(|i| {
                let w = weights.get(l, i);
                w * zhat[i] / (tau * (w * w + root))
            })
            .collect();
        dual.push(block);
        nu.push(root);
    }
    let mut gamma = y.to_vec();
    for (k, a) in dual.iter().enumerate() {
        let group = k + 1;
        for i in 0..group {
            gamma[i] = gamma[i] - tau * weights.get(group, i) * a[i];
        }
    }
    let zero_prefix_groups = nu.iter().rposition(|v| *v == T::zero()).map_or(0, |j| j + 1);
    for g in gamma[..zero_prefix_groups].iter_mut() {
        *g = T::zero();
    }
    let zero_prefix = leading_zeros(&gamma);
    Ok(ProxResult {
        gamma,
        nu,
        zero_prefix,
        sweeps: 1,
    })
}

/// Tapering representation of the single-pass solution:
/// `γ = y ∗ ĝ` with `ĝ_m = Π_{ℓ=m}^{r−1} [ν̂_ℓ]₊ / (w²_{ℓm} + [ν̂_ℓ]₊)` and
/// `ĝ_r = 1`.
pub fn taper_formula<T: Scalar>(y: &[T], tau: T, scheme: WeightScheme) -> Result<Vec<T>> {
    let r = y.len();
    if r < 2 || !(tau > T::zero()) {
        return Ok(y.to_vec());
    }
    let weights = GroupWeights::new(r, scheme);
    let nu = single_pass_roots(y, tau, &weights)?;
    Ok(taper_from_roots(y, &nu, &weights))
}

/// `y ∗ ĝ` for given roots `ν̂_1..ν̂_{r−1}`.
pub fn taper_from_roots<T: Scalar>(y: &[T], nu: &[T], weights: &GroupWeights<T>) -> Vec<T> {
    let r = y.len();
    let mut out = y.to_vec();
    for m in 0..r.saturating_sub(1) {
        let mut g = T::one();
        for (l, &v) in nu.iter().enumerate().skip(m) {
            let v = v.max(T::zero());
            if v == T::zero() {
                g = T::zero();
                break;
            }
            g = g * v / (weights.get_sq(l + 1, m) + v);
        }
        out[m] = if g == T::zero() { T::zero() } else { y[m] * g };
    }
    out
}

/// Distance from `c` to `scale · ∂P_r(point)`.
///
/// Groups that contain a nonzero coordinate have a unique subgradient block;
/// the residual on their support is measured coordinate-wise. On the zero
/// prefix `1..Ĵ` the free blocks range over balls, and the distance to their
/// weighted Minkowski sum equals the norm of a proximal step on that prefix.
pub fn subgradient_distance<T: Scalar>(
    c: &[T],
    point: &[T],
    scale: T,
    scheme: WeightScheme,
) -> Result<T> {
    subgradient_distance_within(c, point, scale, scheme, DEFAULT_MAX_SWEEPS)
}

/// [`subgradient_distance`] with at most `max_sweeps` dual sweeps on the
/// zero prefix. Never smaller than the exact distance.
pub fn subgradient_distance_within<T: Scalar>(
    c: &[T],
    point: &[T],
    scale: T,
    scheme: WeightScheme,
    max_sweeps: usize,
) -> Result<T> {
    let (support, excess) = parts_within(c, point, scale, scheme, max_sweeps)?;
    Ok(support.max(norm2(&excess)))
}

/// The two parts of [`subgradient_distance`]: the largest coordinate-wise
/// residual on the support, and the proximal step on the zero prefix (the
/// part of `c` that the free blocks cannot absorb).
pub fn subgradient_parts<T: Scalar>(
    c: &[T],
    point: &[T],
    scale: T,
    scheme: WeightScheme,
) -> Result<(T, Vec<T>)> {
    parts_within(c, point, scale, scheme, DEFAULT_MAX_SWEEPS)
}

fn parts_within<T: Scalar>(
    c: &[T],
    point: &[T],
    scale: T,
    scheme: WeightScheme,
    max_sweeps: usize,
) -> Result<(T, Vec<T>)> {
    let r = point.len();
    if c.len() != r {
        return Err(Error::DimensionMismatch {
            expected: r,
            found: c.len(),
        });
    }
    if r == 0 {
        return Ok((T::zero(), Vec::new()));
    }
    let weights = GroupWeights::new(r, scheme);
    let j = leading_zeros(point);
    let mut e = c.to_vec();
    for l in (j + 1)..r {
        let block: Vec<T> = (0..l).map(|i| weights.get(l, i) * point[i]).collect();
        let norm = norm2(&block);
        for i in 0..l {
            e[i] = e[i] - scale * weights.get(l, i) * block[i] / norm;
        }
    }
    let support = e[j..].iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if j == 0 {
        return Ok((support, Vec::new()));
    }
    let mut prefix = e[..j].to_vec();
    prefix.push(T::zero());
    let mut excess = if scheme == WeightScheme::Unit {
        prox_unit(&prefix, scale).gamma
    } else {
        // every dual iterate is feasible, so the primal iterate is never
        // shorter than the exact distance and stopping early only overstates
        // the residual
        let mut prox = HierarchicalProx::new(j + 1, scheme);
        prox.apply_within(&prefix, scale, max_sweeps)?;
        prox.gamma().to_vec()
    };
    excess.truncate(j);
    Ok((support, excess))
}

/// `½‖γ − y‖² + τ P_r(γ)`.
pub fn prox_objective<T: Scalar>(y: &[T], tau: T, scheme: WeightScheme, gamma: &[T]) -> T {
    let fit = y
        .iter()
        .zip(gamma)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<T>();
    T::lit(0.5) * fit + tau * penalty_value(gamma, scheme)
}
