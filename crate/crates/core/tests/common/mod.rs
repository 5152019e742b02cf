//! Independent reference computations used across the integration tests.
//! Everything here works on plain `Vec<Vec<f64>>` and is deliberately slow
//! and direct.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varband::linalg::{LowerTriangular, SampleMatrix, SymMatrix};
use varband::penalty::{HierarchicalProx, WeightScheme};

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller, independent of the library's generator
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * normal(rng)).collect()
}

pub fn random_samples(rng: &mut ChaCha8Rng, n: usize, p: usize) -> SampleMatrix<f64> {
    let data = (0..n * p).map(|_| normal(rng)).collect();
    SampleMatrix::new(n, p, data).unwrap()
}

/// Random lower-triangular factor with diagonal in `[lo, hi]` and standard
/// normal entries below it scaled by `off`.
pub fn random_lower(rng: &mut ChaCha8Rng, p: usize, lo: f64, hi: f64, off: f64) -> LowerTriangular<f64> {
    let rows: Vec<Vec<f64>> = (0..p)
        .map(|r| {
            let mut row: Vec<f64> = (0..r).map(|_| off * normal(rng)).collect();
            row.push(rng.gen_range(lo..=hi));
            row
        })
        .collect();
    LowerTriangular::from_rows(&rows).unwrap()
}

/// Sample covariance of `n` standard-normal-times-mixing draws in `r`
/// dimensions; well conditioned when `n` is comfortably above `r`.
pub fn random_gram(rng: &mut ChaCha8Rng, r: usize, n: usize) -> SymMatrix<f64> {
    let mix: Dense = (0..r).map(|_| random_vec(rng, r, 0.5)).collect();
    let mut x = vec![vec![0.0; r]; n];
    for row in x.iter_mut() {
        let z = random_vec(rng, r, 1.0);
        for j in 0..r {
            row[j] = z[j] + (0..r).map(|k| mix[j][k] * z[k]).sum::<f64>();
        }
    }
    SymMatrix::from_fn(r, |i, j| x.iter().map(|row| row[i] * row[j]).sum::<f64>() / n as f64)
}

pub fn lower_dense(l: &LowerTriangular<f64>) -> Dense {
    let p = l.dim();
    (0..p).map(|i| (0..p).map(|j| l.get(i, j)).collect()).collect()
}

pub fn sym_dense(s: &SymMatrix<f64>) -> Dense {
    let p = s.dim();
    (0..p).map(|i| (0..p).map(|j| s.get(i, j)).collect()).collect()
}

pub fn transpose(a: &Dense) -> Dense {
    let (n, m) = (a.len(), a[0].len());
    (0..m).map(|j| (0..n).map(|i| a[i][j]).collect()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    (0..n)
        .map(|i| (0..m).map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum()).collect())
        .collect()
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse(a: &Dense) -> Dense {
    let n = a.len();
    let mut m: Dense = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        m.swap(c, piv);
        let d = m[c][c];
        for v in m[c].iter_mut() {
            *v /= d;
        }
        for i in 0..n {
            if i != c {
                let f = m[i][c];
                if f != 0.0 {
                    let pivot_row = m[c].clone();
                    for (v, pv) in m[i].iter_mut().zip(pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(a: &Dense) -> Vec<f64> {
    let n = a.len();
    let mut m = a.clone();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        let scale: f64 = (0..n).map(|i| m[i][i] * m[i][i]).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Largest singular value from the Jacobi eigenvalues of `AᵀA`.
pub fn spectral_norm(a: &Dense) -> f64 {
    let ata = matmul(&transpose(a), a);
    jacobi_eigenvalues(&ata).last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

pub fn min_eigenvalue(s: &SymMatrix<f64>) -> f64 {
    jacobi_eigenvalues(&sym_dense(s))[0]
}

pub fn log_det_spd(a: &Dense) -> f64 {
    jacobi_eigenvalues(a).iter().map(|v| v.ln()).sum()
}

/// `(1/p)[tr(Ω⁻¹Ω̂) − log det(Ω⁻¹Ω̂) − p]` with an explicit inverse.
pub fn kl_oracle(omega: &Dense, omega_hat: &Dense) -> f64 {
    let p = omega.len();
    let sigma = inverse(omega);
    let prod = matmul(&sigma, omega_hat);
    let tr: f64 = (0..p).map(|i| prod[i][i]).sum();
    (tr - (log_det_spd(omega_hat) - log_det_spd(omega)) - p as f64) / p as f64
}

pub fn weight(scheme: WeightScheme, l: usize, m: usize) -> f64 {
    match scheme {
        WeightScheme::Unit => 1.0,
        WeightScheme::Quadratic => 1.0 / ((l - m + 1) as f64).powi(2),
    }
}

/// `Σ_ℓ ‖W^{(ℓ)} ∗ γ_{1:ℓ}‖` straight from the definition (1-based ℓ, m).
pub fn penalty_oracle(row: &[f64], scheme: WeightScheme) -> f64 {
    let r = row.len();
    (1..r)
        .map(|l| (1..=l).map(|m| (weight(scheme, l, m) * row[m - 1]).powi(2)).sum::<f64>().sqrt())
        .sum()
}

pub fn prox_objective(y: &[f64], tau: f64, scheme: WeightScheme, gamma: &[f64]) -> f64 {
    0.5 * y.iter().zip(gamma).map(|(a, b)| (a - b).powi(2)).sum::<f64>() + tau * penalty_oracle(gamma, scheme)
}

pub struct DualSolution {
    pub gamma: Vec<f64>,
    /// Primal objective at `gamma` minus the dual objective: a certified
    /// bound on its suboptimality.
    pub gap: f64,
}

/// Minimizes `½‖y − Σ_ℓ W^{(ℓ)} ∗ ξ_ℓ‖²` over `‖ξ_ℓ‖ ≤ τ` by accelerated
/// projected gradient; `γ = y − Σ W ∗ ξ` is the proximal point. Only the
/// first `groups` groups are present.
pub fn dual_projected_gradient(y: &[f64], tau: f64, scheme: WeightScheme, groups: usize, max_iter: usize) -> DualSolution {
    let r = y.len();
    let w: Vec<Vec<f64>> = (1..=groups).map(|l| (1..=l).map(|m| weight(scheme, l, m)).collect()).collect();
    let lip: f64 = (0..r)
        .map(|i| w.iter().filter(|wl| wl.len() > i).map(|wl| wl[i] * wl[i]).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-12);
    let step = 1.0 / lip;
    let mut xi: Vec<Vec<f64>> = w.iter().map(|wl| vec![0.0; wl.len()]).collect();
    let mut mom = xi.clone();
    let mut t = 1.0f64;
    let primal = |xi: &[Vec<f64>]| -> Vec<f64> {
        let mut g = y.to_vec();
        for (wl, xl) in w.iter().zip(xi) {
            for i in 0..wl.len() {
                g[i] -= wl[i] * xl[i];
            }
        }
        g
    };
    let project = |v: &mut Vec<f64>| {
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > tau {
            for a in v.iter_mut() {
                *a *= tau / n;
            }
        }
    };
    let gap_at = |xi: &[Vec<f64>]| -> (Vec<f64>, f64) {
        let g = primal(xi);
        let pen: f64 = w
            .iter()
            .map(|wl| wl.iter().enumerate().map(|(i, wi)| (wi * g[i]).powi(2)).sum::<f64>().sqrt())
            .sum();
        let pval = 0.5 * y.iter().zip(&g).map(|(a, b)| (a - b).powi(2)).sum::<f64>() + tau * pen;
        let dval = 0.5 * y.iter().map(|a| a * a).sum::<f64>() - 0.5 * g.iter().map(|a| a * a).sum::<f64>();
        (g, pval - dval)
    };
    for it in 0..max_iter {
        let g = primal(&mom);
        let mut next = mom.clone();
        for (l, wl) in w.iter().enumerate() {
            for i in 0..wl.len() {
                next[l][i] += step * wl[i] * g[i];
            }
            project(&mut next[l]);
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        for l in 0..w.len() {
            for i in 0..w[l].len() {
                mom[l][i] = next[l][i] + (t - 1.0) / t_next * (next[l][i] - xi[l][i]);
            }
        }
        xi = next;
        t = t_next;
        if it % 200 == 199 {
            let (_, gap) = gap_at(&xi);
            if gap < 1e-14 {
                break;
            }
            // adaptive restart keeps the momentum from stalling the tail
            t = 1.0;
            mom = xi.clone();
        }
    }
    let (gamma, gap) = gap_at(&xi);
    DualSolution { gamma, gap }
}

pub fn prox_oracle(y: &[f64], tau: f64, scheme: WeightScheme) -> DualSolution {
    dual_projected_gradient(y, tau, scheme, y.len() - 1, 2_000_000)
}

/// Distance from `c` to `scale · ∂P(point)`, computed from the definition:
/// exact blocks for groups touching the support, and a projected-gradient
/// projection onto the Minkowski sum of the free balls on the zero prefix.
pub fn subgradient_distance_oracle(c: &[f64], point: &[f64], scale: f64, scheme: WeightScheme) -> f64 {
    let r = point.len();
    let j = point[..r - 1].iter().take_while(|v| **v == 0.0).count();
    let mut e = c.to_vec();
    for l in (j + 1)..r {
        let wp: Vec<f64> = (1..=l).map(|m| weight(scheme, l, m) * point[m - 1]).collect();
        let n = wp.iter().map(|a| a * a).sum::<f64>().sqrt();
        for m in 1..=l {
            e[m - 1] -= scale * weight(scheme, l, m) * wp[m - 1] / n;
        }
    }
    let support = e[j..].iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if j == 0 {
        return support;
    }
    let mut prefix = e[..j].to_vec();
    prefix.push(0.0);
    let sol = dual_projected_gradient(&prefix, scale, scheme, j, 2_000_000);
    let zero = sol.gamma[..j].iter().map(|a| a * a).sum::<f64>().sqrt();
    support.max(zero)
}

/// `−2 log β_r + βᵀSβ + λ P(β)` on the leading `r × r` block.
pub fn row_objective(s: &SymMatrix<f64>, lambda: f64, scheme: WeightScheme, beta: &[f64]) -> f64 {
    let r = beta.len();
    if beta[r - 1] <= 0.0 {
        return f64::INFINITY;
    }
    let quad: f64 = (0..r).map(|i| (0..r).map(|j| beta[i] * s.get(i, j) * beta[j]).sum::<f64>()).sum();
    -2.0 * beta[r - 1].ln() + quad + lambda * penalty_oracle(beta, scheme)
}

/// Accelerated proximal gradient with backtracking and restarts, the slow
/// reference for a row problem. The proximal step is the library's dual
/// block solver, checked against [`prox_oracle`] separately, kept warm across
/// iterations and run far past its default budget.
pub fn row_reference(s: &SymMatrix<f64>, r: usize, lambda: f64, scheme: WeightScheme, max_iter: usize) -> Vec<f64> {
    let smooth = |b: &[f64]| -> f64 {
        if b[r - 1] <= 0.0 {
            return f64::INFINITY;
        }
        let quad: f64 = (0..r).map(|i| (0..r).map(|j| b[i] * s.get(i, j) * b[j]).sum::<f64>()).sum();
        -2.0 * b[r - 1].ln() + quad
    };
    let grad = |b: &[f64]| -> Vec<f64> {
        let mut g: Vec<f64> = (0..r).map(|i| 2.0 * (0..r).map(|j| s.get(i, j) * b[j]).sum::<f64>()).collect();
        g[r - 1] -= 2.0 / b[r - 1];
        g
    };
    let engine = std::cell::RefCell::new(HierarchicalProx::new(r, scheme).with_tolerance(1e-15, 1_000_000));
    let prox = |v: &[f64], t: f64| -> Vec<f64> {
        if lambda == 0.0 {
            return v.to_vec();
        }
        let mut e = engine.borrow_mut();
        e.apply_within(v, t * lambda, 1_000_000).unwrap();
        e.gamma().to_vec()
    };
    let full = |b: &[f64]| smooth(b) + lambda * penalty_oracle(b, scheme);
    let mut x = vec![0.0; r];
    x[r - 1] = 1.0 / s.get(r - 1, r - 1).sqrt();
    let mut yk = x.clone();
    let mut tk = 1.0f64;
    let mut step = 1.0;
    let mut fx = full(&x);
    let mut stalled = 0;
    for _ in 0..max_iter {
        let g = grad(&yk);
        let fy = smooth(&yk);
        let next = loop {
            let cand: Vec<f64> = yk.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            let cand = prox(&cand, step);
            let d: Vec<f64> = cand.iter().zip(&yk).map(|(a, b)| a - b).collect();
            let model = fy + g.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>()
                + d.iter().map(|a| a * a).sum::<f64>() / (2.0 * step);
            if smooth(&cand) <= model + 1e-15 * fy.abs() {
                break cand;
            }
            step *= 0.5;
        };
        let fnext = full(&next);
        // stop once roundoff, not progress, drives the iterates
        if fx - fnext <= 1e-16 * (1.0 + fx.abs()) {
            stalled += 1;
            if stalled >= 200 {
                break;
            }
        } else {
            stalled = 0;
        }
        if fnext > fx {
            // restart the momentum from the current iterate
            yk = x.clone();
            tk = 1.0;
            continue;
        }
        let change = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * tk * tk).sqrt());
        yk = next.iter().zip(&x).map(|(a, b)| a + (tk - 1.0) / t_next * (a - b)).collect();
        x = next;
        tk = t_next;
        fx = fnext;
        step *= 1.25;
        if change < 1e-15 {
            break;
        }
    }
    x
}

/// Minimizer of a unimodal function on `[a, b]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    while (b - a).abs() > 1e-13 * (1.0 + a.abs() + b.abs()) {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    0.5 * (a + b)
}

/// Central finite-difference gradient.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut up = x.to_vec();
            let mut dn = x.to_vec();
            up[i] += h;
            dn[i] -= h;
            (f(&up) - f(&dn)) / (2.0 * h)
        })
        .collect()
}

/// Root of a decreasing function on `[lo, hi]` by bisection.
pub fn bisect_decreasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi.abs().max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut out = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = 0.5 * (i + j) as f64 + 1.0;
            for k in i..=j {
                out[idx[k]] = avg;
            }
            i = j + 1;
        }
        out
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va * vb).sqrt()
}

/// Eigen-checks every Ω̂ handed to it and remembers the smallest value seen.
#[derive(Default)]
pub struct PdLedger {
    pub count: usize,
    pub min_eigenvalue: f64,
}

impl PdLedger {
    pub fn new() -> Self {
        Self { count: 0, min_eigenvalue: f64::INFINITY }
    }

    pub fn record(&mut self, omega: &SymMatrix<f64>) {
        self.count += 1;
        self.min_eigenvalue = self.min_eigenvalue.min(min_eigenvalue(omega));
    }
}
