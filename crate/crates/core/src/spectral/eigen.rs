//! Eigensolvers for self-adjoint positive semidefinite operators given as
//! in-place matvecs on `C^n`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::sum_sq;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerOptions {
    /// Stop once `‖A x - λ x‖ ≤ tol · λ` for the unit iterate `x`.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 5000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerResult {
    /// Rayleigh quotient of the last iterate.
    pub eigenvalue: f64,
    pub iterations: usize,
    /// `‖A x - λ x‖` for the last unit iterate.
    pub residual: f64,
    pub converged: bool,
}

/// Deterministic complex start vector with entries uniform in the unit square.
pub fn random_vector(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let nrm = sum_sq(v).sqrt();
    if nrm > 0.0 {
        let inv = 1.0 / nrm;
        v.iter_mut().for_each(|z| *z *= inv);
    }
    nrm
}

/// Largest eigenvalue of a positive semidefinite operator.
///
/// A zero image (the operator annihilates the start vector) returns zero
/// immediately; for PSD operators that can only happen when the start vector
/// misses the range, which a dense random vector does with probability zero.
pub fn power_iteration(
    n: usize,
    mut apply: impl FnMut(&mut [Complex64]),
    opts: &PowerOptions,
) -> PowerResult {
    let mut x = random_vector(n, opts.seed);
    normalize(&mut x);
    let mut y = x.clone();
    let mut last = PowerResult {
        eigenvalue: 0.0,
        iterations: 0,
        residual: f64::INFINITY,
        converged: false,
    };
    for it in 1..=opts.max_iter.max(1) {
        y.copy_from_slice(&x);
        apply(&mut y);
        let lambda = dot(&x, &y).re;
        let ynorm2 = sum_sq(&y);
        if ynorm2 == 0.0 {
            return PowerResult {
                eigenvalue: 0.0,
                iterations: it,
                residual: 0.0,
                converged: true,
            };
        }
        let residual = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (b - a * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt();
        last = PowerResult {
            eigenvalue: lambda,
            iterations: it,
            residual,
            converged: residual <= opts.tol * lambda.abs(),
        };
        if last.converged {
            break;
        }
        std::mem::swap(&mut x, &mut y);
        normalize(&mut x);
    }
    last
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanczosResult {
    /// Top Ritz values, descending.
    pub eigenvalues: Vec<f64>,
    /// Residual bounds `|β_m s_{m,i}|` for each returned Ritz value.
    pub residuals: Vec<f64>,
    pub steps: usize,
    pub converged: bool,
}

/// Top `k` eigenvalues of a Hermitian operator by Lanczos with full
/// reorthogonalization. The Krylov space grows until the top `k` residual
/// bounds fall below `tol · max(λ_1, 1e-300)`, the space is invariant, or
/// `max_steps` is reached.
pub fn lanczos(
    n: usize,
    mut apply: impl FnMut(&mut [Complex64]),
    k: usize,
    tol: f64,
    seed: u64,
    max_steps: usize,
) -> LanczosResult {
    let k = k.max(1);
    let max_steps = max_steps.min(n).max(1);
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();

    let mut q = random_vector(n, seed);
    normalize(&mut q);
    let mut check_at = (2 * k + 20).min(max_steps);
    loop {
        let mut w = q.clone();
        apply(&mut w);
        let a = dot(&q, &w).re;
        for (wi, qi) in w.iter_mut().zip(&q) {
            *wi -= qi * a;
        }
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= pi * b;
            }
        }
        basis.push(q);
        alpha.push(a);
        // two passes of classical Gram–Schmidt against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= bi * c;
                }
            }
        }
        let b = sum_sq(&w).sqrt();
        let m = alpha.len();
        let scale = alpha.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
        let invariant = b <= 1e-13 * scale;
        if invariant || m >= check_at || m >= max_steps {
            let (vals, res) = ritz(&alpha, &beta, b);
            let top = vals.first().copied().unwrap_or(0.0).abs().max(1e-300);
            let kk = k.min(vals.len());
            let ok = invariant || res[..kk].iter().all(|&r| r <= tol * top);
            if ok || m >= max_steps {
                let mut eigenvalues = vals;
                let mut residuals = res;
                eigenvalues.truncate(k);
                residuals.truncate(k);
                return LanczosResult {
                    eigenvalues,
                    residuals,
                    steps: m,
                    converged: ok && (kk == k || invariant),
                };
            }
            check_at = (check_at + check_at / 2 + 1).min(max_steps);
        }
        beta.push(b);
        q = w;
        let inv = 1.0 / b;
        q.iter_mut().for_each(|z| *z *= inv);
    }
}

/// Ritz values (descending) and residual bounds of the tridiagonal matrix.
fn ritz(alpha: &[f64], beta: &[f64], b_last: f64) -> (Vec<f64>, Vec<f64>) {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let res = order
        .iter()
        .map(|&i| (b_last * eig.eigenvectors[(m - 1, i)]).abs())
        .collect();
    (vals, res)
}

/// All eigenvalues of a dense Hermitian matrix, descending.
pub fn dense_eigenvalues(m: DMatrix<Complex64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut vals: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_apply(d: Vec<f64>) -> impl FnMut(&mut [Complex64]) {
        move |v: &mut [Complex64]| {
            for (z, &w) in v.iter_mut().zip(&d) {
                *z *= w;
            }
        }
    }

    #[test]
    fn power_on_diagonal() {
        let d: Vec<f64> = (0..50).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let r = power_iteration(50, diag_apply(d), &PowerOptions::default());
        assert!(r.converged);
        assert!((r.eigenvalue - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_zero_operator() {
        let r = power_iteration(10, diag_apply(vec![0.0; 10]), &PowerOptions::default());
        assert_eq!(r.eigenvalue, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn power_is_deterministic() {
        let d: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin().abs()).collect();
        let a = power_iteration(40, diag_apply(d.clone()), &PowerOptions::default());
        let b = power_iteration(40, diag_apply(d), &PowerOptions::default());
        assert_eq!(a, b);
    }

    #[test]
    fn lanczos_on_diagonal() {
        let d: Vec<f64> = (0..200).map(|i| 0.9f64.powi(i)).collect();
        let r = lanczos(200, diag_apply(d), 5, 1e-10, 3, 200);
        assert!(r.converged);
        for (i, v) in r.eigenvalues.iter().enumerate() {
            assert!((v - 0.9f64.powi(i as i32)).abs() < 1e-9, "{i}: {v}");
        }
    }

    #[test]
    fn lanczos_low_rank_stops_early() {
        let mut d = vec![0.0; 100];
        d[3] = 0.5;
        d[7] = 0.25;
        let r = lanczos(100, diag_apply(d), 4, 1e-10, 1, 100);
        assert!(r.steps <= 4);
        assert!((r.eigenvalues[0] - 0.5).abs() < 1e-12);
        assert!((r.eigenvalues[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn dense_hermitian() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(2.0, 0.0),
            ],
        );
        let v = dense_eigenvalues(m);
        assert!((v[0] - 3.0).abs() < 1e-12 && (v[1] - 1.0).abs() < 1e-12);
    }
}
