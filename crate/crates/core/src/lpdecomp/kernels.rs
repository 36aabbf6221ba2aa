use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bump::BumpProfile;
use super::stack::ScaleStack;
use crate::quad::{integrate, QuadOptions};
use crate::sets::IntervalSet;

/// `A(x, y) = Σ_j psi_j(x) phi_j(x - y)`, the kernel of `S`.
pub fn kernel_a(bump: &BumpProfile, stack: &ScaleStack, x: f64, y: f64) -> f64 {
    (0..=stack.j_max())
        .map(|j| {
            let w = stack.psi(j, x);
            if w == 0.0 {
                0.0
            } else {
                w * bump.phi_j(j as i32, x - y)
            }
        })
        .sum()
}

/// `psî_j = phi_j - phi_{j-1}` with `phi_{-1} = 0`.
pub fn psi_hat(bump: &BumpProfile, j: u32, t: f64) -> f64 {
    let hi = bump.phi_j(j as i32, t);
    if j == 0 {
        hi
    } else {
        hi - bump.phi_j(j as i32 - 1, t)
    }
}

/// `B(xi, eta) = Σ_j psî_j(xi - eta) (1 - phihat_j(eta))`, the kernel of
/// `T` on the Fourier side.
pub fn kernel_b(bump: &BumpProfile, stack: &ScaleStack, xi: f64, eta: f64) -> f64 {
    (0..=stack.j_max())
        .map(|j| {
            let damp = 1.0 - stack.phihat_j(j, eta);
            if damp == 0.0 {
                0.0
            } else {
                psi_hat(bump, j, xi - eta) * damp
            }
        })
        .sum()
}

/// Points at which the suprema of the Schur integrals are sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurSamples {
    /// `x` for items i) and iii).
    pub x: Vec<f64>,
    /// `y` for item ii).
    pub y: Vec<f64>,
    /// `xi` for item iv).
    pub xi: Vec<f64>,
    /// `eta` for items v) and vi).
    pub eta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurItem {
    pub item: String,
    pub sup_estimate: f64,
    /// Sample point attaining the estimate.
    pub argsup: Option<f64>,
    pub quad_tol: f64,
    pub samples: usize,
    /// Largest quadrature error estimate among the samples.
    pub quad_error: f64,
    pub converged: bool,
}

/// Numerical suprema over the samples of
/// i) `∫|A(x,y)|dy`, ii) `∫|A(x,y)|dx`, iii) `∫_E |A(x,y)|dy`,
/// iv) `∫|B(xi,eta)|deta`, v) `∫|B(xi,eta)|dxi`, vi) `∫_F |B(xi,eta)|dxi`.
///
/// Integrals over the line are cut at the radius beyond which the bump is
/// below `1e-16` of its peak, with breakpoints at every dyadic scale of the
/// bump so that narrow scales are resolved. Integrals over `E` or `F` are
/// summed piece by piece.
pub fn schur_integrals(
    e: &IntervalSet,
    f: &IntervalSet,
    bump: &BumpProfile,
    stack: &ScaleStack,
    samples: &SchurSamples,
    quad: &QuadOptions,
) -> Vec<SchurItem> {
    let reach = bump.support_radius(1e-16 * bump.phi(0.0).abs());
    let jm = stack.j_max();
    let a = |x: f64, y: f64| kernel_a(bump, stack, x, y).abs();
    let b = |xi: f64, eta: f64| kernel_b(bump, stack, xi, eta).abs();

    let line = |c: f64, g: &(dyn Fn(f64) -> f64 + Sync)| -> (f64, f64, bool) {
        let mut breaks: Vec<f64> = (0..=jm + 1)
            .flat_map(|j| {
                let r = reach / 2f64.powi(j as i32);
                [c - r, c + r]
            })
            .collect();
        breaks.push(c);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let share = QuadOptions {
            tol: quad.tol / breaks.len() as f64,
            ..*quad
        };
        breaks.windows(2).fold((0.0, 0.0, true), |(v, err, ok), w| {
            let r = integrate(g, w[0], w[1], &share);
            (v + r.value, err + r.error, ok && r.converged)
        })
    };
    let on_set = |set: &IntervalSet, c: f64, g: &(dyn Fn(f64) -> f64 + Sync)| -> (f64, f64, bool) {
        let near = set.clip(c - reach, c + reach);
        let pieces = near.len().max(1);
        let share = QuadOptions {
            tol: quad.tol / pieces as f64,
            initial_panels: 1.max(quad.initial_panels / 4),
            ..*quad
        };
        near.items().iter().fold((0.0, 0.0, true), |(v, err, ok), iv| {
            let r = integrate(g, iv.lo(), iv.hi(), &share);
            (v + r.value, err + r.error, ok && r.converged)
        })
    };

    let run = |name: &str, points: &[f64], eval: &(dyn Fn(f64) -> (f64, f64, bool) + Sync)| {
        let results: Vec<(f64, f64, bool)> = points.par_iter().map(|&p| eval(p)).collect();
        let mut best: Option<(f64, f64)> = None;
        for (&p, r) in points.iter().zip(&results) {
            if best.map_or(true, |(v, _)| r.0 > v) {
                best = Some((r.0, p));
            }
        }
        SchurItem {
            item: name.to_string(),
            sup_estimate: best.map_or(0.0, |b| b.0),
            argsup: best.map(|b| b.1),
            quad_tol: quad.tol,
            samples: points.len(),
            quad_error: results.iter().map(|r| r.1).fold(0.0, f64::max),
            converged: results.iter().all(|r| r.2),
        }
    };

    vec![
        run("i", &samples.x, &|x| line(x, &|y| a(x, y))),
        run("ii", &samples.y, &|y| line(y, &|x| a(x, y))),
        run("iii", &samples.x, &|x| on_set(e, x, &|y| a(x, y))),
        run("iv", &samples.xi, &|xi| line(xi, &|eta| b(xi, eta))),
        run("v", &samples.eta, &|eta| line(eta, &|xi| b(xi, eta))),
        run("vi", &samples.eta, &|eta| on_set(f, eta, &|xi| b(xi, eta))),
    ]
}
