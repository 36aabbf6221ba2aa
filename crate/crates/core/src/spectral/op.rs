use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::eigen::{power_iteration, PowerOptions, PowerResult};
use super::grid::{Fourier, Grid, GridFunction, Side};
use super::mask::sample_mask;
use crate::error::{Error, Result};
use crate::sets::IntervalSet;

pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Discrete `Q_F P_E`: multiply by `χ_E` on the space nodes, transform,
/// multiply by `χ_F` on the frequency nodes, transform back.
#[derive(Debug, Clone)]
pub struct ConcentrationOp {
    grid: Grid,
    e_mask: Vec<bool>,
    f_mask: Vec<bool>,
    f_set: Option<IntervalSet>,
    unresolved: usize,
    fourier: Fourier,
}

/// `‖Q_F P_E‖` from power iteration on `P_E Q_F P_E`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NormEstimate {
    pub norm: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

impl From<PowerResult> for NormEstimate {
    fn from(p: PowerResult) -> Self {
        Self {
            norm: p.eigenvalue.max(0.0).sqrt(),
            iterations: p.iterations,
            residual: p.residual,
            converged: p.converged,
        }
    }
}

impl ConcentrationOp {
    pub fn new(grid: Grid, e: &IntervalSet, f: &IntervalSet) -> Self {
        let em = sample_mask(&grid, e, Side::Space);
        let fm = sample_mask(&grid, f, Side::Frequency);
        Self {
            grid,
            e_mask: em.bits,
            f_mask: fm.bits,
            f_set: Some(f.clone()),
            unresolved: em.unresolved + fm.unresolved,
            fourier: Fourier::new(grid.n()),
        }
    }

    pub fn from_masks(grid: Grid, e_mask: Vec<bool>, f_mask: Vec<bool>) -> Result<Self> {
        if e_mask.len() != grid.n() || f_mask.len() != grid.n() {
            return Err(Error::invalid("mask", format!("masks must have length {}", grid.n())));
        }
        Ok(Self {
            grid,
            e_mask,
            f_mask,
            f_set: None,
            unresolved: 0,
            fourier: Fourier::new(grid.n()),
        })
    }

    /// Attaches the continuum frequency set used by [`frobenius`](Self::frobenius).
    pub fn with_f_set(mut self, f: IntervalSet) -> Self {
        self.f_set = Some(f);
        self
    }

    pub(crate) fn with_fourier(mut self, fourier: &Fourier) -> Self {
        self.fourier = fourier.clone();
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn e_mask(&self) -> &[bool] {
        &self.e_mask
    }

    pub fn f_mask(&self) -> &[bool] {
        &self.f_mask
    }

    pub fn fourier(&self) -> &Fourier {
        &self.fourier
    }

    /// Intervals of `E` or `F` narrower than two cells of their lattice.
    pub fn unresolved(&self) -> usize {
        self.unresolved
    }

    fn mask_e(&self, v: &mut [Complex64]) {
        for (z, &keep) in v.iter_mut().zip(&self.e_mask) {
            if !keep {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// `Q_F P_E` on raw space samples, in place.
    pub fn apply_in_place(&self, v: &mut [Complex64]) {
        self.mask_e(v);
        self.fourier.project_frequency(v, &self.f_mask);
    }

    /// `P_E Q_F` on raw space samples, in place.
    pub fn apply_adjoint_in_place(&self, v: &mut [Complex64]) {
        self.fourier.project_frequency(v, &self.f_mask);
        self.mask_e(v);
    }

    /// `P_E Q_F P_E` on raw space samples, in place.
    pub fn apply_normal_in_place(&self, v: &mut [Complex64]) {
        self.apply_in_place(v);
        self.mask_e(v);
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        self.grid.check(&f.grid)?;
        f.expect_side(Side::Space)?;
        let mut out = f.clone();
        self.apply_in_place(&mut out.values);
        Ok(out)
    }

    pub fn apply_adjoint(&self, f: &GridFunction) -> Result<GridFunction> {
        self.grid.check(&f.grid)?;
        f.expect_side(Side::Space)?;
        let mut out = f.clone();
        self.apply_adjoint_in_place(&mut out.values);
        Ok(out)
    }

    /// First column of the circulant `Q_F`: `(Q_F)_{kl} = c[(k - l) mod N]`.
    fn circulant_column(&self) -> Vec<Complex64> {
        let n = self.grid.n();
        let mut c: Vec<Complex64> = self
            .f_mask
            .iter()
            .map(|&b| Complex64::new(if b { 1.0 } else { 0.0 }, 0.0))
            .collect();
        self.fourier.idft(&mut c);
        let scale = 1.0 / n as f64;
        for (d, z) in c.iter_mut().enumerate() {
            *z *= if d % 2 == 0 { scale } else { -scale };
        }
        c
    }

    /// Dense matrix `M` of `Q_F P_E` acting on samples: `M v = apply(v)`.
    pub fn kernel_matrix(&self, cap: usize) -> Result<DMatrix<Complex64>> {
        let n = self.grid.n();
        if n > cap {
            return Err(Error::DenseCapExceeded { n, cap });
        }
        let c = self.circulant_column();
        Ok(DMatrix::from_fn(n, n, |k, l| {
            if self.e_mask[l] {
                c[(k + n - l) % n]
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// `P_E Q_F P_E` compressed to the rows and columns of `E`; its
    /// eigenvalues are those of the full operator apart from `N - |E|` zeros.
    pub fn compressed_normal(&self) -> (DMatrix<Complex64>, Vec<usize>) {
        let n = self.grid.n();
        let idx: Vec<usize> = (0..n).filter(|&k| self.e_mask[k]).collect();
        let c = self.circulant_column();
        let m = DMatrix::from_fn(idx.len(), idx.len(), |a, b| c[(idx[a] + n - idx[b]) % n]);
        (m, idx)
    }

    /// `tr(P_E Q_F P_E) = (h · #E) · (#F / L)`, the sampled `|E| |F|`.
    pub fn trace(&self) -> f64 {
        let ne = self.e_mask.iter().filter(|&&b| b).count() as f64;
        let nf = self.f_mask.iter().filter(|&&b| b).count() as f64;
        self.grid.h() * ne * nf * self.grid.dxi()
    }

    /// Hilbert–Schmidt norm of the kernel `K(x, y) = χ̂_F(y - x) χ_E(y)`
    /// sampled at the nodes: `sqrt(h² Σ_{l ∈ E} Σ_k |χ̂_F(x_l - x_k)|²)`.
    ///
    /// `χ̂_F` is evaluated in closed form from the continuum set `F`, so the
    /// result tends to `sqrt(|E| |F|)` under refinement. Operators built from
    /// bare masks fall back to the discrete value `sqrt(trace)`.
    pub fn frobenius(&self) -> f64 {
        let Some(f) = &self.f_set else {
            return self.trace().sqrt();
        };
        let n = self.grid.n();
        let h = self.grid.h();
        if f.is_empty() || !self.e_mask.iter().any(|&b| b) {
            return 0.0;
        }
        // prefix sums of h²|χ̂_F(d h)|² over d = -(N-1) ..= N-1
        let mut prefix = Vec::with_capacity(2 * n);
        prefix.push(0.0);
        let mut acc = 0.0;
        for j in 0..(2 * n - 1) {
            let d = j as f64 - (n - 1) as f64;
            acc += h * h * indicator_ft(f, d * h).norm_sqr();
            prefix.push(acc);
        }
        // for node l the offsets l - k run over l-(N-1) ..= l
        let total: f64 = self
            .e_mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(l, _)| prefix[l + n] - prefix[l])
            .sum();
        total.sqrt()
    }

    /// `‖Q_F P_E‖ = sqrt(λ_max(P_E Q_F P_E))`.
    pub fn op_norm(&self, opts: &PowerOptions) -> NormEstimate {
        power_iteration(self.grid.n(), |v| self.apply_normal_in_place(v), opts).into()
    }
}

/// `χ̂_S(t) = ∫_S exp(-2 pi i xi t) dxi`.
pub fn indicator_ft(s: &IntervalSet, t: f64) -> Complex64 {
    s.items()
        .iter()
        .map(|iv| {
            let w = iv.len();
            let amp = if t == 0.0 {
                w
            } else {
                (PI * w * t).sin() / (PI * t)
            };
            Complex64::from_polar(1.0, -PI * (iv.lo() + iv.hi()) * t) * amp
        })
        .sum()
}
