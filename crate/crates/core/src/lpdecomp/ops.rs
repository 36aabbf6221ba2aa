use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::stack::ScaleStack;
use crate::error::Result;
use crate::sets::IntervalSet;
use crate::spectral::grid::alternate;
use crate::spectral::{power_iteration, sample_mask, Fourier, Grid, GridFunction, NormEstimate, PowerOptions, Side};

/// `S f = Σ_j psi_j (phi_j * f)` and `T f = Σ_j psi_j (f - phi_j * f)` on a
/// grid. Convolutions are applied as frequency multipliers
/// `phihat(2^{-j} xi_m)`; the bump table is not involved.
#[derive(Debug, Clone)]
pub struct LpOperators {
    grid: Grid,
    stack: ScaleStack,
    fourier: Fourier,
    /// `psi_j(x_k)`, one row per scale.
    windows: Vec<Vec<f64>>,
    /// `phihat_j(xi_i) / N`, one row per scale.
    multipliers: Vec<Vec<f64>>,
    /// `Σ_j psi_j(x_k)`.
    coverage: Vec<f64>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl LpOperators {
    pub fn new(grid: &Grid, stack: ScaleStack) -> Result<Self> {
        stack.check_covers(grid)?;
        let n = grid.n();
        let windows: Vec<Vec<f64>> = (0..=stack.j_max())
            .map(|j| (0..n).map(|k| stack.psi(j, grid.node(k))).collect())
            .collect();
        let multipliers = (0..=stack.j_max())
            .map(|j| (0..n).map(|i| stack.phihat_j(j, grid.freq(i)) / n as f64).collect())
            .collect();
        let coverage = (0..n).map(|k| windows.iter().map(|w| w[k]).sum()).collect();
        Ok(Self {
            grid: *grid,
            stack,
            fourier: Fourier::new(n),
            windows,
            multipliers,
            coverage,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn stack(&self) -> &ScaleStack {
        &self.stack
    }

    /// `phi_j * f` on raw samples.
    pub fn smooth(&self, j: u32, v: &[Complex64]) -> Vec<Complex64> {
        let mut w = v.to_vec();
        let weights: Vec<f64> = self.multipliers[j as usize].iter().map(|m| m * self.grid.n() as f64).collect();
        self.fourier.multiply_frequency(&mut w, &weights);
        w
    }

    /// `S v`: one forward transform, one inverse per scale.
    pub fn s(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut spec = v.to_vec();
        alternate(&mut spec);
        self.fourier.dft(&mut spec);
        let mut out = vec![ZERO; v.len()];
        let mut buf = vec![ZERO; v.len()];
        for (mult, win) in self.multipliers.iter().zip(&self.windows) {
            for ((b, s), &m) in buf.iter_mut().zip(&spec).zip(mult) {
                *b = s * m;
            }
            self.fourier.idft(&mut buf);
            alternate(&mut buf);
            for ((o, b), &w) in out.iter_mut().zip(&buf).zip(win) {
                *o += b * w;
            }
        }
        out
    }

    /// `S* g = Σ_j phi_j * (psi_j g)`: the multipliers are summed in
    /// frequency before a single inverse transform.
    pub fn s_adjoint(&self, g: &[Complex64]) -> Vec<Complex64> {
        let mut acc = vec![ZERO; g.len()];
        let mut buf = vec![ZERO; g.len()];
        for (mult, win) in self.multipliers.iter().zip(&self.windows) {
            for ((b, z), &w) in buf.iter_mut().zip(g).zip(win) {
                *b = z * w;
            }
            alternate(&mut buf);
            self.fourier.dft(&mut buf);
            for ((a, b), &m) in acc.iter_mut().zip(&buf).zip(mult) {
                *a += b * m;
            }
        }
        self.fourier.idft(&mut acc);
        alternate(&mut acc);
        acc
    }

    /// `T v = Σ_j psi_j (v - phi_j * v)`.
    pub fn t(&self, v: &[Complex64]) -> Vec<Complex64> {
        let sv = self.s(v);
        v.iter()
            .zip(&sv)
            .zip(&self.coverage)
            .map(|((z, s), &c)| z * c - s)
            .collect()
    }

    /// `T* g = Σ_j (g psi_j - phi_j * (psi_j g))`.
    pub fn t_adjoint(&self, g: &[Complex64]) -> Vec<Complex64> {
        let sg = self.s_adjoint(g);
        g.iter()
            .zip(&sg)
            .zip(&self.coverage)
            .map(|((z, s), &c)| z * c - s)
            .collect()
    }

    pub fn apply_s(&self, f: &GridFunction) -> Result<GridFunction> {
        self.grid.check(&f.grid)?;
        f.expect_side(Side::Space)?;
        GridFunction::new(self.grid, Side::Space, self.s(&f.values))
    }

    pub fn apply_t(&self, f: &GridFunction) -> Result<GridFunction> {
        self.grid.check(&f.grid)?;
        f.expect_side(Side::Space)?;
        GridFunction::new(self.grid, Side::Space, self.t(&f.values))
    }

    /// `‖S‖` and `‖T‖` by power iteration on `S*S` and `T*T`.
    pub fn norms(&self, opts: &PowerOptions) -> (NormEstimate, NormEstimate) {
        let n = self.grid.n();
        let s = power_iteration(n, |v| {
            let w = self.s_adjoint(&self.s(v));
            v.copy_from_slice(&w);
        }, opts);
        let t = power_iteration(n, |v| {
            let w = self.t_adjoint(&self.t(v));
            v.copy_from_slice(&w);
        }, opts);
        (s.into(), t.into())
    }
}

/// Free-function form of [`LpOperators::apply_s`].
pub fn apply_s(f: &GridFunction, stack: ScaleStack) -> Result<GridFunction> {
    LpOperators::new(&f.grid, stack)?.apply_s(f)
}

/// Free-function form of [`LpOperators::apply_t`].
pub fn apply_t(f: &GridFunction, stack: ScaleStack) -> Result<GridFunction> {
    LpOperators::new(&f.grid, stack)?.apply_t(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StEps {
    /// `‖S P_E‖`.
    pub norm_se: NormEstimate,
    /// `‖Q_F T‖`.
    pub norm_ft: NormEstimate,
}

/// Measured `‖S(χ_E f)‖ / ‖f‖` and `‖χ_F (T f)^‖ / ‖f‖` operator norms.
pub fn st_eps_bounds(
    e: &IntervalSet,
    f: &IntervalSet,
    grid: &Grid,
    stack: ScaleStack,
    opts: &PowerOptions,
) -> Result<StEps> {
    let ops = LpOperators::new(grid, stack)?;
    let e_mask = sample_mask(grid, e, Side::Space).bits;
    let f_mask = sample_mask(grid, f, Side::Frequency).bits;
    let n = grid.n();
    let mask = |v: &mut [Complex64]| {
        for (z, &keep) in v.iter_mut().zip(&e_mask) {
            if !keep {
                *z = ZERO;
            }
        }
    };
    let se = power_iteration(n, |v| {
        mask(v);
        let w = ops.s_adjoint(&ops.s(v));
        v.copy_from_slice(&w);
        mask(v);
    }, opts);
    let ft = power_iteration(n, |v| {
        let mut w = ops.t(v);
        ops.fourier.project_frequency(&mut w, &f_mask);
        let back = ops.t_adjoint(&w);
        v.copy_from_slice(&back);
    }, opts);
    Ok(StEps {
        norm_se: se.into(),
        norm_ft: ft.into(),
    })
}
