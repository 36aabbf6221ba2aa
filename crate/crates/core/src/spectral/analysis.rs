use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::eigen::{dense_eigenvalues, lanczos, power_iteration, PowerOptions};
use super::grid::{sum_sq, Fourier, Grid, GridFunction, Side};
use super::mask::sample_mask;
use super::op::{ConcentrationOp, NormEstimate};
use crate::error::{Error, Result};
use crate::sets::IntervalSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Lanczos,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub dense_cap: usize,
    pub tol: f64,
    pub seed: u64,
    /// Upper limit on the Krylov dimension.
    pub max_steps: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            dense_cap: super::op::DEFAULT_DENSE_CAP,
            tol: 1e-10,
            seed: 0,
            max_steps: 2000,
        }
    }
}

/// Top eigenvalues of `P_E Q_F P_E` with trace and Hilbert–Schmidt norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub grid: Grid,
    pub method: Method,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub trace: f64,
    pub frobenius: f64,
    pub iterations: usize,
    /// Largest residual bound among the returned eigenvalues.
    pub residual: f64,
    pub converged: bool,
    pub unresolved_intervals: usize,
}

/// Top `k` eigenvalues of `P_E Q_F P_E`.
///
/// `Dense` diagonalizes the operator compressed to the nodes of `E` and pads
/// with the exact zeros of the complement; `Lanczos` is matrix-free;
/// `Power` returns the top eigenvalue only.
pub fn spectrum(op: &ConcentrationOp, k: usize, method: Method, opts: &SpectrumOptions) -> Result<SpectrumReport> {
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    let n = op.grid().n();
    let (eigenvalues, iterations, residual, converged) = match method {
        Method::Dense => {
            if n > opts.dense_cap {
                return Err(Error::DenseCapExceeded { n, cap: opts.dense_cap });
            }
            let (m, _) = op.compressed_normal();
            let mut vals = dense_eigenvalues(m);
            // the rows outside E contribute exact zeros, which may sit above
            // rounding-level negatives of the compressed block
            vals.resize(n, 0.0);
            vals.sort_by(|a, b| b.total_cmp(a));
            vals.truncate(k);
            (vals, 0, 0.0, true)
        }
        Method::Lanczos => {
            let r = lanczos(n, |v| op.apply_normal_in_place(v), k, opts.tol, opts.seed, opts.max_steps);
            let mut vals = r.eigenvalues;
            // the Krylov space may close before k values are found; the rest are zero
            if r.converged {
                vals.resize(k.min(n), 0.0);
            }
            let res = r.residuals.iter().copied().fold(0.0, f64::max);
            (vals, r.steps, res, r.converged)
        }
        Method::Power => {
            let p = power_iteration(
                n,
                |v| op.apply_normal_in_place(v),
                &PowerOptions {
                    tol: opts.tol,
                    max_iter: opts.max_steps,
                    seed: opts.seed,
                },
            );
            (vec![p.eigenvalue], p.iterations, p.residual, p.converged)
        }
    };
    Ok(SpectrumReport {
        grid: *op.grid(),
        method,
        eigenvalues,
        trace: op.trace(),
        frobenius: op.frobenius(),
        iterations,
        residual,
        converged,
        unresolved_intervals: op.unresolved(),
    })
}

/// The four operators of `Q_F P_E = Q_{F^R} P_{E^R} + Q_{F_∞} P_{E^R}
/// + Q_{F^R} P_{E_∞} + Q_{F_∞} P_{E_∞}`, where `A^R = A ∩ [-R, R]` and
/// `A_∞ = A \ [-R, R]`.
///
/// The split is made on the sampled masks (a node goes to `A^R` iff its cell
/// midpoint has modulus at most `R`), so the four blocks partition the full
/// operator exactly.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub r: f64,
    pub full: ConcentrationOp,
    /// `Q_{F^R} P_{E^R}`, the compact block.
    pub near: ConcentrationOp,
    /// `Q_{F_∞} P_{E^R}`.
    pub far_freq: ConcentrationOp,
    /// `Q_{F^R} P_{E_∞}`.
    pub far_space: ConcentrationOp,
    /// `Q_{F_∞} P_{E_∞}`.
    pub far: ConcentrationOp,
}

fn split(grid: &Grid, side: Side, bits: &[bool], r: f64) -> (Vec<bool>, Vec<bool>) {
    let inner = (0..bits.len())
        .map(|i| bits[i] && grid.cell_center(side, i).abs() <= r)
        .collect();
    let outer = (0..bits.len())
        .map(|i| bits[i] && grid.cell_center(side, i).abs() > r)
        .collect();
    (inner, outer)
}

pub fn block_decomposition(e: &IntervalSet, f: &IntervalSet, r: f64, grid: &Grid) -> Result<BlockDecomposition> {
    if !(r > 0.0) {
        return Err(Error::invalid("R", format!("must be positive, got {r}")));
    }
    let full = ConcentrationOp::new(*grid, e, f);
    let fourier = full.fourier().clone();
    let (e_in, e_out) = split(grid, Side::Space, full.e_mask(), r);
    let (f_in, f_out) = split(grid, Side::Frequency, full.f_mask(), r);
    let f_near = f.truncate(r)?;
    let f_far = f.tail(r)?;
    let make = |em: &Vec<bool>, fm: &Vec<bool>, fs: &IntervalSet| -> Result<ConcentrationOp> {
        Ok(ConcentrationOp::from_masks(*grid, em.clone(), fm.clone())?
            .with_fourier(&fourier)
            .with_f_set(fs.clone()))
    };
    Ok(BlockDecomposition {
        r,
        near: make(&e_in, &f_in, &f_near)?,
        far_freq: make(&e_in, &f_out, &f_far)?,
        far_space: make(&e_out, &f_in, &f_near)?,
        far: make(&e_out, &f_out, &f_far)?,
        full,
    })
}

impl BlockDecomposition {
    pub fn blocks(&self) -> [(&'static str, &ConcentrationOp); 4] {
        [
            ("FE", &self.near),
            ("FinfE", &self.far_freq),
            ("FEinf", &self.far_space),
            ("FinfEinf", &self.far),
        ]
    }

    /// `‖Σ blocks(f) - full(f)‖ / ‖f‖`.
    pub fn residual(&self, f: &GridFunction) -> Result<f64> {
        let full = self.full.apply(f)?;
        let mut sum = vec![Complex64::new(0.0, 0.0); f.values.len()];
        for (_, b) in self.blocks() {
            let part = b.apply(f)?;
            sum.iter_mut().zip(&part.values).for_each(|(s, p)| *s += p);
        }
        let diff: Vec<Complex64> = sum.iter().zip(&full.values).map(|(a, b)| a - b).collect();
        let fn2 = sum_sq(&f.values);
        Ok(if fn2 == 0.0 { 0.0 } else { (sum_sq(&diff) / fn2).sqrt() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailNormRow {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "norm_FinfE")]
    pub norm_finf_e: f64,
    #[serde(rename = "norm_FEinf")]
    pub norm_f_einf: f64,
    #[serde(rename = "norm_FinfEinf")]
    pub norm_finf_einf: f64,
    pub converged: bool,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailNormTable {
    pub grid: Grid,
    pub rows: Vec<TailNormRow>,
}

/// Norms of the three non-compact blocks of the decomposition for each `R`.
pub fn tail_norm_curve(
    e: &IntervalSet,
    f: &IntervalSet,
    radii: &[f64],
    grid: &Grid,
    opts: &PowerOptions,
) -> Result<TailNormTable> {
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("R", "radii must be strictly increasing"));
    }
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let d = block_decomposition(e, f, r, grid)?;
        let norms: Vec<NormEstimate> = [&d.far_freq, &d.far_space, &d.far]
            .iter()
            .map(|op| op.op_norm(opts))
            .collect();
        rows.push(TailNormRow {
            r,
            norm_finf_e: norms[0].norm,
            norm_f_einf: norms[1].norm,
            norm_finf_einf: norms[2].norm,
            converged: norms.iter().all(|n| n.converged),
            max_residual: norms.iter().map(|n| n.residual).fold(0.0, f64::max),
        });
    }
    Ok(TailNormTable { grid: *grid, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingCheck {
    pub norm1: f64,
    pub norm2: f64,
    pub gap: f64,
    /// True when both discretizations produced the same masks, making the
    /// two operators literally the same matrix.
    pub identical_masks: bool,
}

/// Compares `‖Q_{[-R,R]} P_A‖` on `grid` with `‖Q_{[-1,1]} P_{RA}‖` on the
/// grid dilated by `R`. The dilation maps nodes to nodes and frequencies to
/// frequencies, so the two discrete operators coincide.
pub fn scaling_check(a: &IntervalSet, r: f64, grid: &Grid, opts: &PowerOptions) -> Result<ScalingCheck> {
    let band = IntervalSet::single(-r, r)?;
    let op1 = ConcentrationOp::new(*grid, a, &band);
    let big = grid.dilate(r)?;
    let op2 = ConcentrationOp::new(big, &a.scale(r)?, &IntervalSet::single(-1.0, 1.0)?);
    let n1 = op1.op_norm(opts).norm;
    let n2 = op2.op_norm(opts).norm;
    Ok(ScalingCheck {
        norm1: n1,
        norm2: n2,
        gap: (n1 - n2).abs(),
        identical_masks: op1.e_mask() == op2.e_mask() && op1.f_mask() == op2.f_mask(),
    })
}

/// `‖P_A Q_{[-1,1]}‖ = ‖Q_{[-1,1]} P_A‖`: how much of a unit-band-limited
/// function can live on `A`.
pub fn ls_delta(a: &IntervalSet, grid: &Grid, opts: &PowerOptions) -> Result<NormEstimate> {
    let op = ConcentrationOp::new(*grid, a, &IntervalSet::single(-1.0, 1.0)?);
    Ok(op.op_norm(opts))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvwEstimate {
    /// `λ_min(P_{E^c} + Q_{F^c})`.
    pub lambda_min: f64,
    /// `λ_max(P_E + Q_F) = 2 - lambda_min`.
    pub lambda_max_complement: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Smallest eigenvalue of `P_{E^c} + Q_{F^c}`, obtained by power iteration on
/// the reflected operator `2 I - (P_{E^c} + Q_{F^c}) = P_E + Q_F`.
pub fn svw_lambda_min(e: &IntervalSet, f: &IntervalSet, grid: &Grid, opts: &PowerOptions) -> Result<SvwEstimate> {
    let e_mask = sample_mask(grid, e, Side::Space).bits;
    let f_mask = sample_mask(grid, f, Side::Frequency).bits;
    Ok(svw_from_masks(grid, &e_mask, &f_mask, opts))
}

pub(crate) fn svw_from_masks(grid: &Grid, e_mask: &[bool], f_mask: &[bool], opts: &PowerOptions) -> SvwEstimate {
    let fourier = Fourier::new(grid.n());
    let mut scratch = vec![Complex64::new(0.0, 0.0); grid.n()];
    let p = power_iteration(
        grid.n(),
        |v| {
            scratch.copy_from_slice(v);
            fourier.project_frequency(&mut scratch, f_mask);
            for ((z, s), &keep) in v.iter_mut().zip(&scratch).zip(e_mask) {
                *z = if keep { *z + s } else { *s };
            }
        },
        opts,
    );
    SvwEstimate {
        lambda_min: 2.0 - p.eigenvalue,
        lambda_max_complement: p.eigenvalue,
        iterations: p.iterations,
        residual: p.residual,
        converged: p.converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> IntervalSet {
        IntervalSet::single(lo, hi).unwrap()
    }

    #[test]
    fn blocks_vanish_when_r_is_large() {
        let g = Grid::new(32.0, 1024).unwrap();
        let d = block_decomposition(&iv(-2.0, 3.0), &iv(-1.0, 1.0), 100.0, &g).unwrap();
        let opts = PowerOptions::default();
        assert!(d.near.op_norm(&opts).norm > 0.5);
        for op in [&d.far_freq, &d.far_space, &d.far] {
            assert_eq!(op.op_norm(&opts).norm, 0.0);
        }
    }

    #[test]
    fn tiny_r_leaves_only_far_block() {
        let g = Grid::new(32.0, 1024).unwrap();
        let d = block_decomposition(&iv(0.5, 3.0), &iv(0.5, 1.0), 1e-9, &g).unwrap();
        let opts = PowerOptions::default();
        assert!(d.far.op_norm(&opts).norm > 0.0);
        for op in [&d.near, &d.far_freq, &d.far_space] {
            assert_eq!(op.op_norm(&opts).norm, 0.0);
        }
        assert!(block_decomposition(&iv(0.0, 1.0), &iv(0.0, 1.0), 0.0, &g).is_err());
    }

    #[test]
    fn svw_trivial_pairs() {
        let g = Grid::new(16.0, 256).unwrap();
        let opts = PowerOptions::default();
        let empty = svw_lambda_min(&IntervalSet::empty(), &IntervalSet::empty(), &g, &opts).unwrap();
        assert!((empty.lambda_min - 2.0).abs() < 1e-12);
        let full_e = iv(-8.0, 8.0);
        let full_f = iv(-8.0, 8.0);
        let full = svw_lambda_min(&full_e, &full_f, &g, &opts).unwrap();
        assert!(full.lambda_min.abs() < 1e-12);
    }

    #[test]
    fn spectrum_methods_agree() {
        let g = Grid::new(16.0, 512).unwrap();
        let op = ConcentrationOp::new(g, &iv(-1.0, 1.0), &iv(-0.5, 0.5));
        let opts = SpectrumOptions::default();
        let d = spectrum(&op, 8, Method::Dense, &opts).unwrap();
        let l = spectrum(&op, 8, Method::Lanczos, &opts).unwrap();
        let p = spectrum(&op, 1, Method::Power, &opts).unwrap();
        for (a, b) in d.eigenvalues.iter().zip(&l.eigenvalues) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        assert!((p.eigenvalues[0] - d.eigenvalues[0]).abs() < 1e-8, "{p:?} {:?}", &d.eigenvalues[..3]);
        assert!(spectrum(&op, 0, Method::Dense, &opts).is_err());
        let capped = SpectrumOptions { dense_cap: 128, ..opts };
        assert!(spectrum(&op, 3, Method::Dense, &capped).is_err());
    }
}
