//! Concentration operators on a periodic grid.
//!
//! Functions on `[-L/2, L/2)` are sampled at `N` nodes with spacing `h`; the
//! transform is the Riemann sum of `∫ exp(-2 pi i xi x) f(x) dx` on the
//! lattice `xi_m = m/L`. Sets enter through 0/1 masks, so every projection is
//! exactly idempotent on the grid.

pub mod analysis;
pub mod eigen;
pub mod grid;
pub mod mask;
pub mod op;

pub use analysis::{
    block_decomposition, ls_delta, scaling_check, spectrum, svw_lambda_min, tail_norm_curve,
    BlockDecomposition, Method, ScalingCheck, SpectrumOptions, SpectrumReport, SvwEstimate,
    TailNormRow, TailNormTable,
};
pub use eigen::{dense_eigenvalues, lanczos, power_iteration, random_vector, LanczosResult, PowerOptions, PowerResult};
pub use grid::{forward_ft, inverse_ft, Fourier, Grid, GridFunction, Side};
pub use mask::{sample_mask, Mask};
pub use op::{indicator_ft, ConcentrationOp, NormEstimate, DEFAULT_DENSE_CAP};
