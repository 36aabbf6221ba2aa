//! Littlewood–Paley splitting of the identity into `S + T`.
//!
//! `S` keeps the part of `f` that is smooth at the local scale `rho(x)`:
//! near `|x| ~ 2^j` it convolves with `phi_j`, whose transform is one on
//! `|xi| ≤ 2^j`. `T = I - S` holds the remaining high frequencies.

pub mod bump;
pub mod kernels;
pub mod ops;
pub mod stack;

pub use bump::{make_bump, phihat, smooth_step, BumpProfile, TRUNCATION_LIMIT};
pub use kernels::{kernel_a, kernel_b, psi_hat, schur_integrals, SchurItem, SchurSamples};
pub use ops::{apply_s, apply_t, st_eps_bounds, LpOperators, StEps};
pub use stack::{psi, ScaleStack};
