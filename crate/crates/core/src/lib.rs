//! Numerical Fourier concentration operators `Q_F P_E` on the real line.
//!
//! The crate is split into three layers:
//!
//! * [`sets`]: exact interval-set algebra, the radial weight `rho`, thinness
//!   functionals and the standard example families.
//! * [`spectral`]: a periodic grid with the `exp(-2 pi i xi x)` Fourier
//!   convention, matrix-free concentration operators, norms, spectra and the
//!   uncertainty-principle estimators built on them.
//! * [`lpdecomp`]: the dyadic decomposition of the identity into `S + T`,
//!   its kernels and numerical Schur-test integrals.

pub mod error;
pub mod lpdecomp;
pub mod quad;
pub mod sets;
pub mod spectral;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
