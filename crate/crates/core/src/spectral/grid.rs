use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic sampling of `[-L/2, L/2)`.
///
/// Space nodes are `x_k = -L/2 + k h` with `h = L/N`; frequency nodes are
/// `xi_m = m / L` for `m = -N/2 .. N/2 - 1`, stored at index `i = m + N/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    #[serde(rename = "L")]
    length: f64,
    #[serde(rename = "N")]
    n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Space,
    Frequency,
}

impl Grid {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid("L", format!("must be positive, got {length}")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::invalid("N", format!("must be a power of two ≥ 2, got {n}")));
        }
        Ok(Self { length, n })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Frequency spacing `1/L`.
    pub fn dxi(&self) -> f64 {
        1.0 / self.length
    }

    pub fn node(&self, k: usize) -> f64 {
        -0.5 * self.length + k as f64 * self.h()
    }

    pub fn freq(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) / self.length
    }

    /// Spacing of the lattice on `side`.
    pub fn spacing(&self, side: Side) -> f64 {
        match side {
            Side::Space => self.h(),
            Side::Frequency => self.dxi(),
        }
    }

    /// First lattice point on `side`.
    pub fn origin(&self, side: Side) -> f64 {
        match side {
            Side::Space => -0.5 * self.length,
            Side::Frequency => -0.5 * self.n as f64 / self.length,
        }
    }

    /// Midpoint of the cell starting at lattice point `i` on `side`.
    pub fn cell_center(&self, side: Side, i: usize) -> f64 {
        self.origin(side) + (i as f64 + 0.5) * self.spacing(side)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.node(k)).collect()
    }

    pub fn freqs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.freq(i)).collect()
    }

    /// The same `N` on `[-lam L/2, lam L/2)`; frequency nodes shrink by `lam`.
    pub fn dilate(&self, lam: f64) -> Result<Self> {
        Self::new(lam * self.length, self.n)
    }

    pub(crate) fn check(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected_length: self.length,
                expected_n: self.n,
                length: other.length,
                n: other.n,
            })
        }
    }
}

/// Samples of a function on one side of a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub grid: Grid,
    pub side: Side,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Grid, side: Side, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::invalid(
                "values",
                format!("expected {} samples, got {}", grid.n(), values.len()),
            ));
        }
        Ok(Self { grid, side, values })
    }

    pub fn zeros(grid: Grid, side: Side) -> Self {
        Self {
            grid,
            side,
            values: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    /// Samples `f(x_k)` of a real function.
    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n())
            .map(|k| Complex64::new(f(grid.node(k)), 0.0))
            .collect();
        Self {
            grid,
            side: Side::Space,
            values,
        }
    }

    /// `sqrt(w Σ |v|²)` with `w = h` in space and `w = 1/L` in frequency,
    /// the Riemann sum for the `L²` norm.
    pub fn norm(&self) -> f64 {
        (self.grid.spacing(self.side) * sum_sq(&self.values)).sqrt()
    }

    pub(crate) fn expect_side(&self, side: Side) -> Result<()> {
        if self.side == side {
            Ok(())
        } else {
            Err(Error::invalid("side", format!("expected a {side:?}-side function")))
        }
    }
}

pub(crate) fn sum_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Cached FFT plans for one transform length.
#[derive(Clone)]
pub struct Fourier {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Fourier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fourier").field("n", &self.n).finish()
    }
}

impl Fourier {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalized `Σ_k v_k exp(-2 pi i jk/N)` in place.
    pub fn dft(&self, v: &mut [Complex64]) {
        self.forward.process(v);
    }

    /// Unnormalized `Σ_j v_j exp(2 pi i jk/N)` in place.
    pub fn idft(&self, v: &mut [Complex64]) {
        self.inverse.process(v);
    }

    /// `Q_F` on raw space samples: with `S = diag((-1)^k)` the frequency
    /// projection is `S · IDFT · diag(mask) · DFT · S / N`.
    pub fn project_frequency(&self, v: &mut [Complex64], f_mask: &[bool]) {
        alternate(v);
        self.dft(v);
        let scale = 1.0 / self.n as f64;
        for (z, &keep) in v.iter_mut().zip(f_mask) {
            *z = if keep { *z * scale } else { Complex64::new(0.0, 0.0) };
        }
        self.idft(v);
        alternate(v);
    }

    /// Space-side multiplier: `F^{-1}(m · F v)` for real frequency weights.
    pub fn multiply_frequency(&self, v: &mut [Complex64], weights: &[f64]) {
        alternate(v);
        self.dft(v);
        let scale = 1.0 / self.n as f64;
        for (z, &w) in v.iter_mut().zip(weights) {
            *z *= w * scale;
        }
        self.idft(v);
        alternate(v);
    }
}

/// Multiplies entry `k` by `(-1)^k`.
pub(crate) fn alternate(v: &mut [Complex64]) {
    for z in v.iter_mut().skip(1).step_by(2) {
        *z = -*z;
    }
}

fn nyquist_sign(i: usize, n: usize) -> f64 {
    if (i + n / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `f̂(xi_m) = h Σ_k exp(-2 pi i xi_m x_k) f(x_k)`.
pub fn forward_ft(f: &GridFunction) -> Result<GridFunction> {
    f.expect_side(Side::Space)?;
    let grid = f.grid;
    let n = grid.n();
    let mut v = f.values.clone();
    alternate(&mut v);
    Fourier::new(n).dft(&mut v);
    let h = grid.h();
    for (i, z) in v.iter_mut().enumerate() {
        *z *= h * nyquist_sign(i, n);
    }
    Ok(GridFunction {
        grid,
        side: Side::Frequency,
        values: v,
    })
}

/// `f(x_k) = (1/L) Σ_m exp(2 pi i xi_m x_k) f̂(xi_m)`, inverting [`forward_ft`].
pub fn inverse_ft(fhat: &GridFunction) -> Result<GridFunction> {
    fhat.expect_side(Side::Frequency)?;
    let grid = fhat.grid;
    let n = grid.n();
    let mut v = fhat.values.clone();
    for (i, z) in v.iter_mut().enumerate() {
        *z *= nyquist_sign(i, n) / grid.length();
    }
    Fourier::new(n).idft(&mut v);
    alternate(&mut v);
    Ok(GridFunction {
        grid,
        side: Side::Space,
        values: v,
    })
}
