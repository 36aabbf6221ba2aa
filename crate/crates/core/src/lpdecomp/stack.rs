use serde::{Deserialize, Serialize};

use super::bump::phihat;
use crate::error::{Error, Result};
use crate::spectral::Grid;

/// Dyadic scales `0..=j_max` of the decomposition.
///
/// The spatial windows are `psi_0 = phihat` and, for `j ≥ 1`,
/// `psi_j(x) = phihat(2^{-j} x) - phihat(2^{-j+1} x)`, supported in
/// `2^{j-1} ≤ |x| ≤ 2^{j+1}`. They telescope to `phihat(2^{-J} x)`, which is
/// one on `|x| ≤ 2^J`. The frequency multipliers are
/// `phihat_j(xi) = phihat(2^{-j} xi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleStack {
    j_max: u32,
}

impl ScaleStack {
    pub fn new(j_max: u32) -> Self {
        Self { j_max }
    }

    /// `J = ceil(log2(L/2)) + 1`, so the windows cover the whole grid.
    pub fn for_grid(grid: &Grid) -> Self {
        let half = 0.5 * grid.length();
        let j = if half <= 1.0 { 0 } else { half.log2().ceil() as u32 };
        Self::new(j + 1)
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    /// Errors unless `2^J ≥ L/2`.
    pub fn check_covers(&self, grid: &Grid) -> Result<()> {
        let half = 0.5 * grid.length();
        if 2f64.powi(self.j_max as i32) >= half {
            Ok(())
        } else {
            Err(Error::StackTooSmall {
                j_max: self.j_max,
                half_length: half,
            })
        }
    }

    pub fn psi(&self, j: u32, x: f64) -> f64 {
        psi(j, x)
    }

    pub fn phihat_j(&self, j: u32, xi: f64) -> f64 {
        phihat(xi / 2f64.powi(j as i32))
    }

    /// `Σ_{j ≤ J} psi_j(x)`.
    pub fn partition(&self, x: f64) -> f64 {
        (0..=self.j_max).map(|j| psi(j, x)).sum()
    }

    /// Scales whose window is nonzero at `x`.
    pub fn active(&self, x: f64) -> Vec<u32> {
        (0..=self.j_max).filter(|&j| psi(j, x) != 0.0).collect()
    }
}

pub fn psi(j: u32, x: f64) -> f64 {
    if j == 0 {
        phihat(x)
    } else {
        let s = 2f64.powi(j as i32);
        phihat(x / s) - phihat(2.0 * x / s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows() {
        let s = ScaleStack::new(5);
        assert_eq!(s.psi(2, 0.0), 0.0);
        assert_eq!(s.psi(0, 0.5), 1.0);
        assert_eq!(s.partition(0.0), 1.0);
        // psi_3 lives on 4 ≤ |x| ≤ 16
        assert_eq!(s.psi(3, 3.99), 0.0);
        assert_eq!(s.psi(3, 16.0), 0.0);
        assert!(s.psi(3, 8.0) > 0.0);
    }

    #[test]
    fn stack_for_grid() {
        let g = Grid::new(64.0, 1024).unwrap();
        let s = ScaleStack::for_grid(&g);
        assert_eq!(s.j_max(), 6);
        assert!(s.check_covers(&g).is_ok());
        assert!(ScaleStack::new(3).check_covers(&g).is_err());
    }
}
