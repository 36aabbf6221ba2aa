use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{inverse_ft, Grid, GridFunction, Side};

/// `C^∞` step: 0 for `t ≤ 0`, 1 for `t ≥ 1`, `g(t)/(g(t) + g(1-t))` with
/// `g(t) = exp(-1/t)` in between.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Radial profile of the bump: 1 on `|xi| ≤ 1`, 0 on `|xi| ≥ 2`.
pub fn phihat(xi: f64) -> f64 {
    1.0 - smooth_step(xi.abs() - 1.0)
}

/// Largest `|phi|` tolerated beyond the table.
pub const TRUNCATION_LIMIT: f64 = 1e-10;

/// `phi = F^{-1}(phihat)` tabulated on `[-t_tab, t_tab]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    t_tab: f64,
    h_tab: f64,
    table: Vec<f64>,
    truncation_bound: f64,
}

impl BumpProfile {
    /// Tabulates `phi` by a fine inverse transform: the frequency lattice has
    /// spacing `1/(4 t_tab)`, so the periodic images of `phi` sit `4 t_tab`
    /// apart, and `truncation_bound` is the largest `|phi|` seen on
    /// `t_tab < |t| ≤ 2 t_tab`.
    pub fn new(t_tab: f64, h_tab: f64) -> Result<Self> {
        if !(t_tab > 0.0 && h_tab > 0.0 && h_tab < t_tab) {
            return Err(Error::invalid("bump", format!("bad table geometry T={t_tab}, h={h_tab}")));
        }
        let period = 4.0 * t_tab;
        let n = (period / h_tab).round() as usize;
        let grid = Grid::new(period, n)?;
        let spectrum: Vec<Complex64> = (0..n).map(|i| Complex64::new(phihat(grid.freq(i)), 0.0)).collect();
        let phi = inverse_ft(&GridFunction::new(grid, Side::Frequency, spectrum)?)?;
        let half = (t_tab / h_tab).round() as usize;
        let center = n / 2;
        let table: Vec<f64> = (center - half..=center + half).map(|k| phi.values[k].re).collect();
        let truncation_bound = phi
            .values
            .iter()
            .enumerate()
            .filter(|(k, _)| k.abs_diff(center) > half)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
        if truncation_bound > TRUNCATION_LIMIT {
            return Err(Error::Tabulation {
                bound: truncation_bound,
                limit: TRUNCATION_LIMIT,
            });
        }
        Ok(Self {
            t_tab,
            h_tab,
            table,
            truncation_bound,
        })
    }

    pub fn t_tab(&self) -> f64 {
        self.t_tab
    }

    pub fn h_tab(&self) -> f64 {
        self.h_tab
    }

    pub fn truncation_bound(&self) -> f64 {
        self.truncation_bound
    }

    pub fn phihat(&self, xi: f64) -> f64 {
        phihat(xi)
    }

    /// `phi(t)` by four-point Lagrange interpolation; zero beyond the table.
    pub fn phi(&self, t: f64) -> f64 {
        let s = (t + self.t_tab) / self.h_tab;
        let last = self.table.len() - 1;
        if !(s >= 0.0 && s <= last as f64) {
            return 0.0;
        }
        let i = (s.floor() as usize).clamp(1, last.saturating_sub(2));
        let u = s - i as f64;
        let p = [self.table[i - 1], self.table[i], self.table[i + 1], self.table[i + 2]];
        // nodes at -1, 0, 1, 2 relative to i
        let w0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
        let w1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
        let w2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
        let w3 = (u + 1.0) * u * (u - 1.0) / 6.0;
        w0 * p[0] + w1 * p[1] + w2 * p[2] + w3 * p[3]
    }

    /// `phi_j(t) = 2^j phi(2^j t)`, whose transform is `phihat(2^{-j} xi)`.
    pub fn phi_j(&self, j: i32, t: f64) -> f64 {
        let s = 2f64.powi(j);
        s * self.phi(s * t)
    }

    /// Smallest `r` with `|phi(t)| ≤ threshold` for all tabulated `|t| ≥ r`.
    pub fn support_radius(&self, threshold: f64) -> f64 {
        let half = (self.table.len() - 1) / 2;
        let far = (0..=half)
            .rev()
            .find(|&d| self.table[half + d].abs() > threshold || self.table[half - d].abs() > threshold)
            .map_or(0, |d| d + 1);
        (far as f64 * self.h_tab).min(self.t_tab)
    }

    /// Trapezoid sum of the table, approximating `phihat(0) = 1`.
    pub fn integral(&self) -> f64 {
        let n = self.table.len();
        let inner: f64 = self.table[1..n - 1].iter().sum();
        self.h_tab * (inner + 0.5 * (self.table[0] + self.table[n - 1]))
    }

    /// `(t, phi(t))` for every table node.
    pub fn table_rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.table
            .iter()
            .enumerate()
            .map(|(k, &v)| (-self.t_tab + k as f64 * self.h_tab, v))
    }
}

/// The standard bump: table on `[-64, 64]` with spacing `2^{-10}`.
pub fn make_bump() -> Result<BumpProfile> {
    BumpProfile::new(64.0, 1.0 / 1024.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, QuadOptions};

    #[test]
    fn step_values() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(0.5), 0.5);
        assert_eq!(smooth_step(2.0), 1.0);
        let mut prev = 0.0;
        for i in 0..=1000 {
            let v = smooth_step(i as f64 / 1000.0);
            assert!(v >= prev);
            prev = v;
        }
        assert!((smooth_step(0.3) + smooth_step(0.7) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn profile_shape() {
        assert_eq!(phihat(0.5), 1.0);
        assert_eq!(phihat(-1.0), 1.0);
        assert_eq!(phihat(3.0), 0.0);
        assert_eq!(phihat(2.0), 0.0);
        assert!(phihat(1.5) > 0.0 && phihat(1.5) < 1.0);
    }

    #[test]
    fn tabulated_bump() {
        let b = make_bump().unwrap();
        assert!(b.truncation_bound() <= TRUNCATION_LIMIT);
        assert!((b.integral() - 1.0).abs() < 1e-8);
        // phi(0) = ∫ phihat, computed independently by quadrature
        let opts = QuadOptions {
            tol: 1e-13,
            ..QuadOptions::default()
        };
        let mass = 2.0 + 2.0 * integrate(phihat, 1.0, 2.0, &opts).value;
        assert!((b.phi(0.0) - mass).abs() < 1e-9);
        assert!(mass > 2.0 && mass < 4.0);
        // phi(t) = 2 ∫_0^2 phihat(xi) cos(2 pi xi t) dxi at an off-node point
        let t = 0.3711;
        let direct = 2.0
            * integrate(|xi| phihat(xi) * (2.0 * std::f64::consts::PI * xi * t).cos(), 0.0, 2.0, &opts).value;
        assert!((b.phi(t) - direct).abs() < 1e-8);
        assert_eq!(b.phi(100.0), 0.0);
        assert!(b.support_radius(1e-12) < 64.0);
    }
}
