use serde::{Deserialize, Serialize};

use super::grid::{Grid, Side};
use crate::sets::IntervalSet;

/// 0/1 membership vector over one side of a grid.
///
/// Entry `i` is set iff the midpoint of cell `i` (the cell starting at
/// lattice point `i`) lies in the set. Sets are not wrapped: anything outside
/// the lattice range is dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mask {
    pub side: Side,
    pub bits: Vec<bool>,
    /// Number of intervals shorter than two cells.
    pub unresolved: usize,
    /// `|measure(S ∩ range) - spacing · count|`; at most two cells per
    /// interval.
    pub measure_discrepancy: f64,
}

impl Mask {
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Sampled measure `spacing · count`.
    pub fn measure(&self, grid: &Grid) -> f64 {
        grid.spacing(self.side) * self.count() as f64
    }
}

pub fn sample_mask(grid: &Grid, set: &IntervalSet, side: Side) -> Mask {
    let n = grid.n();
    let d = grid.spacing(side);
    let origin = grid.origin(side);
    let end = origin + n as f64 * d;
    let mut bits = vec![false; n];
    let mut unresolved = 0;
    for iv in set.items() {
        if iv.hi() < origin || iv.lo() > end {
            continue;
        }
        if iv.len() < 2.0 * d {
            unresolved += 1;
        }
        // candidate index range, widened by one and settled by direct comparison
        let first = ((iv.lo() - origin) / d - 0.5).ceil() as i64 - 1;
        let last = ((iv.hi() - origin) / d - 0.5).floor() as i64 + 1;
        for i in first.max(0)..=last.min(n as i64 - 1) {
            let i = i as usize;
            if iv.contains(grid.cell_center(side, i)) {
                bits[i] = true;
            }
        }
    }
    let covered = set.overlap_measure(origin, end);
    let count = bits.iter().filter(|&&b| b).count();
    Mask {
        side,
        bits,
        unresolved,
        measure_discrepancy: (covered - d * count as f64).abs(),
    }
}
