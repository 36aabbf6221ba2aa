use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` of the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid("interval", format!("non-finite endpoint in [{lo}, {hi}]")));
        }
        if lo > hi {
            return Err(Error::invalid("interval", format!("lo > hi in [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// The ball `B(center, radius)`, i.e. `[center - radius, center + radius]`.
    pub fn ball(center: f64, radius: f64) -> Self {
        debug_assert!(radius >= 0.0);
        Self {
            lo: center - radius,
            hi: center + radius,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Length of the overlap with `[lo, hi]`.
    pub fn overlap(&self, lo: f64, hi: f64) -> f64 {
        (self.hi.min(hi) - self.lo.max(lo)).max(0.0)
    }
}

/// Finite union of closed intervals in canonical form: sorted by `lo`, with
/// `prev.hi < next.lo` for consecutive items and no zero-length items.
///
/// Boundary points are irrelevant to every functional in this crate (they are
/// all Lebesgue measures), so the pieces produced by [`truncate`](Self::truncate)
/// and [`tail`](Self::tail) are allowed to share the endpoints `±R`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<[f64; 2]>", try_from = "Vec<[f64; 2]>")]
pub struct IntervalSet {
    items: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(lo: f64, hi: f64) -> Result<Self> {
        Ok(Self::from_intervals([Interval::new(lo, hi)?]))
    }

    /// Canonicalizes an arbitrary collection: sorts, merges overlapping or
    /// touching intervals and drops zero-length ones.
    pub fn from_intervals(items: impl IntoIterator<Item = Interval>) -> Self {
        let mut v: Vec<Interval> = items.into_iter().filter(|i| !i.is_degenerate()).collect();
        v.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for iv in v {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => out.push(iv),
            }
        }
        Self { items: out }
    }

    /// Builds from `[lo, hi]` pairs, rejecting malformed pairs.
    pub fn from_pairs(pairs: &[[f64; 2]]) -> Result<Self> {
        let items = pairs
            .iter()
            .map(|&[lo, hi]| Interval::new(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_intervals(items))
    }

    pub fn items(&self) -> &[Interval] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Smallest and largest point of the set.
    pub fn extent(&self) -> Option<(f64, f64)> {
        Some((self.items.first()?.lo, self.items.last()?.hi))
    }

    pub fn measure(&self) -> f64 {
        self.items.iter().map(Interval::len).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        let idx = self.items.partition_point(|iv| iv.hi < x);
        self.items.get(idx).is_some_and(|iv| iv.lo <= x)
    }

    /// Exact measure of `S ∩ [lo, hi]`.
    pub fn overlap_measure(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let start = self.items.partition_point(|iv| iv.hi <= lo);
        self.items[start..]
            .iter()
            .take_while(|iv| iv.lo < hi)
            .map(|iv| iv.overlap(lo, hi))
            .sum()
    }

    /// Measure of `S ∩ [x - r, x + r]`.
    pub fn intersect_ball(&self, x: f64, r: f64) -> f64 {
        let ball = Interval::ball(x, r);
        self.overlap_measure(ball.lo, ball.hi)
    }

    /// `S ∩ [lo, hi]`.
    pub fn clip(&self, lo: f64, hi: f64) -> Self {
        if hi <= lo {
            return Self::empty();
        }
        let start = self.items.partition_point(|iv| iv.hi <= lo);
        let items = self.items[start..]
            .iter()
            .take_while(|iv| iv.lo < hi)
            .map(|iv| Interval {
                lo: iv.lo.max(lo),
                hi: iv.hi.min(hi),
            })
            .filter(|iv| !iv.is_degenerate())
            .collect();
        Self { items }
    }

    /// `S ∩ [-r, r]`.
    pub fn truncate(&self, r: f64) -> Result<Self> {
        check_radius(r)?;
        Ok(self.clip(-r, r))
    }

    /// `S \ [-r, r]`, stored with closed pieces that may touch `±r`.
    pub fn tail(&self, r: f64) -> Result<Self> {
        check_radius(r)?;
        let items = self
            .items
            .iter()
            .flat_map(|iv| {
                let left = Interval {
                    lo: iv.lo,
                    hi: iv.hi.min(-r),
                };
                let right = Interval {
                    lo: iv.lo.max(r),
                    hi: iv.hi,
                };
                [left, right]
            })
            .filter(|iv| !iv.is_degenerate())
            .collect();
        Ok(Self { items })
    }

    /// The dilation `lam * S`.
    pub fn scale(&self, lam: f64) -> Result<Self> {
        if !(lam > 0.0 && lam.is_finite()) {
            return Err(Error::invalid("lam", format!("scale factor must be positive, got {lam}")));
        }
        let items = self
            .items
            .iter()
            .map(|iv| Interval {
                lo: lam * iv.lo,
                hi: lam * iv.hi,
            })
            .collect();
        Ok(Self::from_intervals_sorted(items))
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_intervals(self.items.iter().chain(other.items.iter()).copied())
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.items.len() && j < other.items.len() {
            let (a, b) = (self.items[i], other.items[j]);
            let lo = a.lo.max(b.lo);
            let hi = a.hi.min(b.hi);
            if lo < hi {
                out.push(Interval { lo, hi });
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_intervals_sorted(out)
    }

    fn from_intervals_sorted(items: Vec<Interval>) -> Self {
        // Inputs already sorted and disjoint up to rounding; re-run the merge
        // so that `prev.hi < next.lo` survives floating-point scaling.
        Self::from_intervals(items)
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && !r.is_nan() {
        Ok(())
    } else {
        Err(Error::invalid("R", format!("radius must be positive, got {r}")))
    }
}

impl From<IntervalSet> for Vec<[f64; 2]> {
    fn from(s: IntervalSet) -> Self {
        s.items.iter().map(|iv| [iv.lo, iv.hi]).collect()
    }
}

impl TryFrom<Vec<[f64; 2]>> for IntervalSet {
    type Error = Error;

    fn try_from(pairs: Vec<[f64; 2]>) -> Result<Self> {
        Self::from_pairs(&pairs)
    }
}
