use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::interval::{Interval, IntervalSet};
use super::rho;
use crate::error::{Error, Result};

type WindowFn = dyn Fn(f64) -> IntervalSet + Send + Sync;
type BoundFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A possibly unbounded subset of the line, materialized on demand.
///
/// `window(w)` returns the family intersected with `[-w, w]`. Families whose
/// behaviour at infinity is known analytically carry a `tail_bound`: an upper
/// bound on `sup_{|x| > r}` of the thinness ratio of the whole family.
#[derive(Clone)]
pub struct SetFamily {
    label: String,
    window: Arc<WindowFn>,
    tail_bound: Option<Arc<BoundFn>>,
    support: Option<f64>,
}

impl fmt::Debug for SetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetFamily")
            .field("label", &self.label)
            .field("support", &self.support)
            .field("tail_bound", &self.tail_bound.is_some())
            .finish()
    }
}

impl SetFamily {
    pub fn new(
        label: impl Into<String>,
        window: impl Fn(f64) -> IntervalSet + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            window: Arc::new(window),
            tail_bound: None,
            support: None,
        }
    }

    pub fn with_tail_bound(mut self, bound: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.tail_bound = Some(Arc::new(bound));
        self
    }

    /// Declares the family to lie inside `[-radius, radius]`.
    pub fn with_support(mut self, radius: f64) -> Self {
        self.support = Some(radius);
        self
    }

    /// A bounded family consisting of a fixed interval set.
    pub fn from_set(label: impl Into<String>, set: IntervalSet) -> Self {
        let radius = set.extent().map_or(0.0, |(lo, hi)| lo.abs().max(hi.abs()));
        Self::new(label, move |w| set.clip(-w, w)).with_support(radius)
    }

    pub fn empty() -> Self {
        Self::from_set("empty", IntervalSet::empty())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn window(&self, w: f64) -> IntervalSet {
        (self.window)(w)
    }

    pub fn tail_bound(&self, r: f64) -> Option<f64> {
        self.tail_bound.as_ref().map(|b| b(r))
    }

    pub fn support(&self) -> Option<f64> {
        self.support
    }

    /// True when `window(w)` is the whole family.
    pub fn is_complete_within(&self, w: f64) -> bool {
        self.support.is_some_and(|s| s <= w)
    }

    /// Blobs `B(n², rho(n²))` for `n ≥ 1`: finite measure, yet the thinness
    /// ratio equals one at every center.
    pub fn e1() -> Self {
        Self::new("E1", |w| {
            let mut items = Vec::new();
            for n in 1u64.. {
                let c = (n * n) as f64;
                let iv = Interval::ball(c, rho(c));
                if iv.lo() > w {
                    break;
                }
                items.push(iv);
            }
            IntervalSet::from_intervals(items).clip(-w, w)
        })
        .with_tail_bound(|_| 1.0)
    }

    /// Blobs `B(n + 1, eta(n + 1))` for `n ≥ 1` with
    /// `eta(x) = min(1, 1/(|x| log|x|))`: infinite measure, thin at infinity.
    pub fn e2() -> Self {
        Self::new("E2", |w| {
            let mut items = Vec::new();
            for n in 1u64.. {
                let c = (n + 1) as f64;
                let iv = Interval::ball(c, eta(c));
                if iv.lo() > w {
                    break;
                }
                items.push(iv);
            }
            IntervalSet::from_intervals(items).clip(-w, w)
        })
        .with_tail_bound(e2_tail_bound)
    }

    /// Dyadic comb: inside `2^k ≤ |x| < 2^{k+1}` the annulus is tiled by cells
    /// of length `2^{-k}` starting from its left end, and the left
    /// `eps_target` fraction of each cell is kept; `[-1, 1]` uses unit cells.
    /// The comb is cut off at `|x| ≤ extent`.
    ///
    /// This is only approximately `eps_target`-thin; measure the actual
    /// thinness with [`thin_profile`](super::thin_profile).
    pub fn comb(eps_target: f64, extent: f64) -> Result<Self> {
        if !(eps_target > 0.0 && eps_target < 1.0) {
            return Err(Error::invalid("eps_target", format!("must lie in (0, 1), got {eps_target}")));
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::invalid("extent", format!("must be positive, got {extent}")));
        }
        let full = comb_set(eps_target, extent);
        Ok(Self::new(format!("comb({eps_target})"), move |w| full.clip(-w, w)).with_support(extent))
    }
}

/// `min(1, 1/(|x| log|x|))`, clamped to 1 where the logarithm is not positive.
pub fn eta(x: f64) -> f64 {
    let a = x.abs();
    let d = a * a.ln();
    if d <= 1.0 {
        1.0
    } else {
        1.0 / d
    }
}

/// Upper bound on `sup_{|x| > r}` of the E2 thinness ratio.
///
/// For `|x| ≥ 4` the ball `B(x, 1/|x|)` is shorter than every gap between
/// consecutive blobs, so it meets at most one blob `B(c, eta(c))` and the
/// ratio is at most `|x| eta(c)` with `c ≥ |x| - 1/|x| - eta(|x| - 1)`. The
/// resulting bound decreases in `|x|`. It exceeds `1/log r` slightly: the
/// ratio near the blob centred at `c` peaks at about `(1 + 1/c²)/log c`.
pub fn e2_tail_bound(r: f64) -> f64 {
    if r < 4.0 {
        return 1.0;
    }
    let c_min = r - 1.0 / r - eta(r - 1.0);
    (r / (c_min * c_min.ln())).min(1.0)
}

fn comb_set(eps: f64, extent: f64) -> IntervalSet {
    let mut items = Vec::new();
    let mut push_annulus = |start: f64, end: f64, cell: f64| {
        let n_cells = ((end - start) / cell).round() as u64;
        for i in 0..n_cells {
            let lo = start + i as f64 * cell;
            items.push(Interval::new(lo, lo + eps * cell).expect("finite comb cell"));
        }
    };
    push_annulus(-1.0, 0.0, 1.0);
    push_annulus(0.0, 1.0, 1.0);
    let mut k = 0;
    while (2.0f64).powi(k) < extent {
        let inner = 2.0f64.powi(k);
        let outer = 2.0 * inner;
        let cell = 1.0 / inner;
        push_annulus(-outer, -inner, cell);
        push_annulus(inner, outer, cell);
        k += 1;
    }
    IntervalSet::from_intervals(items).clip(-extent, extent)
}

/// JSON description of a set:
/// `{"type":"intervals","items":[[lo,hi],...]}` or
/// `{"type":"family","name":"E1"|"E2"|"comb","params":{...},"window":W}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SetDescriptor {
    Intervals {
        items: Vec<[f64; 2]>,
    },
    Family {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
        window: f64,
    },
}

impl SetDescriptor {
    /// The family together with the window it should be materialized on.
    pub fn resolve(&self) -> Result<(SetFamily, f64)> {
        match self {
            SetDescriptor::Intervals { items } => {
                let set = IntervalSet::from_pairs(items)?;
                let family = SetFamily::from_set("intervals", set);
                let w = family.support().unwrap_or(0.0);
                Ok((family, w))
            }
            SetDescriptor::Family { name, params, window } => {
                if !(*window > 0.0 && window.is_finite()) {
                    return Err(Error::invalid("window", format!("must be positive, got {window}")));
                }
                let family = match name.as_str() {
                    "E1" => SetFamily::e1(),
                    "E2" => SetFamily::e2(),
                    "comb" => {
                        let eps = *params
                            .get("eps")
                            .ok_or_else(|| Error::invalid("params", "comb requires `eps`"))?;
                        let extent = params.get("extent").copied().unwrap_or(*window);
                        SetFamily::comb(eps, extent)?
                    }
                    other => return Err(Error::UnknownFamily(other.to_string())),
                };
                Ok((family, *window))
            }
        }
    }

    pub fn materialize(&self) -> Result<IntervalSet> {
        let (family, w) = self.resolve()?;
        Ok(family.window(w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_windows() {
        let e1 = SetFamily::e1();
        let w = e1.window(110.0);
        assert_eq!(w.items()[0], Interval::new(0.0, 2.0).unwrap());
        assert_eq!(w.len(), 10);
        // oracle: direct summation of 2/n²
        let expected: f64 = (1..=10).map(|n| 2.0 / (n * n) as f64).sum();
        assert!((w.measure() - expected).abs() < 1e-12);
    }

    #[test]
    fn e2_first_blob() {
        let w = SetFamily::e2().window(2.5);
        let r = 1.0 / (2.0 * 2f64.ln());
        assert!((r - 0.72135).abs() < 1e-5);
        assert!((eta(2.0) - r).abs() < 1e-15);
        // the n = 1 and n = 2 blobs overlap and merge
        assert!((w.items()[0].lo() - (2.0 - r)).abs() < 1e-15);
    }

    #[test]
    fn eta_clamps() {
        assert_eq!(eta(1.0), 1.0);
        assert_eq!(eta(0.5), 1.0);
        assert_eq!(eta(-2.0), eta(2.0));
    }

    #[test]
    fn windows_nest() {
        for family in [SetFamily::e1(), SetFamily::e2(), SetFamily::comb(0.1, 64.0).unwrap()] {
            let big = family.window(50.0);
            let small = family.window(20.0);
            let clipped = big.clip(-20.0, 20.0);
            assert_eq!(clipped.len(), small.len());
            assert!((clipped.measure() - small.measure()).abs() < 1e-12);
        }
    }

    #[test]
    fn comb_density() {
        let comb = SetFamily::comb(0.1, 8.0).unwrap();
        let s = comb.window(8.0);
        // each annulus keeps a tenth of its length
        assert!((s.measure() - 1.6).abs() < 1e-12);
        assert!((s.overlap_measure(4.0, 8.0) - 0.4).abs() < 1e-12);
        assert!(comb.is_complete_within(8.0));
        assert!(SetFamily::comb(1.5, 8.0).is_err());
        assert!(SetFamily::comb(0.1, -1.0).is_err());
    }

    #[test]
    fn e2_tail_bound_is_above_sampled_ratio() {
        let s = SetFamily::e2().window(200.0);
        for r in [4.0, 10.0, 50.0] {
            let bound = e2_tail_bound(r);
            let mut x = r;
            while x < 190.0 {
                assert!(super::super::thinness_ratio(&s, x) <= bound, "x={x}");
                x += 1e-4 * rho(x);
            }
        }
    }

    #[test]
    fn descriptors() {
        let d: SetDescriptor =
            serde_json::from_str(r#"{"type":"intervals","items":[[-1,1],[3,4]]}"#).unwrap();
        assert!((d.materialize().unwrap().measure() - 3.0).abs() < 1e-15);
        let d: SetDescriptor =
            serde_json::from_str(r#"{"type":"family","name":"comb","params":{"eps":0.1},"window":4}"#)
                .unwrap();
        assert!(d.materialize().unwrap().len() > 10);
        let d: SetDescriptor =
            serde_json::from_str(r#"{"type":"family","name":"E7","window":4}"#).unwrap();
        assert!(matches!(d.resolve(), Err(Error::UnknownFamily(_))));
        assert!(serde_json::from_str::<SetDescriptor>(r#"{"type":"blob"}"#).is_err());
    }
}
