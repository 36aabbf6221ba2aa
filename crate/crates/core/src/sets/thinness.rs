use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::family::SetFamily;
use super::interval::{Interval, IntervalSet};
use super::rho;
use crate::error::{Error, Result};

/// `|S ∩ B(x, rho(x))| / |B(x, rho(x))|`.
///
/// The ball length is taken from the same floating-point endpoints that are
/// intersected with `S`, so a ball that coincides with a component of `S`
/// has ratio exactly one.
pub fn thinness_ratio(s: &IntervalSet, x: f64) -> f64 {
    let ball = Interval::ball(x, rho(x));
    (s.overlap_measure(ball.lo(), ball.hi()) / ball.len()).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    #[serde(rename = "R")]
    pub r: f64,
    pub theta: f64,
    #[serde(rename = "err")]
    pub certified_error: f64,
    /// Point where the sampled supremum was attained, if any.
    pub witness: Option<f64>,
    /// True when part of the region `|x| > R` could not be searched and no
    /// analytic tail bound was available.
    pub widened: bool,
}

/// `theta(R) = sup_{|x| > R}` of the thinness ratio, for a list of radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThinnessProfile {
    pub label: String,
    pub window: f64,
    pub tol: f64,
    pub entries: Vec<ProfileEntry>,
}

/// Outcome of an ε-thinness test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum ThinVerdict {
    /// The supremum over all `x` is below `eps`; `upper` is a certified bound.
    Thin { upper: f64, margin: f64 },
    /// `witness` has ratio at least `eps`.
    NotThin { witness: f64, ratio: f64 },
    /// Neither could be certified.
    Unknown {
        lower: f64,
        upper: Option<f64>,
        witness: Option<f64>,
    },
}

/// Result of the rescaled-tail ball supremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallEstimate {
    pub sup: f64,
    pub witness: Option<f64>,
    pub certified_error: f64,
}

/// Covering constant in `|R E_tail ∩ B(x,1)| ≤ C · sup_{|z| ≥ R-1} ratio(E, z)`,
/// valid on the line for `R ≥ 2`.
pub const BALL_COVER_CONSTANT: f64 = 8.0;

#[derive(Debug, Clone, Copy)]
struct SupResult {
    value: f64,
    argmax: Option<f64>,
}

impl SupResult {
    const NONE: Self = Self {
        value: 0.0,
        argmax: None,
    };

    fn merge(self, other: Self) -> Self {
        if other.value > self.value {
            other
        } else {
            self
        }
    }
}

/// `u(x) = x - rho(x)` is strictly increasing; returns `u^{-1}(b)`.
fn left_edge_inverse(b: f64) -> f64 {
    if b < -2.0 {
        0.5 * (b - (b * b - 4.0).sqrt())
    } else if b <= 0.0 {
        b + 1.0
    } else {
        0.5 * (b + (b * b + 4.0).sqrt())
    }
}

/// `v(x) = x + rho(x)` is strictly increasing; returns `v^{-1}(a)`.
fn right_edge_inverse(a: f64) -> f64 {
    if a < 0.0 {
        0.5 * (a - (a * a + 4.0).sqrt())
    } else if a <= 2.0 {
        a - 1.0
    } else {
        0.5 * (a + (a * a - 4.0).sqrt())
    }
}

/// Largest `x ≥ 0` whose ball `B(x, rho(x))` stays inside `[-w, w]`.
fn innermost_complete(w: f64) -> f64 {
    right_edge_inverse(w).max(0.0)
}

/// Sampled supremum of the thinness ratio of `s` over the closed ranges in
/// `domain`.
///
/// Only points whose ball meets `s` are visited. The spacing at `x` is at
/// most `tol · rho(x) / 4`; since the ratio is `2/rho`-Lipschitz the sampled
/// maximum is within `tol / 2` of the true supremum. Local maxima are then
/// polished by golden-section search, and interval endpoints, centers and
/// the points where a ball edge meets a set endpoint are evaluated directly.
fn sampled_sup(s: &IntervalSet, domain: &[(f64, f64)], tol: f64) -> SupResult {
    let mut active: Vec<(f64, f64)> = Vec::new();
    for iv in s.items() {
        let lo = right_edge_inverse(iv.lo());
        let hi = left_edge_inverse(iv.hi());
        match active.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => active.push((lo, hi)),
        }
    }
    let mut ranges = Vec::new();
    for &(dlo, dhi) in domain {
        for &(alo, ahi) in &active {
            let lo = alo.max(dlo);
            let hi = ahi.min(dhi);
            if lo <= hi {
                ranges.push((lo, hi));
            }
        }
    }
    let results: Vec<SupResult> = ranges
        .par_iter()
        .map(|&(lo, hi)| range_sup(s, lo, hi, tol))
        .collect();
    results.into_iter().fold(SupResult::NONE, SupResult::merge)
}

fn range_sup(s: &IntervalSet, lo: f64, hi: f64, tol: f64) -> SupResult {
    let eval = |x: f64| SupResult {
        value: thinness_ratio(s, x),
        argmax: Some(x),
    };
    let mut best = SupResult::NONE;

    // structural candidates: endpoints, centers and ball-edge contacts
    let first = s.items().partition_point(|iv| iv.hi() < lo - 2.0);
    for iv in s.items()[first..].iter().take_while(|iv| iv.lo() <= hi + 2.0) {
        for x in [
            iv.lo(),
            iv.hi(),
            iv.center(),
            left_edge_inverse(iv.lo()),
            left_edge_inverse(iv.hi()),
            right_edge_inverse(iv.lo()),
            right_edge_inverse(iv.hi()),
        ] {
            if (lo..=hi).contains(&x) {
                best = best.merge(eval(x));
            }
        }
    }

    let mut xs = Vec::new();
    let mut x = lo;
    loop {
        xs.push(x);
        if x >= hi {
            break;
        }
        let step = 0.25 * tol * rho(x.abs() + tol);
        x = (x + step).min(hi);
    }
    let vals: Vec<f64> = xs.iter().map(|&x| thinness_ratio(s, x)).collect();
    for i in 0..xs.len() {
        let left = if i > 0 { vals[i - 1] } else { f64::NEG_INFINITY };
        let right = vals.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
        if vals[i] > 0.0 && vals[i] >= left && vals[i] >= right {
            best = best.merge(SupResult {
                value: vals[i],
                argmax: Some(xs[i]),
            });
            let a = if i > 0 { xs[i - 1] } else { xs[i] };
            let b = xs.get(i + 1).copied().unwrap_or(xs[i]);
            if b > a {
                best = best.merge(golden_max(|x| thinness_ratio(s, x), a, b));
            }
        }
    }
    best
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> SupResult {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if b - a <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let (x, v) = if fc >= fd { (c, fc) } else { (d, fd) };
    SupResult {
        value: v,
        argmax: Some(x),
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("tol", format!("must be positive, got {tol}")))
    }
}

/// `theta(R) = sup_{|x| > R}` of the thinness ratio of `family`, for every
/// `R` in `radii`, searching the family materialized on `[-window, window]`.
///
/// Beyond the materialized window the family's analytic tail bound is used;
/// a family without one gets its `certified_error` widened to cover the
/// unsearched region and the entry is flagged `widened`.
pub fn thin_profile(family: &SetFamily, window: f64, radii: &[f64], tol: f64) -> Result<ThinnessProfile> {
    check_tol(tol)?;
    if radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::invalid("R", "radii must be positive and finite"));
    }
    if radii.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::invalid("R", "radii must be strictly increasing"));
    }
    let s = family.window(window);
    let complete = family.is_complete_within(window);
    let known = if complete {
        f64::INFINITY
    } else {
        innermost_complete(window)
    };

    let mut entries: Vec<ProfileEntry> = radii
        .iter()
        .map(|&r| {
            let sampled = if r < known {
                sampled_sup(&s, &[(-known, -r), (r, known)], tol)
            } else {
                SupResult::NONE
            };
            let (theta, err, widened) = if complete {
                (sampled.value, 0.5 * tol, false)
            } else if let Some(b) = family.tail_bound(r.max(known)) {
                if b > sampled.value {
                    (b, (b - sampled.value).max(0.5 * tol), false)
                } else {
                    (sampled.value, 0.5 * tol, false)
                }
            } else {
                (sampled.value, (1.0 - sampled.value).max(0.5 * tol), true)
            };
            ProfileEntry {
                r,
                theta,
                certified_error: err,
                witness: sampled.argmax,
                widened,
            }
        })
        .collect();

    // theta is a sup over shrinking regions; both values are valid estimates,
    // so carry the larger one inward.
    for i in (0..entries.len().saturating_sub(1)).rev() {
        if entries[i + 1].theta > entries[i].theta {
            entries[i].theta = entries[i + 1].theta;
            entries[i].certified_error = entries[i + 1].certified_error;
            entries[i].witness = entries[i + 1].witness;
        }
    }

    Ok(ThinnessProfile {
        label: family.label().to_string(),
        window,
        tol,
        entries,
    })
}

/// `sup_x` of the thinness ratio over the whole line, reported as a profile
/// entry with `R = 0`. This is the measured `eps` of an `eps`-thin set.
pub fn sup_thinness(family: &SetFamily, window: f64, tol: f64) -> Result<ProfileEntry> {
    check_tol(tol)?;
    if !(window > 0.0) {
        return Err(Error::invalid("window", "must be positive"));
    }
    let s = family.window(window);
    let complete = family.is_complete_within(window);
    let known = if complete {
        family.support().unwrap_or(0.0) + 1.0
    } else {
        innermost_complete(window)
    };
    let sampled = sampled_sup(&s, &[(-known, known)], tol);
    let (theta, err, widened) = if complete {
        (sampled.value, 0.5 * tol, false)
    } else {
        match family.tail_bound(known) {
            Some(b) if b > sampled.value => (b, (b - sampled.value).max(0.5 * tol), false),
            Some(_) => (sampled.value, 0.5 * tol, false),
            None => (sampled.value, (1.0 - sampled.value).max(0.5 * tol), true),
        }
    };
    Ok(ProfileEntry {
        r: 0.0,
        theta,
        certified_error: err,
        witness: sampled.argmax,
        widened,
    })
}

/// Decides whether `sup_x ratio(x) < eps` over the whole line.
pub fn is_eps_thin(family: &SetFamily, eps: f64, window: f64, tol: f64) -> Result<ThinVerdict> {
    check_tol(tol)?;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid("eps", format!("must lie in (0, 1], got {eps}")));
    }
    if !(window > 0.0) {
        return Err(Error::invalid("window", "must be positive"));
    }
    let s = family.window(window);
    let complete = family.is_complete_within(window);
    let known = if complete {
        family.support().unwrap_or(0.0) + 1.0
    } else {
        innermost_complete(window)
    };
    let sampled = sampled_sup(&s, &[(-known, known)], tol);
    if sampled.value >= eps {
        return Ok(ThinVerdict::NotThin {
            witness: sampled.argmax.expect("positive ratio has a witness"),
            ratio: sampled.value,
        });
    }
    let upper = if complete {
        Some(sampled.value + 0.5 * tol)
    } else {
        family
            .tail_bound(known)
            .map(|b| b.max(sampled.value + 0.5 * tol))
    };
    match upper {
        Some(u) if u < eps => Ok(ThinVerdict::Thin {
            upper: u,
            margin: eps - u,
        }),
        _ => Ok(ThinVerdict::Unknown {
            lower: sampled.value,
            upper,
            witness: sampled.argmax,
        }),
    }
}

/// `sup_x |R · (E \ [-R, R]) ∩ B(x, 1)|` for the family materialized on
/// `[-window, window]`.
///
/// The measure is piecewise linear in `x` with kinks where `x ± 1` crosses an
/// endpoint of the rescaled tail, so the supremum is attained at one of those
/// finitely many points and is evaluated exactly there (`tol` only validates
/// the call). Only `|x| ≥ R² - 1` can contribute. When the family extends
/// beyond the window the part that could not be searched is bounded by
/// [`BALL_COVER_CONSTANT`] times the family's tail bound, if it has one.
pub fn ball_estimate_sup(family: &SetFamily, r: f64, window: f64, tol: f64) -> Result<BallEstimate> {
    check_tol(tol)?;
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::invalid("R", format!("must exceed 1, got {r}")));
    }
    let tail = family.window(window).tail(r)?.scale(r)?;
    let measure_at = |x: f64| tail.intersect_ball(x, 1.0);
    let mut best = SupResult::NONE;
    for iv in tail.items() {
        for x in [iv.lo() - 1.0, iv.lo() + 1.0, iv.hi() - 1.0, iv.hi() + 1.0] {
            best = best.merge(SupResult {
                value: measure_at(x),
                argmax: Some(x),
            });
        }
    }
    let certified_error = if family.is_complete_within(window) {
        0.0
    } else {
        match family.tail_bound(window - 1.0) {
            Some(b) if r >= 2.0 => (BALL_COVER_CONSTANT * b).min(2.0) - best.value,
            _ => 2.0 - best.value,
        }
        .max(0.0)
    };
    Ok(BallEstimate {
        sup: best.value,
        witness: best.argmax,
        certified_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(pairs: &[[f64; 2]]) -> IntervalSet {
        IntervalSet::from_pairs(pairs).unwrap()
    }

    #[test]
    fn ratio_basics() {
        assert_eq!(thinness_ratio(&IntervalSet::empty(), 3.0), 0.0);
        assert_eq!(thinness_ratio(&set(&[[-100.0, 100.0]]), 0.0), 1.0);
        let e1 = SetFamily::e1().window(50.0);
        assert_eq!(e1.intersect_ball(4.0, rho(4.0)), 0.5);
        for n in 1..=7u32 {
            let c = f64::from(n * n);
            assert_eq!(thinness_ratio(&e1, c), 1.0, "n={n}");
        }
    }

    #[test]
    fn edge_inverses() {
        for x in [-7.0, -2.0, -1.0, -0.3, 0.0, 0.5, 1.0, 3.0, 40.0] {
            let u = x - rho(x);
            let v = x + rho(x);
            assert!((left_edge_inverse(u) - x).abs() < 1e-12, "u at {x}");
            assert!((right_edge_inverse(v) - x).abs() < 1e-12, "v at {x}");
        }
    }

    #[test]
    fn profile_of_bounded_set_vanishes_outside() {
        let fam = SetFamily::from_set("unit", set(&[[-1.0, 1.0]]));
        let p = thin_profile(&fam, 1.0, &[0.5, 3.0], 1e-3).unwrap();
        assert_eq!(p.entries[1].theta, 0.0);
        assert!(p.entries[0].theta > 0.5);
        let empty = thin_profile(&SetFamily::empty(), 1.0, &[1.0], 1e-3).unwrap();
        assert_eq!(empty.entries[0].theta, 0.0);
    }

    #[test]
    fn profile_rejects_bad_input() {
        let fam = SetFamily::e2();
        assert!(thin_profile(&fam, 100.0, &[10.0], 0.0).is_err());
        assert!(thin_profile(&fam, 100.0, &[10.0, 5.0], 1e-3).is_err());
        assert!(thin_profile(&fam, 100.0, &[-1.0], 1e-3).is_err());
    }

    #[test]
    fn unbounded_family_without_bound_is_widened() {
        let e2 = SetFamily::e2();
        let bare = SetFamily::new("bare", move |w| e2.window(w));
        let p = thin_profile(&bare, 50.0, &[10.0], 1e-3).unwrap();
        assert!(p.entries[0].widened);
        assert!(p.entries[0].theta + p.entries[0].certified_error >= 1.0 - 1e-12);
    }

    #[test]
    fn verdicts() {
        let v = is_eps_thin(&SetFamily::e1(), 0.5, 100.0, 1e-3).unwrap();
        match v {
            ThinVerdict::NotThin { witness, ratio } => {
                assert!(ratio >= 0.5);
                assert!(thinness_ratio(&SetFamily::e1().window(100.0), witness) >= 0.5);
            }
            other => panic!("expected NotThin, got {other:?}"),
        }
        assert!(matches!(
            is_eps_thin(&SetFamily::empty(), 0.1, 1.0, 1e-3).unwrap(),
            ThinVerdict::Thin { .. }
        ));
        assert!(is_eps_thin(&SetFamily::empty(), 0.0, 1.0, 1e-3).is_err());
    }

    #[test]
    fn ball_estimate_edges() {
        // full line: the unit ball around any far point is covered
        let full = SetFamily::from_set("full", set(&[[-100.0, 100.0]]));
        let b = ball_estimate_sup(&full, 2.0, 100.0, 1e-3).unwrap();
        assert_eq!(b.sup, 2.0);
        assert_eq!(b.certified_error, 0.0);
        // E1 window [-20, 20] has no blob beyond R = 17
        let e = ball_estimate_sup(&SetFamily::e1(), 17.0, 20.0, 1e-3).unwrap();
        assert_eq!(e.sup, 0.0);
        assert!(ball_estimate_sup(&full, 1.0, 100.0, 1e-3).is_err());
    }
}
