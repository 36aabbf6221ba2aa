//! Interval sets on the line and their thinness functionals.

pub mod family;
pub mod interval;
pub mod thinness;

pub use family::{e2_tail_bound, eta, SetDescriptor, SetFamily};
pub use interval::{Interval, IntervalSet};
pub use thinness::{
    ball_estimate_sup, is_eps_thin, sup_thinness, thin_profile, thinness_ratio, BallEstimate, ProfileEntry,
    ThinVerdict, ThinnessProfile, BALL_COVER_CONSTANT,
};

/// `rho(x) = min(1, 1/|x|)`.
pub fn rho(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 {
        1.0
    } else {
        1.0 / a
    }
}
