//! Super-twisting gain selection and the actuator time-constants at which the
//! relay and super-twisting limit cycles coincide.
//!
//! For fixed `k2` the predicted amplitude normalization `A / mu^2` is convex
//! in `k1` with its minimum at `k1 = 2.028 sqrt(k2)`, and the averaged-power
//! normalization `P / mu^2` has its minimum at `k1 = 1.434 sqrt(k2)`. The gain
//! recipes pin `k2 = 1.1 Delta` from the disturbance rate bound and pick `k1`
//! per objective, which lands on `k1 = 2.127 sqrt(Delta)` (amplitude) or
//! `k1 = 1.504 sqrt(Delta)` (power).

use std::f64::consts::PI;

use crate::freq::SQRT_TERM_DF_GAIN;
use crate::model::StaGains;

/// What the `k1` selection minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignObjective {
    MinAmplitude,
    MinPower,
}

/// Actuator time-constants at which the two controllers predict equal
/// chattering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalAtc {
    /// Equal amplitudes at this time-constant (written mu* in the tables).
    pub same_amplitude: f64,
    /// Equal averaged power at this time-constant (mu**). Always above
    /// `same_amplitude` for fixed gains.
    pub same_power: f64,
}

/// `k1` minimizing the amplitude normalization for fixed `k2`:
/// `k1 = (16 k2 / (pi 1.1128^2))^(1/2) = 2.028 sqrt(k2)`.
///
/// At this gain `(1.1128 k1)^2 = 16 k2 / pi` exactly.
pub fn k1_min_amplitude(k2: f64) -> f64 {
    assert!(k2 > 0.0, "k2 must be positive");
    (16.0 * k2 / (PI * SQRT_TERM_DF_GAIN * SQRT_TERM_DF_GAIN)).sqrt()
}

/// `k1` minimizing the averaged-power normalization for fixed `k2`:
/// `k1 = (8 k2 / (pi 1.1128^2))^(1/2) = 1.434 sqrt(k2)`, i.e.
/// `k1_min_amplitude(k2) / sqrt(2)`.
pub fn k1_min_power(k2: f64) -> f64 {
    assert!(k2 > 0.0, "k2 must be positive");
    (8.0 * k2 / (PI * SQRT_TERM_DF_GAIN * SQRT_TERM_DF_GAIN)).sqrt()
}

/// Conventional multiplier between the disturbance rate bound and `k2`.
pub const DEFAULT_K2_MARGIN: f64 = 1.1;

/// Select super-twisting gains for a disturbance with `|dF/dt| <= rate_bound`:
/// `k2 = 1.1 * rate_bound`, `k1` per objective.
pub fn design_gains(rate_bound: f64, objective: DesignObjective) -> StaGains {
    design_gains_with_margin(rate_bound, objective, DEFAULT_K2_MARGIN)
}

/// Same as [`design_gains`] with an explicit `k2 = margin * rate_bound`
/// multiplier; the margin must exceed one for the stability inequality.
pub fn design_gains_with_margin(
    rate_bound: f64,
    objective: DesignObjective,
    k2_margin: f64,
) -> StaGains {
    assert!(rate_bound > 0.0, "rate bound Delta must be positive");
    assert!(k2_margin > 1.0, "k2 margin must exceed one");
    let k2 = k2_margin * rate_bound;
    let k1 = match objective {
        DesignObjective::MinAmplitude => k1_min_amplitude(k2),
        DesignObjective::MinPower => k1_min_power(k2),
    };
    StaGains { k1, k2 }
}

/// Sufficient finite-time-stability inequality for the super-twisting gains:
/// `k1 > 1.414 sqrt(k2)` and `k2 > Delta`, both strict.
pub fn stability_check(gains: &StaGains, rate_bound: f64) -> bool {
    gains.k1 > 1.414 * gains.k2.sqrt() && gains.k2 > rate_bound
}

/// Actuator time-constant equalizing the two predicted amplitudes:
/// `mu* = 8 M (1.1128 k1)^2 / (pi ((1.1128 k1)^2 + 16 k2 / pi)^2)`.
pub fn critical_mu_amplitude(magnitude: f64, gains: &StaGains) -> f64 {
    assert!(magnitude > 0.0, "M must be positive");
    assert!(gains.k1 > 0.0 && gains.k2 > 0.0, "gains must be positive");
    let a = (SQRT_TERM_DF_GAIN * gains.k1).powi(2);
    let b = 16.0 * gains.k2 / PI;
    8.0 * magnitude * a / (PI * (a + b) * (a + b))
}

/// Actuator time-constant equalizing the two predicted averaged powers:
/// `mu** = 8 M (1.1128 k1) / (pi ((1.1128 k1)^2 + 16 k2 / pi)^(3/2))`.
pub fn critical_mu_power(magnitude: f64, gains: &StaGains) -> f64 {
    assert!(magnitude > 0.0, "M must be positive");
    assert!(gains.k1 > 0.0 && gains.k2 > 0.0, "gains must be positive");
    let a = (SQRT_TERM_DF_GAIN * gains.k1).powi(2);
    let b = 16.0 * gains.k2 / PI;
    8.0 * magnitude * a.sqrt() / (PI * (a + b).powf(1.5))
}

/// Both critical time-constants for one relay/super-twisting gain pairing.
pub fn critical_atc(magnitude: f64, gains: &StaGains) -> CriticalAtc {
    CriticalAtc {
        same_amplitude: critical_mu_amplitude(magnitude, gains),
        same_power: critical_mu_power(magnitude, gains),
    }
}
