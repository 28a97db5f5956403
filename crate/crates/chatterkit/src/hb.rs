//! Closed-form harmonic-balance limit-cycle predictions for both controllers,
//! plus a numeric solver of the balance equation that never touches the
//! closed forms and serves as their independent oracle.
//!
//! Splitting `N(A, omega) W(j omega) = -1` into real and imaginary parts
//! gives, for any describing function `N = N_re + j N_im`:
//!
//! ```text
//! N_re            = 2 mu omega^2
//! -N_im           = omega (1 - mu^2 omega^2)
//! ```
//!
//! For the relay the imaginary balance forces `omega = 1/mu` and the real
//! balance yields `A = 2 M mu / pi`, hence averaged power `P = 2 M^2 / pi^2`
//! independent of the actuator. For the super-twisting law the solution is
//! `A = mu^2 K_A`, `omega = K_omega / mu` with gain-only coefficients
//! computed by [`sta_constants`].

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::freq::{freq_response, hbe_residual, relay_df, sta_df, SQRT_TERM_DF_GAIN};
use crate::model::{ChatterPrediction, Controller, FosmcGain, StaGains};

/// Gain-only coefficients of the super-twisting limit cycle:
/// `A = mu^2 * amplitude_coeff` and `omega = omega_coeff / mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaHbConstants {
    pub amplitude_coeff: f64,
    pub omega_coeff: f64,
}

impl StaHbConstants {
    /// Coefficient of the averaged power: `P = mu^2 * power_coeff()`.
    pub fn power_coeff(&self) -> f64 {
        let aw = self.amplitude_coeff * self.omega_coeff;
        0.5 * aw * aw
    }
}

/// Averaged power of the first-harmonic waveform `A sin(omega t)`:
/// `P = A^2 omega^2 / 2`.
pub fn averaged_power(amplitude: f64, omega: f64) -> f64 {
    assert!(
        amplitude > 0.0 && omega > 0.0,
        "amplitude and omega must be positive"
    );
    0.5 * amplitude * amplitude * omega * omega
}

/// Relay limit cycle: `A = 2 M mu / pi`, `omega = 1/mu`, `P = 2 M^2 / pi^2`.
pub fn fosmc_predict(gain: &FosmcGain, mu: f64) -> ChatterPrediction {
    assert!(gain.magnitude > 0.0, "M must be positive");
    assert!(mu > 0.0, "mu must be positive");
    ChatterPrediction::from_amplitude_omega(2.0 * gain.magnitude * mu / PI, 1.0 / mu)
}

/// Solve the super-twisting harmonic balance in closed form.
///
/// With `a = (1.1128 k1)^2` and `b = 16 k2 / pi`:
/// `K_omega = sqrt(a / (a + b))`, `K_A = ((a + b) / (2 sqrt(a)))^2`.
pub fn sta_constants(gains: &StaGains) -> StaHbConstants {
    assert!(
        gains.k1 > 0.0 && gains.k2 > 0.0,
        "k1 and k2 must be positive"
    );
    let a = (SQRT_TERM_DF_GAIN * gains.k1).powi(2);
    let b = 16.0 * gains.k2 / PI;
    let half_sum_over_root = (a + b) / (2.0 * a.sqrt());
    StaHbConstants {
        amplitude_coeff: half_sum_over_root * half_sum_over_root,
        omega_coeff: (a / (a + b)).sqrt(),
    }
}

/// Super-twisting limit cycle at actuator time-constant `mu`.
pub fn sta_predict(gains: &StaGains, mu: f64) -> ChatterPrediction {
    assert!(mu > 0.0, "mu must be positive");
    let constants = sta_constants(gains);
    ChatterPrediction::from_amplitude_omega(
        mu * mu * constants.amplitude_coeff,
        constants.omega_coeff / mu,
    )
}

/// Closed-form prediction for either controller.
pub fn predict(controller: &Controller, mu: f64) -> ChatterPrediction {
    match controller {
        Controller::Fosmc(gain) => fosmc_predict(gain, mu),
        Controller::Sta(gains) => sta_predict(gains, mu),
    }
}

/// Result of the numeric harmonic-balance solve.
#[derive(Debug, Clone, Copy)]
pub struct NumericHbSolution {
    pub prediction: ChatterPrediction,
    /// `|N W + 1|` at the returned solution.
    pub residual: f64,
    /// Sign-change brackets found beyond the one solved. Zero for this
    /// cascade, which admits a single intersection.
    pub extra_brackets: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HbSolveError {
    /// The imaginary balance has no sign change on the search bracket.
    NoLimitCycle,
    /// Bisection converged but the balance residual stayed above tolerance.
    Unconverged { residual: f64 },
}

impl fmt::Display for HbSolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HbSolveError::NoLimitCycle => write!(f, "no limit cycle found"),
            HbSolveError::Unconverged { residual } => {
                write!(
                    f,
                    "harmonic balance residual {residual:.3e} above tolerance"
                )
            }
        }
    }
}

impl std::error::Error for HbSolveError {}

const RESIDUAL_TOL: f64 = 1e-9;
const BRACKET_MARGIN: f64 = 1e-6;
const BISECT_REL_WIDTH: f64 = 1e-12;
const BISECT_MAX_ITER: usize = 200;
const BRACKET_SCAN_CELLS: usize = 64;

/// Solve the harmonic balance equation numerically, without the closed forms.
///
/// Relay: the imaginary balance `omega (1 - mu^2 omega^2) = 0` pins
/// `omega = 1/mu`; the amplitude then comes from inverting the real balance
/// `4M / (pi A) = 2 mu omega^2`.
///
/// Super-twisting: the real balance eliminates the amplitude,
/// `A(omega) = (1.1128 k1 / (2 mu omega^2))^2`; substituting into the
/// imaginary balance `4 k2 / (pi A omega) = omega (1 - mu^2 omega^2)` leaves
/// a scalar equation in `omega`, bisected on
/// `(1e-6 / mu, (1 - 1e-6) / mu)`. Both ends of that bracket kill the
/// right-hand side, so the interior root is always bracketed for valid gains.
/// If several sign changes ever appeared, the lowest-frequency one is solved
/// and the rest are reported in `extra_brackets`.
pub fn hb_solve_numeric(
    controller: &Controller,
    mu: f64,
) -> Result<NumericHbSolution, HbSolveError> {
    assert!(mu > 0.0, "mu must be positive");
    match controller {
        Controller::Fosmc(gain) => {
            assert!(gain.magnitude > 0.0, "M must be positive");
            let omega = 1.0 / mu;
            let amplitude = 4.0 * gain.magnitude / (PI * 2.0 * mu * omega * omega);
            finish(
                ChatterPrediction::from_amplitude_omega(amplitude, omega),
                Complex64::new(relay_df(gain.magnitude, amplitude), 0.0),
                mu,
                0,
            )
        }
        Controller::Sta(gains) => {
            assert!(
                gains.k1 > 0.0 && gains.k2 > 0.0,
                "k1 and k2 must be positive"
            );
            let amplitude_from_real_balance = |omega: f64| {
                let n_re = SQRT_TERM_DF_GAIN * gains.k1;
                (n_re / (2.0 * mu * omega * omega)).powi(2)
            };
            // Imaginary balance mismatch; positive left of the root, negative
            // right of it.
            let mismatch = |omega: f64| {
                let amplitude = amplitude_from_real_balance(omega);
                omega * (1.0 - mu * mu * omega * omega) - 4.0 * gains.k2 / (PI * amplitude * omega)
            };

            let lo = BRACKET_MARGIN / mu;
            let hi = (1.0 - BRACKET_MARGIN) / mu;
            let mut brackets = Vec::new();
            let cell = (hi - lo) / BRACKET_SCAN_CELLS as f64;
            let mut left = lo;
            let mut f_left = mismatch(left);
            for i in 1..=BRACKET_SCAN_CELLS {
                let right = lo + cell * i as f64;
                let f_right = mismatch(right);
                if f_left == 0.0 || f_left.signum() != f_right.signum() {
                    brackets.push((left, right));
                }
                left = right;
                f_left = f_right;
            }
            let &(mut a, mut b) = brackets.first().ok_or(HbSolveError::NoLimitCycle)?;

            let mut f_a = mismatch(a);
            for _ in 0..BISECT_MAX_ITER {
                let mid = 0.5 * (a + b);
                if (b - a) <= BISECT_REL_WIDTH * mid {
                    break;
                }
                let f_mid = mismatch(mid);
                if f_mid == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if f_a.signum() == f_mid.signum() {
                    a = mid;
                    f_a = f_mid;
                } else {
                    b = mid;
                }
            }
            let omega = 0.5 * (a + b);
            let amplitude = amplitude_from_real_balance(omega);
            finish(
                ChatterPrediction::from_amplitude_omega(amplitude, omega),
                sta_df(gains, amplitude, omega),
                mu,
                brackets.len() - 1,
            )
        }
    }
}

fn finish(
    prediction: ChatterPrediction,
    df: Complex64,
    mu: f64,
    extra_brackets: usize,
) -> Result<NumericHbSolution, HbSolveError> {
    let residual = hbe_residual(df, freq_response(mu, prediction.omega));
    if residual < RESIDUAL_TOL {
        Ok(NumericHbSolution {
            prediction,
            residual,
            extra_brackets,
        })
    } else {
        Err(HbSolveError::Unconverged { residual })
    }
}
