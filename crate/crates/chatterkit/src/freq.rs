//! Frequency response of the actuator-plant cascade and describing functions
//! of the two switching nonlinearities.
//!
//! The cascade of the integrator plant and the critically damped actuator is
//! `W(s) = 1 / (s (mu s + 1)^2)`, relative degree three. A limit cycle of
//! amplitude `A` and frequency `omega` satisfies the harmonic balance
//! equation `N(A, omega) W(j omega) = -1`, where `N` is the describing
//! function of the controller nonlinearity.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::model::StaGains;

/// First-harmonic gain of the square-root switching term
/// `|x|^(1/2) sign(x)`, i.e. `(1/pi) * integral_0^2pi |sin t|^(3/2) dt`.
/// The conventional literature value is used verbatim; a unit test checks it
/// against numerical Fourier integration to three decimal places.
pub const SQRT_TERM_DF_GAIN: f64 = 1.1128;

/// Evaluate `W(j omega) = 1 / (j omega (j mu omega + 1)^2)`.
///
/// Panics when `mu <= 0` or `omega <= 0` (the response has a pole at the
/// origin).
pub fn freq_response(mu: f64, omega: f64) -> Complex64 {
    assert!(mu > 0.0, "mu must be positive");
    assert!(omega > 0.0, "omega must be positive (pole at the origin)");
    let jw = Complex64::new(0.0, omega);
    let lag = Complex64::new(1.0, mu * omega);
    (jw * lag * lag).inv()
}

/// Describing function of the relay `u = -M sign(x)`: `N(A) = 4M / (pi A)`.
///
/// Panics when `magnitude <= 0` or `amplitude <= 0` (the relay DF is
/// unbounded at the origin).
pub fn relay_df(magnitude: f64, amplitude: f64) -> f64 {
    assert!(magnitude > 0.0, "M must be positive");
    assert!(
        amplitude > 0.0,
        "A must be positive (relay DF unbounded at the origin)"
    );
    4.0 * magnitude / (PI * amplitude)
}

/// Describing function of the super-twisting law:
/// `N(A, omega) = 1.1128 k1 / A^(1/2) - j 4 k2 / (pi A omega)`.
///
/// Panics when `amplitude <= 0` or `omega <= 0`.
pub fn sta_df(gains: &StaGains, amplitude: f64, omega: f64) -> Complex64 {
    assert!(amplitude > 0.0, "A must be positive");
    assert!(omega > 0.0, "omega must be positive");
    Complex64::new(
        SQRT_TERM_DF_GAIN * gains.k1 / amplitude.sqrt(),
        -4.0 * gains.k2 / (PI * amplitude * omega),
    )
}

/// Residual of the harmonic balance equation: `|N W + 1|`. Zero at an exact
/// limit-cycle solution.
pub fn hbe_residual(df: Complex64, response: Complex64) -> f64 {
    (df * response + Complex64::new(1.0, 0.0)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn response_at_the_actuator_corner_is_minus_mu_over_two() {
        // At omega = 1/mu the lag term squares to 2j, so W = -mu/2 exactly.
        let w = freq_response(0.1, 10.0);
        assert!((w.re + 0.05).abs() < 1e-15, "re = {}", w.re);
        assert!(w.im.abs() < 1e-15, "im = {}", w.im);

        let w = freq_response(0.2, 5.0);
        assert!((w.re + 0.1).abs() < 1e-15);
        assert!(w.im.abs() < 1e-15);
    }

    #[test]
    fn response_low_frequency_expansion() {
        // W ~ -2 mu - j/omega for omega -> 0.
        let w = freq_response(1.0, 1e-3);
        assert!((w.re + 2.0).abs() < 1e-4, "re = {}", w.re);
        assert!((w.im + 1000.0).abs() < 1e-2, "im = {}", w.im);
    }

    #[test]
    fn relay_df_unit_arguments() {
        assert!((relay_df(1.0, 1.0) - 4.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn relay_df_matches_real_balance_at_the_relay_solution() {
        // At the relay limit cycle A = 2 M mu / pi, omega = 1/mu, the DF must
        // equal the real part of -1/W, which is 2 mu omega^2.
        for (m, mu) in [(1.1, 0.1), (66.0, 0.2)] {
            let amplitude = 2.0 * m * mu / PI;
            let omega = 1.0 / mu;
            let df = relay_df(m, amplitude);
            let balance = 2.0 * mu * omega * omega;
            assert!(
                (df - balance).abs() / balance < 1e-12,
                "M={m}, mu={mu}: df={df}, balance={balance}"
            );
        }
        assert!((relay_df(1.1, 0.0700282) - 20.0).abs() < 1e-4);
        assert!((relay_df(66.0, 8.40338) - 10.0).abs() < 1e-5);
    }

    #[test]
    fn sta_df_single_channel_values() {
        let proportional = sta_df(&StaGains { k1: 1.0, k2: 0.0 }, 1.0, 1.0);
        assert!((proportional.re - 1.1128).abs() < 1e-15);
        assert_eq!(proportional.im, 0.0);

        let integral = sta_df(&StaGains { k1: 0.0, k2: 1.0 }, 1.0, 1.0);
        assert_eq!(integral.re, 0.0);
        assert!((integral.im + 4.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn sta_df_at_a_tabulated_limit_cycle() {
        // Minimum-amplitude family, Delta = 10, k1 = 1.5 sqrt(10), mu = 0.01:
        // the real part must equal 2 mu omega^2 at the printed solution.
        let gains = StaGains {
            k1: 4.7434,
            k2: 11.0,
        };
        let n = sta_df(&gains, 6.3134e-3, 57.632);
        assert!((n.re - 66.43).abs() / 66.43 < 1e-3, "re = {}", n.re);
        assert!((n.im + 38.49).abs() / 38.49 < 1e-3, "im = {}", n.im);
        assert!((n.re - 2.0 * 0.01 * 57.632f64.powi(2)).abs() / n.re < 1e-3);
    }

    #[test]
    fn residual_vanishes_at_exact_balance() {
        let w = Complex64::new(-0.3, -0.7);
        let n = -w.inv();
        assert!(hbe_residual(n, w) < 1e-15);
    }

    #[test]
    fn residual_at_the_relay_closed_form_solution() {
        let (m, mu) = (1.1, 0.1);
        let amplitude = 2.0 * m * mu / PI;
        let omega = 1.0 / mu;
        let n = Complex64::new(relay_df(m, amplitude), 0.0);
        assert!(hbe_residual(n, freq_response(mu, omega)) < 1e-12);
    }

    #[test]
    fn sqrt_term_df_gain_matches_fourier_integration() {
        // First-harmonic coefficient of k1 |A sin t|^(1/2) sign(sin t) over a
        // period, normalized by A^(1/2): (1/pi) * integral |sin|^(3/2).
        // Trapezoid over 2M points; the integrand is continuous so this
        // converges far past the 3-decimal check.
        let n = 2_000_000;
        let step = 2.0 * PI / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            let theta = i as f64 * step;
            sum += theta.sin().abs().powf(1.5);
        }
        let numeric = sum * step / PI;
        assert!(
            (numeric - SQRT_TERM_DF_GAIN).abs() < 5e-4,
            "numeric Fourier gain {numeric} vs printed {SQRT_TERM_DF_GAIN}"
        );
    }

    #[test]
    fn relay_df_gain_matches_fourier_integration() {
        // Same check for the relay: (1/pi) * integral |sin| = 4/pi.
        let n = 2_000_000;
        let step = 2.0 * PI / n as f64;
        let sum: f64 = (0..n).map(|i| (i as f64 * step).sin().abs()).sum();
        assert!((sum * step / PI - 4.0 / PI).abs() < 1e-6);
    }

    #[test]
    #[should_panic(expected = "omega must be positive")]
    fn response_rejects_zero_frequency() {
        freq_response(0.1, 0.0);
    }

    #[test]
    #[should_panic(expected = "A must be positive")]
    fn relay_df_rejects_zero_amplitude() {
        relay_df(1.0, 0.0);
    }

    proptest! {
        #[test]
        fn response_has_negative_imaginary_part_below_the_corner(
            mu in 1e-4..10.0f64,
            frac in 1e-6..0.999f64,
        ) {
            // The phase runs from -90 deg through -180 deg at omega = 1/mu,
            // so Im W < 0 exactly on the band where the balance intersections
            // live. Above the corner the phase keeps falling and the
            // imaginary part changes sign.
            prop_assert!(freq_response(mu, frac / mu).im < 0.0);
            prop_assert!(freq_response(mu, 2.0 / mu).im > 0.0);
        }

        #[test]
        fn response_magnitude_decreases_with_frequency(
            mu in 1e-4..10.0f64,
            omega in 1e-3..1e3f64,
            factor in 1.001..100.0f64,
        ) {
            let low = freq_response(mu, omega).norm();
            let high = freq_response(mu, omega * factor).norm();
            prop_assert!(high < low);
        }

        #[test]
        fn response_crosses_the_real_axis_at_the_corner(mu in 1e-4..10.0f64) {
            let w = freq_response(mu, 1.0 / mu);
            prop_assert!((w.re + mu / 2.0).abs() <= 1e-13 * mu);
            prop_assert!(w.im.abs() <= 1e-13 * mu);
        }

        #[test]
        fn relay_df_is_homogeneous(
            m in 1e-3..1e3f64,
            a in 1e-3..1e3f64,
            c in 1e-3..1e3f64,
        ) {
            let base = relay_df(m, a);
            let scaled = relay_df(c * m, c * a);
            prop_assert!((base - scaled).abs() / base < 1e-12);
        }

        #[test]
        fn sta_df_real_part_is_frequency_independent(
            k1 in 1e-2..1e2f64,
            k2 in 1e-2..1e2f64,
            a in 1e-6..1e2f64,
            w1 in 1e-3..1e4f64,
            w2 in 1e-3..1e4f64,
        ) {
            let gains = StaGains { k1, k2 };
            let n1 = sta_df(&gains, a, w1);
            let n2 = sta_df(&gains, a, w2);
            prop_assert_eq!(n1.re, n2.re);
            prop_assert!(n1.im < 0.0);
        }
    }
}
