//! Deterministic fixed-step time-domain integration of the closed loop.
//!
//! The state is `(x, z1, z2, v)`: plant output, the two actuator states
//! (`z1` is the applied input), and the super-twisting integrator. The
//! right-hand side is
//!
//! ```text
//! dx/dt  = z1 + F(t)
//! dz1/dt = z2
//! dz2/dt = (u - z1) / mu^2 - 2 z2 / mu
//! dv/dt  = -k2 sign(x)          (0 for the relay controller)
//! ```
//!
//! with `u` the controller output evaluated from the stage values of
//! `(x, v)`, so the switching discontinuity is seen inside every RK4 stage.
//! A fixed step keeps runs bit-reproducible; the discontinuous right-hand
//! side costs O(h) local error near switchings, resolved by the default
//! 200 steps per actuator time-constant.

use std::fmt;
use std::io::{self, Write};

use crate::model::{validate, Controller, DisturbanceSpec, LoopConfig};

/// One recorded integration step. `xdot = z1 + F(t)` comes from the plant
/// equation, never from finite differences of `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub xdot: f64,
    /// Controller output at this sample.
    pub u: f64,
    /// Actuator output (the input actually applied to the plant).
    pub ubar: f64,
}

/// Uniformly sampled record of a closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub h: f64,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Write the trajectory as CSV (`t,x,xdot,u,ubar`) at full double
    /// precision.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "t,x,xdot,u,ubar")?;
        for s in &self.samples {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.t, s.x, s.xdot, s.u, s.ubar
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    InvalidConfig(Vec<String>),
    Diverged { t: f64, x: f64 },
    NonFinite { last_good_t: f64 },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::InvalidConfig(violations) => {
                write!(f, "invalid config: {}", violations.join("; "))
            }
            SimError::Diverged { t, x } => write!(f, "simulation diverged at t = {t} (x = {x:e})"),
            SimError::NonFinite { last_good_t } => {
                write!(f, "state became non-finite after t = {last_good_t}")
            }
        }
    }
}

impl std::error::Error for SimError {}

/// sign(x) with the symmetric convention sign(0) = 0.
fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Controller output and integrator rate at plant output `x` and integrator
/// state `v`. Relay: `u = -M sign(x)`. Super-twisting:
/// `u = -k1 |x|^(1/2) sign(x) + v` with `dv/dt = -k2 sign(x)`.
pub fn control_law(controller: &Controller, x: f64, v: f64) -> (f64, f64) {
    match controller {
        Controller::Fosmc(gain) => (-gain.magnitude * sgn(x), 0.0),
        Controller::Sta(gains) => (-gains.k1 * x.abs().sqrt() * sgn(x) + v, -gains.k2 * sgn(x)),
    }
}

struct LoopDynamics {
    controller: Controller,
    disturbance: DisturbanceSpec,
    inv_mu_sq: f64,
    two_over_mu: f64,
}

type State = [f64; 4];

impl LoopDynamics {
    #[inline]
    fn rhs(&self, t: f64, y: &State) -> State {
        let (u, vdot) = control_law(&self.controller, y[0], y[3]);
        [
            y[1] + self.disturbance.value_at(t),
            y[2],
            (u - y[1]) * self.inv_mu_sq - self.two_over_mu * y[2],
            vdot,
        ]
    }

    #[inline]
    fn rk4_step(&self, t: f64, y: &State, h: f64) -> State {
        let k1 = self.rhs(t, y);
        let k2 = self.rhs(t + 0.5 * h, &advance(y, &k1, 0.5 * h));
        let k3 = self.rhs(t + 0.5 * h, &advance(y, &k2, 0.5 * h));
        let k4 = self.rhs(t + h, &advance(y, &k3, h));
        let sixth = h / 6.0;
        [
            y[0] + sixth * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0]),
            y[1] + sixth * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1]),
            y[2] + sixth * (k1[2] + 2.0 * (k2[2] + k3[2]) + k4[2]),
            y[3] + sixth * (k1[3] + 2.0 * (k2[3] + k3[3]) + k4[3]),
        ]
    }
}

#[inline]
fn advance(y: &State, k: &State, w: f64) -> State {
    [
        y[0] + w * k[0],
        y[1] + w * k[1],
        y[2] + w * k[2],
        y[3] + w * k[3],
    ]
}

/// Integrate the closed loop over `[0, t_end]` with classical fixed-step RK4.
///
/// The config must pass [`validate`]; violations come back as
/// [`SimError::InvalidConfig`]. The trajectory holds `floor(t_end/h) + 1`
/// samples at exactly uniform spacing, and identical configs produce
/// bit-identical trajectories.
pub fn simulate(config: &LoopConfig) -> Result<Trajectory, SimError> {
    let violations = validate(config);
    if !violations.is_empty() {
        return Err(SimError::InvalidConfig(violations));
    }
    integrate(config)
}

fn integrate(config: &LoopConfig) -> Result<Trajectory, SimError> {
    let dynamics = LoopDynamics {
        controller: config.controller,
        disturbance: config.disturbance,
        inv_mu_sq: 1.0 / (config.actuator.time_constant * config.actuator.time_constant),
        two_over_mu: 2.0 / config.actuator.time_constant,
    };
    let h = config.h;
    let n_steps = (config.t_end / h).floor() as usize;
    let divergence_limit = 1e6 * config.x0.abs().max(1.0);

    let mut samples = Vec::with_capacity(n_steps + 1);
    let mut state: State = [config.x0, config.z0[0], config.z0[1], config.v0];
    for step in 0..=n_steps {
        let t = step as f64 * h;
        let (u, _) = control_law(&config.controller, state[0], state[3]);
        samples.push(Sample {
            t,
            x: state[0],
            xdot: state[1] + config.disturbance.value_at(t),
            u,
            ubar: state[1],
        });
        if step == n_steps {
            break;
        }
        state = dynamics.rk4_step(t, &state, h);
        if !state.iter().all(|s| s.is_finite()) {
            return Err(SimError::NonFinite { last_good_t: t });
        }
        if state[0].abs() > divergence_limit {
            return Err(SimError::Diverged {
                t: t + h,
                x: state[0],
            });
        }
    }
    Ok(Trajectory { h, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ActuatorSpec, FosmcGain, LoopConfig, StaGains};

    #[test]
    fn control_law_relay_flips_sign() {
        let relay = Controller::Fosmc(FosmcGain { magnitude: 1.1 });
        assert_eq!(control_law(&relay, -0.5, 0.0), (1.1, 0.0));
        assert_eq!(control_law(&relay, 0.5, 0.0), (-1.1, 0.0));
    }

    #[test]
    fn control_law_sta_example() {
        let sta = Controller::Sta(StaGains { k1: 2.0, k2: 3.0 });
        let (u, vdot) = control_law(&sta, 0.25, 0.1);
        assert!((u + 0.9).abs() < 1e-15);
        assert_eq!(vdot, -3.0);
    }

    #[test]
    fn control_law_is_zero_on_the_surface() {
        let relay = Controller::Fosmc(FosmcGain { magnitude: 5.0 });
        assert_eq!(control_law(&relay, 0.0, 0.0), (0.0, 0.0));
        let sta = Controller::Sta(StaGains { k1: 2.0, k2: 3.0 });
        let (u, vdot) = control_law(&sta, 0.0, 0.375);
        assert_eq!(u, 0.375);
        assert_eq!(vdot, 0.0);
    }

    #[test]
    fn zero_gain_stub_holds_the_initial_state() {
        // A zero relay gain fails validation, so drive the internal
        // integrator directly: no input and no disturbance leaves x at x0.
        let config = LoopConfig {
            controller: Controller::Fosmc(FosmcGain { magnitude: 0.0 }),
            actuator: ActuatorSpec {
                time_constant: 0.01,
            },
            disturbance: crate::model::DisturbanceSpec::none(),
            x0: 1.0,
            z0: [0.0, 0.0],
            v0: 0.0,
            t_end: 0.1,
            h: 1e-4,
        };
        let traj = integrate(&config).unwrap();
        assert!(traj.samples.iter().all(|s| s.x == 1.0 && s.ubar == 0.0));
    }

    #[test]
    fn simulate_rejects_invalid_config() {
        let mut config = LoopConfig::nominal(Controller::Fosmc(FosmcGain { magnitude: 1.1 }), 0.01);
        config.h = 0.01;
        match simulate(&config) {
            Err(SimError::InvalidConfig(violations)) => {
                assert_eq!(violations, vec!["h exceeds mu/50".to_string()])
            }
            other => panic!("expected invalid-config error, got {other:?}"),
        }
    }

    #[test]
    fn sample_count_and_spacing_follow_the_step() {
        let mut config = LoopConfig::nominal(Controller::Fosmc(FosmcGain { magnitude: 1.1 }), 0.01);
        config.t_end = 0.5;
        let traj = simulate(&config).unwrap();
        assert_eq!(traj.len(), (config.t_end / config.h).floor() as usize + 1);
        for pair in traj.samples.windows(2) {
            assert!((pair[1].t - pair[0].t - config.h).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_configs_give_bit_identical_trajectories() {
        let mut config = LoopConfig::nominal(
            Controller::Sta(StaGains {
                k1: 6.7262,
                k2: 11.0,
            }),
            0.01,
        );
        config.t_end = 1.0;
        let a = simulate(&config).unwrap();
        let b = simulate(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn actuator_settles_to_a_constant_command() {
        // Constant u: park the relay far on one side so u = +M throughout,
        // and check unit DC gain after ten time-constants.
        let m = 2.5;
        let mu = 0.02;
        let config = LoopConfig {
            controller: Controller::Fosmc(FosmcGain { magnitude: m }),
            actuator: ActuatorSpec { time_constant: mu },
            disturbance: crate::model::DisturbanceSpec::none(),
            x0: -1e6,
            z0: [0.0, 0.0],
            v0: 0.0,
            t_end: 12.0 * mu,
            h: mu / 200.0,
        };
        let traj = simulate(&config).unwrap();
        let at_10mu = traj
            .samples
            .iter()
            .find(|s| s.t >= 10.0 * mu)
            .expect("sample past ten time-constants");
        assert!(
            (at_10mu.ubar - m).abs() / m < 1e-3,
            "ubar = {} after 10 mu, want {} within 0.1%",
            at_10mu.ubar,
            m
        );
    }

    #[test]
    fn relay_chattering_amplitude_near_the_predicted_cycle() {
        let gain = FosmcGain { magnitude: 1.1 };
        let config = LoopConfig::nominal(Controller::Fosmc(gain), 0.01);
        let traj = simulate(&config).unwrap();
        // Steady-state |x| peaks close to 2 M mu / pi.
        let predicted = crate::hb::fosmc_predict(&gain, 0.01).amplitude;
        let second_half = &traj.samples[traj.len() / 2..];
        let peak = second_half.iter().map(|s| s.x.abs()).fold(0.0f64, f64::max);
        assert!(
            (peak - predicted).abs() / predicted < 0.10,
            "peak {peak} vs predicted {predicted}"
        );
    }

    #[test]
    fn huge_disturbance_reports_divergence() {
        let mut config = LoopConfig::nominal(Controller::Fosmc(FosmcGain { magnitude: 2.0 }), 0.01);
        config.disturbance = crate::model::DisturbanceSpec::new(1e300, 1.0);
        config.controller = Controller::Fosmc(FosmcGain { magnitude: 1e301 });
        config.t_end = 1.0;
        match simulate(&config) {
            Err(SimError::Diverged { .. }) | Err(SimError::NonFinite { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn csv_export_has_header_and_full_precision() {
        let mut config = LoopConfig::nominal(Controller::Fosmc(FosmcGain { magnitude: 1.1 }), 0.01);
        config.t_end = 0.01;
        let traj = simulate(&config).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x,xdot,u,ubar"));
        let first = lines.next().unwrap();
        assert_eq!(first.split(',').count(), 5);
        assert!(
            first.contains('e'),
            "fields use scientific notation: {first}"
        );
        assert_eq!(text.lines().count(), traj.len() + 1);
    }
}
