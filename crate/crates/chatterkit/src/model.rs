//! Value types describing the plant-actuator-controller-disturbance loop.
//!
//! Everything here is an immutable value object; the algorithms live in the
//! sibling modules. `validate` collects invariant violations as strings rather
//! than failing fast, so a config file with several problems reports all of
//! them at once.

use std::fmt;

use serde_json::{Map, Number, Value};

/// Relay (first-order sliding mode) control gain, `u = -M sign(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FosmcGain {
    /// Control magnitude M, in plant-input units. Must be positive, and must
    /// exceed the disturbance magnitude bound when a disturbance is attached.
    pub magnitude: f64,
}

/// Super-twisting control gains,
/// `u = -k1 |x|^(1/2) sign(x) + v`, `dv/dt = -k2 sign(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaGains {
    /// Gain on the square-root term (input * state^(-1/2)).
    pub k1: f64,
    /// Gain on the discontinuous integral term (input / time).
    pub k2: f64,
}

/// The switching controller closing the loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Controller {
    Fosmc(FosmcGain),
    Sta(StaGains),
}

impl Controller {
    pub fn name(&self) -> &'static str {
        match self {
            Controller::Fosmc(_) => "fosmc",
            Controller::Sta(_) => "sta",
        }
    }
}

/// Sinusoidal matched disturbance `F(t) = alpha sin(Omega t)`.
///
/// The two derived bounds are what the gain recipes consume: `|F| <= alpha`
/// and `|dF/dt| <= alpha * Omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceSpec {
    /// Amplitude alpha >= 0.
    pub amplitude: f64,
    /// Angular frequency Omega >= 0 (rad/time).
    pub frequency: f64,
}

impl DisturbanceSpec {
    pub fn new(amplitude: f64, frequency: f64) -> Self {
        Self {
            amplitude,
            frequency,
        }
    }

    /// No disturbance (the nominal case F = 0).
    pub fn none() -> Self {
        Self {
            amplitude: 0.0,
            frequency: 0.0,
        }
    }

    /// Bound on |F|: delta = alpha.
    pub fn magnitude_bound(&self) -> f64 {
        self.amplitude
    }

    /// Bound on |dF/dt|: Delta = alpha * Omega.
    pub fn rate_bound(&self) -> f64 {
        self.amplitude * self.frequency
    }

    pub fn value_at(&self, t: f64) -> f64 {
        if self.amplitude == 0.0 {
            0.0
        } else {
            self.amplitude * (self.frequency * t).sin()
        }
    }
}

/// Second-order critically damped actuator with unit DC gain:
/// `G_a(s) = 1 / (mu s + 1)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorSpec {
    /// Actuator time-constant mu > 0.
    pub time_constant: f64,
}

/// Full closed-loop description handed to the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopConfig {
    pub controller: Controller,
    pub actuator: ActuatorSpec,
    pub disturbance: DisturbanceSpec,
    /// Initial plant output.
    pub x0: f64,
    /// Initial actuator state pair (z1, z2).
    pub z0: [f64; 2],
    /// Initial super-twisting integrator value; ignored for the relay
    /// controller.
    pub v0: f64,
    /// Simulation horizon.
    pub t_end: f64,
    /// Fixed integration step.
    pub h: f64,
}

/// Default integration step: 200 steps per actuator time-constant.
pub fn default_step(mu: f64) -> f64 {
    mu / 200.0
}

/// Default horizon: at least 200 chattering periods (the relay cycle has
/// period 2*pi*mu) and, when a disturbance is active, 40 disturbance periods.
pub fn default_horizon(mu: f64, disturbance_frequency: f64) -> f64 {
    let chatter = 200.0 * 2.0 * std::f64::consts::PI * mu;
    if disturbance_frequency > 0.0 {
        chatter.max(40.0 * 2.0 * std::f64::consts::PI / disturbance_frequency)
    } else {
        chatter
    }
}

impl LoopConfig {
    /// Nominal loop (no disturbance) with the default initial conditions
    /// x0 = 1, z0 = (0, 0), v0 = 0 and the default step and horizon.
    pub fn nominal(controller: Controller, mu: f64) -> Self {
        Self {
            controller,
            actuator: ActuatorSpec { time_constant: mu },
            disturbance: DisturbanceSpec::none(),
            x0: 1.0,
            z0: [0.0, 0.0],
            v0: 0.0,
            t_end: default_horizon(mu, 0.0),
            h: default_step(mu),
        }
    }

    pub fn mu(&self) -> f64 {
        self.actuator.time_constant
    }
}

/// Collect every invariant violation in `config`. Empty means valid.
pub fn validate(config: &LoopConfig) -> Vec<String> {
    let mut violations = Vec::new();
    match &config.controller {
        Controller::Fosmc(gain) => {
            if !(gain.magnitude > 0.0) {
                violations.push("M must be positive".to_string());
            }
            let delta = config.disturbance.magnitude_bound();
            if delta > 0.0 && gain.magnitude <= delta {
                violations.push("M must exceed the disturbance bound delta".to_string());
            }
        }
        Controller::Sta(gains) => {
            if !(gains.k1 > 0.0) {
                violations.push("k1 must be positive".to_string());
            }
            if !(gains.k2 > 0.0) {
                violations.push("k2 must be positive".to_string());
            }
        }
    }
    let mu = config.actuator.time_constant;
    if !(mu > 0.0) {
        violations.push("mu must be positive".to_string());
    }
    if !(config.disturbance.amplitude >= 0.0) {
        violations.push("alpha must be nonnegative".to_string());
    }
    if !(config.disturbance.frequency >= 0.0) {
        violations.push("Omega must be nonnegative".to_string());
    }
    if !(config.h > 0.0) {
        violations.push("h must be positive".to_string());
    }
    if config.h > 0.0 {
        if !(config.t_end >= 100.0 * config.h) {
            violations.push("t_end must be at least 100*h".to_string());
        }
        if mu > 0.0 && config.h > mu / 50.0 {
            violations.push("h exceeds mu/50".to_string());
        }
    }
    for (value, name) in [
        (config.x0, "x0"),
        (config.z0[0], "z0[0]"),
        (config.z0[1], "z0[1]"),
        (config.v0, "v0"),
        (config.t_end, "t_end"),
    ] {
        if !value.is_finite() {
            violations.push(format!("{name} must be finite"));
        }
    }
    violations
}

/// Limit-cycle estimate: amplitude, angular frequency, and the averaged power
/// of the first-harmonic waveform. The power is stored redundantly and always
/// equals `A^2 omega^2 / 2` for values built through
/// [`ChatterPrediction::from_amplitude_omega`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChatterPrediction {
    pub amplitude: f64,
    pub omega: f64,
    pub power: f64,
}

impl ChatterPrediction {
    pub fn from_amplitude_omega(amplitude: f64, omega: f64) -> Self {
        Self {
            amplitude,
            omega,
            power: 0.5 * amplitude * amplitude * omega * omega,
        }
    }

    /// Relative mismatch between the stored power and `A^2 omega^2 / 2`.
    pub fn consistency_residual(&self) -> f64 {
        let recomputed = 0.5 * self.amplitude * self.amplitude * self.omega * self.omega;
        (self.power - recomputed).abs() / self.power.abs().max(f64::MIN_POSITIVE)
    }
}

// ---------------------------------------------------------------------------
// Config file I/O: a flat JSON object with dotted keys.
// ---------------------------------------------------------------------------

/// Error from parsing a loop config document.
#[derive(Debug)]
pub enum ConfigError {
    Json(serde_json::Error),
    NotAnObject,
    MissingKey(&'static str),
    UnknownKey(String),
    WrongType { key: String, expected: &'static str },
    BadControllerType(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Json(e) => write!(f, "config is not valid JSON: {e}"),
            ConfigError::NotAnObject => write!(f, "config must be a JSON object"),
            ConfigError::MissingKey(k) => write!(f, "missing config key {k}"),
            ConfigError::UnknownKey(k) => write!(f, "unknown config key {k}"),
            ConfigError::WrongType { key, expected } => {
                write!(f, "config key {key} must be {expected}")
            }
            ConfigError::BadControllerType(t) => {
                write!(
                    f,
                    "controller.type must be \"fosmc\" or \"sta\", got \"{t}\""
                )
            }
        }
    }
}

impl std::error::Error for ConfigError {}

fn take_number(map: &mut Map<String, Value>, key: &'static str) -> Result<f64, ConfigError> {
    match map.remove(key) {
        Some(Value::Number(n)) => n.as_f64().ok_or(ConfigError::WrongType {
            key: key.to_string(),
            expected: "a number",
        }),
        Some(_) => Err(ConfigError::WrongType {
            key: key.to_string(),
            expected: "a number",
        }),
        None => Err(ConfigError::MissingKey(key)),
    }
}

fn take_optional_number(
    map: &mut Map<String, Value>,
    key: &'static str,
) -> Result<Option<f64>, ConfigError> {
    match map.remove(key) {
        None => Ok(None),
        Some(Value::Number(n)) => n.as_f64().map(Some).ok_or(ConfigError::WrongType {
            key: key.to_string(),
            expected: "a number",
        }),
        Some(_) => Err(ConfigError::WrongType {
            key: key.to_string(),
            expected: "a number",
        }),
    }
}

/// Parse the flat key/value config document. Unknown keys are an error.
///
/// Required keys: `controller.type` plus its gains (`controller.M` for
/// `"fosmc"`, `controller.k1`/`controller.k2` for `"sta"`), `actuator.mu`,
/// `disturbance.alpha`, `disturbance.Omega`, `sim.x0`, `sim.t_end`, `sim.h`.
/// Optional: `sim.z0` (pair) and `sim.v0`, defaulting to zero.
pub fn parse_config(text: &str) -> Result<LoopConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(ConfigError::Json)?;
    let mut map = match value {
        Value::Object(map) => map,
        _ => return Err(ConfigError::NotAnObject),
    };

    let controller_type = match map.remove("controller.type") {
        Some(Value::String(s)) => s,
        Some(_) => {
            return Err(ConfigError::WrongType {
                key: "controller.type".to_string(),
                expected: "a string",
            })
        }
        None => return Err(ConfigError::MissingKey("controller.type")),
    };
    let controller = match controller_type.as_str() {
        "fosmc" => Controller::Fosmc(FosmcGain {
            magnitude: take_number(&mut map, "controller.M")?,
        }),
        "sta" => Controller::Sta(StaGains {
            k1: take_number(&mut map, "controller.k1")?,
            k2: take_number(&mut map, "controller.k2")?,
        }),
        other => return Err(ConfigError::BadControllerType(other.to_string())),
    };

    let mu = take_number(&mut map, "actuator.mu")?;
    let alpha = take_number(&mut map, "disturbance.alpha")?;
    let big_omega = take_number(&mut map, "disturbance.Omega")?;
    let x0 = take_number(&mut map, "sim.x0")?;
    let t_end = take_number(&mut map, "sim.t_end")?;
    let h = take_number(&mut map, "sim.h")?;

    let z0 = match map.remove("sim.z0") {
        None => [0.0, 0.0],
        Some(Value::Array(items)) if items.len() == 2 => {
            let mut z0 = [0.0; 2];
            for (slot, item) in z0.iter_mut().zip(items) {
                *slot = item.as_f64().ok_or(ConfigError::WrongType {
                    key: "sim.z0".to_string(),
                    expected: "a pair of numbers",
                })?;
            }
            z0
        }
        Some(_) => {
            return Err(ConfigError::WrongType {
                key: "sim.z0".to_string(),
                expected: "a pair of numbers",
            })
        }
    };
    let v0 = take_optional_number(&mut map, "sim.v0")?.unwrap_or(0.0);

    if let Some(key) = map.keys().next() {
        return Err(ConfigError::UnknownKey(key.clone()));
    }

    Ok(LoopConfig {
        controller,
        actuator: ActuatorSpec { time_constant: mu },
        disturbance: DisturbanceSpec::new(alpha, big_omega),
        x0,
        z0,
        v0,
        t_end,
        h,
    })
}

fn json_number(x: f64) -> Value {
    // Finite by validation; fall back to 0 rather than panic on NaN.
    Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// Serialize a config to the flat key/value document accepted by
/// [`parse_config`]. Round-trips every field exactly.
pub fn config_to_string(config: &LoopConfig) -> String {
    let mut map = Map::new();
    map.insert(
        "controller.type".into(),
        Value::String(config.controller.name().into()),
    );
    match &config.controller {
        Controller::Fosmc(gain) => {
            map.insert("controller.M".into(), json_number(gain.magnitude));
        }
        Controller::Sta(gains) => {
            map.insert("controller.k1".into(), json_number(gains.k1));
            map.insert("controller.k2".into(), json_number(gains.k2));
        }
    }
    map.insert(
        "actuator.mu".into(),
        json_number(config.actuator.time_constant),
    );
    map.insert(
        "disturbance.alpha".into(),
        json_number(config.disturbance.amplitude),
    );
    map.insert(
        "disturbance.Omega".into(),
        json_number(config.disturbance.frequency),
    );
    map.insert("sim.x0".into(), json_number(config.x0));
    map.insert(
        "sim.z0".into(),
        Value::Array(vec![json_number(config.z0[0]), json_number(config.z0[1])]),
    );
    map.insert("sim.v0".into(), json_number(config.v0));
    map.insert("sim.t_end".into(), json_number(config.t_end));
    map.insert("sim.h".into(), json_number(config.h));
    serde_json::to_string_pretty(&Value::Object(map)).expect("serializing a flat map cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sta_config(mu: f64, h: f64, t_end: f64) -> LoopConfig {
        LoopConfig {
            controller: Controller::Sta(StaGains { k1: 2.127, k2: 1.1 }),
            actuator: ActuatorSpec { time_constant: mu },
            disturbance: DisturbanceSpec::none(),
            x0: 1.0,
            z0: [0.0, 0.0],
            v0: 0.0,
            t_end,
            h,
        }
    }

    #[test]
    fn validate_accepts_well_formed_config() {
        let config = sta_config(0.01, 0.01 / 200.0, 1.0);
        assert!(validate(&config).is_empty());
    }

    #[test]
    fn validate_flags_oversized_step() {
        let config = sta_config(0.01, 0.01, 10.0);
        let violations = validate(&config);
        assert_eq!(violations, vec!["h exceeds mu/50".to_string()]);
    }

    #[test]
    fn validate_flags_bad_gains_and_short_horizon() {
        let mut config = sta_config(0.01, 0.01 / 200.0, 1.0);
        config.controller = Controller::Sta(StaGains { k1: 0.0, k2: -1.0 });
        config.t_end = 40.0 * config.h;
        let violations = validate(&config);
        assert!(violations.contains(&"k1 must be positive".to_string()));
        assert!(violations.contains(&"k2 must be positive".to_string()));
        assert!(violations.contains(&"t_end must be at least 100*h".to_string()));
    }

    #[test]
    fn validate_requires_relay_gain_above_disturbance_bound() {
        let mut config = sta_config(0.01, 0.01 / 200.0, 1.0);
        config.controller = Controller::Fosmc(FosmcGain { magnitude: 0.9 });
        config.disturbance = DisturbanceSpec::new(1.0, 10.0);
        let violations = validate(&config);
        assert_eq!(
            violations,
            vec!["M must exceed the disturbance bound delta".to_string()]
        );
    }

    #[test]
    fn disturbance_bounds_derive_from_amplitude_and_frequency() {
        let d = DisturbanceSpec::new(1.0, 10.0);
        assert_eq!(d.magnitude_bound(), 1.0);
        assert_eq!(d.rate_bound(), 10.0);
    }

    #[test]
    fn prediction_power_self_verifies() {
        let p = ChatterPrediction::from_amplitude_omega(8.403380995, 5.0);
        assert_eq!(p.consistency_residual(), 0.0);
        assert!((p.power - 882.710).abs() / 882.710 < 5e-4);
    }

    #[test]
    fn config_round_trips_through_text() {
        let mut config = sta_config(0.01, 5e-5, 2.0);
        config.disturbance = DisturbanceSpec::new(1.0, 10.0);
        config.z0 = [0.25, -0.5];
        config.v0 = 0.125;
        let text = config_to_string(&config);
        let parsed = parse_config(&text).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn parse_rejects_unknown_keys() {
        let mut config = sta_config(0.01, 5e-5, 2.0);
        config.disturbance = DisturbanceSpec::new(0.0, 0.0);
        let text = config_to_string(&config).replace("\"sim.v0\"", "\"sim.v9\"");
        match parse_config(&text) {
            Err(ConfigError::UnknownKey(k)) => assert_eq!(k, "sim.v9"),
            other => panic!("expected unknown-key error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_missing_gain_for_controller_type() {
        let text = r#"{
            "controller.type": "fosmc",
            "actuator.mu": 0.01,
            "disturbance.alpha": 0.0,
            "disturbance.Omega": 0.0,
            "sim.x0": 1.0,
            "sim.t_end": 1.0,
            "sim.h": 5e-5
        }"#;
        match parse_config(text) {
            Err(ConfigError::MissingKey(k)) => assert_eq!(k, "controller.M"),
            other => panic!("expected missing-key error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_gain_keys_from_the_other_controller() {
        let text = r#"{
            "controller.type": "fosmc",
            "controller.M": 1.1,
            "controller.k1": 2.0,
            "actuator.mu": 0.01,
            "disturbance.alpha": 0.0,
            "disturbance.Omega": 0.0,
            "sim.x0": 1.0,
            "sim.t_end": 1.0,
            "sim.h": 5e-5
        }"#;
        match parse_config(text) {
            Err(ConfigError::UnknownKey(k)) => assert_eq!(k, "controller.k1"),
            other => panic!("expected unknown-key error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_bad_controller_type() {
        let text = r#"{"controller.type": "pid"}"#;
        assert!(matches!(
            parse_config(text),
            Err(ConfigError::BadControllerType(_))
        ));
    }

    proptest! {
        #[test]
        fn any_valid_config_round_trips(
            is_sta in any::<bool>(),
            g1 in 1e-3..1e3f64,
            g2 in 1e-3..1e3f64,
            mu in 1e-4..1.0f64,
            alpha in 0.0..100.0f64,
            freq in 0.0..1e3f64,
            x0 in -10.0..10.0f64,
            z0a in -5.0..5.0f64,
            z0b in -5.0..5.0f64,
            v0 in -5.0..5.0f64,
        ) {
            let controller = if is_sta {
                Controller::Sta(StaGains { k1: g1, k2: g2 })
            } else {
                Controller::Fosmc(FosmcGain { magnitude: g1 + alpha })
            };
            let config = LoopConfig {
                controller,
                actuator: ActuatorSpec { time_constant: mu },
                disturbance: DisturbanceSpec::new(alpha, freq),
                x0,
                z0: [z0a, z0b],
                v0,
                t_end: 300.0 * default_step(mu),
                h: default_step(mu),
            };
            let parsed = parse_config(&config_to_string(&config)).unwrap();
            prop_assert_eq!(parsed, config);
        }

        #[test]
        fn disturbance_bounds_are_exact(alpha in 0.0..1e6f64, freq in 0.0..1e6f64) {
            let d = DisturbanceSpec::new(alpha, freq);
            prop_assert_eq!(d.magnitude_bound(), alpha);
            prop_assert_eq!(d.rate_bound(), alpha * freq);
        }
    }
}
