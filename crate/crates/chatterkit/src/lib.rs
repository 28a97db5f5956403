//! Chattering analysis for sliding-mode control loops with parasitic actuator
//! dynamics.
//!
//! A relay controller (`u = -M sign(x)`) or a super-twisting controller driving
//! a first-order plant through a second-order critically damped actuator
//! settles into a finite-amplitude, high-frequency limit cycle. This crate
//! predicts that limit cycle with describing-function / harmonic-balance
//! analysis, selects super-twisting gains that minimize the predicted
//! amplitude or averaged power, and cross-checks every prediction against a
//! deterministic fixed-step time-domain simulation.
//!
//! Module map:
//! - [`model`]: value types for the closed loop, validation, config file I/O.
//! - [`freq`]: actuator-plant frequency response and describing functions.
//! - [`hb`]: closed-form harmonic-balance predictions plus a numeric solver.
//! - [`design`]: gain selection, stability inequality, critical actuator
//!   time-constants where relay and super-twisting predictions coincide.
//! - [`sim`]: fixed-step RK4 integration of the full loop.
//! - [`waveform`]: steady-state amplitude/frequency/power extraction.
//! - [`repro`]: canned benchmark tables and figure sweeps as CSV.
//! - [`cli`]: the `chatterkit` command-line front end.

// Negated comparisons in validation (`!(x > 0.0)`) keep NaN on the rejecting
// side; rewriting them as `x <= 0.0` would wave NaN configs through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod design;
pub mod freq;
pub mod hb;
pub mod model;
pub mod repro;
pub mod sim;
pub mod waveform;

pub use design::{CriticalAtc, DesignObjective};
pub use model::{
    ActuatorSpec, ChatterPrediction, Controller, DisturbanceSpec, FosmcGain, LoopConfig, StaGains,
};
pub use sim::Trajectory;
pub use waveform::WaveformReport;
