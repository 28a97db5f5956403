//! Steady-state chattering measurement on recorded trajectories.
//!
//! The analysis window lives in the second half of the run, trimmed to an
//! integer number of periods between zero up-crossings of the mean-removed
//! output. Frequency comes from counting crossings (chattering waveforms are
//! near-sinusoidal, so crossing counts beat spectral estimation for the
//! cost), amplitude is the per-period half peak-to-peak averaged over the
//! window, and the averaged power is the time-average of the recorded
//! `xdot^2` channel.

use std::fmt;

use crate::sim::Trajectory;

/// Measured steady-state oscillation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformReport {
    /// Half peak-to-peak of the output, averaged over whole periods.
    pub amplitude: f64,
    /// Angular frequency from the crossing count over the window.
    pub omega: f64,
    /// Time-average of `xdot^2` over the window.
    pub power: f64,
    /// Max |x| over the window; the accuracy metric used by the sweep tables.
    pub peak: f64,
    /// Analyzed time window.
    pub window: (f64, f64),
    /// Whole periods inside the window (at least [`MIN_PERIODS`]).
    pub n_periods: usize,
}

/// Minimum number of whole periods for a trustworthy measurement.
pub const MIN_PERIODS: usize = 10;

impl WaveformReport {
    pub fn csv_header() -> &'static str {
        "A_meas,omega_meas,P_meas,A_max,t_start,t_end,n_periods"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            self.amplitude,
            self.omega,
            self.power,
            self.peak,
            self.window.0,
            self.window.1,
            self.n_periods
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveformError {
    /// Trajectory too short to hold an analysis window.
    TooShort,
    /// Fewer than [`MIN_PERIODS`] whole periods in the second half.
    NoSteadyOscillation { periods_found: usize },
}

impl fmt::Display for WaveformError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WaveformError::TooShort => write!(f, "trajectory too short to analyze"),
            WaveformError::NoSteadyOscillation { periods_found } => write!(
                f,
                "no steady oscillation: {periods_found} whole periods found, need {MIN_PERIODS}"
            ),
        }
    }
}

impl std::error::Error for WaveformError {}

/// Zero up-crossings of the mean-removed output in the second half of the
/// trajectory. `indices[k]` is the sample before crossing `k`; `times[k]` is
/// the linearly interpolated crossing instant.
struct Crossings {
    indices: Vec<usize>,
    times: Vec<f64>,
}

fn find_crossings(traj: &Trajectory) -> Result<Crossings, WaveformError> {
    let n = traj.samples.len();
    if n < 16 {
        return Err(WaveformError::TooShort);
    }
    let start = n / 2;
    let tail = &traj.samples[start..];
    let mean = tail.iter().map(|s| s.x).sum::<f64>() / tail.len() as f64;

    let mut indices = Vec::new();
    let mut times = Vec::new();
    for (offset, pair) in tail.windows(2).enumerate() {
        let before = pair[0].x - mean;
        let after = pair[1].x - mean;
        if before < 0.0 && after >= 0.0 {
            let frac = -before / (after - before);
            indices.push(start + offset);
            times.push(pair[0].t + frac * (pair[1].t - pair[0].t));
        }
    }
    if indices.len() < MIN_PERIODS + 1 {
        return Err(WaveformError::NoSteadyOscillation {
            periods_found: indices.len().saturating_sub(1),
        });
    }
    Ok(Crossings { indices, times })
}

/// The integer-period analysis window `(t_start, t_end)` in the second half
/// of the trajectory: first to last zero up-crossing of the mean-removed
/// output.
pub fn steady_window(traj: &Trajectory) -> Result<(f64, f64), WaveformError> {
    let crossings = find_crossings(traj)?;
    Ok((
        *crossings.times.first().unwrap(),
        *crossings.times.last().unwrap(),
    ))
}

/// Measure amplitude, frequency, averaged power, and peak over the steady
/// window.
pub fn measure(traj: &Trajectory) -> Result<WaveformReport, WaveformError> {
    let crossings = find_crossings(traj)?;
    let last = crossings.indices.len() - 1;
    Ok(measure_between(traj, &crossings, 0, last))
}

fn measure_between(
    traj: &Trajectory,
    crossings: &Crossings,
    first: usize,
    last: usize,
) -> WaveformReport {
    let n_periods = last - first;
    let t_start = crossings.times[first];
    let t_end = crossings.times[last];
    let omega = 2.0 * std::f64::consts::PI * n_periods as f64 / (t_end - t_start);

    let mut amplitude_sum = 0.0;
    for k in first..last {
        let segment = &traj.samples[crossings.indices[k]..=crossings.indices[k + 1]];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in segment {
            lo = lo.min(s.x);
            hi = hi.max(s.x);
        }
        amplitude_sum += 0.5 * (hi - lo);
    }
    let amplitude = amplitude_sum / n_periods as f64;

    let window = &traj.samples[crossings.indices[first]..=crossings.indices[last]];
    let power = trapezoid(window, |s| s.xdot * s.xdot)
        / (window.last().unwrap().t - window.first().unwrap().t);
    let peak = window.iter().map(|s| s.x.abs()).fold(0.0f64, f64::max);

    WaveformReport {
        amplitude,
        omega,
        power,
        peak,
        window: (t_start, t_end),
        n_periods,
    }
}

/// Energy-style chattering measure: `(integral |xdot|^p over the steady
/// window)^(1/p)`. Signed `xdot^p` at odd `p` would cancel over a period, so
/// the absolute value is used.
pub fn levant_energy(traj: &Trajectory, p: u32) -> Result<f64, WaveformError> {
    assert!(p >= 1, "p must be at least 1");
    let crossings = find_crossings(traj)?;
    let window = &traj.samples[crossings.indices[0]..=*crossings.indices.last().unwrap()];
    let integral = trapezoid(window, |s| s.xdot.abs().powi(p as i32));
    Ok(integral.powf(1.0 / p as f64))
}

fn trapezoid(samples: &[crate::sim::Sample], f: impl Fn(&crate::sim::Sample) -> f64) -> f64 {
    let mut sum = 0.0;
    for pair in samples.windows(2) {
        sum += 0.5 * (f(&pair[0]) + f(&pair[1])) * (pair[1].t - pair[0].t);
    }
    sum
}
