//! The `chatterkit` command line: prediction, gain design, simulation,
//! parameter sweeps, and one-command benchmark reproduction.
//!
//! Exit codes: 0 on success, 1 for runtime failures (divergence, no steady
//! oscillation), 2 for usage and validation errors.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::design::{
    design_gains_with_margin, stability_check, DesignObjective, DEFAULT_K2_MARGIN,
};
use crate::hb::{self, sta_constants};
use crate::model::{
    default_horizon, default_step, parse_config, validate, Controller, DisturbanceSpec, FosmcGain,
    LoopConfig, StaGains,
};
use crate::repro::{self, ReproTarget};
use crate::sim::simulate;
use crate::waveform::measure;

#[derive(Parser)]
#[command(
    name = "chatterkit",
    version,
    about = "Predict, design against, and measure chattering in relay and super-twisting loops"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form limit-cycle prediction, cross-checked by the numeric solver
    Predict(PredictCmd),
    /// Select super-twisting gains from a disturbance rate bound
    Design(DesignCmd),
    /// Simulate the loop, measure the steady oscillation, compare with the prediction
    Simulate(SimulateCmd),
    /// Sweep mu, Omega, or k1 and emit per-point predictions as CSV
    Sweep(SweepCmd),
    /// Re-run a canned benchmark table or figure and emit CSV
    Reproduce(ReproduceCmd),
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Predict(cmd) => cmd.execute(),
        Command::Design(cmd) => cmd.execute(),
        Command::Simulate(cmd) => cmd.execute(),
        Command::Sweep(cmd) => cmd.execute(),
        Command::Reproduce(cmd) => cmd.execute(),
    }
}

/// Flags mirroring the config file keys. `--config` replaces the whole set.
#[derive(Args, Debug, Clone)]
struct LoopArgs {
    /// Controller type: fosmc | sta
    #[arg(long)]
    controller: Option<String>,
    /// Relay control magnitude (fosmc)
    #[arg(long = "M")]
    magnitude: Option<f64>,
    /// Super-twisting square-root gain (sta)
    #[arg(long)]
    k1: Option<f64>,
    /// Super-twisting integral gain (sta)
    #[arg(long)]
    k2: Option<f64>,
    /// Actuator time-constant
    #[arg(long)]
    mu: Option<f64>,
    /// Disturbance amplitude in F = alpha sin(Omega t)
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Disturbance angular frequency
    #[arg(long = "Omega", default_value_t = 0.0)]
    omega: f64,
    /// Initial plant output
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    /// Integration step; defaults to mu/200
    #[arg(long)]
    h: Option<f64>,
    /// Horizon; defaults to 200 chattering periods and 40 disturbance periods
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Read the loop from a config file instead of flags
    #[arg(
        long,
        conflicts_with_all = ["controller", "magnitude", "k1", "k2", "mu", "alpha", "omega", "x0", "h", "t_end"]
    )]
    config: Option<PathBuf>,
}

impl LoopArgs {
    fn build(&self) -> Result<LoopConfig, Failure> {
        let config = if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| Failure::usage(e.to_string()))?
        } else {
            let controller = match self.controller.as_deref() {
                Some("fosmc") => Controller::Fosmc(FosmcGain {
                    magnitude: self.magnitude.ok_or_else(|| {
                        Failure::usage("--M is required for the fosmc controller")
                    })?,
                }),
                Some("sta") => Controller::Sta(StaGains {
                    k1: self
                        .k1
                        .ok_or_else(|| Failure::usage("--k1 is required for the sta controller"))?,
                    k2: self
                        .k2
                        .ok_or_else(|| Failure::usage("--k2 is required for the sta controller"))?,
                }),
                Some(other) => {
                    return Err(Failure::usage(format!(
                        "unknown controller \"{other}\" (expected fosmc or sta)"
                    )))
                }
                None => return Err(Failure::usage("--controller (or --config) is required")),
            };
            let mu = self.mu.ok_or_else(|| Failure::usage("--mu is required"))?;
            LoopConfig {
                controller,
                actuator: crate::model::ActuatorSpec { time_constant: mu },
                disturbance: DisturbanceSpec::new(self.alpha, self.omega),
                x0: self.x0,
                z0: [0.0, 0.0],
                v0: 0.0,
                t_end: self
                    .t_end
                    .unwrap_or_else(|| default_horizon(mu, self.omega)),
                h: self.h.unwrap_or_else(|| default_step(mu)),
            }
        };
        let violations = validate(&config);
        if !violations.is_empty() {
            return Err(Failure::usage(violations.join("; ")));
        }
        Ok(config)
    }
}

fn describe_controller(controller: &Controller) -> String {
    match controller {
        Controller::Fosmc(gain) => format!("fosmc (M={})", sig6(gain.magnitude)),
        Controller::Sta(gains) => {
            format!("sta (k1={}, k2={})", sig6(gains.k1), sig6(gains.k2))
        }
    }
}

#[derive(Args)]
struct PredictCmd {
    #[command(flatten)]
    loop_args: LoopArgs,
    /// Also write the prediction as CSV
    #[arg(long)]
    out: Option<PathBuf>,
}

impl PredictCmd {
    fn execute(self) -> Result<(), Failure> {
        let config = self.loop_args.build()?;
        let mu = config.mu();
        let prediction = hb::predict(&config.controller, mu);
        let numeric = hb::hb_solve_numeric(&config.controller, mu)
            .map_err(|e| Failure::runtime(e.to_string()))?;
        println!("controller: {}", describe_controller(&config.controller));
        println!("mu:         {}", sig6(mu));
        println!("A:          {}", sig6(prediction.amplitude));
        println!("omega:      {}", sig6(prediction.omega));
        println!("P:          {}", sig6(prediction.power));
        println!("hbe residual (numeric oracle): {:.2e}", numeric.residual);
        if let Some(path) = &self.out {
            let mut out = open_csv(path)?;
            writeln!(out, "A,omega,P,hbe_residual")
                .and_then(|_| {
                    writeln!(
                        out,
                        "{:.16e},{:.16e},{:.16e},{:.16e}",
                        prediction.amplitude, prediction.omega, prediction.power, numeric.residual
                    )
                })
                .map_err(|e| Failure::runtime(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ObjectiveArg {
    Amplitude,
    Power,
}

#[derive(Args)]
struct DesignCmd {
    /// Disturbance rate bound Delta (bound on |dF/dt|)
    #[arg(long = "Delta")]
    rate_bound: f64,
    /// Minimize the predicted amplitude or the averaged power
    #[arg(long, value_enum)]
    objective: ObjectiveArg,
    /// k2 = margin * Delta
    #[arg(long = "k2-margin", default_value_t = DEFAULT_K2_MARGIN)]
    k2_margin: f64,
}

impl DesignCmd {
    fn execute(self) -> Result<(), Failure> {
        if !(self.rate_bound > 0.0) {
            return Err(Failure::usage("Delta must be positive"));
        }
        if !(self.k2_margin > 1.0) {
            return Err(Failure::usage("k2 margin must exceed one"));
        }
        let objective = match self.objective {
            ObjectiveArg::Amplitude => DesignObjective::MinAmplitude,
            ObjectiveArg::Power => DesignObjective::MinPower,
        };
        let gains = design_gains_with_margin(self.rate_bound, objective, self.k2_margin);
        let constants = sta_constants(&gains);
        let stable = stability_check(&gains, self.rate_bound);
        println!("k1:       {}", sig6(gains.k1));
        println!("k2:       {}", sig6(gains.k2));
        println!(
            "stability (k1 > 1.414 sqrt(k2), k2 > Delta): {}",
            if stable { "satisfied" } else { "VIOLATED" }
        );
        println!("A/mu^2:   {}", sig6(constants.amplitude_coeff));
        println!("omega*mu: {}", sig6(constants.omega_coeff));
        println!("P/mu^2:   {}", sig6(constants.power_coeff()));
        Ok(())
    }
}

#[derive(Args)]
struct SimulateCmd {
    #[command(flatten)]
    loop_args: LoopArgs,
    /// Trajectory CSV output path
    #[arg(long)]
    out: PathBuf,
    /// Also write the measured waveform report as a one-row CSV
    #[arg(long = "report-out")]
    report_out: Option<PathBuf>,
}

impl SimulateCmd {
    fn execute(self) -> Result<(), Failure> {
        let config = self.loop_args.build()?;
        let trajectory = simulate(&config).map_err(|e| Failure::runtime(e.to_string()))?;
        {
            let mut out = open_csv(&self.out)?;
            trajectory
                .write_csv(&mut out)
                .and_then(|_| out.flush())
                .map_err(|e| {
                    Failure::runtime(format!("cannot write {}: {e}", self.out.display()))
                })?;
        }
        let report = measure(&trajectory).map_err(|e| Failure::runtime(e.to_string()))?;
        if let Some(path) = &self.report_out {
            let mut out = open_csv(path)?;
            writeln!(out, "{}", crate::waveform::WaveformReport::csv_header())
                .and_then(|_| writeln!(out, "{}", report.csv_row()))
                .and_then(|_| out.flush())
                .map_err(|e| Failure::runtime(format!("cannot write {}: {e}", path.display())))?;
        }
        let prediction = hb::predict(&config.controller, config.mu());
        println!(
            "samples:   {} (h={}) -> {}",
            trajectory.len(),
            sig6(config.h),
            self.out.display()
        );
        println!(
            "measured:  A={} omega={} P={} A_max={} periods={} window=[{}, {}]",
            sig6(report.amplitude),
            sig6(report.omega),
            sig6(report.power),
            sig6(report.peak),
            report.n_periods,
            sig6(report.window.0),
            sig6(report.window.1),
        );
        println!(
            "predicted: A={} omega={} P={}",
            sig6(prediction.amplitude),
            sig6(prediction.omega),
            sig6(prediction.power),
        );
        println!(
            "deviation: A {} omega {} P {}",
            percent(report.amplitude, prediction.amplitude),
            percent(report.omega, prediction.omega),
            percent(report.power, prediction.power),
        );
        Ok(())
    }
}

/// Which loop parameter a sweep scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Mu,
    Omega,
    K1,
}

impl SweepVariable {
    pub fn column_name(&self) -> &'static str {
        match self {
            SweepVariable::Mu => "mu",
            SweepVariable::Omega => "Omega",
            SweepVariable::K1 => "k1",
        }
    }
}

/// Sweep points: an explicit list or a log-spaced range.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepValues {
    List(Vec<f64>),
    LogRange { start: f64, stop: f64, count: usize },
}

/// A parameter sweep over a base loop configuration.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: SweepValues,
    pub base: LoopConfig,
}

impl SweepSpec {
    /// Invariant violations: at least two positive points, and k1 sweeps need
    /// a super-twisting base controller.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        let values = self.resolve_values();
        if values.len() < 2 {
            violations.push("sweep needs at least 2 values".to_string());
        }
        if !values.iter().all(|v| *v > 0.0 && v.is_finite()) {
            violations.push("sweep values must be positive".to_string());
        }
        if self.variable == SweepVariable::K1 && !matches!(self.base.controller, Controller::Sta(_))
        {
            violations.push("k1 sweeps require an sta controller".to_string());
        }
        violations
    }

    pub fn resolve_values(&self) -> Vec<f64> {
        match &self.values {
            SweepValues::List(values) => values.clone(),
            SweepValues::LogRange { start, stop, count } => {
                if *start > 0.0 && *stop > *start && *count >= 2 {
                    repro::log_grid(*start, *stop, *count)
                } else {
                    Vec::new()
                }
            }
        }
    }

    /// Base config with the swept variable set to `value`. Sweeping mu or
    /// Omega re-derives the default step and horizon for the new point.
    pub fn config_for(&self, value: f64) -> LoopConfig {
        let mut config = self.base.clone();
        match self.variable {
            SweepVariable::Mu => {
                config.actuator.time_constant = value;
                config.h = default_step(value);
                config.t_end = default_horizon(value, config.disturbance.frequency);
            }
            SweepVariable::Omega => {
                config.disturbance.frequency = value;
                config.t_end = default_horizon(config.mu(), value);
            }
            SweepVariable::K1 => {
                if let Controller::Sta(gains) = &mut config.controller {
                    gains.k1 = value;
                }
            }
        }
        config
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SweepVariableArg {
    Mu,
    #[value(name = "Omega", alias = "omega")]
    Omega,
    K1,
}

#[derive(Args)]
struct SweepCmd {
    #[command(flatten)]
    loop_args: LoopArgs,
    /// Swept parameter
    #[arg(long, value_enum)]
    variable: SweepVariableArg,
    /// Explicit comma-separated sweep values
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["start", "stop", "count"])]
    values: Vec<f64>,
    /// Log-range start
    #[arg(long, requires = "stop", requires = "count")]
    start: Option<f64>,
    /// Log-range stop
    #[arg(long)]
    stop: Option<f64>,
    /// Log-range point count
    #[arg(long)]
    count: Option<usize>,
    /// Also simulate each point and append measured columns
    #[arg(long)]
    simulate: bool,
    /// Sweep CSV output path
    #[arg(long)]
    out: PathBuf,
}

impl SweepCmd {
    fn execute(self) -> Result<(), Failure> {
        let base = self.loop_args.build()?;
        let variable = match self.variable {
            SweepVariableArg::Mu => SweepVariable::Mu,
            SweepVariableArg::Omega => SweepVariable::Omega,
            SweepVariableArg::K1 => SweepVariable::K1,
        };
        let values = if !self.values.is_empty() {
            SweepValues::List(self.values.clone())
        } else {
            match (self.start, self.stop, self.count) {
                (Some(start), Some(stop), Some(count)) => {
                    SweepValues::LogRange { start, stop, count }
                }
                _ => {
                    return Err(Failure::usage(
                        "pass either --values or the full --start/--stop/--count log range",
                    ))
                }
            }
        };
        let spec = SweepSpec {
            variable,
            values,
            base,
        };
        let violations = spec.validate();
        if !violations.is_empty() {
            return Err(Failure::usage(violations.join("; ")));
        }

        let mut out = open_csv(&self.out)?;
        let write_failure = |e: std::io::Error| {
            Failure::runtime(format!("cannot write {}: {e}", self.out.display()))
        };
        let mut header = format!("{},A_hb,omega_hb,P_hb", spec.variable.column_name());
        if self.simulate {
            header.push_str(",A_sim,omega_sim,P_sim");
        }
        writeln!(out, "{header}").map_err(write_failure)?;
        for value in spec.resolve_values() {
            let config = spec.config_for(value);
            let prediction = hb::predict(&config.controller, config.mu());
            let mut line = format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                value, prediction.amplitude, prediction.omega, prediction.power
            );
            if self.simulate {
                let measured = simulate(&config)
                    .map_err(|e| e.to_string())
                    .and_then(|t| measure(&t).map_err(|e| e.to_string()));
                match measured {
                    Ok(report) => line.push_str(&format!(
                        ",{:.16e},{:.16e},{:.16e}",
                        report.amplitude, report.omega, report.power
                    )),
                    Err(message) => {
                        eprintln!(
                            "warning: {}={} failed: {message}",
                            spec.variable.column_name(),
                            value
                        );
                        line.push_str(",nan,nan,nan");
                    }
                }
            }
            writeln!(out, "{line}").map_err(write_failure)?;
        }
        out.flush().map_err(write_failure)?;
        Ok(())
    }
}

#[derive(Args)]
struct ReproduceCmd {
    /// Benchmark to reproduce: table1..table5, fig2, fig3, fig5
    target: String,
    /// Output CSV path; defaults to <target>.csv
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ReproduceCmd {
    fn execute(self) -> Result<(), Failure> {
        let target: ReproTarget = self.target.parse().map_err(Failure::usage)?;
        let path = self
            .out
            .unwrap_or_else(|| PathBuf::from(format!("{}.csv", target.name())));
        let mut out = open_csv(&path)?;
        let outcome = repro::write_report(target, &mut out)
            .and_then(|outcome| out.flush().map(|_| outcome))
            .map_err(|e| Failure::runtime(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {} rows to {}", outcome.rows, path.display());
        if outcome.failures > 0 {
            eprintln!(
                "warning: {} cell(s) failed; see CSV comments",
                outcome.failures
            );
        }
        Ok(())
    }
}

fn open_csv(path: &PathBuf) -> Result<BufWriter<fs::File>, Failure> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::runtime(format!("cannot create {}: {e}", path.display())))
}

/// Six significant digits, plain decimal for moderate magnitudes.
fn sig6(x: f64) -> String {
    const DIGITS: i32 = 6;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    if !(-4..DIGITS).contains(&exponent) {
        format!("{:.*e}", (DIGITS - 1) as usize, x)
    } else {
        format!("{:.*}", (DIGITS - 1 - exponent).max(0) as usize, x)
    }
}

fn percent(measured: f64, predicted: f64) -> String {
    format!("{:+.3}%", 100.0 * (measured - predicted) / predicted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_formats_across_magnitudes() {
        assert_eq!(sig6(882.710152), "882.710");
        assert_eq!(sig6(5.0), "5.00000");
        assert_eq!(sig6(0.0700281749), "0.0700282");
        assert_eq!(sig6(0.00560225), "0.00560225");
        assert_eq!(sig6(1.0e-9), "1.00000e-9");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(-42.01690497), "-42.0169");
    }

    #[test]
    fn mu_sweep_rescales_step_and_horizon() {
        let base = LoopConfig::nominal(Controller::Fosmc(FosmcGain { magnitude: 1.1 }), 0.01);
        let spec = SweepSpec {
            variable: SweepVariable::Mu,
            values: SweepValues::List(vec![0.1, 0.2]),
            base,
        };
        assert!(spec.validate().is_empty());
        let config = spec.config_for(0.1);
        assert_eq!(config.mu(), 0.1);
        assert_eq!(config.h, default_step(0.1));
        assert!(validate(&config).is_empty());
    }

    #[test]
    fn k1_sweep_requires_sta_base() {
        let base = LoopConfig::nominal(Controller::Fosmc(FosmcGain { magnitude: 1.1 }), 0.01);
        let spec = SweepSpec {
            variable: SweepVariable::K1,
            values: SweepValues::List(vec![1.0, 2.0]),
            base,
        };
        assert_eq!(
            spec.validate(),
            vec!["k1 sweeps require an sta controller".to_string()]
        );
    }

    #[test]
    fn sweep_needs_two_positive_points() {
        let base = LoopConfig::nominal(Controller::Fosmc(FosmcGain { magnitude: 1.1 }), 0.01);
        let spec = SweepSpec {
            variable: SweepVariable::Mu,
            values: SweepValues::List(vec![0.1]),
            base: base.clone(),
        };
        assert!(!spec.validate().is_empty());
        let spec = SweepSpec {
            variable: SweepVariable::Mu,
            values: SweepValues::List(vec![0.1, -0.2]),
            base,
        };
        assert!(spec.validate().iter().any(|v| v.contains("positive")));
    }

    #[test]
    fn cli_declaration_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
