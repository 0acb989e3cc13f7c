//! End-to-end experiment descriptions.
//!
//! A [`Scenario`] bundles everything one run needs — emitter, rate model,
//! pump, optional loss model, time grid, and output selection — and runs
//! deterministically to a [`TimeSeries`] tagged with provenance metadata.
//! Scenarios are written as strict TOML documents:
//!
//! ```toml
//! [switch]
//! gamma0_per_ns = 1.0
//! dgamma_per_ns = 4.0
//! t0pu_ps = 150.0
//! tau_sw_ps = 35.0
//!
//! [pump]
//! kind = "delta"
//! t0exc_ps = 0.0
//! ```
//!
//! Runs with a hard-step switch profile and delta excitation take the
//! closed-form path; every other combination integrates the rate equation
//! numerically. Both engines land on the same grid and the same columns, and
//! agree to well below the solver tolerance, so callers never need to know
//! which one ran — the `engine` metadata entry records it anyway.

mod config;
mod series;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::dynamics::{self, EmitterParams};
use crate::integrate::{solve_rate_equation, OdeError, PumpKind, PumpProfile, TimeGrid};
use crate::loss::{linewidth_factor, LossError, LossIntegrator, LossModel};
use crate::rate_models::{CavityTrajectory, StepMode, SwitchProfile};
use crate::ParamError;

pub use config::parse_scenario;
pub use series::{csv_string, read_csv, write_csv, write_csv_to, Column, TimeSeries};

/// How the radiative decay rate varies in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RateModel {
    /// Explicit rate profile: Γ₀ plus an exponentially relaxing step.
    Switch(SwitchProfile),
    /// Rate read off a Lorentzian cavity line dragged across the emitter.
    Trajectory(CavityTrajectory),
}

impl RateModel {
    /// Radiative rate Γ_rad(t) [1/ns].
    pub fn rate(&self, t: f64) -> f64 {
        match self {
            RateModel::Switch(p) => p.rate(t),
            RateModel::Trajectory(tr) => tr.rate(t),
        }
    }

    /// Switch-on time t0pu [ps] — the one breakpoint of the rate profile.
    pub fn t0pu(&self) -> f64 {
        match self {
            RateModel::Switch(p) => p.t0pu,
            RateModel::Trajectory(tr) => tr.t0pu,
        }
    }

    /// Relaxation time constant τ_sw [ps].
    pub fn tau_sw(&self) -> f64 {
        match self {
            RateModel::Switch(p) => p.tau_sw,
            RateModel::Trajectory(tr) => tr.tau_sw,
        }
    }

    /// The switch profile, when this model is one.
    pub fn as_switch(&self) -> Option<&SwitchProfile> {
        match self {
            RateModel::Switch(p) => Some(p),
            RateModel::Trajectory(_) => None,
        }
    }

    /// True when the switch actually moves the rate (zero-amplitude
    /// switches are stationary references and impose no grid constraints).
    pub fn has_switch_event(&self) -> bool {
        match self {
            RateModel::Switch(p) => p.dgamma != 0.0,
            RateModel::Trajectory(tr) => tr.delta_omega_max != 0.0,
        }
    }

    /// Checks the underlying model's field constraints.
    pub fn validate(&self) -> Result<(), ParamError> {
        match self {
            RateModel::Switch(p) => p.validate(),
            RateModel::Trajectory(tr) => tr.validate(),
        }
    }
}

/// Which columns a run emits, and where the CSV goes by default.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSpec {
    /// Emitted columns, in order; must start with [`Column::T`].
    pub columns: Vec<Column>,
    /// Default output file; `None` means the caller decides (stdout).
    pub path: Option<PathBuf>,
}

impl OutputSpec {
    /// The standard column set: time, rate, population, intensity, plus the
    /// three loss columns when a loss model is present.
    pub fn default_columns(with_loss: bool) -> Vec<Column> {
        let mut c = vec![Column::T, Column::GammaRad, Column::N2, Column::Intensity];
        if with_loss {
            c.extend([
                Column::IntensityLossy,
                Column::SShift,
                Column::GammaOverGammaI,
            ]);
        }
        c
    }
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            columns: Self::default_columns(false),
            path: None,
        }
    }
}

/// One complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    /// Initial population, non-radiative channel, excitation instant.
    pub emitter: EmitterParams,
    /// The time-dependent radiative rate.
    pub rate_model: RateModel,
    /// How the emitter is excited.
    pub pump: PumpProfile,
    /// Optional free-carrier absorption riding on the switch's carriers.
    pub loss: Option<LossModel>,
    /// Output grid and solver tolerances.
    pub grid: TimeGrid,
    /// Column selection and default output path.
    pub outputs: OutputSpec,
}

/// Everything that can go wrong between a scenario document and its CSV.
#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    /// The TOML layer rejected the document (syntax or unknown keys);
    /// the message carries line/column positions.
    #[error("scenario parse error: {0}")]
    Parse(String),
    /// Required sections absent; the message lists all of them at once.
    #[error("missing required sections: {0}")]
    MissingSections(String),
    /// A cross-field constraint failed.
    #[error("invalid scenario: {0}")]
    Validation(String),
    /// A component's own field constraints failed.
    #[error(transparent)]
    Param(#[from] ParamError),
    /// The loss model disagreed with the switch or failed to evaluate.
    #[error(transparent)]
    Loss(#[from] LossError),
    /// The rate-equation solver failed.
    #[error(transparent)]
    Ode(#[from] OdeError),
    /// A sweep named an axis this scenario does not have.
    #[error("unknown sweep axis {axis:?}; valid axes for this scenario: {valid}")]
    UnknownAxis {
        /// The axis name as given.
        axis: String,
        /// Comma-separated list of axes this scenario does expose.
        valid: String,
    },
    /// A CSV document could not be parsed back into a time series.
    #[error("csv parse error: {0}")]
    Csv(String),
    /// File input/output failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Scenario {
    /// Checks all component constraints plus the cross-field invariants:
    /// one excitation clock, excitation before the switch, a grid that
    /// covers excitation and switch relaxation, a loss model that shares
    /// the switch's carrier clock, and a coherent column selection.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.emitter.validate()?;
        self.rate_model.validate()?;
        self.pump.validate()?;
        self.grid.validate()?;

        if self.emitter.t0exc != self.pump.t0exc {
            return Err(ScenarioError::Validation(format!(
                "emitter.t0exc ({}) and pump.t0exc_ps ({}) must agree — one excitation \
                 instant drives both",
                self.emitter.t0exc, self.pump.t0exc
            )));
        }

        if self.rate_model.has_switch_event() {
            let t0pu = self.rate_model.t0pu();
            if self.pump.t0exc > t0pu {
                return Err(ScenarioError::Validation(format!(
                    "pump.t0exc_ps ({}) must not exceed t0pu_ps ({}): the emitter is \
                     excited first, then switched",
                    self.pump.t0exc, t0pu
                )));
            }
            if self.grid.t_start > self.pump.t0exc {
                return Err(ScenarioError::Validation(format!(
                    "grid.t_start_ps ({}) must not exceed pump.t0exc_ps ({}) so the grid \
                     covers the excitation",
                    self.grid.t_start, self.pump.t0exc
                )));
            }
            let tail = t0pu + 10.0 * self.rate_model.tau_sw();
            if self.grid.t_end < tail {
                return Err(ScenarioError::Validation(format!(
                    "grid.t_end_ps ({}) must reach t0pu_ps + 10·tau_sw_ps = {} ps so the \
                     grid covers the switch relaxation",
                    self.grid.t_end, tail
                )));
            }
        }

        if let Some(m) = &self.loss {
            m.validate()?;
            let Some(p) = self.rate_model.as_switch() else {
                return Err(ScenarioError::Validation(
                    "a loss model requires a switch-profile rate model".into(),
                ));
            };
            crate::loss::validate_shared_clock(p, m)?;
            if self.pump.kind != PumpKind::Delta {
                return Err(ScenarioError::Validation(
                    "a loss model requires delta-pulse excitation".into(),
                ));
            }
        }

        if self.outputs.columns.first() != Some(&Column::T) {
            return Err(ScenarioError::Validation(
                "output.columns must be non-empty and start with \"t\"".into(),
            ));
        }
        for (i, c) in self.outputs.columns.iter().enumerate() {
            if c.requires_loss() && self.loss.is_none() {
                return Err(ScenarioError::Validation(format!(
                    "output column {:?} requires a [loss] section",
                    c.config_name()
                )));
            }
            if self.outputs.columns[..i].contains(c) {
                return Err(ScenarioError::Validation(format!(
                    "duplicate output column {:?}",
                    c.config_name()
                )));
            }
        }
        Ok(())
    }
}

/// Stable 16-hex-digit fingerprint of a scenario's full parameter set, for
/// tagging outputs with what produced them.
pub fn scenario_hash(s: &Scenario) -> String {
    let json = serde_json::to_string(s).expect("a scenario always serializes");
    let digest = Sha256::digest(json.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs one scenario to a tagged time series.
///
/// Hard-step switch profiles with delta excitation evaluate the closed-form
/// dynamics directly; everything else integrates the rate equation with the
/// switch-on time declared as a breakpoint. Rows satisfy
/// `intensity = gamma_rad · n2` exactly, and repeated runs of the same
/// scenario produce byte-identical CSV output.
pub fn run_scenario(s: &Scenario) -> Result<TimeSeries, ScenarioError> {
    s.validate()?;
    let times = s.grid.sample_times();

    let analytic = matches!(s.pump.kind, PumpKind::Delta)
        && matches!(&s.rate_model, RateModel::Switch(p) if p.step_mode == StepMode::Hard);

    let (rate, n2): (Vec<f64>, Vec<f64>) = if analytic {
        let RateModel::Switch(p) = &s.rate_model else {
            unreachable!("analytic path implies a switch profile")
        };
        times
            .iter()
            .map(|&t| {
                let r = dynamics::evaluate(p, &s.emitter, t);
                (r.rate, r.population)
            })
            .unzip()
    } else {
        let sol = solve_rate_equation(
            |t| s.rate_model.rate(t),
            &s.pump,
            &s.emitter,
            &s.grid,
            &[s.rate_model.t0pu()],
        )?;
        let rate = times.iter().map(|&t| s.rate_model.rate(t)).collect();
        (rate, sol.n2)
    };

    let intensity: Vec<f64> = rate.iter().zip(&n2).map(|(r, n)| r * n).collect();

    let loss_cols = match &s.loss {
        None => None,
        Some(m) => {
            let p = s
                .rate_model
                .as_switch()
                .expect("validated: loss requires a switch profile");
            let mut integ = LossIntegrator::new(*p, *m, s.emitter, s.grid.rtol)?;
            let mut lossy = Vec::with_capacity(times.len());
            let mut shift = Vec::with_capacity(times.len());
            let mut factor = Vec::with_capacity(times.len());
            for &t in &times {
                lossy.push(integ.intensity_at(t)?);
                let sh = m.relative_shift(t);
                shift.push(sh);
                factor.push(linewidth_factor(m.a, sh));
            }
            Some((lossy, shift, factor))
        }
    };

    let mut rows = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        let row = s
            .outputs
            .columns
            .iter()
            .map(|&c| match c {
                Column::T => times[i],
                Column::GammaRad => rate[i],
                Column::N2 => n2[i],
                Column::Intensity => intensity[i],
                Column::IntensityLossy => loss_cols.as_ref().expect("validated").0[i],
                Column::SShift => loss_cols.as_ref().expect("validated").1[i],
                Column::GammaOverGammaI => loss_cols.as_ref().expect("validated").2[i],
            })
            .collect();
        rows.push(row);
    }

    let metadata = vec![
        ("scenario_hash".into(), scenario_hash(s)),
        (
            "engine".into(),
            if analytic { "analytic" } else { "ode" }.into(),
        ),
        ("rtol".into(), format!("{:e}", s.grid.rtol)),
        ("atol".into(), format!("{:e}", s.grid.atol)),
        ("normalization".into(), "none".into()),
        (
            "note".into(),
            "intensities are absolute; divide by the value at the excitation instant \
             for relative curves"
                .into(),
        ),
    ];

    let ts = TimeSeries {
        metadata,
        columns: s.outputs.columns.clone(),
        rows,
    };
    ts.validate()?;
    Ok(ts)
}

/// Sets one sweepable parameter, keeping coupled fields in step: the loss
/// model shares the switch's carrier clock, and the emitter shares the
/// pump's excitation instant.
fn set_axis(s: &mut Scenario, axis: &str, v: f64) -> Result<(), ScenarioError> {
    match axis {
        "emitter.n02" => s.emitter.n02 = v,
        "emitter.gamma_nrad_per_ns" => s.emitter.gamma_nrad = v,
        "pump.t0exc_ps" => {
            s.pump.t0exc = v;
            s.emitter.t0exc = v;
        }
        "pump.amplitude_per_ps" => s.pump.amplitude = v,
        "pump.eta_abs" => s.pump.eta_abs = v,
        "pump.fwhm_ps" => match &mut s.pump.kind {
            PumpKind::GaussianPulse { fwhm } => *fwhm = v,
            _ => return Err(unknown_axis(s, axis)),
        },
        "grid.t_start_ps" => s.grid.t_start = v,
        "grid.t_end_ps" => s.grid.t_end = v,
        "grid.output_dt_ps" => s.grid.output_dt = v,
        "grid.rtol" => s.grid.rtol = v,
        "grid.atol" => s.grid.atol = v,
        "loss.a" => match &mut s.loss {
            Some(m) => m.a = v,
            None => return Err(unknown_axis(s, axis)),
        },
        "loss.s0" => match &mut s.loss {
            Some(m) => m.s0 = v,
            None => return Err(unknown_axis(s, axis)),
        },
        _ => match &mut s.rate_model {
            RateModel::Switch(p) => match axis {
                "switch.gamma0_per_ns" => p.gamma0 = v,
                "switch.dgamma_per_ns" => p.dgamma = v,
                "switch.t0pu_ps" => {
                    p.t0pu = v;
                    if let Some(m) = &mut s.loss {
                        m.t0pu = v;
                    }
                }
                "switch.tau_sw_ps" => {
                    p.tau_sw = v;
                    if let Some(m) = &mut s.loss {
                        m.tau_sw = v;
                    }
                }
                "switch.tau_pu_ps" => {
                    p.tau_pu = v;
                    if let Some(m) = &mut s.loss {
                        m.tau_pu = v;
                    }
                }
                _ => return Err(unknown_axis(s, axis)),
            },
            RateModel::Trajectory(tr) => match axis {
                "trajectory.omega_cav0_rad_per_ps" => tr.cavity.omega_cav0 = v,
                "trajectory.gamma_cav_rad_per_ps" => tr.cavity.gamma_cav = v,
                "trajectory.gamma_on_resonance_per_ns" => tr.cavity.gamma_on_resonance = v,
                "trajectory.gamma_background_per_ns" => tr.cavity.gamma_background = v,
                "trajectory.omega_d_rad_per_ps" => tr.omega_d = v,
                "trajectory.delta_omega_max_rad_per_ps" => tr.delta_omega_max = v,
                "trajectory.t0pu_ps" => tr.t0pu = v,
                "trajectory.tau_sw_ps" => tr.tau_sw = v,
                "trajectory.tau_pu_ps" => tr.tau_pu = v,
                _ => return Err(unknown_axis(s, axis)),
            },
        },
    }
    Ok(())
}

/// The axes [`set_axis`] accepts for this particular scenario.
fn valid_axes(s: &Scenario) -> Vec<&'static str> {
    let mut v = vec!["emitter.n02", "emitter.gamma_nrad_per_ns", "pump.t0exc_ps"];
    if !matches!(s.pump.kind, PumpKind::Delta) {
        v.extend(["pump.amplitude_per_ps", "pump.eta_abs"]);
    }
    if matches!(s.pump.kind, PumpKind::GaussianPulse { .. }) {
        v.push("pump.fwhm_ps");
    }
    match s.rate_model {
        RateModel::Switch(_) => v.extend([
            "switch.gamma0_per_ns",
            "switch.dgamma_per_ns",
            "switch.t0pu_ps",
            "switch.tau_sw_ps",
            "switch.tau_pu_ps",
        ]),
        RateModel::Trajectory(_) => v.extend([
            "trajectory.omega_cav0_rad_per_ps",
            "trajectory.gamma_cav_rad_per_ps",
            "trajectory.gamma_on_resonance_per_ns",
            "trajectory.gamma_background_per_ns",
            "trajectory.omega_d_rad_per_ps",
            "trajectory.delta_omega_max_rad_per_ps",
            "trajectory.t0pu_ps",
            "trajectory.tau_sw_ps",
            "trajectory.tau_pu_ps",
        ]),
    }
    if s.loss.is_some() {
        v.extend(["loss.a", "loss.s0"]);
    }
    v.extend([
        "grid.t_start_ps",
        "grid.t_end_ps",
        "grid.output_dt_ps",
        "grid.rtol",
        "grid.atol",
    ]);
    v
}

fn unknown_axis(s: &Scenario, axis: &str) -> ScenarioError {
    ScenarioError::UnknownAxis {
        axis: axis.to_string(),
        valid: valid_axes(s).join(", "),
    }
}

/// Runs the scenario once per value of the swept parameter, in parallel.
///
/// `axis` is a dotted parameter name such as `"switch.tau_sw_ps"` or
/// `"loss.s0"`; coupled fields stay consistent (sweeping the switch clock
/// drags the loss clock along, sweeping `pump.t0exc_ps` moves the emitter's
/// excitation instant). Results come back in the order of `values`, each
/// tagged with `sweep_axis` and `sweep_value` metadata, and are identical
/// to running the modified scenarios one at a time.
pub fn sweep(s: &Scenario, axis: &str, values: &[f64]) -> Result<Vec<TimeSeries>, ScenarioError> {
    // Resolve the axis once up front so a typo fails fast (and even when
    // `values` is empty). The probe value is irrelevant: setting performs
    // no validation, running does.
    let mut probe = s.clone();
    set_axis(&mut probe, axis, 0.0)?;

    values
        .par_iter()
        .map(|&v| {
            let mut sv = s.clone();
            set_axis(&mut sv, axis, v)?;
            let mut ts = run_scenario(&sv)?;
            ts.metadata.push(("sweep_axis".into(), axis.to_string()));
            ts.metadata.push(("sweep_value".into(), format!("{v:e}")));
            Ok(ts)
        })
        .collect()
}

/// Names of the built-in scenarios, in presentation order.
pub const PRESET_NAMES: [&str; 4] = ["fig2", "fig3_enhance", "fig3_inhibit", "fig4_loss"];

/// One-line description of a built-in scenario, for listings.
pub fn preset_summary(name: &str) -> Option<&'static str> {
    match name {
        "fig2" => Some("decay-rate profile of a factor-5 enhancement switch at 10 ps"),
        "fig3_enhance" => Some("delta-excited emitter, decay rate enhanced 1 -> 5 /ns at 150 ps"),
        "fig3_inhibit" => Some("delta-excited emitter, decay rate inhibited 5 -> 1 /ns at 150 ps"),
        "fig4_loss" => {
            Some("the enhancement scenario with free-carrier absorption (a = 0.083, S0 = 1)")
        }
        _ => None,
    }
}

/// A built-in, ready-to-run scenario by name; see [`PRESET_NAMES`].
///
/// All presets use delta excitation at t = 0 of a unit population, a hard
/// switch step with the 0.12 ps pump-pulse width on record, and a 35 ps
/// carrier relaxation time.
pub fn preset(name: &str) -> Option<Scenario> {
    let switch = |gamma0: f64, dgamma: f64, t0pu: f64| {
        RateModel::Switch(SwitchProfile {
            gamma0,
            dgamma,
            t0pu,
            tau_sw: 35.0,
            tau_pu: 0.12,
            step_mode: StepMode::Hard,
        })
    };
    let base = Scenario {
        emitter: EmitterParams::default(),
        rate_model: switch(1.0, 4.0, 150.0),
        pump: PumpProfile::delta(0.0),
        loss: None,
        grid: TimeGrid::default(),
        outputs: OutputSpec::default(),
    };
    let s = match name {
        // The early-switch variant: the rate profile itself is the point,
        // so the window is tight around the switch.
        "fig2" => Scenario {
            rate_model: switch(1.0, 4.0, 10.0),
            grid: TimeGrid {
                t_end: 500.0,
                ..TimeGrid::default()
            },
            ..base
        },
        "fig3_enhance" => base,
        "fig3_inhibit" => Scenario {
            rate_model: switch(5.0, -4.0, 150.0),
            ..base
        },
        "fig4_loss" => Scenario {
            loss: Some(LossModel {
                a: 0.083,
                s0: 1.0,
                t0pu: 150.0,
                tau_sw: 35.0,
                tau_pu: 0.12,
                step_mode: StepMode::Hard,
            }),
            outputs: OutputSpec {
                columns: OutputSpec::default_columns(true),
                path: None,
            },
            ..base
        },
        _ => return None,
    };
    Some(s)
}
