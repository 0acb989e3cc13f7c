//! Strict TOML scenario documents.
//!
//! Every key carries its unit as a suffix (`tau_sw_ps`, `gamma0_per_ns`) so
//! a document reads unambiguously, and unknown keys are rejected rather than
//! silently ignored. A minimal document is one rate model section —
//! `[switch]` or `[trajectory]` — plus a `[pump]`; emitter, grid, loss and
//! output selection all have defaults.

use std::path::PathBuf;

use serde::Deserialize;

use crate::dynamics::EmitterParams;
use crate::integrate::{PumpKind, PumpProfile, TimeGrid};
use crate::loss::LossModel;
use crate::rate_models::{CavityLorentzian, CavityTrajectory, StepMode, SwitchProfile};

use super::{Column, OutputSpec, RateModel, Scenario, ScenarioError};

/// What a document must contain, spelled out for the missing-section error.
const RATE_MODEL_REQUIRED: &str = "[switch] (gamma0_per_ns, dgamma_per_ns, t0pu_ps, tau_sw_ps) \
     or [trajectory] (omega_cav0_rad_per_ps, gamma_cav_rad_per_ps, gamma_on_resonance_per_ns, \
     omega_d_rad_per_ps, delta_omega_max_rad_per_ps, t0pu_ps, tau_sw_ps)";
const PUMP_REQUIRED: &str = "[pump] (kind, t0exc_ps)";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    emitter: Option<RawEmitter>,
    switch: Option<RawSwitch>,
    trajectory: Option<RawTrajectory>,
    pump: Option<RawPump>,
    loss: Option<RawLoss>,
    grid: Option<RawGrid>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEmitter {
    n02: Option<f64>,
    gamma_nrad_per_ns: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawStepMode {
    Hard,
    ErfSmoothed,
}

impl RawStepMode {
    fn into_mode(self) -> StepMode {
        match self {
            RawStepMode::Hard => StepMode::Hard,
            RawStepMode::ErfSmoothed => StepMode::ErfSmoothed,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSwitch {
    gamma0_per_ns: f64,
    dgamma_per_ns: f64,
    t0pu_ps: f64,
    tau_sw_ps: f64,
    tau_pu_ps: Option<f64>,
    step_mode: Option<RawStepMode>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrajectory {
    omega_cav0_rad_per_ps: f64,
    gamma_cav_rad_per_ps: f64,
    gamma_on_resonance_per_ns: f64,
    gamma_background_per_ns: Option<f64>,
    omega_d_rad_per_ps: f64,
    delta_omega_max_rad_per_ps: f64,
    t0pu_ps: f64,
    tau_sw_ps: f64,
    tau_pu_ps: Option<f64>,
    step_mode: Option<RawStepMode>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawPumpKind {
    Delta,
    GaussianPulse,
    ConstantWave,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPump {
    kind: RawPumpKind,
    t0exc_ps: f64,
    amplitude_per_ps: Option<f64>,
    fwhm_ps: Option<f64>,
    eta_abs: Option<f64>,
    omega_exc_rad_per_s: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoss {
    a: f64,
    s0: f64,
    t0pu_ps: Option<f64>,
    tau_sw_ps: Option<f64>,
    tau_pu_ps: Option<f64>,
    step_mode: Option<RawStepMode>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    t_start_ps: Option<f64>,
    t_end_ps: Option<f64>,
    output_dt_ps: Option<f64>,
    rtol: Option<f64>,
    atol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    columns: Option<Vec<String>>,
    path: Option<String>,
}

/// Parses and validates one scenario document.
///
/// Unknown keys anywhere, TOML syntax errors, and constraint violations are
/// all rejected with messages naming the offending key (with line/column
/// where the TOML layer provides it). An empty document reports every
/// missing required section at once.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawDoc = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;

    let mut missing = Vec::new();
    if raw.switch.is_none() && raw.trajectory.is_none() {
        missing.push(RATE_MODEL_REQUIRED);
    }
    if raw.pump.is_none() {
        missing.push(PUMP_REQUIRED);
    }
    if !missing.is_empty() {
        return Err(ScenarioError::MissingSections(missing.join("; ")));
    }
    if raw.switch.is_some() && raw.trajectory.is_some() {
        return Err(ScenarioError::Validation(
            "provide exactly one of [switch] or [trajectory], not both".into(),
        ));
    }

    let rp = raw.pump.expect("checked above");
    let kind = match rp.kind {
        RawPumpKind::Delta => {
            if rp.amplitude_per_ps.is_some() {
                return Err(ScenarioError::Validation(
                    "pump.amplitude_per_ps does not apply to a delta pump \
                     (the injected population is emitter.n02)"
                        .into(),
                ));
            }
            if rp.fwhm_ps.is_some() {
                return Err(ScenarioError::Validation(
                    "pump.fwhm_ps does not apply to a delta pump".into(),
                ));
            }
            PumpKind::Delta
        }
        RawPumpKind::GaussianPulse => PumpKind::GaussianPulse {
            fwhm: rp.fwhm_ps.ok_or_else(|| {
                ScenarioError::Validation(
                    "pump.fwhm_ps is required for a gaussian_pulse pump".into(),
                )
            })?,
        },
        RawPumpKind::ConstantWave => {
            if rp.fwhm_ps.is_some() {
                return Err(ScenarioError::Validation(
                    "pump.fwhm_ps only applies to gaussian_pulse pumps".into(),
                ));
            }
            PumpKind::ConstantWave
        }
    };
    let amplitude = match rp.kind {
        RawPumpKind::Delta => 1.0,
        _ => rp.amplitude_per_ps.ok_or_else(|| {
            ScenarioError::Validation(
                "pump.amplitude_per_ps is required for gaussian_pulse and constant_wave pumps"
                    .into(),
            )
        })?,
    };
    let pump = PumpProfile {
        kind,
        t0exc: rp.t0exc_ps,
        amplitude,
        eta_abs: rp.eta_abs.unwrap_or(1.0),
        omega_exc: rp.omega_exc_rad_per_s.unwrap_or(0.0),
    };

    let re = raw.emitter.unwrap_or_default();
    let emitter = EmitterParams {
        n02: re.n02.unwrap_or(1.0),
        gamma_nrad: re.gamma_nrad_per_ns.unwrap_or(0.0),
        t0exc: pump.t0exc,
    };

    let rate_model = if let Some(rs) = raw.switch {
        RateModel::Switch(SwitchProfile {
            gamma0: rs.gamma0_per_ns,
            dgamma: rs.dgamma_per_ns,
            t0pu: rs.t0pu_ps,
            tau_sw: rs.tau_sw_ps,
            tau_pu: rs.tau_pu_ps.unwrap_or(0.0),
            step_mode: rs.step_mode.map_or(StepMode::Hard, RawStepMode::into_mode),
        })
    } else {
        let rt = raw.trajectory.expect("checked above");
        RateModel::Trajectory(CavityTrajectory {
            cavity: CavityLorentzian {
                omega_cav0: rt.omega_cav0_rad_per_ps,
                gamma_cav: rt.gamma_cav_rad_per_ps,
                gamma_on_resonance: rt.gamma_on_resonance_per_ns,
                gamma_background: rt.gamma_background_per_ns.unwrap_or(0.0),
            },
            omega_d: rt.omega_d_rad_per_ps,
            delta_omega_max: rt.delta_omega_max_rad_per_ps,
            t0pu: rt.t0pu_ps,
            tau_sw: rt.tau_sw_ps,
            tau_pu: rt.tau_pu_ps.unwrap_or(0.0),
            step_mode: rt.step_mode.map_or(StepMode::Hard, RawStepMode::into_mode),
        })
    };

    let loss = match raw.loss {
        None => None,
        Some(rl) => {
            let RateModel::Switch(p) = &rate_model else {
                return Err(ScenarioError::Validation(
                    "[loss] requires a [switch] rate model".into(),
                ));
            };
            // Timing keys default to the switch's clock; explicit values
            // that disagree are caught by the shared-clock validation.
            Some(LossModel {
                a: rl.a,
                s0: rl.s0,
                t0pu: rl.t0pu_ps.unwrap_or(p.t0pu),
                tau_sw: rl.tau_sw_ps.unwrap_or(p.tau_sw),
                tau_pu: rl.tau_pu_ps.unwrap_or(p.tau_pu),
                step_mode: rl.step_mode.map_or(p.step_mode, RawStepMode::into_mode),
            })
        }
    };

    let rg = raw.grid.unwrap_or_default();
    let grid = TimeGrid {
        t_start: rg.t_start_ps.unwrap_or(0.0),
        t_end: rg.t_end_ps.unwrap_or(1000.0),
        output_dt: rg.output_dt_ps.unwrap_or(0.5),
        rtol: rg.rtol.unwrap_or(TimeGrid::DEFAULT_RTOL),
        atol: rg.atol.unwrap_or(TimeGrid::DEFAULT_ATOL),
    };

    let ro = raw.output.unwrap_or_default();
    let columns = match ro.columns {
        None => OutputSpec::default_columns(loss.is_some()),
        Some(names) => {
            let mut cols = Vec::with_capacity(names.len());
            for name in &names {
                let c = Column::from_config_name(name).ok_or_else(|| {
                    ScenarioError::Validation(format!(
                        "unknown output column {name:?}; valid columns: t, gamma_rad, n2, \
                         intensity, intensity_lossy, s_shift, gamma_over_gamma_i"
                    ))
                })?;
                if cols.contains(&c) {
                    return Err(ScenarioError::Validation(format!(
                        "duplicate output column {name:?}"
                    )));
                }
                cols.push(c);
            }
            cols
        }
    };
    let outputs = OutputSpec {
        columns,
        path: ro.path.map(PathBuf::from),
    };

    let s = Scenario {
        emitter,
        rate_model,
        pump,
        loss,
        grid,
        outputs,
    };
    s.validate()?;
    Ok(s)
}
