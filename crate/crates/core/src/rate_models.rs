//! Time-dependent radiative decay-rate profiles Γ_rad(t).
//!
//! Two routes to the same physics:
//!
//! * [`SwitchProfile`] — the phenomenological form: a constant background
//!   rate plus a switch-induced change that relaxes exponentially,
//!
//!   ```text
//!   Γ_rad(t) = Γ₀ + ΔΓ · e^{−(t−t0pu)/τ_sw} · Θ(t−t0pu, τ_pu)
//!   ```
//!
//!   where Θ is a unit step of finite rise time τ_pu (see [`step_function`]).
//!   ΔΓ > 0 enhances the decay (cavity tuned into resonance), ΔΓ < 0
//!   inhibits it.
//!
//! * [`CavityTrajectory`] — the mechanistic form: a Lorentzian
//!   local-density-of-states profile ([`CavityLorentzian`]) whose resonance
//!   frequency is displaced by the switch and relaxes back with the same
//!   exponential clock, sampled at the emitter frequency.
//!
//! [`rate_from_ldos`] converts an absolute LDOS value into a decay rate via
//! the golden rule; it is the only SI-unit function in the crate.
//!
//! Units: times in ps, rates in 1/ns, frequencies/linewidths in rad/ps
//! (rad/s and s/m³ inside [`rate_from_ldos`] only).

use serde::Serialize;

use crate::ParamError;

/// 2·√(ln 2): scales `t/τ_pu` so that τ_pu is the FWHM of the underlying
/// Gaussian pump pulse whose integral forms the smoothed step.
const TWO_SQRT_LN2: f64 = 1.665_109_222_315_395_5;

/// Reduced Planck constant [J·s] (CODATA).
const HBAR: f64 = 1.054_571_817e-34;

/// Vacuum permittivity [F/m] (CODATA).
const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Shape of the unit step that turns the switch on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepMode {
    /// Ideal Heaviside step: 0 before the switch, 1 from the switch on.
    /// Makes the closed-form population exact.
    Hard,
    /// Integral of a Gaussian pump pulse of FWHM τ_pu: ½[1 + erf(2√(ln2)·t/τ_pu)].
    /// The physical rise; degrades to `Hard` when τ_pu = 0.
    ErfSmoothed,
}

/// Unit step Θ(t, τ_pu) of the switch, evaluated at time offset `t` from the
/// switch-on instant.
///
/// `Hard` returns 0 for `t < 0` and 1 for `t ≥ 0` (the switch-on sample is
/// already switched). `ErfSmoothed` returns the integral of a normalized
/// Gaussian of FWHM `tau_pu` centered at offset 0, i.e.
/// ½[1 + erf(2√(ln2)·t/τ_pu)], which is monotone in `t` and reaches ½ at the
/// switch-on instant. `tau_pu = 0` with `ErfSmoothed` degrades to `Hard`.
pub fn step_function(t: f64, tau_pu: f64, mode: StepMode) -> f64 {
    match mode {
        StepMode::Hard => {
            if t >= 0.0 {
                1.0
            } else {
                0.0
            }
        }
        StepMode::ErfSmoothed => {
            if tau_pu == 0.0 {
                return step_function(t, 0.0, StepMode::Hard);
            }
            0.5 * (1.0 + libm::erf(TWO_SQRT_LN2 * t / tau_pu))
        }
    }
}

/// Exponential-relaxation switch of the radiative decay rate.
///
/// Models a switching event at `t0pu` that changes the decay rate by
/// `dgamma` instantaneously (up to the pump rise time `tau_pu`) and relaxes
/// back to the background rate `gamma0` with time constant `tau_sw` (set by
/// free-carrier recombination in a switched cavity).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwitchProfile {
    /// Background (unswitched) radiative rate Γ₀ [1/ns]; > 0.
    pub gamma0: f64,
    /// Switch-induced rate change ΔΓ [1/ns]; negative for inhibition.
    /// The total rate `gamma0 + dgamma` must stay ≥ 0.
    pub dgamma: f64,
    /// Switch-on time t0pu [ps].
    pub t0pu: f64,
    /// Relaxation time constant τ_sw of the switch [ps]; > 0.
    pub tau_sw: f64,
    /// Rise time (pump-pulse FWHM) τ_pu [ps]; ≥ 0 and < τ_sw.
    pub tau_pu: f64,
    /// Shape of the switch-on step.
    pub step_mode: StepMode,
}

impl SwitchProfile {
    /// Validating constructor; see the field docs for the constraints.
    pub fn new(
        gamma0: f64,
        dgamma: f64,
        t0pu: f64,
        tau_sw: f64,
        tau_pu: f64,
        step_mode: StepMode,
    ) -> Result<Self, ParamError> {
        let p = SwitchProfile {
            gamma0,
            dgamma,
            t0pu,
            tau_sw,
            tau_pu,
            step_mode,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks all field constraints, returning the first violation.
    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.gamma0 > 0.0) {
            return Err(ParamError::invalid("gamma0", "must be > 0", self.gamma0));
        }
        if !(self.tau_sw > 0.0) {
            return Err(ParamError::invalid("tau_sw", "must be > 0", self.tau_sw));
        }
        if !(self.tau_pu >= 0.0) {
            return Err(ParamError::invalid("tau_pu", "must be >= 0", self.tau_pu));
        }
        if !(self.gamma0 + self.dgamma >= 0.0) {
            return Err(ParamError::invalid(
                "dgamma",
                "total rate gamma0 + dgamma must be >= 0",
                self.dgamma,
            ));
        }
        if !(self.tau_pu < self.tau_sw) {
            return Err(ParamError::invalid(
                "tau_pu",
                "must be < tau_sw (switch must outlive its own rise)",
                self.tau_pu,
            ));
        }
        if !(self.t0pu.is_finite()) {
            return Err(ParamError::invalid("t0pu", "must be finite", self.t0pu));
        }
        Ok(())
    }

    /// The switch-induced part ΔΓ·e^{−(t−t0pu)/τ_sw}·Θ(t−t0pu, τ_pu) [1/ns].
    ///
    /// Exactly zero wherever the step has underflowed to zero, so the value
    /// is well-defined arbitrarily far before the switch.
    pub fn switch_term(&self, t: f64) -> f64 {
        let dt = t - self.t0pu;
        let theta = step_function(dt, self.tau_pu, self.step_mode);
        if theta == 0.0 {
            // Avoid 0 × exp(+large): the rate is exactly gamma0 here.
            return 0.0;
        }
        self.dgamma * (-dt / self.tau_sw).exp() * theta
    }

    /// The full rate Γ_rad(t) = Γ₀ + switch term [1/ns].
    ///
    /// Equals Γ₀ well before the switch and relaxes back to Γ₀ as t → ∞.
    pub fn rate(&self, t: f64) -> f64 {
        self.gamma0 + self.switch_term(t)
    }

    /// Copy of this profile with the switch disabled (ΔΓ = 0): the
    /// stationary reference against which switched dynamics are compared.
    pub fn unswitched(&self) -> Self {
        SwitchProfile {
            dgamma: 0.0,
            ..*self
        }
    }
}

/// Lorentzian local-density-of-states profile of a single cavity resonance.
///
/// The decay rate of an emitter at frequency ω_d with the cavity at ω_cav is
///
/// ```text
/// Γ(ω_d, ω_cav) = Γ_bg + (Γ_res − Γ_bg) · (γ_cav/2)² / [(ω_d−ω_cav)² + (γ_cav/2)²]
/// ```
///
/// with `gamma_cav` the FWHM linewidth, `gamma_on_resonance` the rate at zero
/// detuning and `gamma_background` the rate into leaky (non-cavity) modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CavityLorentzian {
    /// Rest (unswitched) cavity resonance frequency ω_cav,0 [rad/ps].
    pub omega_cav0: f64,
    /// Cavity linewidth γ_cav (FWHM) [rad/ps]; > 0.
    pub gamma_cav: f64,
    /// Decay rate at exact resonance [1/ns]; > `gamma_background`.
    pub gamma_on_resonance: f64,
    /// Decay rate far off resonance (leaky modes) [1/ns]; ≥ 0.
    pub gamma_background: f64,
}

impl CavityLorentzian {
    /// Validating constructor.
    pub fn new(
        omega_cav0: f64,
        gamma_cav: f64,
        gamma_on_resonance: f64,
        gamma_background: f64,
    ) -> Result<Self, ParamError> {
        let c = CavityLorentzian {
            omega_cav0,
            gamma_cav,
            gamma_on_resonance,
            gamma_background,
        };
        c.validate()?;
        Ok(c)
    }

    /// Checks all field constraints.
    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.gamma_cav > 0.0) {
            return Err(ParamError::invalid(
                "gamma_cav",
                "must be > 0",
                self.gamma_cav,
            ));
        }
        if !(self.gamma_background >= 0.0) {
            return Err(ParamError::invalid(
                "gamma_background",
                "must be >= 0",
                self.gamma_background,
            ));
        }
        if !(self.gamma_on_resonance > self.gamma_background) {
            return Err(ParamError::invalid(
                "gamma_on_resonance",
                "must be > gamma_background",
                self.gamma_on_resonance,
            ));
        }
        if !self.omega_cav0.is_finite() {
            return Err(ParamError::invalid(
                "omega_cav0",
                "must be finite",
                self.omega_cav0,
            ));
        }
        Ok(())
    }

    /// Decay rate [1/ns] of an emitter at `omega_d` with the cavity resonance
    /// at `omega_cav` (both [rad/ps]).
    pub fn rate(&self, omega_d: f64, omega_cav: f64) -> f64 {
        let hw = 0.5 * self.gamma_cav;
        let det = omega_d - omega_cav;
        self.gamma_background
            + (self.gamma_on_resonance - self.gamma_background) * hw * hw / (det * det + hw * hw)
    }
}

/// A switching event seen through the cavity: the resonance frequency is
/// displaced by `delta_omega_max` at `t0pu` and relaxes back to rest,
///
/// ```text
/// ω_cav(t) = ω_cav,0 + Δω_max · e^{−(t−t0pu)/τ_sw} · Θ(t−t0pu, τ_pu)
/// ```
///
/// and the emitter's decay rate is the Lorentzian sampled at ω_d along that
/// trajectory. Tuning `delta_omega_max = ω_d − ω_cav,0` brings the cavity to
/// exact resonance at the switch peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CavityTrajectory {
    /// The cavity lineshape being dragged.
    pub cavity: CavityLorentzian,
    /// Emitter transition frequency ω_d [rad/ps].
    pub omega_d: f64,
    /// Peak resonance-frequency displacement Δω_max [rad/ps].
    pub delta_omega_max: f64,
    /// Switch-on time t0pu [ps].
    pub t0pu: f64,
    /// Relaxation time constant τ_sw [ps]; > 0.
    pub tau_sw: f64,
    /// Rise time (pump-pulse FWHM) τ_pu [ps]; ≥ 0 and < τ_sw.
    pub tau_pu: f64,
    /// Shape of the switch-on step.
    pub step_mode: StepMode,
}

impl CavityTrajectory {
    /// Checks all field constraints (including the embedded cavity's).
    pub fn validate(&self) -> Result<(), ParamError> {
        self.cavity.validate()?;
        if !(self.tau_sw > 0.0) {
            return Err(ParamError::invalid("tau_sw", "must be > 0", self.tau_sw));
        }
        if !(self.tau_pu >= 0.0) {
            return Err(ParamError::invalid("tau_pu", "must be >= 0", self.tau_pu));
        }
        if !(self.tau_pu < self.tau_sw) {
            return Err(ParamError::invalid(
                "tau_pu",
                "must be < tau_sw (switch must outlive its own rise)",
                self.tau_pu,
            ));
        }
        if !self.omega_d.is_finite() {
            return Err(ParamError::invalid(
                "omega_d",
                "must be finite",
                self.omega_d,
            ));
        }
        if !self.delta_omega_max.is_finite() {
            return Err(ParamError::invalid(
                "delta_omega_max",
                "must be finite",
                self.delta_omega_max,
            ));
        }
        Ok(())
    }

    /// Instantaneous cavity resonance frequency ω_cav(t) [rad/ps].
    ///
    /// Returns exactly ω_cav,0 wherever the step has underflowed to zero and
    /// relaxes back to ω_cav,0 as t → ∞.
    pub fn omega_cav(&self, t: f64) -> f64 {
        let dt = t - self.t0pu;
        let theta = step_function(dt, self.tau_pu, self.step_mode);
        if theta == 0.0 {
            return self.cavity.omega_cav0;
        }
        self.cavity.omega_cav0 + self.delta_omega_max * (-dt / self.tau_sw).exp() * theta
    }

    /// Decay rate [1/ns] at time `t` [ps]: the Lorentzian sampled at ω_d with
    /// the cavity at ω_cav(t).
    pub fn rate(&self, t: f64) -> f64 {
        self.cavity.rate(self.omega_d, self.omega_cav(t))
    }
}

/// Effective switch time of a frequency-tuned resonance.
///
/// When a resonance sweeps past a fixed emitter line, the emitter only
/// responds while the detuning is within about one linewidth, so the
/// effective switching time is the sweep duration scaled by how many
/// linewidths the resonance moves:
///
/// ```text
/// τ_sw,eff = Δt · γ_cav / |ω_shift|
/// ```
///
/// Errors if `omega_shift` is zero (no sweep, no switching time).
pub fn effective_switch_time(
    delta_t: f64,
    omega_shift: f64,
    gamma_cav: f64,
) -> Result<f64, ParamError> {
    if omega_shift == 0.0 {
        return Err(ParamError::UndefinedSwitchTime);
    }
    Ok(delta_t * gamma_cav / omega_shift.abs())
}

/// Emitter dipole parameters for the golden-rule rate (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DipoleParams {
    /// Transition dipole moment d [C·m]; > 0.
    pub d: f64,
    /// Transition angular frequency ω_d [rad/s]; > 0.
    pub omega_d: f64,
}

impl DipoleParams {
    /// Checks all field constraints.
    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.d > 0.0) {
            return Err(ParamError::invalid("d", "must be > 0", self.d));
        }
        if !(self.omega_d > 0.0) {
            return Err(ParamError::invalid("omega_d", "must be > 0", self.omega_d));
        }
        Ok(())
    }
}

/// Golden-rule spontaneous-emission rate [1/s] from a local density of
/// optical states `rho` [s/m³] at the emitter's position and frequency:
///
/// ```text
/// Γ_rad = π · d² · ω_d · ρ / (ħ · ε₀)
/// ```
///
/// Linear in ρ and in d²; all quantities SI. Divide by 1e9 · [`crate::PS_PER_NS`]
/// (i.e. by 1e9) to express the result in 1/ns.
pub fn rate_from_ldos(dp: &DipoleParams, rho: f64) -> f64 {
    assert!(rho >= 0.0, "LDOS must be non-negative, got {rho}");
    std::f64::consts::PI * dp.d * dp.d * dp.omega_d * rho / (HBAR * EPSILON_0)
}
