//! Closed-form excited-state population and emitted intensity of a
//! delta-pulse-excited emitter whose radiative rate is switched.
//!
//! For a rate profile Γ_rad(t) = Γ₀ + ΔΓ·e^{−(t−t0pu)/τ_sw}·Θ(t−t0pu, τ_pu)
//! the rate equation integrates in closed form: the population is
//!
//! ```text
//! N₂(t) = N₀₂ · exp[ −(Γ₀+Γ_nrad)(t−t0exc) − Δα(t) ]
//! ```
//!
//! where [`alpha_switch`] is the extra decay accumulated because of the
//! switch, and the detected intensity is I(t) = Γ_rad(t)·N₂(t). For a hard
//! step Δα has the elementary antiderivative used here as the fast path;
//! for the erf-smoothed step it is evaluated by adaptive quadrature, since
//! the hard-step antiderivative is exact only when the rise is
//! instantaneous.
//!
//! The salient physics: Δα saturates at Δα∞ = ΔΓ·τ_sw, so a switch costs
//! (enhancement, ΔΓ>0) or banks (inhibition, ΔΓ<0) a *fixed* fraction
//! e^{−Δα∞} of the population compared to the unswitched emitter, no matter
//! how long one waits.

use serde::Serialize;

use crate::integrate::quad_adaptive;
use crate::rate_models::{StepMode, SwitchProfile};
use crate::{ParamError, PS_PER_NS};

/// When the rise time is this small relative to the relaxation time, the
/// hard-step closed form of Δα is exact to f64 and the quadrature path is
/// skipped.
const NEGLIGIBLE_RISE: f64 = 1e-6;

/// Emitter initial condition and non-radiative loss channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmitterParams {
    /// Initial excited-state population N₀₂ (normalized); ≥ 0.
    pub n02: f64,
    /// Non-radiative decay rate Γ_nrad [1/ns]; ≥ 0.
    pub gamma_nrad: f64,
    /// Excitation time t0exc [ps] of the delta pulse.
    pub t0exc: f64,
}

impl EmitterParams {
    /// Checks all field constraints.
    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.n02 >= 0.0 && self.n02.is_finite()) {
            return Err(ParamError::invalid(
                "n02",
                "must be finite and >= 0",
                self.n02,
            ));
        }
        if !(self.gamma_nrad >= 0.0 && self.gamma_nrad.is_finite()) {
            return Err(ParamError::invalid(
                "gamma_nrad",
                "must be finite and >= 0",
                self.gamma_nrad,
            ));
        }
        if !self.t0exc.is_finite() {
            return Err(ParamError::invalid("t0exc", "must be finite", self.t0exc));
        }
        Ok(())
    }
}

impl Default for EmitterParams {
    /// Unit initial population, purely radiative decay, excitation at t = 0.
    fn default() -> Self {
        EmitterParams {
            n02: 1.0,
            gamma_nrad: 0.0,
            t0exc: 0.0,
        }
    }
}

/// One fully evaluated sample of the switched-emitter observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsResult {
    /// Sample time [ps].
    pub t: f64,
    /// Radiative rate Γ_rad(t) [1/ns].
    pub rate: f64,
    /// Excited-state population N₂(t) (0 before excitation).
    pub population: f64,
    /// Detected intensity I(t) = Γ_rad(t)·N₂(t) [photons per emitter per ns].
    pub intensity: f64,
}

/// Asked for the population at a time before the delta excitation, where
/// the closed form does not apply.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("before excitation: t={t} ps precedes t0exc={t0exc} ps")]
pub struct BeforeExcitation {
    /// The offending sample time [ps].
    pub t: f64,
    /// The excitation time [ps].
    pub t0exc: f64,
}

/// Switch-induced extra decay exponent
///
/// ```text
/// Δα(t) = (1/1000)·∫ ΔΓ·e^{−(u−t0pu)/τ_sw}·Θ(u−t0pu, τ_pu) du
/// ```
///
/// (dimensionless; the 1/1000 converts the 1/ns rate against ps time).
/// Zero before the switch and monotone in t for ΔΓ > 0. Hard steps use the
/// elementary antiderivative ΔΓ·τ_sw·(1 − e^{−(t−t0pu)/τ_sw}), saturating
/// at [`alpha_infinity`]; erf-smoothed steps integrate numerically from the
/// point where the step underflows to zero, splitting at t0pu, because the
/// closed form assumes an instantaneous rise. Their saturation sits a factor
/// e^(σ²/2τ_sw²) above [`alpha_infinity`] (σ the Gaussian width of the
/// rise) — a smooth rise spreads a little switched area ahead of the nominal
/// onset — which is invisible for realistic rises much faster than the
/// relaxation.
pub fn alpha_switch(p: &SwitchProfile, t: f64) -> f64 {
    let hard = |t: f64| {
        if t < p.t0pu {
            0.0
        } else {
            p.dgamma * p.tau_sw / PS_PER_NS * (1.0 - (-(t - p.t0pu) / p.tau_sw).exp())
        }
    };
    match p.step_mode {
        StepMode::Hard => hard(t),
        StepMode::ErfSmoothed => {
            if p.tau_pu <= NEGLIGIBLE_RISE * p.tau_sw {
                return hard(t);
            }
            // Θ underflows to exactly 0 before ~3.6·τ_pu ahead of the
            // switch; 6·τ_pu is a safe, cheap margin.
            let lo = p.t0pu - 6.0 * p.tau_pu;
            if t <= lo {
                return 0.0;
            }
            quad_adaptive(
                |u| p.switch_term(u) / PS_PER_NS,
                lo,
                t,
                1e-12,
                1e-16,
                &[p.t0pu],
            )
            .map(|r| r.value)
            .expect("smooth switch integrand must converge")
        }
    }
}

/// The hard-step saturation value Δα∞ = ΔΓ·τ_sw (converted to
/// dimensionless) — the total extra decay exponent a hard switch ever
/// extracts. Computed exactly from the parameters, no integration. See
/// [`alpha_switch`] for the (tiny) erf-smoothed correction.
pub fn alpha_infinity(p: &SwitchProfile) -> f64 {
    p.dgamma * p.tau_sw / PS_PER_NS
}

/// Closed-form excited-state population N₂(t); errors for t before the
/// excitation instant, where the formula does not hold.
pub fn population(p: &SwitchProfile, e: &EmitterParams, t: f64) -> Result<f64, BeforeExcitation> {
    if t < e.t0exc {
        return Err(BeforeExcitation { t, t0exc: e.t0exc });
    }
    let exponent = (p.gamma0 + e.gamma_nrad) * (t - e.t0exc) / PS_PER_NS + alpha_switch(p, t);
    Ok(e.n02 * (-exponent).exp())
}

/// Long-time population ratio switched/unswitched, e^{−Δα∞}: the fraction
/// of population a switched emitter retains relative to an unswitched one
/// as t → ∞ (< 1 for enhancement, > 1 for inhibition).
pub fn population_ratio_infinity(p: &SwitchProfile) -> f64 {
    (-alpha_infinity(p)).exp()
}

/// Detected intensity I(t) = Γ_rad(t)·N₂(t) [photons per emitter per ns];
/// exactly zero before the excitation instant (delta-pulse excitation: the
/// excitation step itself is treated as hard).
pub fn intensity(p: &SwitchProfile, e: &EmitterParams, t: f64) -> f64 {
    if t < e.t0exc {
        return 0.0;
    }
    p.rate(t)
        * population(p, e, t).expect("population is defined from the excitation instant onward")
}

/// All observables at one sample time, with population 0 before excitation
/// so the identity intensity = rate × population holds on every row.
pub fn evaluate(p: &SwitchProfile, e: &EmitterParams, t: f64) -> DynamicsResult {
    let rate = p.rate(t);
    let population = if t < e.t0exc {
        0.0
    } else {
        population(p, e, t).expect("guarded by the t0exc check")
    };
    DynamicsResult {
        t,
        rate,
        population,
        intensity: rate * population,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    fn fig_enhance() -> SwitchProfile {
        SwitchProfile::new(1.0, 4.0, 150.0, 35.0, 0.12, StepMode::Hard).unwrap()
    }

    fn fig_inhibit() -> SwitchProfile {
        SwitchProfile::new(5.0, -4.0, 150.0, 35.0, 0.12, StepMode::Hard).unwrap()
    }

    #[test]
    fn alpha_is_zero_before_the_switch() {
        for mode in [StepMode::Hard, StepMode::ErfSmoothed] {
            let p = SwitchProfile {
                step_mode: mode,
                tau_pu: 2.0,
                ..fig_enhance()
            };
            assert_eq!(alpha_switch(&p, 0.0), 0.0, "mode {mode:?}");
            assert_eq!(alpha_switch(&p, p.t0pu - 20.0), 0.0, "mode {mode:?}");
        }
    }

    #[test]
    fn alpha_after_one_relaxation_time_matches_arithmetic() {
        let p = fig_enhance();
        let got = alpha_switch(&p, p.t0pu + p.tau_sw);
        assert!(rel_err(got, 0.088_496_878_235_998_08) < 1e-15, "got {got}");
    }

    #[test]
    fn alpha_saturates_at_alpha_infinity() {
        let p = fig_enhance();
        assert_eq!(alpha_infinity(&p), 0.14);
        let late = alpha_switch(&p, p.t0pu + 60.0 * p.tau_sw);
        assert!(rel_err(late, 0.14) < 1e-12, "late alpha {late}");
    }

    #[test]
    fn alpha_infinity_keeps_the_inhibition_sign() {
        assert_eq!(alpha_infinity(&fig_inhibit()), -0.14);
        let p = SwitchProfile {
            dgamma: 0.0,
            ..fig_enhance()
        };
        assert_eq!(alpha_infinity(&p), 0.0);
        assert_eq!(population_ratio_infinity(&p), 1.0);
    }

    #[test]
    fn alpha_is_monotone_for_enhancement() {
        for (mode, tau_pu) in [(StepMode::Hard, 0.12), (StepMode::ErfSmoothed, 2.0)] {
            let p = SwitchProfile {
                step_mode: mode,
                tau_pu,
                ..fig_enhance()
            };
            let mut prev = -1.0;
            for i in 0..600 {
                let a = alpha_switch(&p, i as f64);
                assert!(a >= prev, "alpha decreased at t={i} ({mode:?})");
                prev = a;
            }
        }
    }

    #[test]
    fn smoothed_alpha_saturation_matches_closed_form_oracle() {
        // Independent oracle: for Θ the integral of a Gaussian of std σ,
        // ∫ e^{−u/τ}Θ(u) du over all u is τ·e^{σ²/(2τ²)} (integrate by
        // parts, complete the square) — no quadrature involved.
        let p = SwitchProfile::new(4.0, 4.0, 150.0, 35.0, 3.0, StepMode::ErfSmoothed).unwrap();
        let sigma = p.tau_pu / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
        let oracle =
            p.dgamma * p.tau_sw / PS_PER_NS * (sigma * sigma / (2.0 * p.tau_sw * p.tau_sw)).exp();
        let got = alpha_switch(&p, p.t0pu + 60.0 * p.tau_sw);
        assert!(rel_err(got, oracle) < 1e-10, "got {got}, oracle {oracle}");
    }

    #[test]
    fn negligible_rise_degrades_to_hard_closed_form() {
        let p = SwitchProfile::new(1.0, 4.0, 150.0, 35.0, 1e-8, StepMode::ErfSmoothed).unwrap();
        let hard = SwitchProfile {
            step_mode: StepMode::Hard,
            ..p
        };
        for t in [150.0, 185.0, 300.0, 900.0] {
            assert_eq!(alpha_switch(&p, t), alpha_switch(&hard, t));
        }
    }

    #[test]
    fn population_starts_at_the_initial_condition() {
        let p = fig_enhance();
        let e = EmitterParams {
            n02: 0.37,
            ..Default::default()
        };
        assert_eq!(population(&p, &e, 0.0).unwrap(), 0.37);
    }

    #[test]
    fn unswitched_population_is_textbook_exponential() {
        let p = SwitchProfile {
            dgamma: 0.0,
            ..fig_enhance()
        };
        let e = EmitterParams::default();
        let got = population(&p, &e, 150.0).unwrap();
        assert!(rel_err(got, 0.860_707_976_425_057_8) < 1e-15, "got {got}");
    }

    #[test]
    fn population_before_excitation_is_an_error() {
        let p = fig_enhance();
        let e = EmitterParams {
            t0exc: 10.0,
            ..Default::default()
        };
        let err = population(&p, &e, 5.0).unwrap_err();
        assert_eq!(
            err,
            BeforeExcitation {
                t: 5.0,
                t0exc: 10.0
            }
        );
        assert!(err.to_string().starts_with("before excitation"));
    }

    #[test]
    fn long_time_population_ratio_is_exp_minus_alpha_infinity() {
        let p = fig_enhance();
        let us = p.unswitched();
        let e = EmitterParams::default();
        let t = p.t0pu + 40.0 * p.tau_sw;
        let ratio = population(&p, &e, t).unwrap() / population(&us, &e, t).unwrap();
        assert!(
            rel_err(ratio, 0.869_358_235_398_805_6) < 1e-13,
            "ratio {ratio}"
        );
        assert!(rel_err(population_ratio_infinity(&p), 0.869_358_235_398_805_6) < 1e-15);
    }

    #[test]
    fn inhibition_banks_population() {
        let p = fig_inhibit();
        let got = population_ratio_infinity(&p);
        assert!(rel_err(got, 1.150_273_798_857_227_4) < 1e-15, "got {got}");
    }

    #[test]
    fn switched_population_sits_below_unswitched_for_enhancement() {
        let p = fig_enhance();
        let us = p.unswitched();
        let e = EmitterParams::default();
        for i in 1..1000 {
            let t = p.t0pu + i as f64;
            let ps = population(&p, &e, t).unwrap();
            let pu = population(&us, &e, t).unwrap();
            assert!(ps <= pu, "switched above unswitched at t={t}");
        }
        let q = fig_inhibit();
        let qs = q.unswitched();
        for i in 1..1000 {
            let t = q.t0pu + i as f64;
            assert!(population(&q, &e, t).unwrap() >= population(&qs, &e, t).unwrap());
        }
    }

    #[test]
    fn log_population_slope_matches_the_rate() {
        // Centered finite differences of ln N₂ against −(Γ_rad+Γ_nrad),
        // away from the step discontinuity.
        for mode in [StepMode::Hard, StepMode::ErfSmoothed] {
            let p = SwitchProfile {
                step_mode: mode,
                ..fig_enhance()
            };
            let e = EmitterParams {
                gamma_nrad: 0.7,
                ..Default::default()
            };
            let h = 0.01;
            for t in [50.0, 200.0, 300.0, 700.0] {
                let fd = (population(&p, &e, t + h).unwrap().ln()
                    - population(&p, &e, t - h).unwrap().ln())
                    / (2.0 * h);
                let expect = -(p.rate(t) + e.gamma_nrad) / PS_PER_NS;
                assert!(
                    rel_err(fd, expect) < 1e-6,
                    "slope mismatch at t={t} ({mode:?}): fd {fd}, rate {expect}"
                );
            }
        }
    }

    #[test]
    fn intensity_is_rate_times_population_everywhere() {
        let p = fig_enhance();
        let e = EmitterParams {
            n02: 0.8,
            gamma_nrad: 0.2,
            t0exc: 30.0,
        };
        for i in 0..2000 {
            let t = i as f64 * 0.5;
            let r = evaluate(&p, &e, t);
            assert_eq!(
                r.intensity,
                r.rate * r.population,
                "identity broken at t={t}"
            );
            assert!(r.population >= 0.0 && r.intensity >= 0.0);
            assert_eq!(intensity(&p, &e, t), r.intensity);
        }
    }

    #[test]
    fn intensity_is_zero_before_excitation() {
        let p = fig_enhance();
        let e = EmitterParams {
            t0exc: 100.0,
            ..Default::default()
        };
        assert_eq!(intensity(&p, &e, 99.9), 0.0);
        assert_eq!(evaluate(&p, &e, 99.9).population, 0.0);
        assert!(intensity(&p, &e, 100.0) > 0.0);
    }

    #[test]
    fn stationary_intensity_is_a_pure_exponential() {
        let p = SwitchProfile {
            dgamma: 0.0,
            ..fig_enhance()
        };
        let e = EmitterParams::default();
        for t in [0.0, 100.0, 500.0] {
            let expect = p.gamma0 * (-p.gamma0 * t / PS_PER_NS).exp();
            assert!(rel_err(intensity(&p, &e, t), expect) < 1e-15);
        }
    }

    #[test]
    fn peak_intensity_enhancement_is_the_rate_contrast() {
        // At the switch instant the population has not yet paid any switch
        // cost, so the burst is exactly the factor-5 rate contrast.
        let p = fig_enhance();
        let us = p.unswitched();
        let e = EmitterParams::default();
        let ratio = intensity(&p, &e, p.t0pu) / intensity(&us, &e, p.t0pu);
        assert!(rel_err(ratio, 5.0) < 1e-14, "burst ratio {ratio}");
    }

    #[test]
    fn long_time_intensity_ratio_settles_at_the_population_ratio() {
        let p = fig_enhance();
        let us = p.unswitched();
        let e = EmitterParams::default();
        let t = p.t0pu + 40.0 * p.tau_sw;
        let ratio = intensity(&p, &e, t) / intensity(&us, &e, t);
        assert!(
            rel_err(ratio, 0.869_358_235_398_805_6) < 1e-13,
            "ratio {ratio}"
        );
    }

    #[test]
    fn inhibited_intensity_has_a_negative_curvature_window() {
        // Second differences of I(t) just after an inhibiting switch go
        // negative — impossible for any positive sum of decaying
        // exponentials, the fingerprint of a genuinely time-dependent rate.
        let p = fig_inhibit();
        let e = EmitterParams::default();
        let dt = 0.5;
        let mut found = false;
        let mut t = p.t0pu + dt;
        while t < p.t0pu + p.tau_sw {
            let d2 =
                intensity(&p, &e, t + dt) - 2.0 * intensity(&p, &e, t) + intensity(&p, &e, t - dt);
            if d2 < 0.0 {
                found = true;
                break;
            }
            t += dt;
        }
        assert!(found, "no negative-curvature sample in the window");
    }
}
