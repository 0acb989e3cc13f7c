//! Spontaneous-emission dynamics of two-level emitters whose radiative decay
//! rate is switched in time by an ultrafast change of their optical
//! environment (e.g. a microcavity resonance dragged across the emitter line
//! by free-carrier injection).
//!
//! The crate is organized around one physical picture: in the weak-coupling
//! regime the decay rate follows the instantaneous local density of optical
//! states, so a switched cavity turns the familiar constant-rate exponential
//! decay into a rate *profile* Γ_rad(t). Everything else — populations,
//! emitted intensity, photon bursts, free-carrier loss — derives from that
//! profile.
//!
//! Module map:
//!
//! * [`rate_models`] — decay-rate profiles: the exponential-relaxation switch
//!   (`SwitchProfile`) and the mechanistic Lorentzian cavity trajectory
//!   (`CavityTrajectory`), plus the golden-rule LDOS-to-rate conversion.
//! * [`dynamics`] — closed-form excited-state population and intensity for
//!   delta-pulse excitation, and the accumulated-decay figure of merit Δα.
//! * [`loss`] — free-carrier absorption: time-dependent linewidth broadening
//!   and the lossy intensity integral.
//! * [`integrate`] — numerical engine: adaptive Simpson quadrature and an
//!   embedded Runge–Kutta 4(5) solver for the pumped rate equation, used as
//!   the brute-force cross-check of the analytic formulas.
//! * [`scenario`] — declarative scenario files, bundled presets, parameter
//!   sweeps, and deterministic CSV export; backs the `switched-cavity` CLI.
//!
//! Unit conventions, chosen so the interesting numbers stay O(1): times in
//! picoseconds, rates in 1/ns, cavity frequencies and linewidths in rad/ps.
//! Products of a rate and a time therefore carry an explicit factor
//! [`PS_PER_NS`]; only [`rate_models::rate_from_ldos`] works in SI.

// Validation code writes `!(x > 0.0)` on purpose: unlike `x <= 0.0`, the
// negated form also rejects NaN. `partial_cmp` would say the same thing in
// four lines instead of one.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod integrate;
pub mod loss;
pub mod rate_models;
pub mod scenario;

/// Picoseconds per nanosecond: converts `rate [1/ns] × time [ps]` products to
/// dimensionless exponents (divide by this constant).
pub const PS_PER_NS: f64 = 1000.0;

/// Parameter-validation failure for the domain types.
///
/// Every domain record exposes a `validate()` that names the offending field
/// and the violated constraint instead of silently producing NaNs downstream.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamError {
    /// A field violates its documented constraint.
    #[error("invalid {field}: {constraint} (got {value})")]
    Invalid {
        /// Name of the offending field.
        field: &'static str,
        /// Human-readable constraint, e.g. `"must be > 0"`.
        constraint: &'static str,
        /// The rejected value.
        value: f64,
    },
    /// `effective_switch_time` is undefined for a zero cavity shift.
    #[error("undefined effective switch time: cavity frequency shift is zero")]
    UndefinedSwitchTime,
}

impl ParamError {
    /// Shorthand used by the `validate()` implementations.
    pub(crate) fn invalid(field: &'static str, constraint: &'static str, value: f64) -> Self {
        ParamError::Invalid {
            field,
            constraint,
            value,
        }
    }
}
