//! General-purpose numerical engine: adaptive quadrature and an adaptive
//! embedded Runge–Kutta solver for the pumped two-level rate equation
//!
//! ```text
//! dN₂/dt = pump(t) − (Γ_rad(t) + Γ_nrad)·N₂(t)
//! ```
//!
//! The solver is the brute-force cross-check for the closed-form results in
//! [`crate::dynamics`]: it knows nothing about switches except that the
//! caller declares their discontinuity times, at which integration is
//! restarted so every internal step sees a smooth right-hand side.
//!
//! Units follow the crate convention (time ps, rates 1/ns, populations
//! normalized); the ps↔ns conversion happens once, inside the right-hand
//! side.

use serde::Serialize;

use crate::dynamics::EmitterParams;
use crate::{ParamError, PS_PER_NS};

/// 4·ln 2, the exponent scale that makes `fwhm` the full width at half
/// maximum of a Gaussian pulse.
const FOUR_LN2: f64 = 2.772_588_722_239_781;

/// Hard limit on the adaptive-Simpson recursion depth. 48 halvings shrink
/// any interval below f64 resolution, so deeper recursion cannot help.
pub const QUAD_MAX_DEPTH: u32 = 48;

/// Hard limit on ODE steps (accepted + rejected) per integration, so a
/// pathological right-hand side fails loudly instead of hanging.
const MAX_STEPS: u64 = 20_000_000;

// ---------------------------------------------------------------------------
// Adaptive quadrature
// ---------------------------------------------------------------------------

/// Outcome of a converged adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    /// The integral estimate.
    pub value: f64,
    /// Accumulated Richardson error bound on `value` (one-sided, estimated).
    pub error_estimate: f64,
    /// Number of integrand evaluations spent.
    pub evals: u64,
}

/// Quadrature failed to reach the requested tolerance before exhausting the
/// recursion depth. Carries the best estimate achieved so the caller can
/// still inspect (or deliberately accept) it.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error(
    "quadrature did not converge: depth limit {max_depth} reached; best estimate {estimate:e} \
     with error bound {error_bound:e} against requested tolerance {requested:e}"
)]
pub struct QuadError {
    /// Best integral estimate at the point of giving up.
    pub estimate: f64,
    /// Accumulated error bound on that estimate.
    pub error_bound: f64,
    /// The absolute tolerance that was being targeted.
    pub requested: f64,
    /// The depth limit that was hit.
    pub max_depth: u32,
}

struct QuadCtx<'a, F> {
    f: &'a F,
    evals: u64,
    err: f64,
}

impl<F: Fn(f64) -> f64> QuadCtx<'_, F> {
    fn eval(&mut self, x: f64) -> f64 {
        self.evals += 1;
        (self.f)(x)
    }

    /// Classic adaptive Simpson with Richardson extrapolation: `s` is the
    /// one-panel estimate over [a,b] with midpoint m; refine until the
    /// two-panel correction is below `eps`, halving `eps` with the interval.
    ///
    /// Acceptance applies a 10× safety margin: the d/15 error estimate is
    /// for the *uncorrected* two-panel value, and once the correction is
    /// added the true residual is routinely a few times larger than d/15
    /// predicts. One extra halving (a 16× gain for a smooth integrand) buys
    /// the margin back, so the cost is small.
    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        a: f64,
        m: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        s: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.eval(lm);
        let frm = self.eval(rm);
        let sl = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let sr = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let s2 = sl + sr;
        let d = s2 - s;
        let unrefinable = !(a < lm && lm < m && m < rm && rm < b);
        if d.abs() <= 1.5 * eps || depth >= QUAD_MAX_DEPTH || unrefinable {
            self.err += d.abs() / 15.0;
            return s2 + d / 15.0;
        }
        let half = 0.5 * eps;
        self.refine(a, lm, m, fa, flm, fm, sl, half, depth + 1)
            + self.refine(m, rm, b, fm, frm, fb, sr, half, depth + 1)
    }

    /// Composite 8-panel Simpson sweep, used only to set the error budget.
    /// `b_sample` is where the right endpoint is actually evaluated (the
    /// left limit when `b` is a declared jump).
    fn rough(&mut self, a: f64, b: f64, b_sample: f64) -> f64 {
        let h = (b - a) / 16.0;
        let mut acc = self.eval(a) + self.eval(b_sample);
        for i in 1..16 {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * self.eval(a + i as f64 * h);
        }
        acc * h / 3.0
    }
}

/// Adaptive-Simpson integral of `f` over [a, b] with mandatory subdivision
/// at each interior `split_points` entry (put known kinks and jumps there).
///
/// Split points assume jumps are right-continuous (the convention of every
/// step in this crate): the segment left of a split samples its right
/// endpoint at the nearest representable time *below* the split, so each
/// side integrates its own smooth branch. For smooth integrands the 1-ulp
/// shift is immaterial.
///
/// The error target is `atol + rtol·|integral|`. On success the result
/// carries the value, an accumulated error bound, and the evaluation count;
/// if the accumulated bound still exceeds the target once refinement is
/// exhausted (recursion depth [`QUAD_MAX_DEPTH`], or no representable
/// midpoints left), the full traversal completes and the best estimate is
/// returned inside [`QuadError`] instead.
///
/// Panics if `a > b` or if both tolerances are zero (caller bugs, not data).
pub fn quad_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rtol: f64,
    atol: f64,
    split_points: &[f64],
) -> Result<QuadResult, QuadError> {
    assert!(a <= b, "quad_adaptive: interval reversed (a={a} > b={b})");
    assert!(
        rtol >= 0.0 && atol >= 0.0 && rtol + atol > 0.0,
        "quad_adaptive: tolerances must be non-negative and not both zero"
    );
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            evals: 0,
        });
    }

    let mut bounds = vec![a];
    let mut splits: Vec<f64> = split_points
        .iter()
        .copied()
        .filter(|s| s.is_finite() && *s > a && *s < b)
        .collect();
    splits.sort_by(f64::total_cmp);
    splits.dedup();
    bounds.extend(splits);
    bounds.push(b);

    let mut ctx = QuadCtx {
        f: &f,
        evals: 0,
        err: 0.0,
    };

    // Left-limit sampling for segment ends that are declared jumps.
    let end_sample = |sb: f64| if sb < b { sb.next_down() } else { sb };

    // Pass 1: cheap composite estimate per segment to size the error budget.
    let rough_total: f64 = bounds
        .windows(2)
        .map(|w| ctx.rough(w[0], w[1], end_sample(w[1])))
        .sum();
    let eps_total = atol + rtol * rough_total.abs();

    // Pass 2: adaptive refinement, each segment owning a length-share of
    // the budget.
    let total_len = b - a;
    let mut value = 0.0;
    for w in bounds.windows(2) {
        let (sa, sb) = (w[0], w[1]);
        let sm = 0.5 * (sa + sb);
        let fa = ctx.eval(sa);
        let fm = ctx.eval(sm);
        let fb = ctx.eval(end_sample(sb));
        let s = (sb - sa) / 6.0 * (fa + 4.0 * fm + fb);
        let eps = eps_total * ((sb - sa) / total_len);
        value += ctx.refine(sa, sm, sb, fa, fm, fb, s, eps, 0);
    }

    // The per-segment shares above are a scheduling device, not the
    // contract: a leaf that misses its share (depth limit, or rounding noise
    // on a near-singular sliver) is harmless as long as the accumulated
    // bound still meets the requested total.
    if ctx.err > eps_total {
        Err(QuadError {
            estimate: value,
            error_bound: ctx.err,
            requested: eps_total,
            max_depth: QUAD_MAX_DEPTH,
        })
    } else {
        Ok(QuadResult {
            value,
            error_estimate: ctx.err,
            evals: ctx.evals,
        })
    }
}

// ---------------------------------------------------------------------------
// Pump profiles and time grids
// ---------------------------------------------------------------------------

/// Temporal shape of the excitation pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PumpKind {
    /// Instantaneous excitation: realized as the initial condition
    /// N₂(t0exc) = N₀₂, never as a narrow spike the solver must resolve.
    Delta,
    /// Gaussian pulse of the given full width at half maximum [ps],
    /// centered at `t0exc`, peak excitation rate = `eta_abs·amplitude`.
    GaussianPulse {
        /// Pulse FWHM [ps]; > 0.
        fwhm: f64,
    },
    /// Constant excitation switched on at `t0exc` and never off.
    ConstantWave,
}

/// Excitation pump: when, how strongly, and with what temporal shape the
/// emitter population is injected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PumpProfile {
    /// Pulse shape.
    pub kind: PumpKind,
    /// Excitation time t0exc [ps]: delta-pulse instant, Gaussian center, or
    /// constant-wave turn-on.
    pub t0exc: f64,
    /// Peak photon arrival rate [photons/ps per emitter]; ≥ 0.
    /// Ignored by `Delta`, which injects `EmitterParams::n02` directly.
    pub amplitude: f64,
    /// Absorption efficiency η_abs ∈ [0, 1]: fraction of arriving photons
    /// converted to excited population.
    pub eta_abs: f64,
    /// Excitation angular frequency [rad/s]; carried for bookkeeping (the
    /// photon energy is already divided out of `amplitude`).
    pub omega_exc: f64,
}

impl PumpProfile {
    /// Delta-pulse pump at `t0exc` (the standard pulsed-excitation setup).
    pub fn delta(t0exc: f64) -> Self {
        PumpProfile {
            kind: PumpKind::Delta,
            t0exc,
            amplitude: 1.0,
            eta_abs: 1.0,
            omega_exc: 0.0,
        }
    }

    /// Checks all field constraints.
    pub fn validate(&self) -> Result<(), ParamError> {
        if !self.t0exc.is_finite() {
            return Err(ParamError::invalid("t0exc", "must be finite", self.t0exc));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(ParamError::invalid(
                "amplitude",
                "must be finite and >= 0",
                self.amplitude,
            ));
        }
        if !(0.0..=1.0).contains(&self.eta_abs) {
            return Err(ParamError::invalid(
                "eta_abs",
                "must lie in [0, 1]",
                self.eta_abs,
            ));
        }
        if !(self.omega_exc >= 0.0 && self.omega_exc.is_finite()) {
            return Err(ParamError::invalid(
                "omega_exc",
                "must be finite and >= 0",
                self.omega_exc,
            ));
        }
        if let PumpKind::GaussianPulse { fwhm } = self.kind {
            if !(fwhm > 0.0 && fwhm.is_finite()) {
                return Err(ParamError::invalid(
                    "fwhm",
                    "must be finite and > 0 for a Gaussian pulse",
                    fwhm,
                ));
            }
        }
        Ok(())
    }

    /// Instantaneous excitation rate [1/ps] fed into the rate equation.
    /// Zero for `Delta` (handled as an initial condition instead).
    pub fn pump_rate(&self, t: f64) -> f64 {
        match self.kind {
            PumpKind::Delta => 0.0,
            PumpKind::GaussianPulse { fwhm } => {
                let x = (t - self.t0exc) / fwhm;
                let arg = -FOUR_LN2 * x * x;
                if arg < -700.0 {
                    0.0 // exp underflows; avoid spurious denormals
                } else {
                    self.eta_abs * self.amplitude * arg.exp()
                }
            }
            PumpKind::ConstantWave => {
                if t >= self.t0exc {
                    self.eta_abs * self.amplitude
                } else {
                    0.0
                }
            }
        }
    }
}

/// Output grid and solver tolerances for one integration run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    /// First output sample [ps].
    pub t_start: f64,
    /// End of the integration window [ps]; > `t_start`.
    pub t_end: f64,
    /// Output sample spacing [ps]; > 0. Also caps the internal step size so
    /// dense output stays accurate.
    pub output_dt: f64,
    /// Relative tolerance of the step-size controller; > 0.
    pub rtol: f64,
    /// Absolute tolerance of the step-size controller (population units of
    /// 1); > 0.
    pub atol: f64,
}

impl TimeGrid {
    /// Default relative tolerance: comfortably below the 1e−8 accuracy bar
    /// the solver is held to.
    pub const DEFAULT_RTOL: f64 = 1e-9;
    /// Default absolute tolerance in normalized population units.
    pub const DEFAULT_ATOL: f64 = 1e-12;

    /// Grid over [t_start, t_end] sampled every `output_dt`, with the
    /// default tolerances.
    pub fn new(t_start: f64, t_end: f64, output_dt: f64) -> Result<Self, ParamError> {
        let g = TimeGrid {
            t_start,
            t_end,
            output_dt,
            rtol: Self::DEFAULT_RTOL,
            atol: Self::DEFAULT_ATOL,
        };
        g.validate()?;
        Ok(g)
    }

    /// Checks all field constraints.
    pub fn validate(&self) -> Result<(), ParamError> {
        if !self.t_start.is_finite() {
            return Err(ParamError::invalid(
                "t_start",
                "must be finite",
                self.t_start,
            ));
        }
        if !(self.t_end > self.t_start) || !self.t_end.is_finite() {
            return Err(ParamError::invalid(
                "t_end",
                "must be finite and > t_start",
                self.t_end,
            ));
        }
        if !(self.output_dt > 0.0 && self.output_dt.is_finite()) {
            return Err(ParamError::invalid(
                "output_dt",
                "must be finite and > 0",
                self.output_dt,
            ));
        }
        if !(self.rtol > 0.0) {
            return Err(ParamError::invalid("rtol", "must be > 0", self.rtol));
        }
        if !(self.atol > 0.0) {
            return Err(ParamError::invalid("atol", "must be > 0", self.atol));
        }
        Ok(())
    }

    /// The output sample times: `t_start + i·output_dt` for all i with
    /// `t_start + i·output_dt ≤ t_end` (up to rounding slack, so an exact
    /// final multiple lands exactly on `t_end`).
    pub fn sample_times(&self) -> Vec<f64> {
        let n = ((self.t_end - self.t_start) / self.output_dt + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| (self.t_start + i as f64 * self.output_dt).min(self.t_end))
            .collect()
    }
}

impl Default for TimeGrid {
    /// The standard viewing window: [0, 1000] ps sampled every 0.5 ps.
    fn default() -> Self {
        TimeGrid {
            t_start: 0.0,
            t_end: 1000.0,
            output_dt: 0.5,
            rtol: Self::DEFAULT_RTOL,
            atol: Self::DEFAULT_ATOL,
        }
    }
}

// ---------------------------------------------------------------------------
// ODE solver
// ---------------------------------------------------------------------------

/// Excited-state population sampled on the output grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    /// Sample times [ps], as produced by [`TimeGrid::sample_times`].
    pub t: Vec<f64>,
    /// Excited-state population N₂ at each sample; ≥ 0.
    pub n2: Vec<f64>,
}

/// Failure of the adaptive step-size controller.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OdeError {
    /// The controller drove the step size below the resolvable floor — the
    /// right-hand side is effectively stiff or contains an undeclared
    /// discontinuity.
    #[error("stiff or discontinuous input at t={t} ps (step size fell to {h:e} ps)")]
    StepUnderflow {
        /// Time at which the step size collapsed [ps].
        t: f64,
        /// The offending step size [ps].
        h: f64,
    },
    /// Invalid pump, emitter, or grid parameters.
    #[error(transparent)]
    Param(#[from] ParamError),
}

// Dormand–Prince 5(4) tableau (FSAL: stage 7 is the next step's stage 1).
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 5th-minus-4th-order error weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Weights of the method's fourth-order continuous extension (dense output).
// Together with the endpoint values and slopes these define a quartic in the
// step whose interpolation error is O(h⁵) — one order better than a cubic
// Hermite, at no extra function evaluations.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Integrates the pumped rate equation
///
/// ```text
/// dN₂/dt = pump(t) − (rate_fn(t) + Γ_nrad)·N₂/1000
/// ```
///
/// (`rate_fn` and Γ_nrad in 1/ns, t in ps) and samples N₂ onto the output
/// grid with the solver's fourth-order continuous extension, so sampled
/// values carry the same order of accuracy as the accepted steps.
///
/// `breakpoints` must list every time at which `rate_fn` (or the pump) is
/// discontinuous or kinked — typically the switch-on time. Integration is
/// restarted at each one, and `pump.t0exc` is always included, so no
/// internal step straddles a jump; right-hand-side evaluations at a segment
/// end use the left limit so each segment sees only its own branch.
///
/// Delta pumps become the initial condition N₂(t0exc) = `e.n02`; samples
/// before t0exc are 0. Other pumps integrate from `g.t_start` with
/// N₂ = 0, so the grid should start before the pump does. The internal step
/// is capped at `g.output_dt` (and at half the pulse FWHM for Gaussian
/// pumps) to keep dense output and narrow pulses fully resolved.
pub fn solve_rate_equation<F: Fn(f64) -> f64>(
    rate_fn: F,
    pump: &PumpProfile,
    e: &EmitterParams,
    g: &TimeGrid,
    breakpoints: &[f64],
) -> Result<OdeSolution, OdeError> {
    pump.validate()?;
    e.validate()?;
    g.validate()?;

    let samples = g.sample_times();
    let mut n2 = vec![0.0f64; samples.len()];

    let (s0, y_init) = match pump.kind {
        PumpKind::Delta => (pump.t0exc, e.n02),
        _ => (g.t_start, 0.0),
    };

    let mut out = samples.partition_point(|&ts| ts < s0);
    let mut y = y_init;
    while out < samples.len() && samples[out] == s0 {
        n2[out] = y.max(0.0);
        out += 1;
    }

    // Segment boundaries: declared discontinuities strictly inside the
    // integration window, plus the pump turn-on.
    let mut bps: Vec<f64> = breakpoints
        .iter()
        .copied()
        .chain(std::iter::once(pump.t0exc))
        .filter(|bp| bp.is_finite() && *bp > s0 && *bp < g.t_end)
        .collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    let mut bounds = Vec::with_capacity(bps.len() + 2);
    bounds.push(s0);
    bounds.extend(bps);
    bounds.push(g.t_end);

    let h_floor = 1e-14 * (g.t_end - s0);
    let mut h_max = g.output_dt;
    if let PumpKind::GaussianPulse { fwhm } = pump.kind {
        h_max = h_max.min(0.5 * fwhm);
    }

    let rhs = |t: f64, yv: f64| pump.pump_rate(t) - (rate_fn(t) + e.gamma_nrad) / PS_PER_NS * yv;

    let mut steps: u64 = 0;
    for w in bounds.windows(2) {
        let (sa, sb) = (w[0], w[1]);
        if !(sb > sa) {
            continue;
        }
        // Interior segment ends are declared discontinuities: evaluate the
        // left limit there so this segment never sees the next branch.
        let interior = sb < g.t_end;
        let adj = |t: f64| {
            let t = t.min(sb);
            if interior && t == sb {
                sb.next_down()
            } else {
                t
            }
        };
        let mut t = sa;
        let mut h = h_max.min(sb - sa);
        let mut k1 = rhs(adj(t), y);
        while t < sb {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(OdeError::StepUnderflow { t, h });
            }
            let end_step = h >= sb - t;
            if end_step {
                h = sb - t;
            }
            if h < h_floor {
                return Err(OdeError::StepUnderflow { t, h });
            }

            let k2 = rhs(adj(t + 0.2 * h), y + h * (A21 * k1));
            let k3 = rhs(adj(t + 0.3 * h), y + h * (A31 * k1 + A32 * k2));
            let k4 = rhs(adj(t + 0.8 * h), y + h * (A41 * k1 + A42 * k2 + A43 * k3));
            let k5 = rhs(
                adj(t + 8.0 / 9.0 * h),
                y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
            );
            let k6 = rhs(
                adj(t + h),
                y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
            );
            let y5 = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
            let t_new = if end_step { sb } else { t + h };
            let k7 = rhs(adj(t_new), y5);

            let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
            let sc = g.atol + g.rtol * y.abs().max(y5.abs());
            let en = (err / sc).abs();

            if en <= 1.0 {
                // Accepted: emit all output samples inside (t, t_new] via the
                // continuous extension. The quartic matches value and slope at
                // both step ends (the rcont5 term vanishes there) and carries
                // the mid-step correction that makes it 4th-order accurate.
                if out < samples.len() && samples[out] <= t_new {
                    let ydiff = y5 - y;
                    let bspl = h * k1 - ydiff;
                    let rcont4 = ydiff - h * k7 - bspl;
                    let rcont5 = h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7);
                    while out < samples.len() && samples[out] <= t_new {
                        let th = ((samples[out] - t) / h).clamp(0.0, 1.0);
                        let omt = 1.0 - th;
                        let yi = y + th * (ydiff + omt * (bspl + th * (rcont4 + omt * rcont5)));
                        n2[out] = yi.max(0.0);
                        out += 1;
                    }
                }
                t = t_new;
                y = y5;
                k1 = k7; // FSAL (only reused within this segment)
                let fac = if en == 0.0 {
                    5.0
                } else {
                    (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
                };
                h = (h * fac).min(h_max);
            } else {
                let fac = if en.is_finite() {
                    (0.9 * en.powf(-0.2)).clamp(0.2, 1.0)
                } else {
                    0.2
                };
                h *= fac;
            }
        }
    }

    // Any trailing samples are at t_end up to rounding slack.
    while out < samples.len() {
        n2[out] = y.max(0.0);
        out += 1;
    }

    Ok(OdeSolution { t: samples, n2 })
}
