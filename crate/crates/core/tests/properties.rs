//! Cross-module invariants on randomized inputs: rate envelopes, exponent
//! accumulation, engine agreement, CSV round trips, and sweep semantics.

use proptest::prelude::*;

use switched_cavity::dynamics::{self, EmitterParams};
use switched_cavity::integrate::{quad_adaptive, solve_rate_equation, PumpProfile, TimeGrid};
use switched_cavity::rate_models::{StepMode, SwitchProfile};
use switched_cavity::scenario::{
    csv_string, preset, read_csv, run_scenario, sweep, Column, RateModel, TimeSeries,
};

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// A valid switch profile drawn from the physically sensible box used
/// throughout: Γ₀ ∈ [0.5, 5] /ns, ΔΓ ∈ [−0.9Γ₀, 9Γ₀], τ_sw ∈ [5, 100] ps.
fn profile_strategy() -> impl Strategy<Value = SwitchProfile> {
    (
        0.5f64..5.0,
        -0.9f64..9.0,
        5.0f64..100.0,
        0.0f64..0.5,
        prop_oneof![Just(StepMode::Hard), Just(StepMode::ErfSmoothed)],
    )
        .prop_map(|(gamma0, frac, tau_sw, pu_frac, step_mode)| SwitchProfile {
            gamma0,
            dgamma: frac * gamma0,
            t0pu: 150.0,
            tau_sw,
            tau_pu: pu_frac * tau_sw,
            step_mode,
        })
}

proptest! {
    /// The rate never leaves the band spanned by the unswitched rate and
    /// the peak switched rate, for either step shape and any time.
    #[test]
    fn rate_stays_inside_its_envelope(
        p in profile_strategy(),
        t in -100.0f64..1300.0,
    ) {
        let r = p.rate(t);
        let lo = p.gamma0.min(p.gamma0 + p.dgamma) - 1e-12;
        let hi = p.gamma0.max(p.gamma0 + p.dgamma) + 1e-12;
        prop_assert!(r >= lo && r <= hi, "rate {r} outside [{lo}, {hi}]");
    }

    /// The accumulated extra decay exponent is monotone for enhancement
    /// switches and never overshoots its saturation value. For a hard step
    /// that value is [`dynamics::alpha_infinity`]; an erf-smoothed rise
    /// saturates a factor e^(σ²/2τ_sw²) higher (σ the Gaussian width of the
    /// rise), because the smoothing spreads a little switched area to times
    /// before the nominal onset.
    #[test]
    fn alpha_switch_is_monotone_and_bounded(
        p in profile_strategy().prop_filter("enhancement", |p| p.dgamma > 0.0),
        t1 in 0.0f64..1300.0,
        dt in 0.0f64..200.0,
    ) {
        let a1 = dynamics::alpha_switch(&p, t1);
        let a2 = dynamics::alpha_switch(&p, t1 + dt);
        let a_sat = dynamics::alpha_infinity(&p)
            * match p.step_mode {
                StepMode::Hard => 1.0,
                StepMode::ErfSmoothed => {
                    let sigma = p.tau_pu / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
                    (sigma * sigma / (2.0 * p.tau_sw * p.tau_sw)).exp()
                }
            };
        prop_assert!(a1 >= 0.0);
        prop_assert!(a2 + 1e-12 * a_sat >= a1, "not monotone: {a1} -> {a2}");
        prop_assert!(a1 <= a_sat * (1.0 + 1e-9), "{a1} above saturation {a_sat}");
    }

    /// Splitting an integration interval at interior points never moves the
    /// result beyond the requested tolerance.
    #[test]
    fn quadrature_is_split_invariant(
        k in 0.01f64..0.2,
        a in 0.0f64..100.0,
        len in 10.0f64..500.0,
        s1 in 0.01f64..0.99,
        s2 in 0.01f64..0.99,
    ) {
        let b = a + len;
        let f = |t: f64| (-k * (t - a)).exp();
        let plain = quad_adaptive(f, a, b, 1e-10, 1e-15, &[]).unwrap();
        let splits = [a + s1 * len, a + s2 * len];
        let split = quad_adaptive(f, a, b, 1e-10, 1e-15, &splits).unwrap();
        prop_assert!(
            rel_err(plain.value, split.value) < 1e-9,
            "{} vs {}", plain.value, split.value
        );
    }

    /// CSV writing followed by parsing reproduces every float bit for bit,
    /// including negative zero and subnormals.
    #[test]
    fn csv_round_trip_is_bitwise(
        t0 in -1e6f64..1e6,
        steps in prop::collection::vec(
            (
                1e-6f64..1e3,
                any::<f64>().prop_filter("finite", |x| x.is_finite()),
                any::<f64>().prop_filter("finite", |x| x.is_finite()),
            ),
            0..20,
        ),
    ) {
        let mut t = t0;
        let rows: Vec<Vec<f64>> = steps
            .into_iter()
            .map(|(dt, a, b)| {
                t += dt;
                vec![t, a, b]
            })
            .collect();
        let ts = TimeSeries {
            metadata: vec![("engine".into(), "test".into())],
            columns: vec![Column::T, Column::N2, Column::Intensity],
            rows,
        };
        let back = read_csv(&csv_string(&ts)).unwrap();
        prop_assert_eq!(back.columns, ts.columns.clone());
        prop_assert_eq!(back.rows.len(), ts.rows.len());
        for (r1, r2) in ts.rows.iter().zip(&back.rows) {
            for (x, y) in r1.iter().zip(r2) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// The closed-form population and the adaptive ODE solution tell the
    /// same story for random hard-step scenarios, sampled at the default
    /// output resolution.
    #[test]
    fn analytic_and_ode_agree_on_random_hard_scenarios(
        p in profile_strategy().prop_map(|mut p| {
            p.step_mode = StepMode::Hard;
            p
        }),
        gamma_nrad in 0.0f64..1.0,
        t0exc in 0.0f64..50.0,
    ) {
        let e = EmitterParams { n02: 1.0, gamma_nrad, t0exc };
        let g = TimeGrid::new(0.0, p.t0pu + 10.0 * p.tau_sw + 100.0, 0.5).unwrap();
        let pump = PumpProfile::delta(t0exc);
        let sol = solve_rate_equation(|t| p.rate(t), &pump, &e, &g, &[p.t0pu]).unwrap();
        for (&t, &n_ode) in sol.t.iter().zip(&sol.n2) {
            if t < t0exc {
                prop_assert_eq!(n_ode, 0.0);
                continue;
            }
            let n_ana = dynamics::population(&p, &e, t).unwrap();
            prop_assert!(
                rel_err(n_ode, n_ana) < 1e-8,
                "t={t}: ode {n_ode} vs analytic {n_ana}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Sweep results depend only on the value, not on its position in the
    /// list: reversing the list reverses the outputs and changes nothing
    /// else.
    #[test]
    fn sweep_outputs_are_permutation_invariant(
        values in prop::collection::vec(0.0f64..4.0, 1..4),
    ) {
        let mut s = preset("fig3_enhance").unwrap();
        s.grid.output_dt = 5.0; // coarse grid keeps the many cases cheap
        let forward = sweep(&s, "switch.dgamma_per_ns", &values).unwrap();
        let reversed_values: Vec<f64> = values.iter().rev().copied().collect();
        let reversed = sweep(&s, "switch.dgamma_per_ns", &reversed_values).unwrap();
        for (i, ts) in forward.iter().enumerate() {
            let mirror = &reversed[values.len() - 1 - i];
            prop_assert_eq!(&ts.rows, &mirror.rows);
        }
    }
}

/// Sweeping the peak shift over whole linewidths reads the documented
/// linewidth factors straight off the emitted column.
#[test]
fn sweeping_the_peak_shift_hits_the_documented_linewidth_factors() {
    let s = preset("fig4_loss").unwrap();
    let series = sweep(&s, "loss.s0", &[0.0, 1.0, 2.0, 3.0]).unwrap();
    let expected = [1.0, 1.083, 1.166, 1.249];
    for (ts, want) in series.iter().zip(expected) {
        let ti = ts.column_index(Column::T).unwrap();
        let fi = ts.column_index(Column::GammaOverGammaI).unwrap();
        let row = ts
            .rows
            .iter()
            .find(|r| r[ti] == 150.0)
            .expect("sample at the switch peak");
        assert_eq!(row[fi], want, "peak factor for S0 sweep");
    }
}

/// The standard enhancement run survives a write/parse cycle with its
/// physics intact: the burst peaks right at the switch and decays on the
/// relaxation timescale.
#[test]
fn reparsed_enhancement_output_keeps_the_burst_shape() {
    let s = preset("fig3_enhance").unwrap();
    let ts = read_csv(&csv_string(&run_scenario(&s).unwrap())).unwrap();
    let t = ts.column_values(Column::T).unwrap();
    let i = ts.column_values(Column::Intensity).unwrap();

    let peak = (0..t.len()).max_by(|&a, &b| i[a].total_cmp(&i[b])).unwrap();
    assert_eq!(t[peak], 150.0, "burst peaks at the switch-on time");

    // Width: time for the burst to fall halfway from its peak back to the
    // pre-switch level, expected on the order of the 35 ps relaxation time.
    let before = i[peak - 1];
    let half_level = before + 0.5 * (i[peak] - before);
    let half = (peak..t.len())
        .find(|&k| i[k] <= half_level)
        .expect("burst decays");
    let width = t[half] - t[peak];
    let RateModel::Switch(p) = &s.rate_model else {
        unreachable!()
    };
    assert!(
        width >= 0.4 * p.tau_sw && width <= 1.2 * p.tau_sw,
        "half-decay width {width} ps should be about tau_sw = {} ps",
        p.tau_sw
    );
}

/// The engine-agreement guarantee on the presets themselves: for every
/// hard-step delta-pump preset, forcing the numeric path reproduces the
/// analytic columns to 1e-8.
#[test]
fn presets_agree_between_engines() {
    for name in ["fig2", "fig3_enhance", "fig3_inhibit", "fig4_loss"] {
        let s = preset(name).unwrap();
        let ts = run_scenario(&s).unwrap();
        assert!(
            ts.metadata.contains(&("engine".into(), "analytic".into())),
            "{name} should take the analytic path"
        );
        let RateModel::Switch(p) = &s.rate_model else {
            panic!("{name} is a switch preset")
        };
        let sol =
            solve_rate_equation(|t| p.rate(t), &s.pump, &s.emitter, &s.grid, &[p.t0pu]).unwrap();
        let n2 = ts.column_values(Column::N2).unwrap();
        let rate = ts.column_values(Column::GammaRad).unwrap();
        let intensity = ts.column_values(Column::Intensity).unwrap();
        for k in 0..sol.t.len() {
            assert!(
                rel_err(sol.n2[k], n2[k]) < 1e-8,
                "{name} t={}: ode {} vs analytic {}",
                sol.t[k],
                sol.n2[k],
                n2[k]
            );
            let i_ode = rate[k] * sol.n2[k];
            assert!(
                rel_err(i_ode, intensity[k]) < 1e-8,
                "{name} t={}: intensity {} vs {}",
                sol.t[k],
                i_ode,
                intensity[k]
            );
        }
    }
}
