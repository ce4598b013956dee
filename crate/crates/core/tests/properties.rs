mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::Rng;
use vofsde::analysis::{
    dyadic_lags, holder_exponent_estimate, jensen_discrete_check, mc_sup_moment, theoretical_moment_envelope,
    InitialValue, Problem,
};
use vofsde::experiment::{build_problem, check_suite, ExperimentConfig, Study};
use vofsde::kernel::{AlphaSpec, FractionalKernel, KernelWeights};
use vofsde::noise::{path_rng, sample_realization_stream, LargeJumpLaw, LevyMeasureSpec, SmallJumpFamily};
use vofsde::solver::{grid_for, interlaced_solve, PicardOptions};
use vofsde::specfun::{beta, gamma, mittag_leffler, SeriesControl};
use vofsde::{CoefficientSet, Grid, JumpClass};

use common::{rel_err, BETA_TABLE, ENVELOPE_HALF_UNIT, GAMMA_TABLE, ML_TABLE};

fn stable_spec(large_mass: f64) -> Arc<LevyMeasureSpec> {
    let large = if large_mass > 0.0 {
        LargeJumpLaw::Pareto {
            mass: large_mass,
            tail_index: 2.5,
        }
    } else {
        LargeJumpLaw::None
    };
    Arc::new(LevyMeasureSpec::new(1, 0.01, SmallJumpFamily::StableLike { c: 0.5, beta: 0.7 }, large).unwrap())
}

#[test]
fn reference_tables() {
    for (x, want) in GAMMA_TABLE {
        assert!(rel_err(gamma(x).unwrap(), want) < 1e-13, "gamma({x})");
    }
    for (x, y, want) in BETA_TABLE {
        assert!(rel_err(beta(x, y).unwrap(), want) < 1e-12, "beta({x},{y})");
    }
    for (p, q, z, want) in ML_TABLE {
        let got = mittag_leffler(p, q, z, SeriesControl::default()).unwrap();
        assert!(rel_err(got, want) < 1e-11, "E_{p},{q}({z}) = {got}, want {want}");
    }
}

#[test]
fn envelope_reference_value() {
    let got = theoretical_moment_envelope(1.0, 2.0, 1.0, 0.5, 1.0).unwrap();
    assert!(rel_err(got, ENVELOPE_HALF_UNIT) < 1e-12, "{got}");
}

#[test]
fn jensen_on_random_vectors() {
    let mut rng = path_rng(99, 0);
    for case in 0..10_000 {
        let m = rng.random_range(1..40);
        let v: Vec<f64> = (0..m).map(|_| rng.random_range(-10.0..10.0)).collect();
        let p = [0.5, 1.0, 1.5, 2.0, 3.0][case % 5];
        assert!(jensen_discrete_check(&v, p), "case {case}: p = {p}, {v:?}");
    }
}

#[test]
fn monte_carlo_is_independent_of_thread_count() {
    let cfg = check_suite()
        .unwrap()
        .into_iter()
        .find(|(n, _)| *n == "moment_stability")
        .unwrap()
        .1;
    let problem = build_problem(&cfg).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_sup_moment(&problem, 2.0, 200, 5).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one.estimate.to_bits(), four.estimate.to_bits());
    assert_eq!(one.std_err.to_bits(), four.std_err.to_bits());
}

#[test]
fn smooth_paths_have_slope_p() {
    // without noise or memory u = 1 + t, so |u(t+d) - u(t)|^2 = d^2 exactly
    let k = FractionalKernel::new(0.0, AlphaSpec::constant(0.5, 1.0).unwrap()).unwrap();
    let problem = Problem::new(
        k,
        CoefficientSet::new(|_, _| 1.0),
        LevyMeasureSpec::none(),
        InitialValue::Fixed { value: 1.0 },
        1.0,
        256,
    )
    .unwrap();
    let r = holder_exponent_estimate(&problem, 2.0, 4, &dyadic_lags(1.0, 5), 1).unwrap();
    let slope = r.fitted_slope.unwrap();
    assert!((slope - 2.0).abs() < 1e-9, "{slope}");
    assert!(r.passed);
}

proptest! {
    #[test]
    fn gamma_recurrence(x in 0.01f64..25.0) {
        let lhs = gamma(x + 1.0).unwrap();
        prop_assert!(rel_err(lhs, x * gamma(x).unwrap()) < 1e-12);
    }

    #[test]
    fn gamma_is_lipschitz_on_unit_interval(x in 1.0f64..2.0, y in 1.0f64..2.0) {
        // |Γ'| on [1, 2] peaks at x = 1 with value γ_E
        let d = (gamma(x).unwrap() - gamma(y).unwrap()).abs();
        prop_assert!(d <= 0.5773 * (x - y).abs() + 1e-15);
    }

    #[test]
    fn beta_is_symmetric_and_matches_gamma(x in 0.05f64..8.0, y in 0.05f64..8.0) {
        let b = beta(x, y).unwrap();
        prop_assert!(rel_err(b, beta(y, x).unwrap()) < 1e-14);
        let via_gamma = gamma(x).unwrap() * gamma(y).unwrap() / gamma(x + y).unwrap();
        prop_assert!(rel_err(b, via_gamma) < 1e-12);
    }

    #[test]
    fn mittag_leffler_increases_on_positive_axis(p in 0.1f64..1.0, q in 1.0f64..2.0, frac in 0.0f64..0.9, step in 0.001f64..0.1) {
        // E_{p,q}(z) grows like exp(z^{1/p}); stay below z = 600^p
        let ctrl = SeriesControl::default();
        let z = frac * 600f64.powf(p);
        let dz = step * 600f64.powf(p);
        prop_assert!(mittag_leffler(p, q, z + dz, ctrl).unwrap() > mittag_leffler(p, q, z, ctrl).unwrap());
    }

    #[test]
    fn kernel_rows_integrate_the_kernel(lambda in -3.0f64..3.0, a0 in 0.0f64..0.6, slope in 0.0f64..0.3) {
        let k = FractionalKernel::new(lambda, AlphaSpec::affine(a0, slope, 1.0).unwrap()).unwrap();
        let g = Grid::uniform(1.0, 50).unwrap();
        let w = KernelWeights::new(&k, &g);
        for i in 1..g.len() {
            let sum: f64 = w.row(i).iter().sum();
            let want = k.row_sum_closed_form(g.nodes()[i]);
            prop_assert!((sum - want).abs() <= 1e-12 * want.abs().max(1.0));
            prop_assert!(w.row(i).iter().all(|x| x.signum() == lambda.signum() || *x == 0.0));
        }
    }

    #[test]
    fn realizations_are_ordered_and_classified(seed in any::<u64>(), stream in 0u64..1000, horizon in 0.1f64..3.0) {
        let spec = stable_spec(1.5);
        let r = sample_realization_stream(spec.clone(), horizon, seed, stream).unwrap();
        let again = sample_realization_stream(spec, horizon, seed, stream).unwrap();
        prop_assert_eq!(r.events(), again.events());
        for w in r.events().windows(2) {
            prop_assert!(w[0].time <= w[1].time);
        }
        for e in r.events() {
            prop_assert!(e.time > 0.0 && e.time <= horizon);
            let size = e.mark[0].abs();
            match e.class {
                JumpClass::Small => prop_assert!((0.01..1.0).contains(&size)),
                JumpClass::Large => prop_assert!(size >= 1.0),
            }
        }
    }

    #[test]
    fn linear_equation_scales_with_initial_value(seed in 0u64..500, scale in -4.0f64..4.0) {
        let spec = stable_spec(1.0);
        let r = sample_realization_stream(spec, 1.0, seed, 0).unwrap();
        let grid = grid_for(&r, 64).unwrap();
        let k = FractionalKernel::new(-1.0, AlphaSpec::constant(0.4, 1.0).unwrap()).unwrap();
        let c = CoefficientSet::new(|_, u| -0.5 * u)
            .with_g(|_, u, z| u * z[0])
            .with_h(|_, u, z| 0.3 * u * z[0].min(2.0))
            .with_compensator(|_, _| 0.0);
        let opts = PicardOptions { tol: 1e-14, max_iter: 200 };
        let (base, _) = interlaced_solve(&k, &c, &r, 1.0, &grid, opts).unwrap();
        let (scaled, _) = interlaced_solve(&k, &c, &r, scale, &grid, opts).unwrap();
        let tol = 1e-11 * base.sup_abs().max(1.0) * scale.abs().max(1.0);
        for (a, b) in base.values().iter().zip(scaled.values()) {
            prop_assert!((scale * a - b).abs() <= tol);
        }
    }

    #[test]
    fn config_round_trips(
        horizon in 0.1f64..10.0,
        steps in 16usize..5000,
        p in 1.0f64..2.0,
        paths in 1usize..100_000,
        seed in any::<u64>(),
    ) {
        let (_, mut cfg) = check_suite().unwrap().into_iter().find(|(n, _)| *n == "holder").unwrap();
        cfg.problem.kernel.alpha = AlphaSpec::constant(0.5, horizon).unwrap();
        cfg.numerics.horizon = horizon;
        cfg.numerics.steps = steps;
        cfg.study = Study::McMoment { p, paths, doubling: false };
        cfg.master_seed = seed;
        let text = cfg.to_json_pretty();
        let back = ExperimentConfig::from_json_str(&text).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
