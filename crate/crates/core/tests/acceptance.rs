//! Acceptance criteria. Each test prints a single PASS/FAIL line to stderr
//! and then asserts the same condition.

mod common;

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use vofsde::analysis::{
    dyadic_lags, gronwall_sweep, holder_exponent_estimate, large_jump_count_check, moment_stability,
    picard_contraction_study, Problem,
};
use vofsde::experiment::{build_problem, check_suite, run_experiment, ExperimentConfig, StudyResult};
use vofsde::kernel::{resolvent_compute, AlphaSpec, FractionalKernel, GeneralKernel};
use vofsde::noise::{path_rng, sample_realization, Atom, LargeJumpLaw, LevyMeasureSpec, SmallJumpFamily};
use vofsde::solver::{
    deterministic_example, euler_volterra_solve, grid_for, interlaced_solve, picard_solve, refinement_differences,
    PicardOptions,
};
use vofsde::specfun::{beta, gamma, mittag_leffler, SeriesControl};
use vofsde::{CoefficientSet, Grid, JumpClass, JumpEvent, NoiseRealization};

use common::{beta_by_quadrature, rel_err, verdict};

fn config(name: &str) -> ExperimentConfig {
    check_suite()
        .unwrap()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, c)| c)
        .unwrap_or_else(|| panic!("no built-in config {name}"))
}

/// λ = −1, α ≡ 1/2, f = −u, g = u·z with stable-like small jumps, T = 1, N = 128.
fn benchmark() -> (ExperimentConfig, Problem) {
    let cfg = config("picard_contraction");
    let problem = build_problem(&cfg).unwrap();
    (cfg, problem)
}

fn finish(id: usize, title: &str, passed: bool, detail: String, clock: Instant) {
    let detail = format!("{detail} [{:.2}s]", clock.elapsed().as_secs_f64());
    verdict(id, title, passed, &detail);
    assert!(passed, "criterion {id} ({title}) failed: {detail}");
}

#[test]
fn criterion_01_special_functions() {
    let clock = Instant::now();
    let ctrl = SeriesControl::default();
    let mut worst_exp = 0.0f64;
    for i in 0..=500 {
        let z = i as f64 / 100.0;
        worst_exp = worst_exp.max(rel_err(mittag_leffler(1.0, 1.0, z, ctrl).unwrap(), z.exp()));
    }
    let mut worst_rec = 0.0f64;
    for i in 1..=400 {
        let x = i as f64 * 0.0371;
        worst_rec = worst_rec.max(rel_err(gamma(x + 1.0).unwrap(), x * gamma(x).unwrap()));
    }
    let mut worst_beta = 0.0f64;
    for x in [0.15, 0.5, 0.9, 1.0, 1.7, 2.5, 4.0, 6.3] {
        for y in [0.2, 0.5, 1.0, 1.4, 3.0, 5.5] {
            worst_beta = worst_beta.max(rel_err(beta(x, y).unwrap(), beta_by_quadrature(x, y)));
        }
    }
    let passed = worst_exp <= 1e-10 && worst_rec <= 1e-10 && worst_beta <= 1e-8;
    let detail = format!(
        "max rel err: E_1,1 vs exp {worst_exp:.1e}, gamma recurrence {worst_rec:.1e}, beta vs quadrature {worst_beta:.1e}"
    );
    finish(1, "special functions", passed, detail, clock);
}

#[test]
fn criterion_02_memoryless_exponential() {
    let clock = Instant::now();
    let grid = Grid::uniform(1.0, 4096).unwrap();
    let quiet = NoiseRealization::empty(Arc::new(LevyMeasureSpec::none()), 1.0);
    let mut worst = 0.0f64;
    for lambda in [-2.0, -0.5, 0.3, 1.5] {
        let k = FractionalKernel::new(lambda, AlphaSpec::constant(0.0, 1.0).unwrap()).unwrap();
        let u0 = 1.7;
        let (path, _) = picard_solve(&k, &CoefficientSet::zero(), &quiet, u0, &grid, PicardOptions::default()).unwrap();
        for (t, u) in grid.nodes().iter().zip(path.values()) {
            worst = worst.max(rel_err(*u, u0 * (lambda * t).exp()));
        }
    }
    finish(
        2,
        "alpha = 0 reduces to u0 exp(lambda t)",
        worst <= 1e-3,
        format!("max rel err {worst:.2e} over lambda in {{-2, -0.5, 0.3, 1.5}}, N = 4096"),
        clock,
    );
}

#[test]
fn criterion_03_picard_contraction() {
    let clock = Instant::now();
    let (cfg, problem) = benchmark();
    assert_eq!(problem.picard.tol, 1e-8);
    assert_eq!(problem.picard.max_iter, 30);
    let report = picard_contraction_study(&problem, 100, 2.0, cfg.master_seed).unwrap();
    let dominance = report.dominance.as_ref();
    let dominated = dominance.is_some_and(|d| d.passed && !d.checked.is_empty());
    let passed = report.converged_paths == 100 && report.max_iterations <= 30 && dominated;
    let detail = format!(
        "{}/100 converged to 1e-8, max {} iterations, averaged ratios dominated: {} ({} checked, {} paths dominated individually)",
        report.converged_paths,
        report.max_iterations,
        dominated,
        dominance.map_or(0, |d| d.checked.len()),
        report.per_path_dominance_passed
    );
    finish(3, "Picard convergence and contraction", passed, detail, clock);
}

#[test]
fn criterion_04_cross_scheme() {
    let clock = Instant::now();
    let opts = PicardOptions {
        tol: 1e-13,
        max_iter: 500,
    };
    let mut worst_plain = 0.0f64;
    let mut band_ok = 0;
    let mut lines = Vec::new();
    for k in 0..20u64 {
        let mut rng = path_rng(0x5eed, k);
        let horizon = rng.random_range(0.5..2.0);
        let lambda = rng.random_range(-2.0..1.0);
        let alpha = if k % 3 == 0 {
            AlphaSpec::constant(rng.random_range(0.1..0.8), horizon).unwrap()
        } else {
            let a0 = rng.random_range(0.1..0.4);
            AlphaSpec::affine(a0, rng.random_range(0.0..0.3) / horizon, horizon).unwrap()
        };
        let kernel = FractionalKernel::new(lambda, alpha).unwrap();
        let spec = Arc::new(
            LevyMeasureSpec::new(
                1,
                0.01,
                SmallJumpFamily::StableLike {
                    c: rng.random_range(0.1..1.0),
                    beta: rng.random_range(0.3..1.5),
                },
                LargeJumpLaw::Pareto {
                    mass: rng.random_range(0.2..2.0),
                    tail_index: 3.0,
                },
            )
            .unwrap(),
        );
        let a = rng.random_range(0.0..2.0);
        let s = rng.random_range(0.2..1.0);
        let r = rng.random_range(-0.5..0.5);
        let mut coeffs = if k % 2 == 0 {
            CoefficientSet::new(move |_, u| -a * u)
        } else {
            CoefficientSet::new(move |t, u| a * u.sin() + (3.0 * t).cos())
        };
        coeffs = coeffs
            .with_h(move |_, u, z| r * u * z[0].min(3.0))
            .with_compensator(|_, _| 0.0);
        let with_g = k >= 10;
        if with_g {
            coeffs = coeffs.with_g(move |_, u, z| s * u * z[0]);
        }
        let steps = if k % 4 < 2 { 64 } else { 128 };
        let noise = sample_realization(spec, horizon, 1000 + k).unwrap();
        let grid = grid_for(&noise, steps).unwrap();
        let u0 = rng.random_range(0.5..2.0);
        let (p, _) = interlaced_solve(&kernel, &coeffs, &noise, u0, &grid, opts).unwrap();
        let e = euler_volterra_solve(&kernel, &coeffs, &noise, u0, &grid).unwrap();
        let diff = p.sup_distance(&e);
        if with_g {
            let small = noise.restrict_small();
            let (ps, _) = picard_solve(
                &kernel,
                &coeffs,
                &small,
                u0,
                &Grid::uniform(horizon, steps).unwrap(),
                opts,
            )
            .unwrap();
            let es =
                euler_volterra_solve(&kernel, &coeffs, &small, u0, &Grid::uniform(horizon, steps).unwrap()).unwrap();
            let band = refinement_differences(&kernel, &coeffs, &small, u0, &[steps]).unwrap()[0].1;
            let d = diff.max(ps.sup_distance(&es));
            if d <= band {
                band_ok += 1;
            } else {
                lines.push(format!("config {k}: {d:.2e} outside band {band:.2e}"));
            }
        } else {
            worst_plain = worst_plain.max(diff);
            if diff > 1e-10 {
                lines.push(format!("config {k}: g = 0 but schemes differ by {diff:.2e}"));
            }
        }
    }
    let passed = worst_plain <= 1e-10 && band_ok == 10;
    let mut detail = format!("g = 0: max sup diff {worst_plain:.1e} (10 configs); g != 0: {band_ok}/10 within band");
    for l in lines {
        detail.push_str("; ");
        detail.push_str(&l);
    }
    finish(4, "Picard vs forward Volterra scheme", passed, detail, clock);
}

#[test]
fn criterion_05_isometry() {
    let clock = Instant::now();
    let mut parts = Vec::new();
    let mut passed = true;
    for name in ["isometry_one", "isometry_mark"] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(name);
        let report = run_experiment(&cfg, dir.path()).unwrap();
        let StudyResult::Isometry(iso) = &report.result else {
            panic!("{name} is not an isometry study")
        };
        assert_eq!(iso.paths, 10_000);
        let ok = iso.rel_error <= 5.0 / (iso.paths as f64).sqrt();
        passed &= ok;
        parts.push(format!(
            "{name}: ratio {:.4} (tol {:.3}), mean {:.2e} +- {:.1e}",
            iso.ratio, iso.tolerance, iso.mean, iso.mean_std_err
        ));
    }
    finish(5, "compensated-integral isometry", passed, parts.join("; "), clock);
}

#[test]
fn criterion_06_interlacing() {
    let clock = Instant::now();
    let spec = Arc::new(
        LevyMeasureSpec::new(
            1,
            0.01,
            SmallJumpFamily::StableLike { c: 0.5, beta: 0.8 },
            LargeJumpLaw::Pareto {
                mass: 2.0,
                tail_index: 2.5,
            },
        )
        .unwrap(),
    );
    let k = FractionalKernel::new(-1.0, AlphaSpec::constant(0.5, 1.0).unwrap()).unwrap();
    let no_h = CoefficientSet::new(|_, u| -u)
        .with_g(|_, u, z| u * z[0])
        .with_compensator(|_, _| 0.0);
    let mut identical = 0;
    let mut with_large = 0;
    for seed in 0..20 {
        let r = sample_realization(spec.clone(), 1.0, seed).unwrap();
        with_large += usize::from(r.large_events().count() > 0);
        let grid = grid_for(&r, 128).unwrap();
        let (a, _) = interlaced_solve(&k, &no_h, &r, 1.0, &grid, PicardOptions::default()).unwrap();
        let (b, _) = picard_solve(&k, &no_h, &r.restrict_small(), 1.0, &grid, PicardOptions::default()).unwrap();
        identical += usize::from(a.values() == b.values() && a.left_limits() == b.left_limits());
    }

    let atoms = Arc::new(
        LevyMeasureSpec::from_atoms(
            1,
            0.01,
            vec![Atom {
                mark: vec![1.0],
                weight: 1.0,
            }],
        )
        .unwrap(),
    );
    let event = JumpEvent {
        time: 0.5,
        mark: vec![1.0],
        class: JumpClass::Large,
    };
    let r = NoiseRealization::from_events(atoms, 1.0, vec![event]).unwrap();
    let grid = grid_for(&r, 400).unwrap();
    let kv = FractionalKernel::new(-1.0, AlphaSpec::affine(0.3, 0.4, 1.0).unwrap()).unwrap();
    let c = CoefficientSet::new(|t, u| -0.5 * u + t).with_h(|_, u, _| 0.5 - 0.2 * u);
    let opts = PicardOptions {
        tol: 1e-14,
        max_iter: 200,
    };
    let (a, _) = interlaced_solve(&kv, &c, &r, 1.0, &grid, opts).unwrap();
    let b = deterministic_example(&kv, |t, u| -0.5 * u + t, |_, u| 0.5 - 0.2 * u, 0.5, 1.0, &grid).unwrap();
    let node_diff = a.sup_distance(&b);
    let limit_diff = a
        .left_limits()
        .iter()
        .zip(b.left_limits())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));

    let counts_cfg = config("large_jump_counts");
    let levy = counts_cfg.problem.levy.clone();
    let vofsde::experiment::Study::LargeJumpCounts { seeds } = counts_cfg.study else {
        panic!("large_jump_counts has the wrong study kind")
    };
    assert_eq!(seeds, 10_000);
    let counts = large_jump_count_check(&levy, counts_cfg.numerics.horizon, seeds, counts_cfg.master_seed).unwrap();

    let passed = identical == 20 && with_large > 0 && node_diff <= 1e-12 && limit_diff <= 1e-12 && counts.passed;
    let detail = format!(
        "h = 0: {identical}/20 paths bitwise equal ({with_large} with large jumps); single jump: node diff {node_diff:.1e}, left-limit diff {limit_diff:.1e}; counts over {seeds} seeds: mean {:.4} (expect {:.4} +- {:.4}), var {:.4} (+- {:.4})",
        counts.mean, counts.expected, counts.mean_band, counts.variance, counts.variance_band
    );
    finish(6, "interlacing of large jumps", passed, detail, clock);
}

#[test]
fn criterion_07_figure1() {
    let clock = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("figure1");
    let report = run_experiment(&cfg, dir.path()).unwrap();
    let StudyResult::Figure1 {
        sup_distance,
        threshold,
        ..
    } = report.result
    else {
        panic!("figure1 config runs another study")
    };
    let emitted = ["figure1_fractional.csv", "figure1_restart.csv"]
        .iter()
        .all(|f| dir.path().join(f).metadata().is_ok_and(|m| m.len() > 0));
    let passed = emitted && sup_distance > threshold;
    let detail = format!(
        "trajectories written: {emitted}; post-jump sup distance {:.4} vs threshold {}",
        sup_distance, threshold
    );
    finish(7, "memory effect after a jump", passed, detail, clock);
}

#[test]
fn criterion_08_moment_stability() {
    let clock = Instant::now();
    let (cfg, problem) = benchmark();
    let s = moment_stability(&problem, 2.0, 10_000, cfg.master_seed).unwrap();
    let finite = s.base.estimate.is_finite() && s.doubled.estimate.is_finite();
    let passed = finite && s.change <= 3.0 * s.combined_std_err;
    let detail = format!(
        "E sup|u|^2: M=1e4 {:.5}, M=2e4 {:.5}, change {:.2e} vs 3 x {:.2e}",
        s.base.estimate, s.doubled.estimate, s.change, s.combined_std_err
    );
    finish(8, "second moment stable under doubling M", passed, detail, clock);
}

#[test]
fn criterion_09_holder() {
    let clock = Instant::now();
    let (cfg, problem) = benchmark();
    let lags = dyadic_lags(problem.horizon, 5);
    let r = holder_exponent_estimate(&problem, 2.0, 1000, &lags, cfg.master_seed).unwrap();
    let slope = r.fitted_slope.unwrap_or(f64::NAN);
    let passed = slope >= r.c4_theoretical - 0.1;
    let detail = format!(
        "slope {slope:.4} +- {:.4} vs C4 - 0.1 = {:.2} (lags {:?})",
        r.slope_std_err.unwrap_or(f64::NAN),
        r.c4_theoretical - 0.1,
        lags
    );
    finish(9, "Hoelder exponent of the moment increments", passed, detail, clock);
}

#[test]
fn criterion_10_gronwall() {
    let clock = Instant::now();
    let sweep = gronwall_sweep(100, 200, 11).unwrap();
    let c = 1.0;
    let k = GeneralKernel::new(move |_, _| c).self_bounded();
    let g = Grid::uniform(1.0, 400).unwrap();
    let table = resolvent_compute(&k, &g, 60).unwrap();
    let mut worst = 0.0f64;
    for i in (0..=400).step_by(25) {
        for j in (0..i).step_by(25) {
            let want = c * (c * (g.nodes()[i] - g.nodes()[j])).exp();
            worst = worst.max(rel_err(table.get(i, j), want));
        }
    }
    let passed = sweep.instances.len() == 100 && sweep.total_violations == 0 && worst <= 1e-6;
    let detail = format!(
        "{} violations over {} instances; constant-kernel resolvent max rel err {worst:.1e}",
        sweep.total_violations,
        sweep.instances.len()
    );
    finish(10, "Gronwall envelope and resolvent", passed, detail, clock);
}
