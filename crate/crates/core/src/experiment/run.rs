use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::{ConvergenceReference, ExperimentConfig, IsometryIntegrand, Study};
use super::presets::{build_coefficients, linear_drift_rate};
use crate::analysis::{
    calibrate_moment_envelope, dyadic_lags, gronwall_sweep, holder_exponent_estimate, isometry_check,
    large_jump_count_check, mc_sup_moment, moment_stability, picard_contraction_study, stats::ols, ContractionReport,
    GronwallSweep, HolderReport, IsometryReport, MomentReport, MomentStability, PoissonCountReport, Problem,
};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::{AlphaForm, AlphaSpec, FractionalKernel};
use crate::noise::{NoiseRealization, SmallJumpFamily};
use crate::solver::{
    deterministic_example, euler_volterra_solve, memoryless_restart, refinement_differences, PicardOptions,
    PicardReport,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "VOFSDE_OUT_DIR";
pub const FALLBACK_OUT_DIR: &str = "vofsde-out";

pub fn artifact_version() -> String {
    format!("vofsde {}", env!("CARGO_PKG_VERSION"))
}

/// Output directory: explicit override, then the config, then
/// `$VOFSDE_OUT_DIR`, then `./vofsde-out`.
pub fn resolve_out_dir(cli: Option<&FsPath>, config: &ExperimentConfig) -> PathBuf {
    if let Some(d) = cli {
        return d.to_path_buf();
    }
    if let Some(d) = &config.output.dir {
        return d.clone();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(d) if !d.is_empty() => PathBuf::from(d),
        _ => PathBuf::from(FALLBACK_OUT_DIR),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed,
        detail,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub steps: usize,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "study", rename_all = "snake_case")]
pub enum StudyResult {
    SinglePath {
        picard: PicardReport,
        events: usize,
        large_jumps: usize,
        sup_abs: f64,
    },
    McMoment {
        report: MomentReport,
        stability: Option<MomentStability>,
    },
    Holder(HolderReport),
    Gronwall(GronwallSweep),
    Figure1 {
        t0: f64,
        jump: f64,
        pre_jump: f64,
        post_jump: f64,
        sup_distance: f64,
        threshold: f64,
    },
    Convergence {
        reference: ConvergenceReference,
        rows: Vec<ConvergenceRow>,
        observed_order: f64,
        min_order: f64,
    },
    PicardContraction(ContractionReport),
    Isometry(IsometryReport),
    LargeJumpCounts(PoissonCountReport),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub artifact_version: String,
    /// Seconds since the Unix epoch at the start of the run.
    pub timestamp: u64,
    pub wall_time_s: f64,
    pub config: ExperimentConfig,
    pub result: StudyResult,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
    /// Files written next to the report, relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Builds the Monte Carlo problem described by a config.
pub fn build_problem(config: &ExperimentConfig) -> Result<Problem> {
    let p = &config.problem;
    let kernel = FractionalKernel::new(p.kernel.lambda, p.kernel.alpha.clone())
        .map_err(|e| Error::config("problem.kernel", e.to_string()))?;
    let coeffs = build_coefficients(&p.coefficients.preset, &p.coefficients.params, &p.levy)?;
    let n = &config.numerics;
    Ok(
        Problem::new(kernel, coeffs, p.levy.clone(), p.u0.clone(), n.horizon, n.steps)?.with_picard(PicardOptions {
            tol: n.tol,
            max_iter: n.max_iter,
        }),
    )
}

struct Outputs<'a> {
    dir: &'a FsPath,
    names: Vec<String>,
}

impl Outputs<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        self.names.push(name.to_string());
        self.dir.join(name)
    }

    fn table(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_path(self.path(name))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

type MarkIntegrand = fn(f64, &[f64]) -> f64;

fn e(x: f64) -> String {
    format!("{x:e}")
}

/// Runs the study of `config`, writes its CSV files and `report.json` into
/// `out_dir` (created if missing) and returns the report.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &FsPath) -> Result<RunReport> {
    config.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    let mut out = Outputs {
        dir: out_dir,
        names: Vec::new(),
    };
    let (result, checks) = run_study(config, &mut out)?;
    out.names.push("report.json".into());
    let passed = checks.iter().all(|c| c.passed);
    let report = RunReport {
        artifact_version: artifact_version(),
        timestamp,
        wall_time_s: clock.elapsed().as_secs_f64(),
        config: config.clone(),
        result,
        checks,
        passed,
        outputs: out.names,
    };
    std::fs::write(out_dir.join("report.json"), report.to_json_pretty() + "\n")?;
    Ok(report)
}

fn run_study(config: &ExperimentConfig, out: &mut Outputs<'_>) -> Result<(StudyResult, Vec<CheckResult>)> {
    let seed = config.master_seed;
    let horizon = config.numerics.horizon;
    match &config.study {
        Study::SinglePath => {
            let problem = build_problem(config)?;
            let r = problem.realization(seed, 0)?;
            let (path, picard) = problem.solve_on(&r, problem.u0.draw(seed, 0))?;
            path.save_csv(out.path("path.csv"))?;
            r.save_csv(out.path("noise.csv"))?;
            let checks = vec![check(
                "picard_converged",
                picard.converged,
                format!("{} iterations, tol {:e}", picard.iterations, picard.tolerance),
            )];
            Ok((
                StudyResult::SinglePath {
                    events: r.events().len(),
                    large_jumps: r.large_events().count(),
                    sup_abs: path.sup_abs(),
                    picard,
                },
                checks,
            ))
        }
        Study::McMoment { p, paths, doubling } => {
            let problem = build_problem(config)?;
            let (mut report, stability) = if *doubling {
                let s = moment_stability(&problem, *p, *paths, seed)?;
                (s.doubled.clone(), Some(s))
            } else {
                (mc_sup_moment(&problem, *p, *paths, seed)?, None)
            };
            report.envelope = Some(calibrate_moment_envelope(
                report.estimate,
                *p,
                horizon,
                problem.alpha_star()?,
                problem.u0.abs_moment(*p),
            )?);
            let mut rows = Vec::new();
            if let Some(s) = &stability {
                rows.push(vec![s.base.paths.to_string(), e(s.base.estimate), e(s.base.std_err)]);
            }
            rows.push(vec![report.paths.to_string(), e(report.estimate), e(report.std_err)]);
            out.table("moment.csv", &["paths", "estimate", "std_err"], rows)?;
            let mut checks = vec![check(
                "estimate_finite",
                report.estimate.is_finite(),
                format!("E sup|u|^{p} = {:e} ± {:e}", report.estimate, report.std_err),
            )];
            if let Some(s) = &stability {
                checks.push(check(
                    "stable_under_doubling",
                    s.passed,
                    format!("change {:e} vs 3 x {:e}", s.change, s.combined_std_err),
                ));
            }
            Ok((StudyResult::McMoment { report, stability }, checks))
        }
        Study::Holder { p, paths, lags } => {
            let problem = build_problem(config)?;
            let lags = lags.clone().unwrap_or_else(|| dyadic_lags(horizon, 5));
            let h = holder_exponent_estimate(&problem, *p, *paths, &lags, seed)?;
            out.table(
                "holder.csv",
                &["lag", "moment"],
                h.lags.iter().zip(&h.moments).map(|(l, m)| vec![e(*l), e(*m)]),
            )?;
            let checks = vec![check(
                "slope_at_least_c4",
                h.passed,
                format!(
                    "slope {:?} ± {:?} vs C4 {} - {}",
                    h.fitted_slope, h.slope_std_err, h.c4_theoretical, h.tolerance
                ),
            )];
            Ok((StudyResult::Holder(h), checks))
        }
        Study::Gronwall { instances, points } => {
            let s = gronwall_sweep(*instances, *points, seed)?;
            out.table(
                "gronwall.csv",
                &["instance", "beta", "c6", "a", "b", "phi0", "violations", "end_ratio"],
                s.instances.iter().enumerate().map(|(i, c)| {
                    vec![
                        i.to_string(),
                        e(c.beta),
                        e(c.c6),
                        e(c.a),
                        e(c.b),
                        c.phi0.clone(),
                        c.violation_count.to_string(),
                        e(c.end_ratio),
                    ]
                }),
            )?;
            let checks = vec![check(
                "no_envelope_violations",
                s.passed,
                format!("{} violations over {} instances", s.total_violations, s.instances.len()),
            )];
            Ok((StudyResult::Gronwall(s), checks))
        }
        Study::Figure1 { t0, jump, threshold } => figure1(config, *t0, *jump, *threshold, out),
        Study::Convergence {
            steps,
            reference,
            min_order,
        } => convergence(config, steps, *reference, *min_order, out),
        Study::PicardContraction { p, paths } => {
            let problem = build_problem(config)?;
            let c = picard_contraction_study(&problem, *paths, *p, seed)?;
            let bound: Vec<f64> = match &c.fit {
                Some(f) => (1..=c.mean_sup_diffs.len()).map(|n| f.bound(n)).collect(),
                None => vec![f64::NAN; c.mean_sup_diffs.len()],
            };
            out.table(
                "picard.csv",
                &["n", "mean_sup_diff_p", "fitted_bound"],
                c.mean_sup_diffs
                    .iter()
                    .zip(&bound)
                    .enumerate()
                    .map(|(i, (g, b))| vec![(i + 1).to_string(), e(*g), e(*b)]),
            )?;
            let checks = vec![
                check(
                    "all_paths_converged",
                    c.unconverged.is_empty(),
                    format!(
                        "{}/{} converged, at most {} iterations (limit {})",
                        c.converged_paths, c.paths, c.max_iterations, c.max_iter
                    ),
                ),
                check(
                    "differences_dominated",
                    c.dominance.as_ref().is_some_and(|d| d.passed && !d.checked.is_empty()),
                    match &c.dominance {
                        Some(d) => format!("{} ratios checked, violations at {:?}", d.checked.len(), d.violations),
                        None => "no fit".into(),
                    },
                ),
            ];
            Ok((StudyResult::PicardContraction(c), checks))
        }
        Study::Isometry { paths, integrand } => {
            let levy = &config.problem.levy;
            let (exact, g): (f64, MarkIntegrand) = match integrand {
                IsometryIntegrand::One => (levy.small_mass() * horizon, |_, _| 1.0),
                IsometryIntegrand::Mark => (levy.small_axis_second_moment() * horizon, |_, z| z[0]),
            };
            let r = isometry_check(levy, g, exact, horizon, *paths, seed)?;
            out.table(
                "isometry.csv",
                &["paths", "exact", "empirical", "ratio", "tolerance"],
                [vec![
                    r.paths.to_string(),
                    e(r.exact_second_moment),
                    e(r.empirical_second_moment),
                    e(r.ratio),
                    e(r.tolerance),
                ]],
            )?;
            let checks = vec![
                check(
                    "isometry",
                    r.passed,
                    format!("rel error {:e} vs {:e}", r.rel_error, r.tolerance),
                ),
                check(
                    "zero_mean",
                    r.martingale_passed,
                    format!("mean {:e} ± {:e}", r.mean, r.mean_std_err),
                ),
            ];
            Ok((StudyResult::Isometry(r), checks))
        }
        Study::LargeJumpCounts { seeds } => {
            let r = large_jump_count_check(&config.problem.levy, horizon, *seeds, seed)?;
            out.table(
                "large_jump_counts.csv",
                &["seeds", "expected", "mean", "variance", "mean_band", "variance_band"],
                [vec![
                    r.seeds.to_string(),
                    e(r.expected),
                    e(r.mean),
                    e(r.variance),
                    e(r.mean_band),
                    e(r.variance_band),
                ]],
            )?;
            let checks = vec![check(
                "poisson_counts",
                r.passed,
                format!(
                    "mean {:e}, variance {:e}, expected {:e}",
                    r.mean, r.variance, r.expected
                ),
            )];
            Ok((StudyResult::LargeJumpCounts(r), checks))
        }
    }
}

fn figure1(
    config: &ExperimentConfig,
    t0: f64,
    jump: f64,
    threshold: f64,
    out: &mut Outputs<'_>,
) -> Result<(StudyResult, Vec<CheckResult>)> {
    let p = &config.problem;
    let n = &config.numerics;
    let seed = config.master_seed;
    let grid = Grid::uniform(n.horizon, n.steps)?;
    let m = grid
        .node_index(t0)
        .ok_or_else(|| Error::config("study.t0", format!("{t0} is not a node of the {}-step grid", n.steps)))?;
    let coeffs = build_coefficients(&p.coefficients.preset, &p.coefficients.params, &p.levy)?;
    let f = Arc::clone(&coeffs.f);
    let u0 = p.u0.draw(seed, 0);
    let frac = FractionalKernel::new(p.kernel.lambda, p.kernel.alpha.clone())?;
    let ode = FractionalKernel::new(p.kernel.lambda, AlphaSpec::constant(0.0, n.horizon)?)?;

    let fractional = deterministic_example(&frac, |t, u| f(t, u), |_, _| jump, t0, u0, &grid)?;
    let memoryless = deterministic_example(&ode, |t, u| f(t, u), |_, _| jump, t0, u0, &grid)?;
    let restart = memoryless_restart(&frac, |t, u| f(t, u), t0, fractional.values()[m], &grid)?;
    fractional.save_csv(out.path("figure1_fractional.csv"))?;
    memoryless.save_csv(out.path("figure1_ode.csv"))?;
    restart.save_csv(out.path("figure1_restart.csv"))?;

    let sup_distance = fractional.values()[m..]
        .iter()
        .zip(restart.values())
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    let checks = vec![check(
        "memory_effect_visible",
        sup_distance > threshold,
        format!("post-jump sup distance {sup_distance:e} vs threshold {threshold:e}"),
    )];
    Ok((
        StudyResult::Figure1 {
            t0,
            jump,
            pre_jump: fractional.left_limits()[m],
            post_jump: fractional.values()[m],
            sup_distance,
            threshold,
        },
        checks,
    ))
}

fn convergence(
    config: &ExperimentConfig,
    steps: &[usize],
    reference: ConvergenceReference,
    min_order: Option<f64>,
    out: &mut Outputs<'_>,
) -> Result<(StudyResult, Vec<CheckResult>)> {
    let p = &config.problem;
    let horizon = config.numerics.horizon;
    let seed = config.master_seed;
    let problem = build_problem(config)?;
    let u0 = p.u0.draw(seed, 0);
    let (rows, default_min): (Vec<ConvergenceRow>, f64) = match reference {
        ConvergenceReference::Exponential => {
            let zero_order = matches!(p.kernel.alpha.form, AlphaForm::Constant { value } if value == 0.0);
            let silent = matches!(p.levy.small, SmallJumpFamily::None) && p.levy.large_mass() == 0.0;
            let drift = linear_drift_rate(&p.coefficients.preset, &p.coefficients.params);
            let Some(c) = drift.filter(|_| zero_order && silent) else {
                return Err(Error::config(
                    "study.reference",
                    "the exponential reference needs alpha = 0, no jumps and a linear drift preset",
                ));
            };
            let rate = p.kernel.lambda + c;
            let empty = NoiseRealization::empty(Arc::clone(&problem.levy), horizon);
            let rows = steps
                .iter()
                .map(|&n| {
                    let grid = Grid::uniform(horizon, n)?;
                    let path = euler_volterra_solve(problem.kernel(), &problem.coeffs, &empty, u0, &grid)?;
                    let err = path
                        .times()
                        .iter()
                        .zip(path.values())
                        .fold(0.0f64, |a, (t, v)| a.max((v - u0 * (rate * t).exp()).abs()));
                    Ok(ConvergenceRow { steps: n, error: err })
                })
                .collect::<Result<Vec<_>>>()?;
            (rows, 0.9)
        }
        ConvergenceReference::Refinement => {
            let r = problem.realization(seed, 0)?.restrict_small();
            let rows = refinement_differences(problem.kernel(), &problem.coeffs, &r, u0, steps)?
                .into_iter()
                .map(|(steps, error)| ConvergenceRow { steps, error })
                .collect();
            (rows, 1.0 - problem.alpha_star()? - 0.15)
        }
    };
    out.table(
        "convergence.csv",
        &["steps", "error"],
        rows.iter().map(|r| vec![r.steps.to_string(), e(r.error)]),
    )?;
    let min_order = min_order.unwrap_or(default_min);
    let observed_order = if rows.iter().all(|r| r.error > 0.0) {
        let x: Vec<f64> = rows.iter().map(|r| (r.steps as f64).ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.error.ln()).collect();
        -ols(&x, &y)?.slope
    } else {
        f64::NAN
    };
    let checks = vec![check(
        "observed_order",
        observed_order >= min_order,
        format!("order {observed_order:.4} vs minimum {min_order:.4}"),
    )];
    Ok((
        StudyResult::Convergence {
            reference,
            rows,
            observed_order,
            min_order,
        },
        checks,
    ))
}
