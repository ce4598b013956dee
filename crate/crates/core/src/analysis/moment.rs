use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problem::Problem;
use super::stats::mean_and_std_err;
use crate::error::{Error, Result};
use crate::specfun::{gamma, mittag_leffler, SeriesControl};

/// Largest tolerated share of failed paths in a Monte Carlo run.
pub const MAX_FAILURE_RATE: f64 = 0.01;

/// Runs `task` for indices 0..m in parallel and returns the successes in
/// index order. More than 1% failures is an error; fewer are counted.
pub(crate) fn run_paths<T: Send>(m: usize, task: impl Fn(u64) -> Result<T> + Sync) -> Result<(Vec<T>, usize)> {
    let results: Vec<Result<T>> = (0..m as u64).into_par_iter().map(&task).collect();
    let mut ok = Vec::with_capacity(m);
    let mut failed = 0;
    let mut first = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => {
                failed += 1;
                first.get_or_insert_with(|| format!("path {i}: {e}"));
            }
        }
    }
    if failed as f64 > MAX_FAILURE_RATE * m as f64 {
        return Err(Error::MonteCarlo {
            failed,
            total: m,
            first: first.unwrap_or_default(),
        });
    }
    Ok((ok, failed))
}

/// Envelope c·E_{1−α*,1}(cΓ(1−α*)T^{1−α*}) with a calibrated c.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEnvelope {
    pub fitted_c: f64,
    pub value: f64,
    pub alpha_star: f64,
    /// E|u0|^p, the smallest admissible c.
    pub u0_moment: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub p: f64,
    /// Paths requested.
    pub paths: usize,
    pub failed_paths: usize,
    /// Mean of sup_i |u(t_i)|^p over the successful paths.
    pub estimate: f64,
    /// Sample standard deviation / √M.
    pub std_err: f64,
    pub envelope: Option<MomentEnvelope>,
}

fn check_p(problem: &Problem, p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::domain(format!("moment order p must be >= 1, got {p}")));
    }
    if p > 2.0 && problem.coeffs.g.is_some() && !problem.coeffs.flags.g_square_growth_claimed {
        return Err(Error::domain(format!(
            "p = {p} > 2 needs g to satisfy the squared growth condition"
        )));
    }
    Ok(())
}

fn sup_powers(problem: &Problem, p: f64, m: usize, master_seed: u64) -> Result<(Vec<f64>, usize)> {
    run_paths(m, |i| {
        let (path, _) = problem.solve(master_seed, i)?;
        Ok(path.sup_abs().powf(p))
    })
}

fn report(p: f64, paths: usize, failed: usize, values: &[f64]) -> MomentReport {
    let (estimate, std_err) = mean_and_std_err(values);
    MomentReport {
        p,
        paths,
        failed_paths: failed,
        estimate,
        std_err,
        envelope: None,
    }
}

/// Monte Carlo estimate of E[sup_{t≤T} |u(t)|^p] over M interlaced solves,
/// path i using noise stream i of `master_seed`. The sup runs over grid
/// nodes and left limits. The result does not depend on the thread count.
pub fn mc_sup_moment(problem: &Problem, p: f64, m: usize, master_seed: u64) -> Result<MomentReport> {
    check_p(problem, p)?;
    if m == 0 {
        return Err(Error::domain("need at least one path"));
    }
    let (values, failed) = sup_powers(problem, p, m, master_seed)?;
    Ok(report(p, m, failed, &values))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentStability {
    /// Paths 0..M.
    pub base: MomentReport,
    /// Paths 0..2M.
    pub doubled: MomentReport,
    pub change: f64,
    /// √(se_M² + se_2M²).
    pub combined_std_err: f64,
    pub passed: bool,
}

/// Estimates with M and 2M paths (the first M shared) and checks that the
/// estimate moves by at most 3 combined standard errors.
pub fn moment_stability(problem: &Problem, p: f64, m: usize, master_seed: u64) -> Result<MomentStability> {
    check_p(problem, p)?;
    if m == 0 {
        return Err(Error::domain("need at least one path"));
    }
    let results: Vec<Result<f64>> = (0..2 * m as u64)
        .into_par_iter()
        .map(|i| problem.solve(master_seed, i).map(|(path, _)| path.sup_abs().powf(p)))
        .collect();
    let split = |rs: &[Result<f64>]| -> Result<(Vec<f64>, usize)> {
        let failed = rs.iter().filter(|r| r.is_err()).count();
        if failed as f64 > MAX_FAILURE_RATE * rs.len() as f64 {
            let first = rs.iter().position(|r| r.is_err()).unwrap_or(0);
            let msg = match &rs[first] {
                Err(e) => format!("path {first}: {e}"),
                Ok(_) => String::new(),
            };
            return Err(Error::MonteCarlo {
                failed,
                total: rs.len(),
                first: msg,
            });
        }
        Ok((rs.iter().filter_map(|r| r.as_ref().ok().copied()).collect(), failed))
    };
    let (v1, f1) = split(&results[..m])?;
    let (v2, f2) = split(&results)?;
    let base = report(p, m, f1, &v1);
    let doubled = report(p, 2 * m, f2, &v2);
    let change = (doubled.estimate - base.estimate).abs();
    let combined_std_err = base.std_err.hypot(doubled.std_err);
    let passed = base.estimate.is_finite() && doubled.estimate.is_finite() && change <= 3.0 * combined_std_err;
    Ok(MomentStability {
        base,
        doubled,
        change,
        combined_std_err,
        passed,
    })
}

/// c · E_{1−α*,1}(c Γ(1−α*) T^{1−α*}).
///
/// The constant c is not known in closed form; it has to come from a
/// calibration such as [`calibrate_moment_envelope`]. Since the envelope must
/// dominate E|u0|^p at t = 0, c below ‖u0‖_p^p is rejected.
pub fn theoretical_moment_envelope(fitted_c: f64, p: f64, horizon: f64, alpha_star: f64, u0_norm: f64) -> Result<f64> {
    if !(fitted_c > 0.0) || !fitted_c.is_finite() {
        return Err(Error::domain(format!(
            "envelope constant must be positive, got {fitted_c}"
        )));
    }
    if !(p >= 1.0) || !(horizon >= 0.0) || !(0.0..1.0).contains(&alpha_star) || !(u0_norm >= 0.0) {
        return Err(Error::domain(format!(
            "envelope needs p >= 1, T >= 0, alpha* in [0,1), |u0| >= 0; got ({p}, {horizon}, {alpha_star}, {u0_norm})"
        )));
    }
    let floor = u0_norm.powf(p);
    if fitted_c < floor * (1.0 - 1e-12) {
        return Err(Error::domain(format!(
            "envelope constant {fitted_c} is below ||u0||_p^p = {floor}"
        )));
    }
    let a = 1.0 - alpha_star;
    let z = fitted_c * gamma(a)? * horizon.powf(a);
    Ok(fitted_c * mittag_leffler(a, 1.0, z, SeriesControl::default())?)
}

/// Smallest c ≥ max(E|u0|^p, tiny) whose envelope reaches `estimate`, found
/// by bisection (the envelope is increasing in c).
pub fn calibrate_moment_envelope(
    estimate: f64,
    p: f64,
    horizon: f64,
    alpha_star: f64,
    u0_moment: f64,
) -> Result<MomentEnvelope> {
    if !(estimate >= 0.0) || !estimate.is_finite() {
        return Err(Error::domain(format!("cannot calibrate against estimate {estimate}")));
    }
    let u0_norm = u0_moment.powf(1.0 / p);
    let env = |c: f64| theoretical_moment_envelope(c, p, horizon, alpha_star, u0_norm);
    let mut lo = u0_moment.max(1e-300);
    let done = |c: f64| -> Result<MomentEnvelope> {
        Ok(MomentEnvelope {
            fitted_c: c,
            value: env(c)?,
            alpha_star,
            u0_moment,
        })
    };
    if env(lo)? >= estimate {
        return done(lo);
    }
    let mut hi = lo.max(1e-3);
    while env(hi)? < estimate {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if env(mid)? >= estimate {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    done(hi)
}

/// [`mc_sup_moment`] plus the calibrated envelope.
pub fn mc_sup_moment_with_envelope(problem: &Problem, p: f64, m: usize, master_seed: u64) -> Result<MomentReport> {
    let mut r = mc_sup_moment(problem, p, m, master_seed)?;
    r.envelope = Some(calibrate_moment_envelope(
        r.estimate,
        p,
        problem.horizon,
        problem.alpha_star()?,
        problem.u0.abs_moment(p),
    )?);
    Ok(r)
}
