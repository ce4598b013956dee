use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problem::Problem;
use crate::error::{Error, Result};
use crate::quad::CompensatedSum;
use crate::solver::{check_dominance, fit_picard_bound, BoundFit, DominanceCheck, PicardReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub paths: usize,
    pub tolerance: f64,
    pub max_iter: usize,
    pub p: f64,
    pub converged_paths: usize,
    /// Indices of the paths that missed the tolerance.
    pub unconverged: Vec<u64>,
    pub max_iterations: usize,
    pub mean_iterations: f64,
    /// E[g_n^p] averaged over paths, n = 1..min iterations.
    pub mean_sup_diffs: Vec<f64>,
    pub fit: Option<BoundFit>,
    pub dominance: Option<DominanceCheck>,
    /// Paths whose own g_n sequence passes the same dominance check.
    pub per_path_dominance_passed: usize,
    /// Every path converged and the averaged sequence is dominated.
    pub passed: bool,
}

/// Runs the Picard scheme without large jumps on `m` noise draws and checks
/// that the averaged differences E[g_n^p] contract at least as fast as the
/// fitted bound [c₁₁Γ(1−α*)T^{1−α*}]ⁿ/Γ(1+n(1−α*))·(1−α*)·K for n ≥ 3.
pub fn picard_contraction_study(problem: &Problem, m: usize, p: f64, master_seed: u64) -> Result<ContractionReport> {
    if m == 0 {
        return Err(Error::domain("need at least one path"));
    }
    if !(p >= 1.0) {
        return Err(Error::domain(format!("p must be >= 1, got {p}")));
    }
    let reports: Vec<(bool, PicardReport)> = (0..m as u64)
        .into_par_iter()
        .map(|i| match problem.solve_small(master_seed, i) {
            Ok((_, r)) => Ok((true, r)),
            Err(Error::PicardNonConvergence { report, .. }) => Ok((false, *report)),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;

    let alpha_star = problem.alpha_star()?;
    let horizon = problem.horizon;
    let floor = 1e-14f64.powf(p);
    let unconverged: Vec<u64> = reports
        .iter()
        .enumerate()
        .filter(|(_, (ok, _))| !ok)
        .map(|(i, _)| i as u64)
        .collect();
    let iters: Vec<usize> = reports.iter().map(|(_, r)| r.iterations).collect();
    let depth = reports.iter().map(|(_, r)| r.sup_diffs.len()).min().unwrap_or(0);
    let mean_sup_diffs: Vec<f64> = (0..depth)
        .map(|n| {
            reports
                .iter()
                .map(|(_, r)| r.sup_diffs[n].powf(p))
                .collect::<CompensatedSum>()
                .value()
                / m as f64
        })
        .collect();
    let fit = fit_picard_bound(&mean_sup_diffs, alpha_star, horizon);
    let dominance = fit.as_ref().map(|f| check_dominance(&mean_sup_diffs, f, floor));
    let per_path_dominance_passed = reports
        .iter()
        .filter(|(_, r)| {
            let g: Vec<f64> = r.sup_diffs.iter().map(|d| d.powf(p)).collect();
            fit_picard_bound(&g, alpha_star, horizon).is_some_and(|f| check_dominance(&g, &f, floor).passed)
        })
        .count();
    let passed = unconverged.is_empty() && dominance.as_ref().is_some_and(|d| d.passed && !d.checked.is_empty());
    Ok(ContractionReport {
        paths: m,
        tolerance: problem.picard.tol,
        max_iter: problem.picard.max_iter,
        p,
        converged_paths: m - unconverged.len(),
        unconverged,
        max_iterations: iters.iter().copied().max().unwrap_or(0),
        mean_iterations: iters.iter().sum::<usize>() as f64 / m as f64,
        mean_sup_diffs,
        fit,
        dominance,
        per_path_dominance_passed,
        passed,
    })
}
