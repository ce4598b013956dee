use serde::{Deserialize, Serialize};

use super::moment::run_paths;
use super::problem::Problem;
use super::stats::ols;
use crate::error::{Error, Result};
use crate::quad::CompensatedSum;

/// Slack subtracted from C₄ before comparing with the fitted slope; picked
/// from pilot runs of the linear benchmark at M = 10³.
pub const HOLDER_SLOPE_TOLERANCE: f64 = 0.1;

/// Base points per path at which increments are sampled.
pub const HOLDER_BASE_POINTS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub p: f64,
    pub gamma_holder: f64,
    pub alpha_star_t: f64,
    /// Strictly decreasing.
    pub lags: Vec<f64>,
    /// E|u(t+δ) − u(t)|^p per lag, averaged over base points and paths.
    pub moments: Vec<f64>,
    pub base_points: Vec<f64>,
    pub paths: usize,
    pub failed_paths: usize,
    /// Slope of log moment against log lag; `None` when some moment is 0.
    pub fitted_slope: Option<f64>,
    pub slope_std_err: Option<f64>,
    /// min{1, pγ, p(1−α*(T))}
    pub c4_theoretical: f64,
    pub tolerance: f64,
    /// slope ≥ C₄ − tolerance − 2·std_err, or every moment exactly 0.
    pub passed: bool,
}

/// T/4, T/8, ... (`count` lags).
pub fn dyadic_lags(horizon: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| horizon / 4.0 / (1u64 << k) as f64).collect()
}

pub fn holder_c4(p: f64, gamma_holder: f64, alpha_star: f64) -> f64 {
    1f64.min(p * gamma_holder).min(p * (1.0 - alpha_star))
}

/// Estimates E|u(t+δ) − u(t)|^p for each lag δ and fits the exponent in
/// log E ≈ C + slope·log δ.
///
/// Base points are spread evenly over [2·max lag, T − max lag], away from
/// the initial layer near t = 0.
pub fn holder_exponent_estimate(
    problem: &Problem,
    p: f64,
    m: usize,
    lags: &[f64],
    master_seed: u64,
) -> Result<HolderReport> {
    if lags.len() < 3 {
        return Err(Error::Regression(format!("need at least 3 lags, got {}", lags.len())));
    }
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::domain(format!("moment order must be positive, got {p}")));
    }
    if m == 0 {
        return Err(Error::domain("need at least one path"));
    }
    let horizon = problem.horizon;
    let step = horizon / problem.steps as f64;
    let mut lags = lags.to_vec();
    lags.sort_by(|a, b| b.total_cmp(a));
    for w in lags.windows(2) {
        if w[0] == w[1] {
            return Err(Error::domain(format!("duplicate lag {}", w[0])));
        }
    }
    for &d in &lags {
        if !(d > step && d <= horizon / 4.0 * (1.0 + 1e-12)) {
            return Err(Error::domain(format!(
                "lag {d} must lie in (grid step {step}, T/4 = {}]",
                horizon / 4.0
            )));
        }
    }
    let max_lag = lags[0];
    let (lo, hi) = (2.0 * max_lag, horizon - max_lag);
    let k = HOLDER_BASE_POINTS;
    let base_points: Vec<f64> = (0..k).map(|b| lo + (hi - lo) * b as f64 / (k - 1) as f64).collect();

    let (per_path, failed) = run_paths(m, |i| {
        let (path, _) = problem.solve(master_seed, i)?;
        Ok(lags
            .iter()
            .map(|&d| {
                base_points
                    .iter()
                    .map(|&t| (path.value_at(t + d) - path.value_at(t)).abs().powf(p))
                    .sum::<f64>()
                    / k as f64
            })
            .collect::<Vec<f64>>())
    })?;
    let n_ok = per_path.len();
    let moments: Vec<f64> = (0..lags.len())
        .map(|l| per_path.iter().map(|row| row[l]).collect::<CompensatedSum>().value() / n_ok as f64)
        .collect();

    let alpha_star_t = problem.alpha_star()?;
    let gamma_holder = problem.kernel().alpha.gamma_holder;
    let c4 = holder_c4(p, gamma_holder, alpha_star_t);
    let (fitted_slope, slope_std_err, passed) = if moments.iter().all(|&v| v == 0.0) {
        (None, None, true)
    } else if moments.iter().any(|&v| !(v > 0.0)) {
        (None, None, false)
    } else {
        let x: Vec<f64> = lags.iter().map(|d| d.ln()).collect();
        let y: Vec<f64> = moments.iter().map(|v| v.ln()).collect();
        let fit = ols(&x, &y)?;
        let ok = fit.slope >= c4 - HOLDER_SLOPE_TOLERANCE - 2.0 * fit.slope_std_err;
        (Some(fit.slope), Some(fit.slope_std_err), ok)
    };
    Ok(HolderReport {
        p,
        gamma_holder,
        alpha_star_t,
        lags,
        moments,
        base_points,
        paths: m,
        failed_paths: failed,
        fitted_slope,
        slope_std_err,
        c4_theoretical: c4,
        tolerance: HOLDER_SLOPE_TOLERANCE,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_formula() {
        // affine α with γ = 1 and α*(T) = 1/2 at p = 2
        assert_eq!(holder_c4(2.0, 1.0, 0.5), 1.0);
        assert_eq!(holder_c4(1.0, 0.3, 0.5), 0.3);
        assert_eq!(holder_c4(1.0, 1.0, 0.8), 1.0 - 0.8);
    }

    #[test]
    fn lags_halve() {
        assert_eq!(dyadic_lags(1.0, 3), vec![0.25, 0.125, 0.0625]);
    }
}
