use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::moment::run_paths;
use super::stats::{mean_and_std_err, sample_variance};
use crate::error::{Error, Result};
use crate::noise::{sample_realization_stream, LevyMeasureSpec};
use crate::quad::gauss_legendre_on;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    pub paths: usize,
    pub horizon: f64,
    /// ∫₀ᵀ∫ g² ν(dz) ds as supplied by the caller.
    pub exact_second_moment: f64,
    /// Sample variance of the compensated integrals.
    pub empirical_second_moment: f64,
    /// empirical / exact (1 when both vanish).
    pub ratio: f64,
    pub rel_error: f64,
    /// 5/√M
    pub tolerance: f64,
    pub passed: bool,
    /// Sample mean of the compensated integrals and its standard error.
    pub mean: f64,
    pub mean_std_err: f64,
    /// |mean| ≤ 4 standard errors (the compensated integral has mean 0).
    pub martingale_passed: bool,
}

/// Compares the sample variance of I = ∫₀ᵀ∫ g(s,z) Ñ(ds,dz) over M noise
/// draws with the exact value `exact` of ∫₀ᵀ∫ g² ν(dz) ds. Only the small
/// jumps of each realization enter; the compensator is computed with a
/// Gauss-Legendre rule in time and the mark quadrature of `spec`.
pub fn isometry_check(
    spec: &LevyMeasureSpec,
    g: impl Fn(f64, &[f64]) -> f64 + Sync,
    exact: f64,
    horizon: f64,
    m: usize,
    master_seed: u64,
) -> Result<IsometryReport> {
    if m < 2 {
        return Err(Error::domain("isometry check needs at least 2 paths"));
    }
    if !(exact >= 0.0) || !exact.is_finite() {
        return Err(Error::domain(format!(
            "exact second moment must be finite and >= 0, got {exact}"
        )));
    }
    let spec = Arc::new(spec.clone());
    let quad = spec.small_quadrature();
    let (ts, tw) = gauss_legendre_on(32, 0.0, horizon);
    let compensator: f64 = ts.iter().zip(&tw).map(|(&s, &w)| w * quad.integrate(|z| g(s, z))).sum();
    let (integrals, _) = run_paths(m, |i| {
        let r = sample_realization_stream(Arc::clone(&spec), horizon, master_seed, i)?;
        Ok(r.small_events().map(|e| g(e.time, &e.mark)).sum::<f64>() - compensator)
    })?;
    let empirical = sample_variance(&integrals);
    let (mean, mean_std_err) = mean_and_std_err(&integrals);
    let (ratio, rel_error) = if exact == 0.0 {
        if empirical == 0.0 {
            (1.0, 0.0)
        } else {
            (f64::INFINITY, f64::INFINITY)
        }
    } else {
        (empirical / exact, (empirical - exact).abs() / exact)
    };
    let tolerance = 5.0 / (m as f64).sqrt();
    Ok(IsometryReport {
        paths: m,
        horizon,
        exact_second_moment: exact,
        empirical_second_moment: empirical,
        ratio,
        rel_error,
        tolerance,
        passed: rel_error <= tolerance,
        mean,
        mean_std_err,
        martingale_passed: mean.abs() <= 4.0 * mean_std_err,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonCountReport {
    pub seeds: usize,
    /// ν(|z| ≥ 1)·T
    pub expected: f64,
    pub mean: f64,
    pub variance: f64,
    /// 3σ half-widths for the sample mean and sample variance.
    pub mean_band: f64,
    pub variance_band: f64,
    pub passed: bool,
}

/// Counts large jumps on (0, T] over `seeds` noise streams and checks the
/// sample mean and variance against a Poisson law with mean ν(|z|≥1)·T.
pub fn large_jump_count_check(
    spec: &LevyMeasureSpec,
    horizon: f64,
    seeds: usize,
    master_seed: u64,
) -> Result<PoissonCountReport> {
    if seeds < 2 {
        return Err(Error::domain("need at least 2 seeds"));
    }
    let spec = Arc::new(spec.clone());
    let (counts, _) = run_paths(seeds, |i| {
        let r = sample_realization_stream(Arc::clone(&spec), horizon, master_seed, i)?;
        Ok(r.large_events().count() as f64)
    })?;
    let mu = spec.large_mass() * horizon;
    let n = seeds as f64;
    let (mean, _) = mean_and_std_err(&counts);
    let variance = sample_variance(&counts);
    // Var(sample variance) ≈ (μ₄ − σ⁴)/n with μ₄ = μ(1 + 3μ) for Poisson
    let mean_band = 3.0 * (mu / n).sqrt();
    let variance_band = 3.0 * ((mu + 2.0 * mu * mu) / n).sqrt();
    let passed = (mean - mu).abs() <= mean_band && (variance - mu).abs() <= variance_band;
    Ok(PoissonCountReport {
        seeds,
        expected: mu,
        mean,
        variance,
        mean_band,
        variance_band,
        passed,
    })
}

/// |Σaᵢ|^p ≤ max{m^{p−1}, 1}·Σ|aᵢ|^p, with a relative rounding slack of 1e-12.
pub fn jensen_discrete_check(values: &[f64], p: f64) -> bool {
    assert!(p > 0.0, "jensen_discrete_check needs p > 0");
    if values.is_empty() {
        return true;
    }
    let m = values.len() as f64;
    let lhs = values.iter().sum::<f64>().abs().powf(p);
    let rhs = m.powf(p - 1.0).max(1.0) * values.iter().map(|a| a.abs().powf(p)).sum::<f64>();
    lhs <= rhs * (1.0 + 1e-12)
}
