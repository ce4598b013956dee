use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::path_rng;
use crate::specfun::{gamma, gronwall_envelope, SeriesControl};

pub const GRONWALL_SLACK: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GronwallCheck {
    pub beta: f64,
    pub c6: f64,
    pub phi0: String,
    pub a: f64,
    pub b: f64,
    /// Grid points t_i at which φ and the envelope are compared.
    pub samples: usize,
    pub violation_count: usize,
    /// φ(b) / envelope(b); close to 1 in the equality case.
    pub end_ratio: f64,
    pub iterations: usize,
}

/// Builds φ = φ₀ + C6 ∫_a^t φ(s)(t−s)^{β−1} ds on `n_points` uniform nodes
/// of [a, b] by fixed-point iteration and counts nodes where φ exceeds the
/// Mittag-Leffler envelope φ₀(t)E_{β,1}(C6Γ(β)(t−a)^β) by more than 1e-8
/// (relative to max(1, envelope)). φ₀ must be nonnegative and nondecreasing.
///
/// The integral is discretized with φ frozen at the left end of each cell and
/// the kernel integrated exactly, which underestimates the integral for
/// nondecreasing φ; the discrete φ therefore stays below the exact one.
pub fn gronwall_validate(
    beta: f64,
    c6: f64,
    phi0: impl Fn(f64) -> f64,
    phi0_label: &str,
    a: f64,
    b: f64,
    n_points: usize,
) -> Result<GronwallCheck> {
    if !(beta > 0.0 && beta <= 1.0) || !(c6 >= 0.0) || !c6.is_finite() {
        return Err(Error::domain(format!(
            "need beta in (0,1] and C6 >= 0, got ({beta}, {c6})"
        )));
    }
    if !(b > a) || n_points < 2 {
        return Err(Error::domain(format!(
            "need a < b and at least 2 points, got [{a}, {b}], {n_points}"
        )));
    }
    let n = n_points;
    let h = (b - a) / (n - 1) as f64;
    let t: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
    let base: Vec<f64> = t.iter().map(|&s| phi0(s)).collect();
    if base.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::domain("phi0 must be finite and nonnegative"));
    }
    // w[i][j] = ∫_{t_j}^{t_{j+1}} (t_i − s)^{β−1} ds, depends on i − j only
    let w: Vec<f64> = (1..n)
        .map(|k| h.powf(beta) * ((k as f64).powf(beta) - ((k - 1) as f64).powf(beta)) / beta)
        .collect();
    let apply = |phi: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| base[i] + c6 * (0..i).map(|j| w[i - j - 1] * phi[j]).sum::<f64>())
            .collect()
    };
    let mut phi = base.clone();
    let mut iterations = 0;
    // the map is strictly lower triangular, so n sweeps reach the fixed point
    for _ in 0..=n {
        let next = apply(&phi);
        iterations += 1;
        let scale = next.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let change = next.iter().zip(&phi).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        phi = next;
        if change <= 1e-15 * scale {
            break;
        }
    }
    let ctrl = SeriesControl::default();
    let mut violation_count = 0;
    let mut end_ratio = f64::NAN;
    for i in 0..n {
        let env = gronwall_envelope(base[i], c6, beta, t[i] - a, ctrl)?;
        if phi[i] - env > GRONWALL_SLACK * env.max(1.0) {
            violation_count += 1;
        }
        if i == n - 1 {
            end_ratio = phi[i] / env;
        }
    }
    Ok(GronwallCheck {
        beta,
        c6,
        phi0: phi0_label.to_string(),
        a,
        b,
        samples: n,
        violation_count,
        end_ratio,
        iterations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GronwallSweep {
    pub instances: Vec<GronwallCheck>,
    pub total_violations: usize,
    pub passed: bool,
}

/// Random instances: β ∈ [0.1, 1), C6 chosen so that C6Γ(β)(b−a)^β lies
/// in [0, 10^β) (keeps the envelope finite), b − a ∈ [0.5, 2], φ₀ constant or
/// affine nondecreasing.
pub fn gronwall_sweep(instances: usize, n_points: usize, master_seed: u64) -> Result<GronwallSweep> {
    let mut rng = path_rng(master_seed, 0);
    let mut out = Vec::with_capacity(instances);
    for k in 0..instances {
        let beta: f64 = rng.random_range(0.1..1.0);
        let a: f64 = rng.random_range(-1.0..1.0);
        let b = a + rng.random_range(0.5..2.0);
        let z = rng.random_range(0.0..10f64.powf(beta));
        let c6 = z / (gamma(beta)? * (b - a).powf(beta));
        let level = rng.random_range(0.1..5.0);
        let check = if k % 2 == 0 {
            gronwall_validate(beta, c6, |_| level, &format!("constant {level}"), a, b, n_points)?
        } else {
            let slope = rng.random_range(0.0..3.0);
            let label = format!("{level} + {slope}(t - a)");
            gronwall_validate(beta, c6, |t| level + slope * (t - a), &label, a, b, n_points)?
        };
        out.push(check);
    }
    let total_violations = out.iter().map(|c| c.violation_count).sum();
    Ok(GronwallSweep {
        instances: out,
        total_violations,
        passed: total_violations == 0,
    })
}
