use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::FractionalKernel;
use crate::specfun::{gamma_pos, ln_gamma};

/// [c₁₁ Γ(1−α*) T^{1−α*}]ⁿ / Γ(1+n(1−α*)) · (1−α*) · K with α* = α*(T).
pub fn theoretical_picard_bound(
    k: &FractionalKernel,
    horizon: f64,
    p: f64,
    k_tp: f64,
    c11: f64,
    n: usize,
) -> Result<f64> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::domain(format!("p must lie in [1,2], got {p}")));
    }
    if !(c11 > 0.0) || !(k_tp >= 0.0) {
        return Err(Error::domain(format!("need c11 > 0 and K >= 0, got {c11}, {k_tp}")));
    }
    let a_star = k.alpha.alpha_star(horizon)?;
    Ok(picard_bound(a_star, horizon, k_tp, c11, n))
}

/// The bound for a given α*, evaluated in log space.
pub fn picard_bound(alpha_star: f64, horizon: f64, k_tp: f64, c11: f64, n: usize) -> f64 {
    let a = 1.0 - alpha_star;
    if k_tp == 0.0 {
        return 0.0;
    }
    let x = c11 * gamma_pos(a) * horizon.powf(a);
    let nf = n as f64;
    let ln = nf * x.ln() - ln_gamma(1.0 + nf * a).expect("positive argument") + (a * k_tp).ln();
    ln.exp()
}

/// Constants of the bound matched to the first two Picard differences.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundFit {
    pub c11: f64,
    pub k_tp: f64,
    pub alpha_star: f64,
    pub horizon: f64,
}

impl BoundFit {
    pub fn bound(&self, n: usize) -> f64 {
        picard_bound(self.alpha_star, self.horizon, self.k_tp, self.c11, n)
    }

    /// bound(n) / bound(n−1).
    pub fn ratio(&self, n: usize) -> f64 {
        let a = 1.0 - self.alpha_star;
        let x = self.c11 * gamma_pos(a) * self.horizon.powf(a);
        let nf = n as f64;
        let lg = |y: f64| ln_gamma(y).expect("positive argument");
        x * (lg(1.0 + (nf - 1.0) * a) - lg(1.0 + nf * a)).exp()
    }
}

/// Solves bound(1) = g₁, bound(2) = g₂ for c₁₁ and K.
pub fn fit_picard_bound(sup_diffs: &[f64], alpha_star: f64, horizon: f64) -> Option<BoundFit> {
    let (&g1, &g2) = (sup_diffs.first()?, sup_diffs.get(1)?);
    if !(g1 > 0.0 && g2 > 0.0) || !g1.is_finite() || !g2.is_finite() {
        return None;
    }
    let a = 1.0 - alpha_star;
    let x = g2 / g1 * gamma_pos(1.0 + 2.0 * a) / gamma_pos(1.0 + a);
    let c11 = x / (gamma_pos(a) * horizon.powf(a));
    let k_tp = g1 * gamma_pos(1.0 + a) / (x * a);
    Some(BoundFit {
        c11,
        k_tp,
        alpha_star,
        horizon,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceCheck {
    /// Values of n ≥ 3 whose ratio g_n/g_{n−1} was compared.
    pub checked: Vec<usize>,
    /// Those n where g_n/g_{n−1} exceeded bound(n)/bound(n−1).
    pub violations: Vec<usize>,
    pub passed: bool,
}

/// Compares g_n/g_{n−1} with the fitted bound ratio for n ≥ 3. Differences
/// at or below `noise_floor` are rounding noise and are not compared.
pub fn check_dominance(sup_diffs: &[f64], fit: &BoundFit, noise_floor: f64) -> DominanceCheck {
    let mut checked = Vec::new();
    let mut violations = Vec::new();
    for n in 3..=sup_diffs.len() {
        let (prev, cur) = (sup_diffs[n - 2], sup_diffs[n - 1]);
        if prev <= noise_floor || cur <= noise_floor {
            break;
        }
        checked.push(n);
        if cur / prev > fit.ratio(n) * (1.0 + 1e-9) {
            violations.push(n);
        }
    }
    let passed = violations.is_empty();
    DominanceCheck {
        checked,
        violations,
        passed,
    }
}
