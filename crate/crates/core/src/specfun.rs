//! Gamma, Beta and two-parameter Mittag-Leffler functions on the positive
//! real axis, plus the fractional Gronwall envelope built from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Truncation control for series evaluations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            abs_tol: 1e-16,
            max_terms: 10_000,
        }
    }
}

impl SeriesControl {
    pub fn new(abs_tol: f64, max_terms: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || max_terms == 0 {
            return Err(Error::domain(format!(
                "series control needs abs_tol > 0 and max_terms >= 1, got ({abs_tol}, {max_terms})"
            )));
        }
        Ok(Self { abs_tol, max_terms })
    }
}

// Lanczos sum for x >= 0.5, returns (t, A(x)) with Γ(x) = √(2π) t^{x-1/2} e^{-t} A.
fn lanczos(x: f64) -> (f64, f64) {
    let xm1 = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (xm1 + i as f64);
    }
    (xm1 + LANCZOS_G + 0.5, acc)
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return gamma_unchecked(x + 1.0) / x;
    }
    if x.fract() == 0.0 && x <= 171.0 {
        return (2..x as u32).fold(1.0, |acc, k| acc * k as f64);
    }
    let (t, acc) = lanczos(x);
    // split the power so that x up to ~171 does not overflow early
    let half = t.powf(0.5 * (x - 0.5));
    (2.0 * std::f64::consts::PI).sqrt() * half * (half * (-t).exp()) * acc
}

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("gamma needs x > 0, got {x}")));
    }
    Ok(gamma_unchecked(x))
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("ln_gamma needs x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return ln_gamma_unchecked(x + 1.0) - x.ln();
    }
    let (t, acc) = lanczos(x);
    HALF_LN_TWO_PI + (x - 0.5) * t.ln() - t + acc.ln()
}

/// Γ without the domain check; callers guarantee x > 0.
#[inline]
pub(crate) fn gamma_pos(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    gamma_unchecked(x)
}

/// B(x, y) = Γ(x)Γ(y)/Γ(x+y).
pub fn beta(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite() {
        return Err(Error::domain(format!("beta needs x, y > 0, got ({x}, {y})")));
    }
    if x + y < 170.0 {
        Ok(gamma_unchecked(x) * gamma_unchecked(y) / gamma_unchecked(x + y))
    } else {
        Ok((ln_gamma_unchecked(x) + ln_gamma_unchecked(y) - ln_gamma_unchecked(x + y)).exp())
    }
}

/// E_{p,q}(z) = Σ_k z^k / Γ(pk + q) by direct summation.
///
/// Restricted to p ∈ (0,1], q ≥ 1 and z ≥ 0 where every term is
/// nonnegative. Summation stops at the first term below `ctrl.abs_tol` that
/// lies past the peak of the term sequence; running out of terms is an error
/// rather than a silent switch to an asymptotic expansion.
pub fn mittag_leffler(p: f64, q: f64, z: f64, ctrl: SeriesControl) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain(format!("mittag_leffler needs p in (0,1], got {p}")));
    }
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::domain(format!("mittag_leffler needs q >= 1, got {q}")));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("mittag_leffler needs finite z >= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok(1.0 / gamma_unchecked(q));
    }
    let ln_z = z.ln();
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut term = f64::NAN;
    for k in 0..ctrl.max_terms {
        let arg = p * k as f64 + q;
        let log_num = k as f64 * ln_z;
        term = if arg < 170.0 && log_num.abs() < 700.0 && k < i32::MAX as usize {
            z.powi(k as i32) / gamma_unchecked(arg)
        } else {
            (log_num - ln_gamma_unchecked(arg)).exp()
        };
        sum += term;
        if !sum.is_finite() {
            return Err(Error::domain(format!(
                "mittag_leffler overflowed at term {k} for z = {z}"
            )));
        }
        if term < ctrl.abs_tol && term <= prev {
            return Ok(sum);
        }
        prev = term;
    }
    Err(Error::SeriesNonConvergence {
        max_terms: ctrl.max_terms,
        last_term: term,
    })
}

/// φ₀(t) · E_{β,1}(C6 Γ(β) (t−a)^β), the upper bound for
/// φ(t) ≤ φ₀(t) + C6 ∫_a^t φ(s)(t−s)^{β−1} ds with nondecreasing φ₀.
pub fn gronwall_envelope(phi0_at_t: f64, c6: f64, beta: f64, t_minus_a: f64, ctrl: SeriesControl) -> Result<f64> {
    if !(phi0_at_t >= 0.0) || !(c6 >= 0.0) || !(t_minus_a >= 0.0) {
        return Err(Error::domain(format!(
            "gronwall_envelope needs phi0, C6, t-a >= 0, got ({phi0_at_t}, {c6}, {t_minus_a})"
        )));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::domain(format!(
            "gronwall_envelope needs beta in (0,1], got {beta}"
        )));
    }
    let arg = c6 * gamma_unchecked(beta) * t_minus_a.powf(beta);
    Ok(phi0_at_t * mittag_leffler(beta, 1.0, arg, ctrl)?)
}
