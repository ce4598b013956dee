use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::fractional::FractionalKernel;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::quad::gauss_legendre;

pub type KernelFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Kernel κ(t,s) given by a callable, with an optional dominating kernel κ̃
/// used for the resolvent and scale conditions.
#[derive(Clone)]
pub struct GeneralKernel {
    pub evaluator: KernelFn,
    pub bound_kernel: Option<KernelFn>,
    pub scale_monotone_claimed: bool,
}

impl fmt::Debug for GeneralKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralKernel")
            .field("has_bound_kernel", &self.bound_kernel.is_some())
            .field("scale_monotone_claimed", &self.scale_monotone_claimed)
            .finish()
    }
}

impl GeneralKernel {
    pub fn new(evaluator: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            evaluator: Arc::new(evaluator),
            bound_kernel: None,
            scale_monotone_claimed: false,
        }
    }

    pub fn with_bound(mut self, bound: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.bound_kernel = Some(Arc::new(bound));
        self
    }

    /// Uses the evaluator itself as κ̃.
    pub fn self_bounded(self) -> Self {
        let ev = Arc::clone(&self.evaluator);
        Self {
            bound_kernel: Some(ev),
            ..self
        }
    }

    pub fn claim_scale_monotone(mut self) -> Self {
        self.scale_monotone_claimed = true;
        self
    }

    /// The fractional kernel with κ̃ = |κ|.
    pub fn from_fractional(k: &FractionalKernel) -> Self {
        let k1 = k.clone();
        let k2 = k.clone();
        Self::new(move |t, s| k1.eval_unchecked(t, s)).with_bound(move |t, s| k2.eval_unchecked(t, s).abs())
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        (self.evaluator)(t, s)
    }

    /// κ̃ if present, otherwise the evaluator.
    pub fn dominating(&self, t: f64, s: f64) -> f64 {
        match &self.bound_kernel {
            Some(b) => b(t, s),
            None => (self.evaluator)(t, s),
        }
    }

    /// Checks positivity of κ and κ ≤ c κ̃ on a sample, and the scale claim when made.
    pub fn validate(&self, horizon: f64, samples: usize) -> Result<()> {
        if self.bound_kernel.is_some() {
            let n = samples.max(2);
            for i in 1..=n {
                let t = horizon * i as f64 / n as f64;
                for j in 0..i {
                    let s = horizon * j as f64 / n as f64;
                    let v = self.eval(t, s);
                    if !(v > 0.0) || !self.dominating(t, s).is_finite() {
                        return Err(Error::domain(format!(
                            "general kernel must be positive and dominated at (t, s) = ({t}, {s}), got {v}"
                        )));
                    }
                }
            }
        }
        if self.scale_monotone_claimed && !check_scale_condition(self, horizon, samples * samples) {
            return Err(Error::domain("claimed scale monotonicity fails on the sample"));
        }
        Ok(())
    }
}

/// Whether t ↦ t·κ̃(t, t·u) is nondecreasing for every sampled u ∈ (0,1).
///
/// `samples` points are split evenly between u-values and t-values.
pub fn check_scale_condition(k: &GeneralKernel, horizon: f64, samples: usize) -> bool {
    let side = ((samples as f64).sqrt().ceil() as usize).max(2);
    for a in 0..side {
        let u = (a as f64 + 0.5) / side as f64;
        let mut prev = f64::NEG_INFINITY;
        for b in 1..=side {
            let t = horizon * b as f64 / side as f64;
            let v = t * k.dominating(t, t * u);
            if v < prev - 1e-12 * prev.abs() {
                return false;
            }
            prev = v;
        }
    }
    true
}

/// Finite-ε evaluation of the conditions sup_t ∫₀ᵗ κ̃(t,s)ds < ∞ and
/// limsup_{ε→0} sup_t ∫_t^{t+ε} κ̃(t+ε,s)ds < 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelConditionReport {
    pub sup_integral: f64,
    /// (ε, sup_t ∫_t^{t+ε} κ̃(t+ε,s) ds) for the ε schedule used.
    pub local_mass: Vec<(f64, f64)>,
    pub satisfied: bool,
}

/// Default ε schedule: T·2^{-k}, k = 4..=10. The limsup is judged at the smallest ε.
pub fn default_epsilon_schedule(horizon: f64) -> Vec<f64> {
    (4..=10).map(|k| horizon * 0.5f64.powi(k)).collect()
}

pub fn check_kernel_conditions(k: &GeneralKernel, horizon: f64, epsilons: &[f64]) -> KernelConditionReport {
    let rule = gauss_legendre(16);
    let nt = 64;
    let mut sup_integral: f64 = 0.0;
    for i in 1..=nt {
        let t = horizon * i as f64 / nt as f64;
        sup_integral = sup_integral.max(integrate_kernel_row(k, t, 0.0, t, &rule));
    }
    let mut local_mass = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let mut m: f64 = 0.0;
        for i in 0..=nt {
            let t = horizon * i as f64 / nt as f64;
            m = m.max(integrate_kernel_row(k, t + eps, t, t + eps, &rule));
        }
        local_mass.push((eps, m));
    }
    let smallest = local_mass
        .iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|x| x.1)
        .unwrap_or(0.0);
    KernelConditionReport {
        sup_integral,
        satisfied: sup_integral.is_finite() && smallest < 1.0,
        local_mass,
    }
}

// ∫_a^b κ̃(t,u) du with b ≤ t, graded towards u = t where κ̃ may be singular.
fn integrate_kernel_row(k: &GeneralKernel, t: f64, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    if b <= a {
        return 0.0;
    }
    // u = b − (b−a) v^4, v ∈ (0,1]
    let len = b - a;
    let mut acc = 0.0;
    for (x, w) in rule.0.iter().zip(&rule.1) {
        let v = 0.5 * (x + 1.0);
        let u = b - len * v.powi(4);
        acc += 0.5 * w * k.dominating(t, u) * 4.0 * len * v.powi(3);
    }
    acc
}

/// Partial sums r ≈ Σ_{n=1}^{n_terms} r_n of the resolvent on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventTable {
    pub grid: Vec<f64>,
    /// Row i holds r(t_i, t_j) for j < i.
    pub r_values: Vec<Vec<f64>>,
    pub n_terms: usize,
    /// sup_t ∫₀ᵗ r_n(t,s) ds for n = 1..n_terms.
    pub term_mass: Vec<f64>,
    /// Fitted constants of the bound C₁₀ · n · C₁₁ⁿ on the term masses.
    pub c10: f64,
    pub c11: f64,
    pub tail_estimate: f64,
    pub conditions: KernelConditionReport,
}

impl ResolventTable {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.r_values[i][j]
    }
}

/// Iterates r_1 = κ̃, r_n(t,s) = ∫_s^t κ̃(t,u) r_{n−1}(u,s) du on the grid and
/// sums the terms.
///
/// Each r_{n−1}(·, t_j) is interpolated linearly between nodes and integrated
/// against κ̃(t_i, ·) with per-cell moments; the cell next to u = t_i uses a
/// graded rule. Where κ̃ is infinite on the diagonal the first cell holds
/// r_{n−1} constant at its right node value.
pub fn resolvent_compute(k: &GeneralKernel, grid: &Grid, n_max: usize) -> Result<ResolventTable> {
    if k.bound_kernel.is_none() {
        return Err(Error::domain("resolvent needs a dominating kernel"));
    }
    if n_max == 0 {
        return Err(Error::domain("resolvent needs n_max >= 1"));
    }
    let horizon = grid.horizon();
    let conditions = check_kernel_conditions(k, horizon, &default_epsilon_schedule(horizon));
    if !conditions.satisfied {
        return Err(Error::domain(format!(
            "dominating kernel violates the integrability conditions: {conditions:?}"
        )));
    }
    let t = grid.nodes();
    let n = t.len();
    let rule = gauss_legendre(8);

    // cell moments m0[i][l] = ∫_cell κ̃(t_i,u) du, m1[i][l] = ∫_cell κ̃(t_i,u)(u−t_l)/h_l du
    let mut m0: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut m1: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut r0 = vec![0.0; i];
        let mut r1 = vec![0.0; i];
        for l in 0..i {
            let (a, b) = (t[l], t[l + 1]);
            let h = b - a;
            let graded = l + 1 == i;
            for (x, w) in rule.0.iter().zip(&rule.1) {
                let v = 0.5 * (x + 1.0);
                let (u, jac) = if graded {
                    (b - h * v.powi(4), 4.0 * h * v.powi(3))
                } else {
                    (a + h * v, h)
                };
                let kv = k.dominating(t[i], u) * 0.5 * w * jac;
                r0[l] += kv;
                r1[l] += kv * (u - a) / h;
            }
        }
        m0.push(r0);
        m1.push(r1);
    }

    let diag: Vec<Option<f64>> = t
        .iter()
        .map(|&s| {
            let v = k.dominating(s, s);
            v.is_finite().then_some(v)
        })
        .collect();

    // current term r_n on the grid; row i has entries j < i
    let mut term: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..i).map(|j| k.dominating(t[i], t[j])).collect())
        .collect();
    let mut total = term.clone();
    let mut term_mass = vec![mass(&term, t)];
    let mut n_terms = 1;

    for level in 2..=n_max {
        let mut next: Vec<Vec<f64>> = (0..n).map(|i| vec![0.0; i]).collect();
        for j in 0..n {
            // diagonal value of r_{level-1}(·, t_j)
            let d = if level == 2 { diag[j] } else { diag[j].map(|_| 0.0) };
            for i in (j + 1)..n {
                let mut acc = 0.0;
                for l in j..i {
                    let right = term[l + 1][j];
                    let left = if l == j { d.unwrap_or(right) } else { term[l][j] };
                    acc += left * (m0[i][l] - m1[i][l]) + right * m1[i][l];
                }
                next[i][j] = acc;
            }
        }
        term = next;
        let m = mass(&term, t);
        term_mass.push(m);
        for i in 0..n {
            for j in 0..i {
                total[i][j] += term[i][j];
            }
        }
        n_terms = level;
        let sum_mass: f64 = term_mass.iter().sum();
        if m <= 1e-18 * sum_mass || m < 1e-300 {
            break;
        }
    }

    // fit C₁₁ from the tail of consecutive ratios, then C₁₀
    let ratios: Vec<f64> = term_mass
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    let c11 = if ratios.is_empty() {
        0.0
    } else {
        let start = ratios.len() - ratios.len().div_ceil(3);
        ratios[start..].iter().copied().fold(0.0, f64::max)
    };
    let last = *term_mass.last().expect("at least one term");
    let sum_mass: f64 = term_mass.iter().sum();
    let negligible = last <= 1e-18 * sum_mass || last < 1e-300;
    if c11 >= 1.0 && !negligible {
        return Err(Error::ResolventDivergence {
            terms: n_terms,
            ratio: c11,
        });
    }
    let c10 = if c11 > 0.0 {
        term_mass
            .iter()
            .enumerate()
            .map(|(i, m)| m / ((i + 1) as f64 * c11.powi(i as i32 + 1)))
            .filter(|x| x.is_finite())
            .fold(0.0, f64::max)
    } else {
        term_mass[0]
    };
    let tail_estimate = c10 * n_terms as f64 * c11.powi(n_terms as i32);

    Ok(ResolventTable {
        grid: t.to_vec(),
        r_values: total,
        n_terms,
        term_mass,
        c10,
        c11,
        tail_estimate,
        conditions,
    })
}

// sup_i Σ_{j<i} r(t_i,t_j) h_j
fn mass(term: &[Vec<f64>], t: &[f64]) -> f64 {
    term.iter()
        .enumerate()
        .map(|(i, row)| (0..i).map(|j| row[j] * (t[j + 1] - t[j])).sum::<f64>())
        .fold(0.0, f64::max)
}
