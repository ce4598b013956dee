use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use super::alpha::AlphaSpec;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::specfun::gamma_pos;

/// κ(t,s) = λ / (Γ(1−α(t)) (t−s)^{α(t)}), the integrated variable-order
/// Riemann-Liouville memory term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionalKernel {
    pub lambda: f64,
    pub alpha: AlphaSpec,
}

impl FractionalKernel {
    pub fn new(lambda: f64, alpha: AlphaSpec) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::domain(format!("lambda must be finite, got {lambda}")));
        }
        alpha.validate()?;
        Ok(Self { lambda, alpha })
    }

    /// λ / Γ(1−α(t)).
    #[inline]
    pub fn prefactor(&self, t: f64) -> f64 {
        self.lambda / gamma_pos(1.0 - self.alpha.eval(t))
    }

    pub fn eval(&self, t: f64, s: f64) -> Result<f64> {
        if !(s >= 0.0 && s < t) {
            return Err(Error::domain(format!("kernel needs 0 <= s < t, got s = {s}, t = {t}")));
        }
        Ok(self.eval_unchecked(t, s))
    }

    #[inline]
    pub fn eval_unchecked(&self, t: f64, s: f64) -> f64 {
        let a = self.alpha.eval(t);
        self.lambda / (gamma_pos(1.0 - a) * (t - s).powf(a))
    }

    /// Smallest C with |κ(t,s)| ≤ C (t−s)^{−α*(T)} over 0 ≤ s < t ≤ T.
    ///
    /// For fixed t the quotient |κ(t,s)|(t−s)^{α*} = |λ|/Γ(1−α(t)) · (t−s)^{α*−α(t)}
    /// has a nonnegative exponent, so the supremum over s sits at s = 0. The
    /// remaining one-dimensional maximisation over t uses a dense grid with a
    /// golden-section polish around every grid-local maximum.
    pub fn bound_constant(&self, horizon: f64) -> Result<f64> {
        let a_star = self.alpha.alpha_star(horizon)?;
        if self.lambda == 0.0 {
            return Ok(0.0);
        }
        let lam = self.lambda.abs();
        let phi = |t: f64| {
            let a = self.alpha.eval(t);
            lam / gamma_pos(1.0 - a) * t.powf(a_star - a)
        };
        if self.alpha.is_constant() {
            return Ok(phi(horizon));
        }
        let n = 4000;
        let ts: Vec<f64> = (1..=n).map(|i| horizon * i as f64 / n as f64).collect();
        let vals: Vec<f64> = ts.iter().map(|&t| phi(t)).collect();
        let mut best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for i in 0..n {
            let left = if i == 0 { f64::NEG_INFINITY } else { vals[i - 1] };
            let right = if i + 1 == n { f64::NEG_INFINITY } else { vals[i + 1] };
            if vals[i] >= left && vals[i] >= right {
                let lo = if i == 0 { horizon * 1e-9 } else { ts[i - 1] };
                let hi = if i + 1 == n { horizon } else { ts[i + 1] };
                best = best.max(golden_max(&phi, lo, hi));
            }
        }
        Ok(best)
    }

    /// Product-integration weights w_{i,j} = ∫_{t_j}^{t_{j+1}} κ(t_i, s) ds, j < i.
    pub fn row_weights(&self, nodes: &[f64], i: usize) -> Vec<f64> {
        let mut out = vec![0.0; i];
        self.fill_row(nodes, i, &mut out);
        out
    }

    pub(crate) fn fill_row(&self, nodes: &[f64], i: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), i);
        if i == 0 {
            return;
        }
        let ti = nodes[i];
        let a = self.alpha.eval(ti);
        let e = 1.0 - a;
        let c = self.lambda / (gamma_pos(e) * e);
        let mut prev = (ti - nodes[0]).powf(e);
        for j in 0..i {
            let next = if j + 1 == i { 0.0 } else { (ti - nodes[j + 1]).powf(e) };
            out[j] = c * (prev - next);
            prev = next;
        }
    }

    /// Telescoped row sum λ t_i^{1−α(t_i)} / (Γ(1−α(t_i))(1−α(t_i))) for a grid starting at 0.
    pub fn row_sum_closed_form(&self, t: f64) -> f64 {
        let e = 1.0 - self.alpha.eval(t);
        self.lambda * t.powf(e) / (gamma_pos(e) * e)
    }
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = fc.max(fd).max(f(a)).max(f(b));
    for _ in 0..100 {
        if (b - a).abs() < 1e-14 * b.abs().max(1.0) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        best = best.max(fc).max(fd);
    }
    best
}

/// Lazily filled lower-triangular weight table for one (kernel, grid) pair.
/// Rows are computed on first access and then shared read-only.
pub struct KernelWeights {
    kernel: FractionalKernel,
    nodes: Arc<[f64]>,
    rows: Vec<OnceLock<Box<[f64]>>>,
}

impl KernelWeights {
    pub fn new(kernel: &FractionalKernel, grid: &Grid) -> Self {
        let nodes: Arc<[f64]> = grid.nodes().into();
        Self {
            kernel: kernel.clone(),
            rows: (0..nodes.len()).map(|_| OnceLock::new()).collect(),
            nodes,
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.rows[i].get_or_init(|| {
            let mut r = vec![0.0; i].into_boxed_slice();
            self.kernel.fill_row(&self.nodes, i, &mut r);
            r
        })
    }

    pub fn kernel(&self) -> &FractionalKernel {
        &self.kernel
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn matches(&self, kernel: &FractionalKernel, grid: &Grid) -> bool {
        &self.kernel == kernel && *self.nodes == *grid.nodes()
    }
}

/// Read-mostly store of [`KernelWeights`] keyed by grid, shared between
/// concurrent solves. Holds at most `capacity` tables; further grids are
/// served uncached.
pub struct WeightCache {
    kernel: FractionalKernel,
    capacity: usize,
    tables: RwLock<HashMap<u64, Vec<Arc<KernelWeights>>>>,
}

impl WeightCache {
    pub fn new(kernel: FractionalKernel, capacity: usize) -> Self {
        Self {
            kernel,
            capacity,
            tables: RwLock::new(HashMap::new()),
        }
    }

    pub fn kernel(&self) -> &FractionalKernel {
        &self.kernel
    }

    pub fn get(&self, grid: &Grid) -> Arc<KernelWeights> {
        let key = grid.fingerprint();
        {
            let map = self.tables.read().expect("weight cache poisoned");
            if let Some(hit) = map
                .get(&key)
                .and_then(|v| v.iter().find(|w| w.matches(&self.kernel, grid)))
            {
                return Arc::clone(hit);
            }
        }
        let fresh = Arc::new(KernelWeights::new(&self.kernel, grid));
        let mut map = self.tables.write().expect("weight cache poisoned");
        let stored: usize = map.values().map(Vec::len).sum();
        if stored < self.capacity {
            let bucket = map.entry(key).or_default();
            if let Some(hit) = bucket.iter().find(|w| w.matches(&self.kernel, grid)) {
                return Arc::clone(hit);
            }
            bucket.push(Arc::clone(&fresh));
        }
        fresh
    }

    pub fn len(&self) -> usize {
        self.tables
            .read()
            .expect("weight cache poisoned")
            .values()
            .map(Vec::len)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
