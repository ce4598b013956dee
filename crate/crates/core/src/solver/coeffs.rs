use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type DriftFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type JumpFn = Arc<dyn Fn(f64, f64, &[f64]) -> f64 + Send + Sync>;
pub type RateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// (t, u) ↦ ∫_{ε≤|z|<1} g(t,u,z) ν(dz).
pub type CompensatorFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Which structural assumptions the coefficients claim to satisfy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionFlags {
    /// f is Lipschitz in u with constant L(t).
    pub lipschitz_claimed: bool,
    /// |f(t,u)| ≤ L(t)(1+|u|).
    pub growth_claimed: bool,
    /// |h(t,u,z)| ≤ L(t)(1+|u|)(1+|z|).
    pub h_growth_claimed: bool,
    /// ∫|g(t,u,z)|²ν(dz) ≤ L(t)(1+|u|²); needed for moments beyond p = 2.
    #[serde(default)]
    pub g_square_growth_claimed: bool,
}

/// Drift f, small-jump coefficient g and large-jump coefficient h, with the
/// rate function L(t) their Lipschitz/growth claims refer to. `g` or `h`
/// set to `None` means the coefficient vanishes identically.
#[derive(Clone)]
pub struct CoefficientSet {
    pub f: DriftFn,
    pub g: Option<JumpFn>,
    pub h: Option<JumpFn>,
    pub rate: RateFn,
    pub p_exponent: f64,
    pub flags: AssumptionFlags,
    /// Closed form of the small-jump compensator; quadrature is used when absent.
    pub compensator: Option<CompensatorFn>,
}

impl fmt::Debug for CoefficientSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientSet")
            .field("g", &self.g.is_some())
            .field("h", &self.h.is_some())
            .field("p_exponent", &self.p_exponent)
            .field("flags", &self.flags)
            .field("compensator", &self.compensator.is_some())
            .finish()
    }
}

/// Outcome of sampling the assumption claims.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub samples: usize,
    /// Largest sampled |f(t,u)−f(t,ũ)| / (L(t)|u−ũ|).
    pub lipschitz_ratio: f64,
    /// Largest sampled |f(t,u)| / (L(t)(1+|u|)).
    pub growth_ratio: f64,
    /// Largest sampled |h(t,u,z)| / (L(t)(1+|u|)(1+|z|)) over the probe marks.
    pub h_growth_ratio: f64,
}

impl CoefficientSet {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            g: None,
            h: None,
            rate: Arc::new(|_| 0.0),
            p_exponent: 2.0,
            flags: AssumptionFlags::default(),
            compensator: None,
        }
    }

    /// f = g = h = 0.
    pub fn zero() -> Self {
        let mut c = Self::new(|_, _| 0.0);
        c.flags = AssumptionFlags {
            lipschitz_claimed: true,
            growth_claimed: true,
            h_growth_claimed: true,
            g_square_growth_claimed: true,
        };
        c
    }

    pub fn with_g(mut self, g: impl Fn(f64, f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.g = Some(Arc::new(g));
        self
    }

    pub fn with_h(mut self, h: impl Fn(f64, f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.h = Some(Arc::new(h));
        self
    }

    pub fn with_rate(mut self, rate: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.rate = Arc::new(rate);
        self
    }

    pub fn with_compensator(mut self, c: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.compensator = Some(Arc::new(c));
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p_exponent = p;
        self
    }

    pub fn with_flags(mut self, flags: AssumptionFlags) -> Self {
        self.flags = flags;
        self
    }

    /// Samples the claimed assumptions on [0, T] × [−u_max, u_max] and fails
    /// on the first claim that is contradicted, or on a discontinuity in u of
    /// g or h at a probe mark.
    pub fn validate(&self, horizon: f64, u_max: f64, probe_marks: &[Vec<f64>]) -> Result<AssumptionCheck> {
        if !(1.0..=2.0).contains(&self.p_exponent) {
            return Err(Error::domain(format!("p must lie in [1,2], got {}", self.p_exponent)));
        }
        let nt = 17;
        let nu = 41;
        let ts: Vec<f64> = (0..nt).map(|i| horizon * i as f64 / (nt - 1) as f64).collect();
        let us: Vec<f64> = (0..nu)
            .map(|i| -u_max + 2.0 * u_max * i as f64 / (nu - 1) as f64)
            .collect();
        let slack = 1.0 + 1e-6;
        let mut check = AssumptionCheck {
            samples: 0,
            lipschitz_ratio: 0.0,
            growth_ratio: 0.0,
            h_growth_ratio: 0.0,
        };
        for &t in &ts {
            let l = (self.rate)(t);
            if !(l >= 0.0) {
                return Err(Error::domain(format!("L({t}) = {l} must be nonnegative")));
            }
            for (a, &u) in us.iter().enumerate() {
                let fu = (self.f)(t, u);
                let bound = l * (1.0 + u.abs());
                let r = ratio(fu.abs(), bound);
                check.growth_ratio = check.growth_ratio.max(r);
                if self.flags.growth_claimed && fu.abs() > bound * slack {
                    return Err(Error::domain(format!(
                        "growth claim fails: |f({t}, {u})| = {} > L(t)(1+|u|) = {bound}",
                        fu.abs()
                    )));
                }
                for &v in &us[a + 1..] {
                    let d = ((self.f)(t, v) - fu).abs();
                    let bound = l * (v - u).abs();
                    check.lipschitz_ratio = check.lipschitz_ratio.max(ratio(d, bound));
                    if self.flags.lipschitz_claimed && d > bound * slack {
                        return Err(Error::domain(format!(
                            "Lipschitz claim fails at t = {t}: |f(u)−f(v)| = {d} > L(t)|u−v| = {bound} for u = {u}, v = {v}"
                        )));
                    }
                    check.samples += 1;
                }
                for z in probe_marks {
                    for (name, coef) in [("g", &self.g), ("h", &self.h)] {
                        let Some(c) = coef else { continue };
                        let here = c(t, u, z);
                        let near = c(t, u + 1e-9 * (1.0 + u.abs()), z);
                        if !here.is_finite() || (near - here).abs() > 1e-6 * (1.0 + here.abs()) {
                            return Err(Error::domain(format!(
                                "{name} is not continuous in u at t = {t}, u = {u}, z = {z:?}"
                            )));
                        }
                    }
                    if let Some(h) = &self.h {
                        let hv = h(t, u, z).abs();
                        let bound = l * (1.0 + u.abs()) * (1.0 + crate::noise::norm(z));
                        check.h_growth_ratio = check.h_growth_ratio.max(ratio(hv, bound));
                        if self.flags.h_growth_claimed && hv > bound * slack {
                            return Err(Error::domain(format!(
                                "h growth claim fails at t = {t}, u = {u}, z = {z:?}: |h| = {hv} > {bound}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(check)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}
