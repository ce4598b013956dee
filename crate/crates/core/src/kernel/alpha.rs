use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parametric shape of the fractional order α(t).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaForm {
    Constant {
        value: f64,
    },
    /// α(t) = intercept + slope·t
    Affine {
        intercept: f64,
        slope: f64,
    },
    /// α(t) = mean + amplitude·sin(frequency·t + phase)
    Sinusoidal {
        mean: f64,
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Piecewise-linear interpolation of (times, values), constant beyond the ends.
    Table {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

/// Fractional order function with its declared Hölder exponent γ and the
/// time domain [0, t_max] on which it is used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaSpec {
    pub form: AlphaForm,
    pub gamma_holder: f64,
    pub t_max: f64,
}

/// Result of sampling |α(t₂)−α(t₁)| / |t₂−t₁|^γ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderCheck {
    pub gamma: f64,
    /// Sampled Hölder constant C₂.
    pub c2: f64,
    pub samples: usize,
}

impl AlphaSpec {
    pub fn new(form: AlphaForm, gamma_holder: f64, t_max: f64) -> Result<Self> {
        let spec = Self {
            form,
            gamma_holder,
            t_max,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn constant(value: f64, t_max: f64) -> Result<Self> {
        Self::new(AlphaForm::Constant { value }, 1.0, t_max)
    }

    pub fn affine(intercept: f64, slope: f64, t_max: f64) -> Result<Self> {
        Self::new(AlphaForm::Affine { intercept, slope }, 1.0, t_max)
    }

    /// Checks α(t) ∈ [0,1) on [0, t_max] and the structural constraints of each form.
    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::domain(format!(
                "alpha domain t_max must be positive, got {}",
                self.t_max
            )));
        }
        if !(self.gamma_holder > 0.0) {
            return Err(Error::domain(format!(
                "Hölder exponent must be positive, got {}",
                self.gamma_holder
            )));
        }
        if let AlphaForm::Table { times, values } = &self.form {
            if times.is_empty() || times.len() != values.len() {
                return Err(Error::domain(
                    "alpha table needs equal, nonzero numbers of times and values",
                ));
            }
            if times.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::domain("alpha table times must be strictly increasing"));
            }
        }
        let (lo, hi) = self.range_on(0.0, self.t_max);
        if !(lo >= 0.0 && hi < 1.0) {
            return Err(Error::domain(format!(
                "alpha must stay in [0,1) on [0, {}], found range [{lo}, {hi}]",
                self.t_max
            )));
        }
        Ok(())
    }

    /// α(t) without a domain check.
    pub fn eval(&self, t: f64) -> f64 {
        match &self.form {
            AlphaForm::Constant { value } => *value,
            AlphaForm::Affine { intercept, slope } => intercept + slope * t,
            AlphaForm::Sinusoidal {
                mean,
                amplitude,
                frequency,
                phase,
            } => mean + amplitude * (frequency * t + phase).sin(),
            AlphaForm::Table { times, values } => {
                let k = times.partition_point(|&x| x <= t);
                if k == 0 {
                    values[0]
                } else if k == times.len() {
                    values[k - 1]
                } else {
                    let (t0, t1) = (times[k - 1], times[k]);
                    let w = (t - t0) / (t1 - t0);
                    values[k - 1] + w * (values[k] - values[k - 1])
                }
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match &self.form {
            AlphaForm::Constant { .. } => true,
            AlphaForm::Affine { slope, .. } => *slope == 0.0,
            AlphaForm::Sinusoidal {
                amplitude, frequency, ..
            } => *amplitude == 0.0 || *frequency == 0.0,
            AlphaForm::Table { values, .. } => values.iter().all(|v| *v == values[0]),
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.t_max * (1.0 + 1e-12)) {
            return Err(Error::domain(format!(
                "t = {t} outside alpha domain [0, {}]",
                self.t_max
            )));
        }
        Ok(())
    }

    /// Maximal order α*(t) = sup_{0≤s≤t} α(s).
    pub fn alpha_star(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.range_on(0.0, t).1)
    }

    /// Exact (min, max) of α on [a, b].
    fn range_on(&self, a: f64, b: f64) -> (f64, f64) {
        let (ea, eb) = (self.eval(a), self.eval(b));
        let (mut lo, mut hi) = (ea.min(eb), ea.max(eb));
        match &self.form {
            AlphaForm::Constant { .. } | AlphaForm::Affine { .. } => {}
            AlphaForm::Sinusoidal {
                mean,
                amplitude,
                frequency,
                phase,
            } => {
                let (p, q) = {
                    let x = frequency * a + phase;
                    let y = frequency * b + phase;
                    (x.min(y), x.max(y))
                };
                // sin peaks at π/2 + 2πk and troughs at -π/2 + 2πk
                let hits = |center: f64| {
                    let k = ((p - center) / (2.0 * PI)).ceil();
                    center + 2.0 * PI * k <= q
                };
                let amp = amplitude.abs();
                if hits(FRAC_PI_2) {
                    let v = mean + amplitude.signum() * amp;
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                if hits(-FRAC_PI_2) {
                    let v = mean - amplitude.signum() * amp;
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            AlphaForm::Table { times, values } => {
                for (t, v) in times.iter().zip(values) {
                    if *t > a && *t < b {
                        lo = lo.min(*v);
                        hi = hi.max(*v);
                    }
                }
            }
        }
        (lo, hi)
    }

    /// Samples the Hölder quotient on `samples` equally spaced points and all
    /// their pairs, recording the smallest constant C₂ consistent with them.
    pub fn holder_check(&self, samples: usize) -> HolderCheck {
        let n = samples.max(2);
        let ts: Vec<f64> = (0..n).map(|i| self.t_max * i as f64 / (n - 1) as f64).collect();
        let vals: Vec<f64> = ts.iter().map(|&t| self.eval(t)).collect();
        let mut c2: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let q = (vals[j] - vals[i]).abs() / (ts[j] - ts[i]).powf(self.gamma_holder);
                c2 = c2.max(q);
            }
        }
        HolderCheck {
            gamma: self.gamma_holder,
            c2,
            samples: n,
        }
    }
}
