use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::{FractionalKernel, WeightCache};
use crate::noise::{path_rng, sample_realization_stream, LevyMeasureSpec, NoiseRealization};
use crate::quad::gauss_legendre_on;
use crate::solver::{
    grid_for, interlaced_solve_with, picard_solve_with, CoefficientSet, Path, PicardOptions, PicardReport,
};

// u0 draws use their own seed family so that they never share a stream with
// the noise of the same path.
const U0_SEED_SALT: u64 = 0x75_30_5f_64_72_61_77_00;

/// Law of the initial value u0 (independent of the noise).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialValue {
    Fixed {
        value: f64,
    },
    /// `low` or `high` with probability 1/2 each.
    TwoPoint {
        low: f64,
        high: f64,
    },
    Uniform {
        low: f64,
        high: f64,
    },
    Normal {
        mean: f64,
        std: f64,
    },
}

impl InitialValue {
    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        let ok = match *self {
            InitialValue::Fixed { value } => finite(&[value]),
            InitialValue::TwoPoint { low, high } => finite(&[low, high]),
            InitialValue::Uniform { low, high } => finite(&[low, high]) && low < high,
            InitialValue::Normal { mean, std } => finite(&[mean, std]) && std > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid initial value law {self:?}")))
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, InitialValue::Fixed { .. })
    }

    /// Initial value of path `index` in a run keyed by `master_seed`.
    pub fn draw(&self, master_seed: u64, index: u64) -> f64 {
        match *self {
            InitialValue::Fixed { value } => value,
            _ => {
                let mut rng = path_rng(master_seed ^ U0_SEED_SALT, index);
                match *self {
                    InitialValue::TwoPoint { low, high } => {
                        if rng.random::<bool>() {
                            high
                        } else {
                            low
                        }
                    }
                    InitialValue::Uniform { low, high } => rng.random_range(low..high),
                    InitialValue::Normal { mean, std } => Normal::new(mean, std).expect("validated").sample(&mut rng),
                    InitialValue::Fixed { .. } => unreachable!(),
                }
            }
        }
    }

    /// E|u0|^p.
    pub fn abs_moment(&self, p: f64) -> f64 {
        match *self {
            InitialValue::Fixed { value } => value.abs().powf(p),
            InitialValue::TwoPoint { low, high } => 0.5 * (low.abs().powf(p) + high.abs().powf(p)),
            InitialValue::Uniform { low, high } => {
                let prim = |x: f64| x.signum() * x.abs().powf(p + 1.0) / (p + 1.0);
                (prim(high) - prim(low)) / (high - low)
            }
            InitialValue::Normal { mean, std } => {
                // Gauss-Legendre on ±12σ, split at the kink of |x|^p
                let (lo, hi) = (mean - 12.0 * std, mean + 12.0 * std);
                let density = |x: f64| {
                    let z = (x - mean) / std;
                    (-0.5 * z * z).exp() / (std * (2.0 * std::f64::consts::PI).sqrt())
                };
                let mut pieces = vec![(lo, hi)];
                if lo < 0.0 && hi > 0.0 {
                    pieces = vec![(lo, 0.0), (0.0, hi)];
                }
                pieces
                    .into_iter()
                    .map(|(a, b)| {
                        let (x, w) = gauss_legendre_on(200, a, b);
                        x.iter()
                            .zip(&w)
                            .map(|(x, w)| w * x.abs().powf(p) * density(*x))
                            .sum::<f64>()
                    })
                    .sum()
            }
        }
    }
}

/// Everything needed to produce path i of a Monte Carlo run: the kernel,
/// coefficients, Lévy measure, initial law and discretization. Kernel
/// weights are shared between paths through a cache.
#[derive(Clone)]
pub struct Problem {
    pub coeffs: CoefficientSet,
    pub levy: Arc<LevyMeasureSpec>,
    pub u0: InitialValue,
    pub horizon: f64,
    pub steps: usize,
    pub picard: PicardOptions,
    cache: Arc<WeightCache>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("kernel", self.kernel())
            .field("coeffs", &self.coeffs)
            .field("levy", &self.levy)
            .field("u0", &self.u0)
            .field("horizon", &self.horizon)
            .field("steps", &self.steps)
            .field("picard", &self.picard)
            .finish()
    }
}

impl Problem {
    pub fn new(
        kernel: FractionalKernel,
        coeffs: CoefficientSet,
        levy: LevyMeasureSpec,
        u0: InitialValue,
        horizon: f64,
        steps: usize,
    ) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::domain(format!("horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::domain("need at least one time step"));
        }
        if kernel.alpha.t_max < horizon {
            return Err(Error::domain(format!(
                "alpha is only specified up to {}, horizon is {horizon}",
                kernel.alpha.t_max
            )));
        }
        levy.validate()?;
        u0.validate()?;
        Ok(Self {
            coeffs,
            levy: Arc::new(levy),
            u0,
            horizon,
            steps,
            picard: PicardOptions::default(),
            cache: Arc::new(WeightCache::new(kernel, 16)),
        })
    }

    pub fn with_picard(mut self, picard: PicardOptions) -> Self {
        self.picard = picard;
        self
    }

    pub fn kernel(&self) -> &FractionalKernel {
        self.cache.kernel()
    }

    /// α*(T).
    pub fn alpha_star(&self) -> Result<f64> {
        self.kernel().alpha.alpha_star(self.horizon)
    }

    pub fn realization(&self, master_seed: u64, index: u64) -> Result<NoiseRealization> {
        sample_realization_stream(Arc::clone(&self.levy), self.horizon, master_seed, index)
    }

    pub fn grid(&self, realization: &NoiseRealization) -> Result<Grid> {
        grid_for(realization, self.steps)
    }

    /// Path `index` of the run keyed by `master_seed`, with large jumps.
    pub fn solve(&self, master_seed: u64, index: u64) -> Result<(Path, PicardReport)> {
        let r = self.realization(master_seed, index)?;
        self.solve_on(&r, self.u0.draw(master_seed, index))
    }

    pub fn solve_on(&self, realization: &NoiseRealization, u0: f64) -> Result<(Path, PicardReport)> {
        let grid = self.grid(realization)?;
        let w = self.cache.get(&grid);
        interlaced_solve_with(&w, &self.coeffs, realization, u0, &grid, self.picard)
    }

    /// Path `index` of the equation without large jumps, on the uniform grid.
    pub fn solve_small(&self, master_seed: u64, index: u64) -> Result<(Path, PicardReport)> {
        let r = self.realization(master_seed, index)?;
        let grid = Grid::uniform(self.horizon, self.steps)?;
        let w = self.cache.get(&grid);
        picard_solve_with(
            &w,
            &self.coeffs,
            &r,
            self.u0.draw(master_seed, index),
            &grid,
            self.picard,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_value_moments() {
        assert_eq!(InitialValue::Fixed { value: -2.0 }.abs_moment(2.0), 4.0);
        assert_eq!(InitialValue::TwoPoint { low: -1.0, high: 3.0 }.abs_moment(1.0), 2.0);
        // E|U|² for U ~ U(−1, 2) is (1 + 8)/9 = 1
        let u = InitialValue::Uniform { low: -1.0, high: 2.0 };
        assert!((u.abs_moment(2.0) - 1.0).abs() < 1e-14);
        // E|X| for X ~ N(0, σ²) is σ√(2/π); E X² = μ² + σ²
        let n = InitialValue::Normal { mean: 0.0, std: 2.0 };
        assert!((n.abs_moment(1.0) - 2.0 * (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-10);
        let n = InitialValue::Normal { mean: 1.0, std: 0.5 };
        assert!((n.abs_moment(2.0) - 1.25).abs() < 1e-10);
    }

    #[test]
    fn draws_are_keyed_by_seed_and_index() {
        let law = InitialValue::Normal { mean: 0.0, std: 1.0 };
        assert_eq!(law.draw(5, 3), law.draw(5, 3));
        assert_ne!(law.draw(5, 3), law.draw(5, 4));
        assert_ne!(law.draw(5, 3), law.draw(6, 3));
        let two = InitialValue::TwoPoint { low: -1.0, high: 1.0 };
        let ones = (0..1000).filter(|&i| two.draw(1, i) == 1.0).count();
        assert!((400..600).contains(&ones));
    }

    #[test]
    fn rejects_bad_laws() {
        assert!(InitialValue::Uniform { low: 1.0, high: 1.0 }.validate().is_err());
        assert!(InitialValue::Normal { mean: 0.0, std: 0.0 }.validate().is_err());
        assert!(InitialValue::Fixed { value: f64::NAN }.validate().is_err());
    }
}
