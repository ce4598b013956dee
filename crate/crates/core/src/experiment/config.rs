use std::collections::BTreeMap;
use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};

use super::presets::find_preset;
use crate::analysis::InitialValue;
use crate::error::{Error, Result};
use crate::kernel::AlphaSpec;
use crate::noise::LevyMeasureSpec;

/// One batch run: a problem, its discretization, the study to perform and
/// the seed everything random derives from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub problem: ProblemConfig,
    pub numerics: Numerics,
    pub study: Study,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kernel: KernelConfig,
    pub coefficients: CoefficientConfig,
    #[serde(default = "LevyMeasureSpec::none")]
    pub levy: LevyMeasureSpec,
    pub u0: InitialValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub lambda: f64,
    pub alpha: AlphaSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    pub preset: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    pub horizon: f64,
    pub steps: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_tol() -> f64 {
    crate::solver::DEFAULT_TOL
}

fn default_max_iter() -> usize {
    crate::solver::DEFAULT_MAX_ITER
}

fn default_true() -> bool {
    true
}

fn default_t0() -> f64 {
    0.5
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceReference {
    /// u0·e^{(λ+c)t} for α ≡ 0, no noise and drift c·u.
    Exponential,
    /// |u_N − u_{2N}| on one noise draw.
    Refinement,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsometryIntegrand {
    /// g(s, z) = 1
    One,
    /// g(s, z) = z₁
    Mark,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Study {
    SinglePath,
    McMoment {
        p: f64,
        paths: usize,
        /// Also run 2M paths and check the estimate is stable.
        #[serde(default = "default_true")]
        doubling: bool,
    },
    Holder {
        p: f64,
        paths: usize,
        /// Defaults to five dyadic lags T/4, ..., T/64.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lags: Option<Vec<f64>>,
    },
    Gronwall {
        instances: usize,
        points: usize,
    },
    Figure1 {
        #[serde(default = "default_t0")]
        t0: f64,
        /// Constant jump h(t0, u) = jump.
        jump: f64,
        /// Smallest post-jump sup-distance between the fractional solution
        /// and the memoryless restart that counts as a visible memory effect.
        threshold: f64,
    },
    Convergence {
        steps: Vec<usize>,
        reference: ConvergenceReference,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min_order: Option<f64>,
    },
    PicardContraction {
        p: f64,
        paths: usize,
    },
    Isometry {
        paths: usize,
        integrand: IsometryIntegrand,
    },
    LargeJumpCounts {
        seeds: usize,
    },
}

impl Study {
    pub fn name(&self) -> &'static str {
        match self {
            Study::SinglePath => "single_path",
            Study::McMoment { .. } => "mc_moment",
            Study::Holder { .. } => "holder",
            Study::Gronwall { .. } => "gronwall",
            Study::Figure1 { .. } => "figure1",
            Study::Convergence { .. } => "convergence",
            Study::PicardContraction { .. } => "picard_contraction",
            Study::Isometry { .. } => "isometry",
            Study::LargeJumpCounts { .. } => "large_jump_counts",
        }
    }
}

pub const MIN_STEPS: usize = 16;

fn require(ok: bool, field: &str, message: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(field, message))
    }
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let n = &self.numerics;
        require(
            n.horizon > 0.0 && n.horizon.is_finite(),
            "numerics.horizon",
            "must be positive",
        )?;
        require(
            n.steps >= MIN_STEPS,
            "numerics.steps",
            format!("must be at least {MIN_STEPS}"),
        )?;
        require(n.tol > 0.0, "numerics.tol", "must be positive")?;
        require(n.max_iter >= 1, "numerics.max_iter", "must be at least 1")?;

        let p = &self.problem;
        require(p.kernel.lambda.is_finite(), "problem.kernel.lambda", "must be finite")?;
        p.kernel
            .alpha
            .validate()
            .map_err(|e| Error::config("problem.kernel.alpha", e.to_string()))?;
        require(
            p.kernel.alpha.t_max >= n.horizon,
            "problem.kernel.alpha.t_max",
            format!("must cover the horizon {}", n.horizon),
        )?;
        require(
            find_preset(&p.coefficients.preset).is_some(),
            "problem.coefficients.preset",
            format!("unknown preset `{}`", p.coefficients.preset),
        )?;
        p.levy
            .validate()
            .map_err(|e| Error::config("problem.levy", e.to_string()))?;
        p.u0.validate()
            .map_err(|e| Error::config("problem.u0", e.to_string()))?;

        match &self.study {
            Study::SinglePath => {}
            Study::McMoment { p, paths, .. } => {
                require(*p >= 1.0, "study.p", "must be >= 1")?;
                require(*paths >= 1, "study.paths", "must be at least 1")?;
            }
            Study::Holder { p, paths, lags } => {
                require(*p > 0.0, "study.p", "must be positive")?;
                require(*paths >= 1, "study.paths", "must be at least 1")?;
                if let Some(l) = lags {
                    require(l.len() >= 3, "study.lags", "need at least 3 lags")?;
                }
            }
            Study::Gronwall { instances, points } => {
                require(*instances >= 1, "study.instances", "must be at least 1")?;
                require(*points >= 2, "study.points", "must be at least 2")?;
            }
            Study::Figure1 { t0, jump, threshold } => {
                require(
                    *t0 > 0.0 && *t0 < n.horizon,
                    "study.t0",
                    "must lie strictly inside (0, T)",
                )?;
                require(jump.is_finite(), "study.jump", "must be finite")?;
                require(*threshold >= 0.0, "study.threshold", "must be >= 0")?;
            }
            Study::Convergence { steps, .. } => {
                require(steps.len() >= 2, "study.steps", "need at least two resolutions")?;
                require(
                    steps.iter().all(|&s| s >= MIN_STEPS),
                    "study.steps",
                    format!("each must be at least {MIN_STEPS}"),
                )?;
            }
            Study::PicardContraction { p, paths } => {
                require(*p >= 1.0, "study.p", "must be >= 1")?;
                require(*paths >= 1, "study.paths", "must be at least 1")?;
            }
            Study::Isometry { paths, .. } => require(*paths >= 2, "study.paths", "must be at least 2")?,
            Study::LargeJumpCounts { seeds } => require(*seeds >= 2, "study.seeds", "must be at least 2")?,
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "problem": {
            "kernel": {"lambda": -1.0, "alpha": {"form": {"kind": "constant", "value": 0.5}, "gamma_holder": 1.0, "t_max": 1.0}},
            "coefficients": {"preset": "linear"},
            "u0": {"kind": "fixed", "value": 1.0}
        },
        "numerics": {"horizon": 1.0, "steps": 64},
        "study": {"kind": "single_path"}
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::from_json_str(MINIMAL).unwrap();
        assert_eq!(c.numerics.tol, crate::solver::DEFAULT_TOL);
        assert_eq!(c.problem.levy, LevyMeasureSpec::none());
        assert_eq!(c.master_seed, 0);
    }

    #[test]
    fn round_trip() {
        let c = ExperimentConfig::from_json_str(MINIMAL).unwrap();
        let back = ExperimentConfig::from_json_str(&c.to_json_pretty()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn field_level_errors() {
        let bad = MINIMAL.replace("\"steps\": 64", "\"steps\": 8");
        match ExperimentConfig::from_json_str(&bad) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "numerics.steps"),
            other => panic!("{other:?}"),
        }
        let bad = MINIMAL.replace("\"linear\"", "\"cubic\"");
        match ExperimentConfig::from_json_str(&bad) {
            Err(Error::Config { field, message }) => {
                assert_eq!(field, "problem.coefficients.preset");
                assert!(message.contains("cubic"));
            }
            other => panic!("{other:?}"),
        }
        let bad = MINIMAL.replace("\"single_path\"}", "\"mc_moment\", \"p\": 2.0, \"paths\": 0}");
        match ExperimentConfig::from_json_str(&bad) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "study.paths"),
            other => panic!("{other:?}"),
        }
        let typo = MINIMAL.replace("\"numerics\"", "\"numerix\"");
        assert!(matches!(ExperimentConfig::from_json_str(&typo), Err(Error::Json(_))));
    }
}
