//! Batch experiment runner: JSON configs, the coefficient preset catalog,
//! study execution and report/CSV output.

mod config;
mod presets;
mod run;

pub use config::{
    CoefficientConfig, ConvergenceReference, ExperimentConfig, IsometryIntegrand, KernelConfig, Numerics, OutputConfig,
    ProblemConfig, Study, MIN_STEPS,
};
pub use presets::{build_coefficients, find_preset, list_presets, preset_catalog, PresetInfo};
pub use run::{
    artifact_version, build_problem, resolve_out_dir, run_experiment, CheckResult, ConvergenceRow, RunReport,
    StudyResult, FALLBACK_OUT_DIR, OUT_DIR_ENV,
};

use crate::error::Result;

const CHECK_CONFIGS: [(&str, &str); 10] = [
    ("zero_path", include_str!("../../configs/zero_path.json")),
    (
        "exponential_convergence",
        include_str!("../../configs/exponential_convergence.json"),
    ),
    (
        "picard_contraction",
        include_str!("../../configs/picard_contraction.json"),
    ),
    ("isometry_one", include_str!("../../configs/isometry_one.json")),
    ("isometry_mark", include_str!("../../configs/isometry_mark.json")),
    (
        "large_jump_counts",
        include_str!("../../configs/large_jump_counts.json"),
    ),
    ("figure1", include_str!("../../configs/figure1.json")),
    ("moment_stability", include_str!("../../configs/moment_stability.json")),
    ("holder", include_str!("../../configs/holder.json")),
    ("gronwall", include_str!("../../configs/gronwall.json")),
];

/// The built-in configs run by `vofsde --check`, by name.
pub fn check_suite() -> Result<Vec<(&'static str, ExperimentConfig)>> {
    CHECK_CONFIGS
        .iter()
        .map(|(name, text)| Ok((*name, ExperimentConfig::from_json_str(text)?)))
        .collect()
}
