//! Monte Carlo checks of the moment bound, path regularity, the fractional
//! Gronwall inequality, the compensated-integral identities and Picard
//! contraction. All path loops run on the current rayon pool and reduce in
//! path-index order, so results do not depend on the thread count.

mod contraction;
mod gronwall;
mod holder;
mod isometry;
mod moment;
mod problem;
pub mod stats;

pub use contraction::{picard_contraction_study, ContractionReport};
pub use gronwall::{gronwall_sweep, gronwall_validate, GronwallCheck, GronwallSweep, GRONWALL_SLACK};
pub use holder::{
    dyadic_lags, holder_c4, holder_exponent_estimate, HolderReport, HOLDER_BASE_POINTS, HOLDER_SLOPE_TOLERANCE,
};
pub use isometry::{isometry_check, jensen_discrete_check, large_jump_count_check, IsometryReport, PoissonCountReport};
pub use moment::{
    calibrate_moment_envelope, mc_sup_moment, mc_sup_moment_with_envelope, moment_stability,
    theoretical_moment_envelope, MomentEnvelope, MomentReport, MomentStability, MAX_FAILURE_RATE,
};
pub use problem::{InitialValue, Problem};
