//! Poisson random measure realizations: truncated, compensated small jumps
//! and finite-activity large jumps.

mod levy;
mod rng;
mod sample;

pub use levy::{compensator_integral, Atom, LargeJumpLaw, LevyMeasureSpec, MarkQuadrature, SmallJumpFamily};
pub use rng::path_rng;
pub use sample::{sample_realization, sample_realization_stream, JumpClass, JumpEvent, NoiseRealization};

pub(crate) use levy::norm;
