//! Simulation and verification toolkit for variable-order time-fractional
//! stochastic differential equations driven by Lévy jump noise.
//!
//! The model is the scalar stochastic Volterra equation
//!
//! ```text
//! u(t) = u0 + ∫₀ᵗ κ(t,s) u(s) ds + ∫₀ᵗ f(s,u(s)) ds
//!           + ∫₀ᵗ∫_{|z|<1} g(s,u(s−),z) Ñ(ds,dz) + ∫₀ᵗ∫_{|z|≥1} h(s,u(s−),z) N(ds,dz)
//! κ(t,s) = λ / (Γ(1−α(t)) (t−s)^{α(t)})
//! ```
//!
//! Paths are built by Picard iteration on a frozen noise realization, with
//! large jumps glued in segment by segment (interlacing). The [`analysis`]
//! module checks moment, regularity and Gronwall-type claims by Monte Carlo.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod kernel;
pub mod noise;
pub mod quad;
pub mod solver;
pub mod specfun;

pub use error::{Error, Result};
pub use grid::Grid;
pub use kernel::{AlphaForm, AlphaSpec, FractionalKernel, GeneralKernel, ResolventTable};
pub use noise::{JumpClass, JumpEvent, LevyMeasureSpec, NoiseRealization};
pub use solver::{CoefficientSet, Path, PicardReport};
