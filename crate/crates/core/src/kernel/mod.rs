//! The variable-order kernel κ(t,s), its maximal order and quadrature
//! weights, and general kernels with their resolvent.

mod alpha;
mod fractional;
mod general;

pub use alpha::{AlphaForm, AlphaSpec, HolderCheck};
pub use fractional::{FractionalKernel, KernelWeights, WeightCache};
pub use general::{
    check_kernel_conditions, check_scale_condition, default_epsilon_schedule, resolvent_compute, GeneralKernel,
    KernelConditionReport, KernelFn, ResolventTable,
};
