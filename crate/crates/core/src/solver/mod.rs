//! Path construction on a frozen noise realization.

mod bound;
mod coeffs;
mod engine;
mod example;
mod path;

use serde::{Deserialize, Serialize};

pub use bound::{check_dominance, fit_picard_bound, picard_bound, theoretical_picard_bound, BoundFit, DominanceCheck};
pub use coeffs::{AssumptionCheck, AssumptionFlags, CoefficientSet, CompensatorFn, DriftFn, JumpFn, RateFn};
pub use example::{deterministic_example, memoryless_restart};
pub use path::{Path, PicardReport, SegmentReport};

use crate::error::Result;
use crate::grid::Grid;
use crate::kernel::{FractionalKernel, KernelWeights};
use crate::noise::NoiseRealization;
use engine::System;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Uniform N-step grid on [0, T] with the realization's large-jump times
/// inserted as nodes.
pub fn grid_for(realization: &NoiseRealization, steps: usize) -> Result<Grid> {
    Grid::with_jump_times(realization.horizon(), steps, &realization.large_times())
}

/// Picard iteration for the equation without large jumps: large events of
/// `realization` are ignored and h plays no role.
pub fn picard_solve(
    k: &FractionalKernel,
    coeffs: &CoefficientSet,
    realization: &NoiseRealization,
    u0: f64,
    grid: &Grid,
    opts: PicardOptions,
) -> Result<(Path, PicardReport)> {
    picard_solve_with(&KernelWeights::new(k, grid), coeffs, realization, u0, grid, opts)
}

/// [`picard_solve`] with precomputed (typically shared) weights.
pub fn picard_solve_with(
    weights: &KernelWeights,
    coeffs: &CoefficientSet,
    realization: &NoiseRealization,
    u0: f64,
    grid: &Grid,
    opts: PicardOptions,
) -> Result<(Path, PicardReport)> {
    let sys = System::new(weights, coeffs, realization, u0, grid, false)?;
    engine::picard(&sys, weights.kernel(), grid.horizon(), opts.tol, opts.max_iter)
}

/// Full solution with large jumps, built segment by segment: on each
/// interval between consecutive large-jump times the Picard scheme runs with
/// the history functional of everything before the segment, and at each jump
/// u(T_n) = u(T_n−) + h(T_n, u(T_n−), ΔP(T_n)).
///
/// The grid must contain every large-jump time as a node (see [`grid_for`]).
/// With h ≡ 0 the result is bit-identical to [`picard_solve`] on the same grid.
pub fn interlaced_solve(
    k: &FractionalKernel,
    coeffs: &CoefficientSet,
    realization: &NoiseRealization,
    u0: f64,
    grid: &Grid,
    opts: PicardOptions,
) -> Result<(Path, PicardReport)> {
    interlaced_solve_with(&KernelWeights::new(k, grid), coeffs, realization, u0, grid, opts)
}

pub fn interlaced_solve_with(
    weights: &KernelWeights,
    coeffs: &CoefficientSet,
    realization: &NoiseRealization,
    u0: f64,
    grid: &Grid,
    opts: PicardOptions,
) -> Result<(Path, PicardReport)> {
    let sys = System::new(weights, coeffs, realization, u0, grid, true)?;
    engine::picard(&sys, weights.kernel(), grid.horizon(), opts.tol, opts.max_iter)
}

/// Single forward substitution through the same discrete equations, large
/// jumps included.
pub fn euler_volterra_solve(
    k: &FractionalKernel,
    coeffs: &CoefficientSet,
    realization: &NoiseRealization,
    u0: f64,
    grid: &Grid,
) -> Result<Path> {
    let w = KernelWeights::new(k, grid);
    let sys = System::new(&w, coeffs, realization, u0, grid, true)?;
    Ok(engine::forward(&sys))
}

pub fn euler_volterra_solve_with(
    weights: &KernelWeights,
    coeffs: &CoefficientSet,
    realization: &NoiseRealization,
    u0: f64,
    grid: &Grid,
) -> Result<Path> {
    let sys = System::new(weights, coeffs, realization, u0, grid, true)?;
    Ok(engine::forward(&sys))
}

/// max_i |u_N(t_i) − u_{2N}(t_i)| over the coarse nodes, for each N in `steps`.
/// Uses jump-free uniform grids and forward substitution.
pub fn refinement_differences(
    k: &FractionalKernel,
    coeffs: &CoefficientSet,
    realization: &NoiseRealization,
    u0: f64,
    steps: &[usize],
) -> Result<Vec<(usize, f64)>> {
    let horizon = realization.horizon();
    steps
        .iter()
        .map(|&n| {
            let coarse = euler_volterra_solve(k, coeffs, realization, u0, &Grid::uniform(horizon, n)?)?;
            let fine = euler_volterra_solve(k, coeffs, realization, u0, &Grid::uniform(horizon, 2 * n)?)?;
            let d = coarse
                .values()
                .iter()
                .enumerate()
                .fold(0.0f64, |m, (i, v)| m.max((v - fine.values()[2 * i]).abs()));
            Ok((n, d))
        })
        .collect()
}
