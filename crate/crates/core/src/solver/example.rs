use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::{FractionalKernel, KernelWeights};

use super::path::Path;

fn jump_node(grid: &Grid, t0: f64) -> Result<usize> {
    if !(t0 > 0.0 && t0 < grid.horizon()) {
        return Err(Error::domain(format!("t0 = {t0} must lie in (0, {})", grid.horizon())));
    }
    grid.node_index(t0)
        .ok_or_else(|| Error::domain(format!("t0 = {t0} is not a grid node")))
}

/// Deterministic Volterra equation with a single jump at t0, solved in
/// three pieces: the jump-free solution v0 on [0, t0), the jump value
/// u(t0) = v0(t0−) + h(t0, v0(t0−)), and the post-jump equation
/// u(t) = k(t) + ∫_{t0}^t κ(t,s)u(s) ds + ∫_{t0}^t f(s,u(s)) ds whose
/// inhomogeneity k(t) carries the whole pre-jump history.
pub fn deterministic_example(
    k: &FractionalKernel,
    f: impl Fn(f64, f64) -> f64,
    h_jump: impl Fn(f64, f64) -> f64,
    t0: f64,
    u0: f64,
    grid: &Grid,
) -> Result<Path> {
    let m = jump_node(grid, t0)?;
    let t = grid.nodes();
    let n = grid.len();
    let w = KernelWeights::new(k, grid);
    let drift = |j: usize, u: f64| grid.step(j) * f(t[j], u);

    // v0 on the nodes before t0
    let mut v0 = vec![0.0; m];
    for i in 0..m {
        let row = w.row(i);
        let mut acc = u0;
        for j in 0..i {
            acc += row[j] * v0[j] + drift(j, v0[j]);
        }
        v0[i] = acc;
    }
    let past = |i: usize| -> f64 {
        let row = w.row(i);
        (0..m).map(|j| row[j] * v0[j] + drift(j, v0[j])).sum()
    };

    let v0_left = u0 + past(m);
    let jump = h_jump(t0, v0_left);

    let mut u = vec![0.0; n];
    u[..m].copy_from_slice(&v0);
    for i in m..n {
        let k_i = u0 + past(i) + jump;
        let row = w.row(i);
        let mut acc = k_i;
        for j in m..i {
            acc += row[j] * u[j] + drift(j, u[j]);
        }
        u[i] = acc;
    }
    let mut left = u.clone();
    left[m] = v0_left;
    let mut is_jump = vec![false; n];
    is_jump[m] = true;
    Ok(Path::new(t.to_vec(), u, left, is_jump, u0, (0, 0)))
}

/// The same post-jump equation with the memory of [0, t0) discarded:
/// u(t) = u(t0) + ∫_{t0}^t κ(t,s)u(s) ds + ∫_{t0}^t f(s,u(s)) ds.
/// Returns the path on the nodes from t0 on.
pub fn memoryless_restart(
    k: &FractionalKernel,
    f: impl Fn(f64, f64) -> f64,
    t0: f64,
    start: f64,
    grid: &Grid,
) -> Result<Path> {
    let m = jump_node(grid, t0)?;
    let t = grid.nodes();
    let n = grid.len();
    let w = KernelWeights::new(k, grid);
    let mut u = vec![0.0; n];
    for i in m..n {
        let row = w.row(i);
        let mut acc = start;
        for j in m..i {
            acc += row[j] * u[j] + grid.step(j) * f(t[j], u[j]);
        }
        u[i] = acc;
    }
    let tail = u[m..].to_vec();
    Ok(Path::new(
        t[m..].to_vec(),
        tail.clone(),
        tail,
        vec![false; n - m],
        start,
        (0, 0),
    ))
}
