//! The discrete integral equation shared by every scheme.
//!
//! On grid nodes t_0 < … < t_M with weights w_{i,j} = ∫_{t_j}^{t_{j+1}} κ(t_i,s) ds,
//!
//! ```text
//! u_i = u0 + Σ_{j<i} w_{i,j} u_j + Σ_{j<i} q_j(u_j) + Σ_{jump nodes m ≤ i} H_m
//! q_j(u) = Δ_j f(t_j,u) + Σ_{s_k ∈ (t_j,t_{j+1}]} g(s_k,u,z_k) − Δ_j ∫ g(t_j,u,z) ν(dz)
//! H_m = h(t_m, u(t_m−), z_m)
//! ```
//!
//! Every integrand is frozen at the left node of its cell, so small jumps see
//! u(s−) and the scheme stays predictable.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::{FractionalKernel, KernelWeights};
use crate::noise::{JumpClass, MarkQuadrature, NoiseRealization};

use super::bound::fit_picard_bound;
use super::coeffs::{CoefficientSet, JumpFn};
use super::path::{Path, PicardReport, SegmentReport};

enum Compensator<'a> {
    None,
    Closed(&'a (dyn Fn(f64, f64) -> f64 + Send + Sync)),
    Quadrature(MarkQuadrature, &'a JumpFn),
}

pub(crate) struct System<'a> {
    grid: &'a Grid,
    weights: &'a KernelWeights,
    coeffs: &'a CoefficientSet,
    u0: f64,
    dim: usize,
    // small events grouped by cell, CSR layout
    cell_start: Vec<usize>,
    ev_time: Vec<f64>,
    ev_mark: Vec<f64>,
    // large event (time, mark offset) per node
    large: Vec<Option<usize>>,
    large_mark: Vec<f64>,
    compensator: Compensator<'a>,
    noise: (u64, u64),
}

impl<'a> System<'a> {
    pub(crate) fn new(
        weights: &'a KernelWeights,
        coeffs: &'a CoefficientSet,
        realization: &NoiseRealization,
        u0: f64,
        grid: &'a Grid,
        include_large: bool,
    ) -> Result<Self> {
        if !u0.is_finite() {
            return Err(Error::domain(format!("u0 must be finite, got {u0}")));
        }
        if weights.len() != grid.len() {
            return Err(Error::domain("kernel weights were built for a different grid"));
        }
        if (realization.horizon() - grid.horizon()).abs() > 1e-12 * grid.horizon() {
            return Err(Error::domain(format!(
                "realization horizon {} differs from grid horizon {}",
                realization.horizon(),
                grid.horizon()
            )));
        }
        let n = grid.len();
        let dim = realization.spec().mark_dim;

        let mut per_cell: Vec<usize> = vec![0; n];
        let mut small = Vec::new();
        if coeffs.g.is_some() {
            for e in realization.small_events() {
                let j = grid
                    .cell_of(e.time)
                    .ok_or_else(|| Error::domain(format!("small jump at {} outside the grid", e.time)))?;
                per_cell[j] += 1;
                small.push((j, e));
            }
        }
        let mut cell_start = vec![0; n + 1];
        for j in 0..n {
            cell_start[j + 1] = cell_start[j] + per_cell[j];
        }
        // events arrive time-sorted, so cells fill in order
        let mut ev_time = Vec::with_capacity(small.len());
        let mut ev_mark = Vec::with_capacity(small.len() * dim);
        for (_, e) in &small {
            ev_time.push(e.time);
            ev_mark.extend_from_slice(&e.mark);
        }

        let mut large = vec![None; n];
        let mut large_mark = Vec::new();
        if include_large {
            for e in realization.events().iter().filter(|e| e.class == JumpClass::Large) {
                let i = grid
                    .node_index(e.time)
                    .filter(|&i| grid.is_event_node(i))
                    .ok_or_else(|| {
                        Error::domain(format!(
                            "large jump at t = {} is not a jump node of the grid; build the grid from the realization",
                            e.time
                        ))
                    })?;
                large[i] = Some(large_mark.len());
                large_mark.extend_from_slice(&e.mark);
            }
        }

        let compensator = match (&coeffs.g, &coeffs.compensator) {
            (None, _) => Compensator::None,
            (Some(_), Some(c)) => Compensator::Closed(c.as_ref()),
            (Some(g), None) => {
                let q = realization.spec().small_quadrature();
                if q.is_empty() {
                    Compensator::None
                } else {
                    Compensator::Quadrature(q, g)
                }
            }
        };

        Ok(Self {
            grid,
            weights,
            coeffs,
            u0,
            dim,
            cell_start,
            ev_time,
            ev_mark,
            large,
            large_mark,
            compensator,
            noise: (realization.seed(), realization.stream()),
        })
    }

    pub(crate) fn len(&self) -> usize {
        self.grid.len()
    }

    pub(crate) fn u0(&self) -> f64 {
        self.u0
    }

    pub(crate) fn row(&self, i: usize) -> &[f64] {
        self.weights.row(i)
    }

    /// Increment of the non-memory terms over cell j, frozen at u = u_j.
    pub(crate) fn q(&self, j: usize, u: f64) -> f64 {
        let t = self.grid.nodes()[j];
        let dt = self.grid.step(j);
        let mut out = dt * (self.coeffs.f)(t, u);
        if let Some(g) = &self.coeffs.g {
            for k in self.cell_start[j]..self.cell_start[j + 1] {
                let z = &self.ev_mark[k * self.dim..(k + 1) * self.dim];
                out += g(self.ev_time[k], u, z);
            }
            let comp = match &self.compensator {
                Compensator::None => 0.0,
                Compensator::Closed(c) => c(t, u),
                Compensator::Quadrature(q, g) => q.integrate(|z| g(t, u, z)),
            };
            out -= dt * comp;
        }
        out
    }

    /// H at node i given the left limit, or `None` when no large jump sits there.
    pub(crate) fn jump(&self, i: usize, left: f64) -> Option<f64> {
        let off = self.large[i]?;
        let z = &self.large_mark[off..off + self.dim];
        let t = self.grid.nodes()[i];
        Some(match &self.coeffs.h {
            Some(h) => h(t, left, z),
            None => 0.0,
        })
    }

    pub(crate) fn path(&self, values: Vec<f64>, left: Vec<f64>, is_jump: Vec<bool>) -> Path {
        Path::new(self.grid.nodes().to_vec(), values, left, is_jump, self.u0, self.noise)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Picard iteration, segment by segment between jump nodes.
///
/// Within a segment [m, e) the history k(t_i) = u0 + Σ_{j<m}(w_{i,j}u_j + q_j) + ΣH
/// is fixed and the iterates are v_i ← k(t_i) + Σ_{m≤j<i}(w_{i,j}v_j + q_j(v_j)),
/// started from v ≡ k. Without jump nodes this is plain Picard iteration from u0.
pub(crate) fn picard(
    sys: &System<'_>,
    kernel: &FractionalKernel,
    horizon: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(Path, PicardReport)> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::domain(format!(
            "need tol > 0 and max_iter >= 1, got {tol}, {max_iter}"
        )));
    }
    let n = sys.len();
    let mut u = vec![0.0; n];
    let mut left = vec![0.0; n];
    let mut is_jump = vec![false; n];

    let mut starts = vec![0usize];
    starts.extend(sys.grid.event_nodes().iter().copied().filter(|&e| e > 0));

    let mut q_sum = 0.0;
    let mut h_sum = 0.0;
    let mut segments = Vec::with_capacity(starts.len());
    let mut failed = None;

    for (seg, &m) in starts.iter().enumerate() {
        let end = starts.get(seg + 1).copied().unwrap_or(n);
        let len = end - m;

        let mut hist: Vec<f64> = (m..end)
            .map(|i| sys.u0() + h_sum + q_sum + dot(&sys.row(i)[..m], &u[..m]))
            .collect();
        let pre = hist[0];
        let jump = sys.jump(m, pre);
        let big_h = jump.unwrap_or(0.0);
        h_sum += big_h;
        for v in hist.iter_mut() {
            *v += big_h;
        }

        let mut prev = hist.clone();
        let mut next = vec![0.0; len];
        let mut qs = vec![0.0; len];
        let mut diffs = Vec::new();
        let mut converged = false;
        for _ in 0..max_iter {
            for k in 0..len.saturating_sub(1) {
                qs[k] = sys.q(m + k, prev[k]);
            }
            next[0] = hist[0];
            let mut q_acc = 0.0;
            for k in 1..len {
                let row = &sys.row(m + k)[m..];
                q_acc += qs[k - 1];
                next[k] = hist[k] + dot(&row[..k], &prev[..k]) + q_acc;
            }
            let diff = next
                .iter()
                .zip(&prev)
                .fold(0.0, |acc: f64, (a, b)| acc.max((a - b).abs()));
            diffs.push(diff);
            std::mem::swap(&mut prev, &mut next);
            if !diff.is_finite() {
                break;
            }
            if diff <= tol {
                converged = true;
                break;
            }
        }

        u[m..end].copy_from_slice(&prev);
        left[m..end].copy_from_slice(&prev);
        if jump.is_some() {
            left[m] = pre;
            is_jump[m] = true;
        }
        for (j, &uj) in u.iter().enumerate().take(end).skip(m) {
            if j + 1 < n {
                q_sum += sys.q(j, uj);
            }
        }
        segments.push(SegmentReport {
            start: m,
            end,
            iterations: diffs.len(),
            sup_diffs: diffs,
            converged,
        });
        if !converged {
            failed = Some(seg);
            break;
        }
    }

    let report = summarize(segments, kernel, horizon, tol);
    if let Some(segment) = failed {
        return Err(Error::PicardNonConvergence {
            segment,
            report: Box::new(report),
        });
    }
    Ok((sys.path(u, left, is_jump), report))
}

fn summarize(segments: Vec<SegmentReport>, kernel: &FractionalKernel, horizon: f64, tol: f64) -> PicardReport {
    let iterations = segments.iter().map(|s| s.iterations).max().unwrap_or(0);
    let mut sup_diffs = vec![0.0f64; iterations];
    for s in &segments {
        for (acc, d) in sup_diffs.iter_mut().zip(&s.sup_diffs) {
            *acc = acc.max(*d);
        }
    }
    let converged = segments.iter().all(|s| s.converged);
    let fit = kernel
        .alpha
        .alpha_star(horizon)
        .ok()
        .and_then(|a| fit_picard_bound(&sup_diffs, a, horizon));
    let bound_curve = fit
        .as_ref()
        .map(|f| (1..=iterations).map(|n| f.bound(n)).collect())
        .unwrap_or_default();
    PicardReport {
        iterations,
        sup_diffs,
        bound_curve,
        fitted_c11: fit.as_ref().map(|f| f.c11),
        fitted_k: fit.as_ref().map(|f| f.k_tp),
        converged,
        tolerance: tol,
        segments,
    }
}

/// One forward pass over the nodes; each u_i only needs u_j for j < i.
pub(crate) fn forward(sys: &System<'_>) -> Path {
    let n = sys.len();
    let mut u = vec![0.0; n];
    let mut left = vec![0.0; n];
    let mut is_jump = vec![false; n];
    let mut q = vec![0.0; n];
    let mut jumps = 0.0;
    for i in 0..n {
        let row = sys.row(i);
        let mut pre = sys.u0() + jumps;
        for j in 0..i {
            pre += row[j] * u[j] + q[j];
        }
        left[i] = pre;
        u[i] = match sys.jump(i, pre) {
            Some(h) => {
                is_jump[i] = true;
                jumps += h;
                pre + h
            }
            None => pre,
        };
        if i + 1 < n {
            q[i] = sys.q(i, u[i]);
        }
    }
    sys.path(u, left, is_jump)
}
