use std::io::Write;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Càdlàg trajectory sampled at grid nodes. At jump nodes `left_limits`
/// holds u(t−); elsewhere it equals the node value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Path {
    times: Vec<f64>,
    values: Vec<f64>,
    left_limits: Vec<f64>,
    is_jump: Vec<bool>,
    u0: f64,
    noise_seed: u64,
    noise_stream: u64,
}

impl Path {
    pub(crate) fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        left_limits: Vec<f64>,
        is_jump: Vec<bool>,
        u0: f64,
        noise: (u64, u64),
    ) -> Self {
        debug_assert!(times.len() == values.len() && values.len() == left_limits.len());
        Self {
            times,
            values,
            left_limits,
            is_jump,
            u0,
            noise_seed: noise.0,
            noise_stream: noise.1,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn left_limits(&self) -> &[f64] {
        &self.left_limits
    }

    pub fn is_jump(&self, i: usize) -> bool {
        self.is_jump[i]
    }

    pub fn jump_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.is_jump.iter().enumerate().filter(|(_, j)| **j).map(|(i, _)| i)
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    /// (seed, stream) of the noise realization the path was solved on.
    pub fn noise_id(&self) -> (u64, u64) {
        (self.noise_seed, self.noise_stream)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Right-continuous step interpolation: the value at the last node ≤ t.
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&x| x <= t);
        self.values[k.saturating_sub(1)]
    }

    /// max over nodes of |u(t_i)|, left limits included.
    pub fn sup_abs(&self) -> f64 {
        self.values
            .iter()
            .chain(&self.left_limits)
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// max_i |u(t_i) − v(t_i)| for paths on the same nodes.
    pub fn sup_distance(&self, other: &Path) -> f64 {
        assert_eq!(self.times, other.times, "paths live on different grids");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Writes `t, u, is_jump, left_limit`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "u", "is_jump", "left_limit"])?;
        for i in 0..self.len() {
            w.write_record([
                format!("{:e}", self.times[i]),
                format!("{:e}", self.values[i]),
                (self.is_jump[i] as u8).to_string(),
                format!("{:e}", self.left_limits[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<FsPath>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

/// Per-segment Picard record; segments are delimited by jump nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    /// First node of the segment.
    pub start: usize,
    /// One past the last node.
    pub end: usize,
    pub iterations: usize,
    pub sup_diffs: Vec<f64>,
    pub converged: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PicardReport {
    pub iterations: usize,
    /// g_n = max_i |u_n(t_i) − u_{n−1}(t_i)|, taken over all segments.
    pub sup_diffs: Vec<f64>,
    /// Bound curve evaluated with constants fitted to the first two diffs.
    pub bound_curve: Vec<f64>,
    pub fitted_c11: Option<f64>,
    pub fitted_k: Option<f64>,
    pub converged: bool,
    pub tolerance: f64,
    pub segments: Vec<SegmentReport>,
}
