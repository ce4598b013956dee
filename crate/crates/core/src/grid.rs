use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time nodes on [0, T]: the uniform nodes iT/N plus every large-jump time
/// inserted as an exact node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    horizon: f64,
    steps: usize,
    nodes: Vec<f64>,
    /// Indices of nodes that carry a large jump, increasing.
    event_nodes: Vec<usize>,
}

impl Grid {
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        Self::with_jump_times(horizon, steps, &[])
    }

    /// Uniform grid augmented with `jump_times`, each of which must lie in (0, T].
    pub fn with_jump_times(horizon: f64, steps: usize, jump_times: &[f64]) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::domain(format!("grid horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::domain("grid needs at least one step"));
        }
        let h = horizon / steps as f64;
        let mut nodes: Vec<f64> = (0..=steps).map(|i| i as f64 * h).collect();
        nodes[steps] = horizon;
        for &t in jump_times {
            if !(t > 0.0 && t <= horizon) {
                return Err(Error::domain(format!("jump time {t} outside (0, {horizon}]")));
            }
        }
        nodes.extend_from_slice(jump_times);
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let event_nodes = jump_times
            .iter()
            .map(|t| nodes.binary_search_by(|x| x.total_cmp(t)).expect("inserted"))
            .collect::<Vec<_>>();
        let mut event_nodes = event_nodes;
        event_nodes.sort_unstable();
        event_nodes.dedup();
        Ok(Self {
            horizon,
            steps,
            nodes,
            event_nodes,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of uniform steps N the grid was built from.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn event_nodes(&self) -> &[usize] {
        &self.event_nodes
    }

    pub fn is_event_node(&self, i: usize) -> bool {
        self.event_nodes.binary_search(&i).is_ok()
    }

    pub fn step(&self, j: usize) -> f64 {
        self.nodes[j + 1] - self.nodes[j]
    }

    pub fn max_step(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Index of the node equal to `t`, if any.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        self.nodes.binary_search_by(|x| x.total_cmp(&t)).ok()
    }

    /// Cell j with t_j < t ≤ t_{j+1}; `None` for t ≤ 0 or t > T.
    pub fn cell_of(&self, t: f64) -> Option<usize> {
        if !(t > 0.0 && t <= self.horizon) {
            return None;
        }
        let idx = self.nodes.partition_point(|&x| x < t);
        Some(idx - 1)
    }

    /// Index of the last node ≤ t (t clamped into [0, T]).
    pub fn last_node_at_or_before(&self, t: f64) -> usize {
        let idx = self.nodes.partition_point(|&x| x <= t);
        idx.saturating_sub(1)
    }

    /// Stable fingerprint of the node positions, used as a cache key.
    pub fn fingerprint(&self) -> u64 {
        // FNV-1a over the node bit patterns
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for x in &self.nodes {
            for b in x.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid() {
        let g = Grid::uniform(2.0, 8).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.nodes()[8], 2.0);
        assert!((g.max_step() - 0.25).abs() < 1e-15);
        assert!(g.event_nodes().is_empty());
    }

    #[test]
    fn jump_times_become_nodes() {
        let g = Grid::with_jump_times(1.0, 4, &[0.3, 0.5, 0.9]).unwrap();
        // 0.5 coincides with a uniform node
        assert_eq!(g.len(), 7);
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(g.max_step() <= 0.25 + 1e-15);
        let ev: Vec<f64> = g.event_nodes().iter().map(|&i| g.nodes()[i]).collect();
        assert_eq!(ev, vec![0.3, 0.5, 0.9]);
        assert!(g.is_event_node(g.node_index(0.3).unwrap()));
        assert!(!g.is_event_node(0));
    }

    #[test]
    fn cells() {
        let g = Grid::uniform(1.0, 4).unwrap();
        assert_eq!(g.cell_of(0.0), None);
        assert_eq!(g.cell_of(0.1), Some(0));
        assert_eq!(g.cell_of(0.25), Some(0));
        assert_eq!(g.cell_of(0.26), Some(1));
        assert_eq!(g.cell_of(1.0), Some(3));
        assert_eq!(g.cell_of(1.01), None);
        assert_eq!(g.last_node_at_or_before(0.25), 1);
        assert_eq!(g.last_node_at_or_before(0.2), 0);
        assert_eq!(g.last_node_at_or_before(5.0), 4);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Grid::uniform(0.0, 4).is_err());
        assert!(Grid::uniform(1.0, 0).is_err());
        assert!(Grid::with_jump_times(1.0, 4, &[1.5]).is_err());
        assert!(Grid::with_jump_times(1.0, 4, &[0.0]).is_err());
    }
}
