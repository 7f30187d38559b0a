//! Partitions of the capacity-time axis.

use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};

/// Default grading exponent: `t_j ∝ j²` spaces `√t_j` uniformly.
pub const DEFAULT_GRADING: f64 = 2.0;

/// A strictly increasing partition `0 = t_0 < t_1 < … < t_N` of `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeMesh {
    nodes: Vec<f64>,
    grading_exponent: f64,
}

impl TimeMesh {
    /// Graded mesh `t_j = T·(j/N)^p` with `N` intervals.
    pub fn graded(end: f64, intervals: usize, grading_exponent: f64) -> Result<Self> {
        if !(end > 0.0) || !end.is_finite() {
            return Err(argument(format!("mesh end must be positive, got {end}")));
        }
        if intervals < 2 {
            return Err(argument(format!(
                "mesh needs at least 2 intervals, got {intervals}"
            )));
        }
        if !(grading_exponent >= 1.0) || !grading_exponent.is_finite() {
            return Err(argument(format!(
                "grading exponent must be >= 1, got {grading_exponent}"
            )));
        }
        let n = intervals as f64;
        let mut nodes: Vec<f64> = (0..=intervals)
            .map(|j| end * (j as f64 / n).powf(grading_exponent))
            .collect();
        nodes[intervals] = end;
        Ok(Self {
            nodes,
            grading_exponent,
        })
    }

    /// Mesh from explicit nodes. The first node must be 0 and the rest strictly increasing.
    /// A single node `[0]` is the degenerate mesh of a zero-length evolution.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.first() != Some(&0.0) {
            return Err(argument("mesh must start at t = 0"));
        }
        for (j, pair) in nodes.windows(2).enumerate() {
            if !(pair[1] > pair[0]) || !pair[1].is_finite() {
                return Err(argument(format!(
                    "mesh nodes must be strictly increasing (nodes {j} and {})",
                    j + 1
                )));
            }
        }
        Ok(Self {
            nodes,
            grading_exponent: 1.0,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn grading_exponent(&self) -> f64 {
        self.grading_exponent
    }

    /// Number of intervals (one less than the number of nodes).
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn end(&self) -> f64 {
        *self.nodes.last().expect("mesh has at least one node")
    }

    /// Step sizes `δ_j = t_j − t_{j−1}` for `j = 1..=N`.
    pub fn steps(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.windows(2).map(|p| p[1] - p[0])
    }

    /// Interval midpoints, one per interval.
    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.windows(2).map(|p| 0.5 * (p[0] + p[1]))
    }

    /// Index of the last node with `t_j <= t`.
    pub fn node_at_or_before(&self, t: f64) -> usize {
        self.nodes.partition_point(|&s| s <= t).saturating_sub(1)
    }

    /// The mesh with every node multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            nodes: self.nodes.iter().map(|t| t * factor).collect(),
            grading_exponent: self.grading_exponent,
        }
    }
}

/// Geometric ladder `t_i = T·4^{-i}`, `i = 0..count`. Each entry halves `√t`.
pub fn time_ladder(end: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| end * 0.25f64.powi(i as i32)).collect()
}
