use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Parameters of a frequency grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Smallest node.
    pub near_zero_cut: f64,
    /// Largest node.
    pub far_cut: f64,
    /// Linear nodes on (0, 1]; the step is `1 / linear_nodes`.
    pub linear_nodes: usize,
    /// Logarithmic nodes per decade on `[near_zero_cut, far_cut]`.
    pub per_decade: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            near_zero_cut: 1e-3,
            far_cut: 1e3,
            linear_nodes: 64,
            per_decade: 32,
        }
    }
}

impl GridSpec {
    pub fn with_far_cut(far_cut: f64) -> Self {
        GridSpec { far_cut, ..GridSpec::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.near_zero_cut > 0.0 && self.near_zero_cut.is_finite()) {
            return Err(Error::Config(format!("near_zero_cut must be positive, got {}", self.near_zero_cut)));
        }
        if !(self.far_cut > 1.0 && self.far_cut.is_finite()) {
            return Err(Error::Config(format!("far_cut must exceed 1, got {}", self.far_cut)));
        }
        if self.near_zero_cut >= 0.5 {
            return Err(Error::Config(format!(
                "near_zero_cut = {} must lie below the cutoff breakpoint 1/2",
                self.near_zero_cut
            )));
        }
        if self.per_decade < 16 {
            return Err(Error::Config(format!("need at least 16 nodes per decade, got {}", self.per_decade)));
        }
        if self.linear_nodes < 16 || !self.linear_nodes.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "linear_nodes must be even and at least 16, got {}",
                self.linear_nodes
            )));
        }
        Ok(())
    }

    /// Number of logarithmic intervals the density rule places on `[near, far]`.
    pub fn log_intervals(&self) -> usize {
        let decades = (self.far_cut / self.near_zero_cut).log10();
        (self.per_decade as f64 * decades - 1e-9).ceil().max(1.0) as usize
    }
}

/// Sorted strictly positive frequency nodes. Negative frequencies are mirrored.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyGrid {
    spec: GridSpec,
    nodes: Vec<f64>,
}

impl FrequencyGrid {
    /// Merge a logarithmic layout over `[near_zero_cut, far_cut]` with a linear
    /// block on (0, 1]. The breakpoints 1/2 and 1 of the cutoff are always nodes.
    pub fn build(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let n_log = spec.log_intervals();
        let ratio = (spec.far_cut / spec.near_zero_cut).ln();
        let mut nodes: Vec<f64> = (0..=n_log)
            .map(|j| spec.near_zero_cut * (ratio * j as f64 / n_log as f64).exp())
            .collect();
        nodes[0] = spec.near_zero_cut;
        nodes[n_log] = spec.far_cut;
        nodes.extend((1..=spec.linear_nodes).map(|j| j as f64 / spec.linear_nodes as f64));
        nodes.push(0.5);
        nodes.push(1.0);
        nodes.sort_by(|a, b| a.total_cmp(b));
        nodes.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
        // snap exact breakpoints after dedup
        for target in [0.5, 1.0] {
            if let Some(v) = nodes.iter_mut().find(|v| (**v - target).abs() <= 1e-12) {
                *v = target;
            }
        }
        Ok(FrequencyGrid { spec, nodes })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
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

    pub fn near_zero_cut(&self) -> f64 {
        self.nodes[0]
    }

    pub fn far_cut(&self) -> f64 {
        *self.nodes.last().expect("grid is never empty")
    }

    /// Index of a node equal to `xi` (within rounding), if any.
    pub fn index_of(&self, xi: f64) -> Option<usize> {
        let i = self.nodes.partition_point(|&v| v < xi * (1.0 - 1e-13));
        (i < self.nodes.len() && (self.nodes[i] - xi).abs() <= 1e-12 * xi.abs().max(1.0)).then_some(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contains_breakpoints() {
        let g = FrequencyGrid::build(GridSpec {
            near_zero_cut: 1e-3,
            far_cut: 100.0,
            linear_nodes: 64,
            per_decade: 32,
        })
        .unwrap();
        assert!(g.index_of(0.5).is_some());
        assert!(g.index_of(1.0).is_some());
        assert_eq!(g.near_zero_cut(), 1e-3);
        assert_eq!(g.far_cut(), 100.0);
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        // 5 decades at 32 per decade
        assert_eq!(g.spec().log_intervals(), 160);
    }

    #[test]
    fn degenerate_range_rejected() {
        let spec = GridSpec { near_zero_cut: 1e-3, far_cut: 1e-3, ..GridSpec::default() };
        assert!(matches!(FrequencyGrid::build(spec), Err(Error::Config(_))));
    }

    #[test]
    fn node_count_follows_density_rule() {
        let spec = GridSpec { near_zero_cut: 1e-2, far_cut: 200.0, linear_nodes: 64, per_decade: 64 };
        let g = FrequencyGrid::build(spec).unwrap();
        // oracle: count the decades, then merge with the linear block by brute force
        let decades = (200.0f64 / 1e-2).log10();
        let n_log = (64.0 * decades).ceil() as usize;
        let mut expect: Vec<f64> = (0..=n_log)
            .map(|j| 1e-2 * (2e4f64).powf(j as f64 / n_log as f64))
            .collect();
        expect.extend((1..=64).map(|j| j as f64 / 64.0));
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        expect.dedup_by(|a, b| (*a - *b).abs() < 1e-10);
        assert_eq!(g.spec().log_intervals(), n_log);
        assert_eq!(g.len(), expect.len());
    }
}
