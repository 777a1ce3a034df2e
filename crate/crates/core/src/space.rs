//! Spatial sampling layouts shared by the kernels and the solvers.

use crate::error::{config, Result};
use crate::quad::simpson_weights;

/// Where the samples of a spatial function live.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// `cells + 1` vertices including both endpoints. Functions are read
    /// as their piecewise-linear interpolant and integrated with composite
    /// Simpson weights.
    Nodes,
    /// `cells` cell midpoints. Functions are read as piecewise constant
    /// and integrated with the midpoint rule.
    Cells,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceGrid {
    origin: f64,
    length: f64,
    cells: usize,
    layout: Layout,
}

impl SpaceGrid {
    pub fn new(origin: f64, length: f64, cells: usize, layout: Layout) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) || !origin.is_finite() {
            return config(format!("invalid spatial extent [{origin}, {origin}+{length}]"));
        }
        if cells < 1 {
            return config("a spatial grid needs at least one cell");
        }
        Ok(Self {
            origin,
            length,
            cells,
            layout,
        })
    }

    pub fn nodes(length: f64, cells: usize) -> Result<Self> {
        Self::new(0.0, length, cells, Layout::Nodes)
    }

    pub fn cell_centers(length: f64, cells: usize) -> Result<Self> {
        Self::new(0.0, length, cells, Layout::Cells)
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn h(&self) -> f64 {
        self.length / self.cells as f64
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        match self.layout {
            Layout::Nodes => self.cells + 1,
            Layout::Cells => self.cells,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Left edge of cell `c` (`0..=cells`).
    pub fn edge(&self, c: usize) -> f64 {
        if c == self.cells {
            self.origin + self.length
        } else {
            self.origin + c as f64 * self.h()
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        match self.layout {
            Layout::Nodes => self.edge(i),
            Layout::Cells => self.origin + (i as f64 + 0.5) * self.h(),
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Quadrature weights matching the layout.
    pub fn weights(&self) -> Vec<f64> {
        match self.layout {
            Layout::Nodes => simpson_weights(self.cells, self.h()),
            Layout::Cells => vec![self.h(); self.cells],
        }
    }

    /// The sub-interval a sample is responsible for: the cell itself for
    /// [`Layout::Cells`], the dual cell (clipped to the domain) for nodes.
    pub fn control_volume(&self, i: usize) -> (f64, f64) {
        let h = self.h();
        match self.layout {
            Layout::Cells => (self.edge(i), self.edge(i + 1)),
            Layout::Nodes => {
                let x = self.point(i);
                let lo = (x - 0.5 * h).max(self.origin);
                let hi = (x + 0.5 * h).min(self.origin + self.length);
                (lo, hi)
            }
        }
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.weights().iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Samples `f` at the grid points.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(|i| f(self.point(i))).collect()
    }

    /// Value of the sampled function at `x` under the layout's
    /// interpolation rule.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let h = self.h();
        let s = ((x - self.origin) / h).clamp(0.0, self.cells as f64);
        match self.layout {
            Layout::Cells => {
                let c = (s.floor() as usize).min(self.cells - 1);
                values[c]
            }
            Layout::Nodes => {
                let c = (s.floor() as usize).min(self.cells - 1);
                let frac = s - c as f64;
                values[c] * (1.0 - frac) + values[c + 1] * frac
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layouts_have_expected_sizes() {
        let n = SpaceGrid::nodes(2.0, 8).unwrap();
        assert_eq!(n.len(), 9);
        assert_eq!(n.point(8), 2.0);
        let c = SpaceGrid::cell_centers(2.0, 8).unwrap();
        assert_eq!(c.len(), 8);
        assert!((c.point(0) - 0.125).abs() < 1e-15);
        assert!((c.weights().iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!((n.weights().iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn control_volumes_tile_the_domain() {
        for g in [
            SpaceGrid::nodes(1.0, 7).unwrap(),
            SpaceGrid::cell_centers(1.0, 7).unwrap(),
        ] {
            let total: f64 = (0..g.len())
                .map(|i| {
                    let (a, b) = g.control_volume(i);
                    b - a
                })
                .sum();
            assert!((total - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn interpolation_reproduces_linear_data_on_nodes() {
        let g = SpaceGrid::nodes(1.0, 4).unwrap();
        let v = g.sample(|x| 3.0 * x - 1.0);
        assert!((g.interpolate(&v, 0.3) - (-0.1)).abs() < 1e-14);
        assert!((g.interpolate(&v, 1.0) - 2.0).abs() < 1e-14);
    }
}
