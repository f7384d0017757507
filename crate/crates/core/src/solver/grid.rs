use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// Uniform cell-centred grid on `[0, L]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid1D {
    pub cells: usize,
    #[serde(default = "unit")]
    pub length: f64,
}

fn unit() -> f64 {
    1.0
}

impl Default for Grid1D {
    fn default() -> Self {
        Grid1D {
            cells: 64,
            length: 1.0,
        }
    }
}

impl Grid1D {
    pub fn new(cells: usize, length: f64) -> Result<Self> {
        let g = Grid1D { cells, length };
        if cells == 0 {
            return Err(config("grid.cells", "must be positive"));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(config("grid.length", "must be positive"));
        }
        Ok(g)
    }

    /// Unit interval with `cells` cells.
    pub fn unit(cells: usize) -> Self {
        Grid1D { cells, length: 1.0 }
    }

    pub fn dx(&self) -> f64 {
        self.length / self.cells as f64
    }

    /// Centre of cell `j`.
    pub fn x(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dx()
    }
}

/// Cell averages `z_j = (u_j, c_{1,j}, …, c_{n,j})`, stored row by row.
#[derive(Clone, Debug, PartialEq)]
pub struct StateField {
    pub grid: Grid1D,
    pub dim: usize,
    pub values: Vec<f64>,
}

impl StateField {
    /// Samples `f(x)` at cell centres.
    pub fn from_fn(grid: Grid1D, dim: usize, mut f: impl FnMut(f64) -> Vec<f64>) -> Self {
        let mut values = Vec::with_capacity(grid.cells * dim);
        for j in 0..grid.cells {
            let z = f(grid.x(j));
            assert_eq!(z.len(), dim, "state function returned the wrong number of components");
            values.extend_from_slice(&z);
        }
        StateField { grid, dim, values }
    }

    pub fn constant(grid: Grid1D, z: &[f64]) -> Self {
        StateField::from_fn(grid, z.len(), |_| z.to_vec())
    }

    pub fn cells(&self) -> usize {
        self.grid.cells
    }

    pub fn cell(&self, j: usize) -> &[f64] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    pub fn cell_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.values[j * self.dim..(j + 1) * self.dim]
    }

    /// Values of component `k` across the grid.
    pub fn component(&self, k: usize) -> Vec<f64> {
        (0..self.cells()).map(|j| self.cell(j)[k]).collect()
    }

    /// `Σ_j z_{k,j} dx`.
    pub fn integral(&self, k: usize) -> f64 {
        self.component(k).iter().sum::<f64>() * self.grid.dx()
    }

    /// Componentwise spatial means.
    pub fn means(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|k| self.component(k).iter().sum::<f64>() / self.cells() as f64)
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `Σ_j |z_j − y_j|₁ dx`.
    pub fn l1_distance(&self, other: &StateField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.grid.dx()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let g = Grid1D::unit(8);
        let s = StateField::from_fn(g, 2, |x| vec![x, 2.0 * x]);
        assert_eq!(s.cell(3), &[g.x(3), 2.0 * g.x(3)]);
        assert!((s.integral(0) - 0.5).abs() < 1e-15);
        assert!((g.dx() * g.cells as f64 - g.length).abs() < 1e-15);
        assert!(Grid1D::new(0, 1.0).is_err());
    }
}
