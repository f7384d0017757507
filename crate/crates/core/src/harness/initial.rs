use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::solver::{Grid1D, StateField};

/// `u = ū + A_u cos(2πx)`, `c_i = c̄_i + A_i cos(2π k_i x)`.
///
/// Empty per-species lists fall back to `c̄_i = 1`, `A_i = 0.3`, `k_i = i + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothPositive {
    #[serde(default = "one")]
    pub u_mean: f64,
    #[serde(default = "amp")]
    pub u_amp: f64,
    #[serde(default)]
    pub c_mean: Vec<f64>,
    #[serde(default)]
    pub c_amp: Vec<f64>,
    #[serde(default)]
    pub c_wave: Vec<f64>,
}

fn one() -> f64 {
    1.0
}
fn amp() -> f64 {
    0.3
}

impl Default for SmoothPositive {
    fn default() -> Self {
        SmoothPositive {
            u_mean: 1.0,
            u_amp: 0.3,
            c_mean: Vec::new(),
            c_amp: Vec::new(),
            c_wave: Vec::new(),
        }
    }
}

impl SmoothPositive {
    /// Spatially constant data `(u, c_1, …, c_n)`.
    pub fn constant(z: &[f64]) -> Self {
        SmoothPositive {
            u_mean: z[0],
            u_amp: 0.0,
            c_mean: z[1..].to_vec(),
            c_amp: vec![0.0; z.len() - 1],
            c_wave: Vec::new(),
        }
    }

    pub fn fill_defaults(&mut self, n: usize) {
        if self.c_mean.is_empty() {
            self.c_mean = vec![1.0; n];
        }
        if self.c_amp.is_empty() {
            self.c_amp = vec![0.3; n];
        }
        if self.c_wave.is_empty() {
            self.c_wave = (0..n).map(|i| (i + 2) as f64).collect();
        }
    }

    pub fn validate(&self, n: usize, prefix: &str) -> Result<()> {
        if !(self.u_mean - self.u_amp.abs() > 0.0) {
            return Err(config(format!("{prefix}.u_amp"), "u must stay positive: need u_mean > |u_amp|"));
        }
        for (key, v) in [("c_mean", &self.c_mean), ("c_amp", &self.c_amp), ("c_wave", &self.c_wave)] {
            if v.len() != n {
                return Err(config(format!("{prefix}.{key}"), format!("needs {n} entries")));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(config(format!("{prefix}.{key}"), "must be finite"));
            }
        }
        for i in 0..n {
            if !(self.c_mean[i] - self.c_amp[i].abs() > 0.0) {
                return Err(config(
                    format!("{prefix}.c_amp[{i}]"),
                    "concentrations must stay positive: need c_mean > |c_amp|",
                ));
            }
        }
        Ok(())
    }

    /// Cell-center samples on `grid`; `n` species.
    pub fn build(&self, grid: Grid1D, n: usize) -> Result<StateField> {
        let mut me = self.clone();
        me.fill_defaults(n);
        me.validate(n, "experiment.initial")?;
        let l = grid.length;
        Ok(StateField::from_fn(grid, n + 1, |x| {
            let mut z = vec![me.u_mean + me.u_amp * (2.0 * PI * x / l).cos()];
            for i in 0..n {
                z.push(me.c_mean[i] + me.c_amp[i] * (2.0 * PI * me.c_wave[i] * x / l).cos());
            }
            z
        }))
    }
}

/// Bump `ε sin²(π (j − j₀ + ½)/(j₁ − j₀ + 1))` added on cells `j₀..=j₁`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    #[serde(default = "eps")]
    pub amplitude: f64,
    /// First and last perturbed cell; default: the middle fifth of the grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<[usize; 2]>,
    /// Perturbed components (0 = u); default: all.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<usize>>,
}

fn eps() -> f64 {
    0.05
}

impl Default for Perturbation {
    fn default() -> Self {
        Perturbation {
            amplitude: 0.05,
            cells: None,
            components: None,
        }
    }
}

impl Perturbation {
    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Perturbation {
            amplitude,
            ..self.clone()
        }
    }

    fn range(&self, cells: usize) -> [usize; 2] {
        self.cells.unwrap_or([2 * cells / 5, (3 * cells / 5).max(1) - 1])
    }

    pub fn validate(&self, cells: usize, dim: usize, prefix: &str) -> Result<()> {
        if !self.amplitude.is_finite() {
            return Err(config(format!("{prefix}.amplitude"), "must be finite"));
        }
        let [a, b] = self.range(cells);
        if a > b || b >= cells {
            return Err(config(format!("{prefix}.cells"), format!("need j0 <= j1 < {cells}")));
        }
        if let Some(c) = &self.components {
            if c.iter().any(|&k| k >= dim) {
                return Err(config(format!("{prefix}.components"), format!("indices must be < {dim}")));
            }
        }
        Ok(())
    }

    /// Returns `base` plus the bump; fails if a value turns negative (or `u ≤ 0`).
    pub fn apply(&self, base: &StateField) -> Result<StateField> {
        let cells = base.cells();
        let d = base.dim;
        self.validate(cells, d, "experiment.perturbation")?;
        let [a, b] = self.range(cells);
        let width = (b - a + 1) as f64;
        let mut out = base.clone();
        let comps: Vec<usize> = self.components.clone().unwrap_or_else(|| (0..d).collect());
        for j in a..=b {
            let s = (PI * ((j - a) as f64 + 0.5) / width).sin();
            let bump = self.amplitude * s * s;
            let z = out.cell_mut(j);
            for &k in &comps {
                z[k] += bump;
            }
            if !(z[0] > 0.0) || z[1..].iter().any(|&c| c < 0.0) {
                return Err(config(
                    "experiment.perturbation.amplitude",
                    "perturbed data must keep u > 0 and c_i >= 0",
                ));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_data_bounds() {
        let s = SmoothPositive::default().build(Grid1D::unit(64), 2).unwrap();
        let u = s.component(0);
        assert!(u.iter().all(|&v| v > 0.69 && v < 1.31));
        assert!((s.integral(0) - 1.0).abs() < 1e-12);
        let bad = SmoothPositive {
            u_amp: 1.5,
            ..SmoothPositive::default()
        };
        assert!(bad.build(Grid1D::unit(8), 1).is_err());
    }

    #[test]
    fn bump_is_local() {
        let base = StateField::constant(Grid1D::unit(20), &[1.0, 1.0]);
        let p = Perturbation {
            amplitude: 0.1,
            cells: Some([5, 9]),
            components: Some(vec![1]),
        };
        let out = p.apply(&base).unwrap();
        assert_eq!(out.cell(4), base.cell(4));
        assert_eq!(out.cell(7)[0], 1.0);
        assert!((out.cell(7)[1] - 1.1).abs() < 1e-15);
        assert!(p.with_amplitude(-2.0).apply(&base).is_err());
    }
}
