//! Entropy densities, Boltzmann functions, truncations and distance densities.

mod distance;
mod functions;
mod model;
mod truncation;

pub use distance::{adjusted_rel_entropy_density, dist_alpha_density, rel_entropy_density};
pub(crate) use distance::{dist_raw, rel_raw};
pub use functions::{boltzmann_lambda, lambda_s, rel_boltzmann_b};
pub(crate) use functions::{lambda_s_derivs, log_mean};
pub use model::{EntropyModel, Species, SpeciesForm, Tensor3, Thermal};
pub use truncation::{
    coordinate_cutoff, regime_classify, rho_s, theta, xi_star, xi_star_s, Jet, Regime,
    TruncationParams,
};

use nalgebra::DMatrix;

use crate::error::{domain, Result};

/// A convex entropy density on states `z = (u, c_1, …, c_n)` with the derivatives
/// needed by the distance functionals and evolution densities.
///
/// The `*_raw` methods skip argument checks and expect `u > 0`, `c_i > 0`
/// (the density alone also accepts `c_i = 0`).
pub trait Entropy: Sync {
    fn dim(&self) -> usize;
    fn density_raw(&self, z: &[f64]) -> f64;
    fn gradient_raw(&self, z: &[f64], out: &mut [f64]);
    fn hessian_raw(&self, z: &[f64]) -> DMatrix<f64>;
    fn third_raw(&self, z: &[f64]) -> Tensor3;

    /// Truncation `ξ*` adapted to this entropy's growth.
    fn truncation(&self, z: &[f64], params: &TruncationParams) -> Jet {
        xi_star(z, params)
    }

    fn gradient_vec(&self, z: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.gradient_raw(z, &mut g);
        g
    }

    /// Checks `u > 0` and `c_i ≥ 0` (or `> 0` when `strict`).
    fn check_point(&self, func: &'static str, z: &[f64], strict: bool) -> Result<()> {
        if z.len() != self.dim() {
            return Err(domain(func, format!("state has {} components, expected {}", z.len(), self.dim())));
        }
        if !(z[0] > 0.0 && z[0].is_finite()) {
            return Err(domain(func, format!("u = {} is not positive", z[0])));
        }
        for (i, &c) in z[1..].iter().enumerate() {
            let ok = if strict { c > 0.0 } else { c >= 0.0 };
            if !ok || !c.is_finite() {
                return Err(domain(func, format!("c_{} = {c} out of range", i + 1)));
            }
        }
        Ok(())
    }
}

impl Entropy for EntropyModel {
    fn dim(&self) -> usize {
        EntropyModel::dim(self)
    }
    fn density_raw(&self, z: &[f64]) -> f64 {
        EntropyModel::density_raw(self, z)
    }
    fn gradient_raw(&self, z: &[f64], out: &mut [f64]) {
        EntropyModel::gradient_raw(self, z, out)
    }
    fn hessian_raw(&self, z: &[f64]) -> DMatrix<f64> {
        EntropyModel::hessian_raw(self, z)
    }
    fn third_raw(&self, z: &[f64]) -> Tensor3 {
        EntropyModel::third_raw(self, z)
    }
}
