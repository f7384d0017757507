//! The entropy density `h(u, c) = −σ̂(u) + Σ_i [λ(c_i) − c_i log w_i(u)]`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::functions::lambda_raw;
use crate::error::{config, domain, Result};

/// Thermal part `σ̂` of the entropy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Thermal {
    /// `σ̂(u) = a log u`.
    Log { a: f64 },
    /// `σ̂(u) = a u^ν` with `0 < ν < 1`.
    Power { a: f64, nu: f64 },
}

impl Thermal {
    /// `[σ̂, σ̂', σ̂'', σ̂''']` at `u > 0`.
    pub fn derivs(&self, u: f64) -> [f64; 4] {
        match *self {
            Thermal::Log { a } => [a * u.ln(), a / u, -a / (u * u), 2.0 * a / (u * u * u)],
            Thermal::Power { a, nu } => {
                let p = u.powf(nu - 3.0);
                [
                    a * p * u * u * u,
                    a * nu * p * u * u,
                    a * nu * (nu - 1.0) * p * u,
                    a * nu * (nu - 1.0) * (nu - 2.0) * p,
                ]
            }
        }
    }
}

/// Shape of the equilibrium profile `w_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeciesForm {
    /// `w(u) = (b1 u + b0)^β`.
    PowerOfAffine,
    /// `w(u) = b1 u^β + b0`.
    AffineOfPower,
}

/// One species and its equilibrium profile `w_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Species {
    pub form: SpeciesForm,
    pub b0: f64,
    pub b1: f64,
    pub beta: f64,
}

impl Species {
    /// `[w, w', w'', w''']` at `u > 0`.
    pub fn derivs(&self, u: f64) -> [f64; 4] {
        let (b0, b1, beta) = (self.b0, self.b1, self.beta);
        match self.form {
            SpeciesForm::PowerOfAffine => {
                let y = b1 * u + b0;
                let p = y.powf(beta - 3.0);
                [
                    p * y * y * y,
                    beta * b1 * p * y * y,
                    beta * (beta - 1.0) * b1 * b1 * p * y,
                    beta * (beta - 1.0) * (beta - 2.0) * b1 * b1 * b1 * p,
                ]
            }
            SpeciesForm::AffineOfPower => {
                let p = u.powf(beta - 3.0);
                [
                    b1 * p * u * u * u + b0,
                    b1 * beta * p * u * u,
                    b1 * beta * (beta - 1.0) * p * u,
                    b1 * beta * (beta - 1.0) * (beta - 2.0) * p,
                ]
            }
        }
    }

    /// `[ℓ, ℓ', ℓ'', ℓ''']` for `ℓ = log w`.
    pub fn log_derivs(&self, u: f64) -> [f64; 4] {
        let [w, w1, w2, w3] = self.derivs(u);
        let q1 = w1 / w;
        let q2 = w2 / w;
        let q3 = w3 / w;
        [
            w.ln(),
            q1,
            q2 - q1 * q1,
            q3 - 3.0 * q2 * q1 + 2.0 * q1 * q1 * q1,
        ]
    }
}

/// Fully symmetric third-derivative tensor stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dim: usize) -> Self {
        Tensor3 {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.dim + j) * self.dim + k]
    }

    /// Writes `v` into every permutation of `(i, j, k)`.
    pub fn set_sym(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let d = self.dim;
        for (a, b, c) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
            self.data[(a * d + b) * d + c] = v;
        }
    }

    /// Contraction `Σ_k T_ijk v_k`.
    pub fn contract(&self, v: &[f64]) -> DMatrix<f64> {
        let d = self.dim;
        DMatrix::from_fn(d, d, |i, j| (0..d).map(|k| self.get(i, j, k) * v[k]).sum())
    }
}

/// Entropy density model: a thermal part and one profile per species.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyModel {
    pub sigma: Thermal,
    pub species: Vec<Species>,
}

impl Default for EntropyModel {
    fn default() -> Self {
        EntropyModel {
            sigma: Thermal::Log { a: 1.0 },
            species: vec![
                Species {
                    form: SpeciesForm::PowerOfAffine,
                    b0: 1.0,
                    b1: 1.0,
                    beta: 0.5,
                },
                Species {
                    form: SpeciesForm::AffineOfPower,
                    b0: 1.0,
                    b1: 0.5,
                    beta: 0.3,
                },
            ],
        }
    }
}

impl EntropyModel {
    /// The model `σ̂ = log u`, `w_i = (u + 1)^{1/2}` for `n` species.
    pub fn witness(n: usize) -> Self {
        EntropyModel {
            sigma: Thermal::Log { a: 1.0 },
            species: vec![
                Species {
                    form: SpeciesForm::PowerOfAffine,
                    b0: 1.0,
                    b1: 1.0,
                    beta: 0.5,
                };
                n
            ],
        }
    }

    pub fn n(&self) -> usize {
        self.species.len()
    }

    pub fn dim(&self) -> usize {
        self.species.len() + 1
    }

    /// Largest exponent `β = max β_i`.
    pub fn max_beta(&self) -> f64 {
        self.species.iter().map(|s| s.beta).fold(0.0, f64::max)
    }

    /// Checks the parameter constraints; `prefix` names the config section.
    pub fn validate(&self, prefix: &str) -> Result<()> {
        match self.sigma {
            Thermal::Log { a } => {
                if !(a > 0.0 && a.is_finite()) {
                    return Err(config(format!("{prefix}.sigma.a"), "must be positive"));
                }
            }
            Thermal::Power { a, nu } => {
                if !(a > 0.0 && a.is_finite()) {
                    return Err(config(format!("{prefix}.sigma.a"), "must be positive"));
                }
                if !(nu > 0.0 && nu < 1.0) {
                    return Err(config(format!("{prefix}.sigma.nu"), "must lie in (0, 1)"));
                }
            }
        }
        if self.species.is_empty() {
            return Err(config(format!("{prefix}.species"), "at least one species is required"));
        }
        for (i, s) in self.species.iter().enumerate() {
            if !(s.b0 > 0.0 && s.b0.is_finite()) {
                return Err(config(format!("{prefix}.species[{i}].b0"), "must be positive"));
            }
            if !(s.b1 >= 0.0 && s.b1.is_finite()) {
                return Err(config(format!("{prefix}.species[{i}].b1"), "must be nonnegative"));
            }
            if !(s.beta > 0.0 && s.beta < 1.0) {
                return Err(config(format!("{prefix}.species[{i}].beta"), "must lie in (0, 1)"));
            }
        }
        Ok(())
    }

    fn check_state(&self, func: &'static str, z: &[f64], strict_c: bool) -> Result<()> {
        if z.len() != self.dim() {
            return Err(domain(func, format!("state has {} components, expected {}", z.len(), self.dim())));
        }
        if !(z[0] > 0.0 && z[0].is_finite()) {
            return Err(domain(func, format!("u = {} is not positive", z[0])));
        }
        for (i, &c) in z[1..].iter().enumerate() {
            let ok = if strict_c { c > 0.0 } else { c >= 0.0 };
            if !ok || !c.is_finite() {
                return Err(domain(func, format!("c_{} = {c} out of range", i + 1)));
            }
        }
        Ok(())
    }

    /// `h(u, c)`; requires `u > 0`, `c_i ≥ 0`.
    pub fn entropy_density(&self, z: &[f64]) -> Result<f64> {
        self.check_state("entropy_density", z, false)?;
        Ok(self.density_raw(z))
    }

    pub(crate) fn density_raw(&self, z: &[f64]) -> f64 {
        let u = z[0];
        let mut h = -self.sigma.derivs(u)[0];
        for (s, &c) in self.species.iter().zip(&z[1..]) {
            let lw = s.log_derivs(u)[0];
            h += lambda_raw(c) - c * lw;
        }
        h
    }

    /// `Dh = (D_0h, D_1h, …)`; requires `c_i > 0`.
    pub fn entropy_gradient(&self, z: &[f64]) -> Result<DVector<f64>> {
        self.check_state("entropy_gradient", z, true)?;
        let mut g = vec![0.0; self.dim()];
        self.gradient_raw(z, &mut g);
        Ok(DVector::from_vec(g))
    }

    pub(crate) fn gradient_raw(&self, z: &[f64], out: &mut [f64]) {
        let u = z[0];
        let mut d0 = -self.sigma.derivs(u)[1];
        for (i, (s, &c)) in self.species.iter().zip(&z[1..]).enumerate() {
            let l = s.log_derivs(u);
            d0 -= c * l[1];
            out[i + 1] = c.ln() - l[0];
        }
        out[0] = d0;
    }

    /// `D²h`; requires `c_i > 0`.
    pub fn entropy_hessian(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        self.check_state("entropy_hessian", z, true)?;
        Ok(self.hessian_raw(z))
    }

    pub(crate) fn hessian_raw(&self, z: &[f64]) -> DMatrix<f64> {
        let u = z[0];
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        let mut d00 = -self.sigma.derivs(u)[2];
        for (i, (s, &c)) in self.species.iter().zip(&z[1..]).enumerate() {
            let l = s.log_derivs(u);
            d00 -= c * l[2];
            m[(0, i + 1)] = -l[1];
            m[(i + 1, 0)] = -l[1];
            m[(i + 1, i + 1)] = 1.0 / c;
        }
        m[(0, 0)] = d00;
        m
    }

    /// Third derivatives `D³h`; requires `c_i > 0`.
    pub fn entropy_third(&self, z: &[f64]) -> Result<Tensor3> {
        self.check_state("entropy_third", z, true)?;
        Ok(self.third_raw(z))
    }

    pub(crate) fn third_raw(&self, z: &[f64]) -> Tensor3 {
        let u = z[0];
        let mut t = Tensor3::zeros(self.dim());
        let mut d000 = -self.sigma.derivs(u)[3];
        for (i, (s, &c)) in self.species.iter().zip(&z[1..]).enumerate() {
            let l = s.log_derivs(u);
            d000 -= c * l[3];
            t.set_sym(0, 0, i + 1, -l[2]);
            t.set_sym(i + 1, i + 1, i + 1, -1.0 / (c * c));
        }
        t.set_sym(0, 0, 0, d000);
        t
    }

    /// `γ(u, c) = −σ̂''(u) − Σ_i c_i w_i''(u)/w_i(u)`.
    pub fn gamma_coeff(&self, z: &[f64]) -> Result<f64> {
        self.check_state("gamma_coeff", z, false)?;
        Ok(self.gamma_raw(z))
    }

    pub(crate) fn gamma_raw(&self, z: &[f64]) -> f64 {
        let u = z[0];
        let mut g = -self.sigma.derivs(u)[2];
        for (s, &c) in self.species.iter().zip(&z[1..]) {
            let w = s.derivs(u);
            g -= c * w[2] / w[0];
        }
        g
    }

    /// Constants `(ε_β, κ_β)` of the pointwise lower bound
    /// `h ≥ −σ̂(u) + ε_β Σ c_i log c_i − C u^{κ_β} − C`.
    pub fn lower_bound_exponents(&self) -> (f64, f64) {
        let beta = self.max_beta();
        let beta_star = 0.5 * (1.0 + beta);
        ((1.0 - beta_star) / 2.0, 0.5 * (1.0 + beta / beta_star))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_values() {
        let m = EntropyModel::witness(1);
        let h = m.entropy_density(&[1.0, 1.0]).unwrap();
        assert!((h + 0.3465735903).abs() < 1e-10);
        let w = 2f64.sqrt();
        let h = m.entropy_density(&[1.0, w]).unwrap();
        assert!((h - (1.0 - w)).abs() < 1e-12);
        let m2 = EntropyModel::witness(2);
        assert!((m2.entropy_density(&[1.0, 0.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
        assert!(m.entropy_density(&[0.0, 1.0]).is_err());
        assert!(m.entropy_density(&[1.0, -1.0]).is_err());
    }

    #[test]
    fn witness_derivatives() {
        let m = EntropyModel::witness(1);
        let g = m.entropy_gradient(&[1.0, 1.0]).unwrap();
        assert!((g[0] + 1.25).abs() < 1e-14);
        assert!((g[1] + 0.3465735903).abs() < 1e-10);
        let hs = m.entropy_hessian(&[1.0, 1.0]).unwrap();
        let expect = [[1.125, -0.25], [-0.25, 1.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((hs[(i, j)] - expect[i][j]).abs() < 1e-14);
            }
        }
        assert!((m.gamma_coeff(&[1.0, 1.0]).unwrap() - 1.0625).abs() < 1e-14);
        assert!((m.gamma_coeff(&[2.0, 0.0]).unwrap() - 0.25).abs() < 1e-15);
        assert!(m.entropy_gradient(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn equilibrium_profile_zeroes_species_gradient() {
        let m = EntropyModel::default();
        let u = 1.7;
        let z = [u, m.species[0].derivs(u)[0], m.species[1].derivs(u)[0]];
        let g = m.entropy_gradient(&z).unwrap();
        assert!(g[1].abs() < 1e-15 && g[2].abs() < 1e-15);
    }

    #[test]
    fn power_family_derivatives_are_consistent() {
        let m = EntropyModel {
            sigma: Thermal::Power { a: 2.0, nu: 0.4 },
            species: vec![Species {
                form: SpeciesForm::AffineOfPower,
                b0: 0.5,
                b1: 2.0,
                beta: 0.7,
            }],
        };
        for &u in &[0.01, 0.5, 3.0, 400.0] {
            let s = m.sigma.derivs(u);
            let w = m.species[0].derivs(u);
            let l = m.species[0].log_derivs(u);
            let h = 1e-6 * u;
            for k in 0..3 {
                let fs = (m.sigma.derivs(u + h)[k] - m.sigma.derivs(u - h)[k]) / (2.0 * h);
                let fw = (m.species[0].derivs(u + h)[k] - m.species[0].derivs(u - h)[k]) / (2.0 * h);
                let fl = (m.species[0].log_derivs(u + h)[k] - m.species[0].log_derivs(u - h)[k]) / (2.0 * h);
                assert!((fs - s[k + 1]).abs() <= 1e-6 * s[k + 1].abs());
                assert!((fw - w[k + 1]).abs() <= 1e-6 * w[k + 1].abs());
                assert!((fl - l[k + 1]).abs() <= 1e-6 * l[k + 1].abs());
            }
        }
    }

    #[test]
    fn validation_names_keys() {
        let mut m = EntropyModel::default();
        m.species[1].beta = 1.0;
        let e = m.validate("model.entropy").unwrap_err().to_string();
        assert!(e.contains("model.entropy.species[1].beta"), "{e}");
    }
}
