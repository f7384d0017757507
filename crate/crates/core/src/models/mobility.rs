use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::skt::SktParams;
use crate::entropy::EntropyModel;
use crate::error::{config, domain, Result};

/// Mobility family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    M0,
    M1,
    Skt,
}

/// Coefficient `m(z)` of the energy mobility.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnergyMobility {
    Zero,
    /// `m(z) = m̄`.
    Constant { value: f64 },
    /// `m(z) = m̄ / (1 + γ(z))`.
    Bounded { value: f64 },
}

impl EnergyMobility {
    pub fn eval(&self, gamma: f64) -> f64 {
        match *self {
            EnergyMobility::Zero => 0.0,
            EnergyMobility::Constant { value } => value,
            EnergyMobility::Bounded { value } => value / (1.0 + gamma),
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            EnergyMobility::Zero => true,
            EnergyMobility::Constant { value } | EnergyMobility::Bounded { value } => value == 0.0,
        }
    }

    fn bound(&self) -> f64 {
        match *self {
            EnergyMobility::Zero => 0.0,
            EnergyMobility::Constant { value } | EnergyMobility::Bounded { value } => value,
        }
    }
}

/// Mobility matrix specification.
///
/// For `M0`/`M1` the mobility is `diag(m, m_1, …, m_n) + π₁ μ⊗μ` with
/// `μ = (1, c_1 w_1'/w_1, …)`, `m_i = c_i(κ_{0,i} + κ_{1,i} c_i)` and `π₁ = p/γ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobilitySpec {
    pub variant: Variant,
    #[serde(default = "default_m")]
    pub m_coeff: EnergyMobility,
    #[serde(default)]
    pub kappa0: Vec<f64>,
    #[serde(default)]
    pub kappa1: Vec<f64>,
    #[serde(default = "one")]
    pub pi1_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skt: Option<SktParams>,
}

fn default_m() -> EnergyMobility {
    EnergyMobility::Zero
}

fn one() -> f64 {
    1.0
}

impl Default for MobilitySpec {
    fn default() -> Self {
        MobilitySpec::m0(2, EnergyMobility::Zero, 1.0)
    }
}

impl MobilitySpec {
    /// Model M0 with `n` species.
    pub fn m0(n: usize, m_coeff: EnergyMobility, p: f64) -> Self {
        MobilitySpec {
            variant: Variant::M0,
            m_coeff,
            kappa0: vec![1.0; n],
            kappa1: vec![0.0; n],
            pi1_scale: p,
            skt: None,
        }
    }

    /// Fills empty `kappa0`/`kappa1` with the M0 values for `n` species.
    pub fn fill_defaults(&mut self, n: usize) {
        if self.kappa0.is_empty() {
            self.kappa0 = vec![1.0; n];
        }
        if self.kappa1.is_empty() {
            self.kappa1 = vec![0.0; n];
        }
    }

    /// Checks the constraints of the chosen family; `prefix` names the config section.
    pub fn validate(&self, n: usize, prefix: &str) -> Result<()> {
        if self.variant == Variant::Skt {
            let skt = self
                .skt
                .as_ref()
                .ok_or_else(|| config(format!("{prefix}.skt"), "required for variant skt"))?;
            return skt.validate(&format!("{prefix}.skt"));
        }
        if !(self.pi1_scale > 0.0 && self.pi1_scale.is_finite()) {
            return Err(config(format!("{prefix}.pi1_scale"), "must be positive"));
        }
        let mbar = self.m_coeff.bound();
        if !(0.0..=1.0).contains(&mbar) {
            return Err(config(format!("{prefix}.m_coeff.value"), "must lie in [0, 1]"));
        }
        if self.kappa0.len() != n || self.kappa1.len() != n {
            return Err(config(
                format!("{prefix}.kappa0"),
                format!("kappa0 and kappa1 need one entry per species ({n})"),
            ));
        }
        for i in 0..n {
            let (k0, k1) = (self.kappa0[i], self.kappa1[i]);
            if !(k0 >= 0.0 && k0.is_finite()) {
                return Err(config(
                    format!("{prefix}.kappa0[{i}]"),
                    "must be >= 0 (species mobility m_i = c_i(kappa0 + kappa1 c_i) needs nonnegative coefficients)",
                ));
            }
            if !(k1 >= 0.0 && k1.is_finite()) {
                return Err(config(
                    format!("{prefix}.kappa1[{i}]"),
                    "must be >= 0 (species mobility m_i = c_i(kappa0 + kappa1 c_i) needs nonnegative coefficients)",
                ));
            }
            match self.variant {
                Variant::M0 => {
                    if k0 != 1.0 || k1 != 0.0 {
                        return Err(config(format!("{prefix}.kappa0[{i}]"), "model m0 uses m_i = c_i (kappa0 = 1, kappa1 = 0)"));
                    }
                }
                Variant::M1 => {
                    if !((k0 == 1.0 && k1 == 0.0) || k1 == 1.0) {
                        return Err(config(
                            format!("{prefix}.kappa1[{i}]"),
                            "model m1 needs (kappa0, kappa1) = (1, 0) or kappa1 = 1",
                        ));
                    }
                }
                Variant::Skt => unreachable!(),
            }
        }
        if self.variant == Variant::M1 && !self.m_coeff.is_zero() {
            return Err(config(format!("{prefix}.m_coeff"), "model m1 requires m = 0"));
        }
        Ok(())
    }
}

fn check(func: &'static str, z: &[f64], n: usize, strict: bool) -> Result<()> {
    if z.len() != n + 1 {
        return Err(domain(func, format!("state has {} components, expected {}", z.len(), n + 1)));
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

fn require_rank_one(func: &'static str, spec: &MobilitySpec) -> Result<()> {
    if spec.variant == Variant::Skt {
        return Err(domain(func, "variant skt has no rank-one mobility; use skt_mobility"));
    }
    Ok(())
}

/// `𝕄(z) = diag(m, m_1, …, m_n) + π₁ μ⊗μ`.
///
/// ```
/// use erds::entropy::EntropyModel;
/// use erds::models::{mobility_matrix, EnergyMobility, MobilitySpec};
/// let m = mobility_matrix(&[1.0, 1.0], &MobilitySpec::m0(1, EnergyMobility::Zero, 1.0),
///                         &EntropyModel::witness(1)).unwrap();
/// assert!((m[(0, 1)] - 0.25 / 1.0625).abs() < 1e-15);
/// ```
pub fn mobility_matrix(z: &[f64], spec: &MobilitySpec, model: &EntropyModel) -> Result<DMatrix<f64>> {
    require_rank_one("mobility_matrix", spec)?;
    check("mobility_matrix", z, model.n(), false)?;
    Ok(mobility_raw(z, spec, model))
}

pub(crate) fn mobility_raw(z: &[f64], spec: &MobilitySpec, model: &EntropyModel) -> DMatrix<f64> {
    let d = z.len();
    let u = z[0];
    let gamma = model.gamma_raw(z);
    let pi1 = spec.pi1_scale / gamma;
    let mut mu = vec![1.0; d];
    let mut diag = vec![spec.m_coeff.eval(gamma); d];
    for (i, s) in model.species.iter().enumerate() {
        let c = z[i + 1];
        mu[i + 1] = c * s.log_derivs(u)[1];
        diag[i + 1] = c * (spec.kappa0[i] + spec.kappa1[i] * c);
    }
    rank_one_plus_diag(&diag, pi1, &mu)
}

pub(crate) fn rank_one_plus_diag(diag: &[f64], pi1: f64, mu: &[f64]) -> DMatrix<f64> {
    let d = diag.len();
    DMatrix::from_fn(d, d, |i, j| {
        let v = pi1 * mu[i] * mu[j];
        if i == j {
            v + diag[i]
        } else {
            v
        }
    })
}

/// Energy mobility coefficients `(a, m)` with `a = π₁γ = p`.
pub fn energy_coefficients(z: &[f64], spec: &MobilitySpec, model: &EntropyModel) -> Result<(f64, f64)> {
    require_rank_one("energy_coefficients", spec)?;
    check("energy_coefficients", z, model.n(), false)?;
    let gamma = model.gamma_raw(z);
    Ok((spec.pi1_scale / gamma * gamma, spec.m_coeff.eval(gamma)))
}

/// `A(z) = 𝕄(z) D²h(z)`.
pub fn diffusion_matrix(z: &[f64], spec: &MobilitySpec, model: &EntropyModel) -> Result<DMatrix<f64>> {
    require_rank_one("diffusion_matrix", spec)?;
    check("diffusion_matrix", z, model.n(), true)?;
    Ok(mobility_raw(z, spec, model) * model.hessian_raw(z))
}

/// Flux written out componentwise:
/// `a∇u + m∇D_0h` for the energy and `m_i∇D_ih + a c_i (w_i'/w_i)∇u` for species.
pub fn explicit_flux_m0(
    z: &[f64],
    grad_z: &[f64],
    spec: &MobilitySpec,
    model: &EntropyModel,
) -> Result<DVector<f64>> {
    require_rank_one("explicit_flux_m0", spec)?;
    check("explicit_flux_m0", z, model.n(), true)?;
    if grad_z.len() != z.len() {
        return Err(domain("explicit_flux_m0", "gradient length mismatch"));
    }
    let u = z[0];
    let du = grad_z[0];
    let gamma = model.gamma_raw(z);
    let a = spec.pi1_scale / gamma * gamma;
    let m = spec.m_coeff.eval(gamma);
    let sig = model.sigma.derivs(u);
    // ∇D_0h = D_00h ∇u + Σ D_0ih ∇c_i
    let mut grad_d0 = -sig[2] * du;
    let mut out = DVector::zeros(z.len());
    for (i, s) in model.species.iter().enumerate() {
        let c = z[i + 1];
        let dc = grad_z[i + 1];
        let l = s.log_derivs(u);
        grad_d0 += -c * l[2] * du - l[1] * dc;
        let grad_di = dc / c - l[1] * du;
        let mi = c * (spec.kappa0[i] + spec.kappa1[i] * c);
        out[i + 1] = mi * grad_di + a * c * l[1] * du;
    }
    out[0] = a * du + m * grad_d0;
    Ok(out)
}

/// `P = ∇Dh·𝕄∇Dh` with `∇Dh = D²h ∇z`.
pub fn dissipation_density(
    z: &[f64],
    grad_z: &[f64],
    spec: &MobilitySpec,
    model: &EntropyModel,
) -> Result<f64> {
    require_rank_one("dissipation_density", spec)?;
    check("dissipation_density", z, model.n(), true)?;
    let w = model.hessian_raw(z) * DVector::from_row_slice(grad_z);
    Ok(w.dot(&(mobility_raw(z, spec, model) * &w)))
}
