//! Cross-diffusion population systems with entropy `Σ π_i λ_s(c_i)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::entropy::{lambda_s_derivs, xi_star, xi_star_s, Entropy, Jet, Tensor3, TruncationParams};
use crate::error::{config, domain, Result};

/// Coefficients of `p_i(c) = a_{i0} + Σ_k a_{ik} c_k^s` and entropy weights `π_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SktParams {
    pub s: f64,
    /// `n` rows of `a_{i0}, a_{i1}, …, a_{in}`.
    pub a: Vec<Vec<f64>>,
    pub pi: Vec<f64>,
    /// Require `π_i a_{ij} = π_j a_{ji}`, `a_{i0} > 0`, `a_{ii} > 0`.
    #[serde(default)]
    pub detailed_balance: bool,
}

impl SktParams {
    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        let n = self.n();
        if !(self.s >= 1.0 && self.s <= 2.0) {
            return Err(config(format!("{prefix}.s"), "must lie in [1, 2]"));
        }
        if n == 0 {
            return Err(config(format!("{prefix}.a"), "at least one species is required"));
        }
        if self.pi.len() != n {
            return Err(config(format!("{prefix}.pi"), format!("need {n} weights")));
        }
        for (i, row) in self.a.iter().enumerate() {
            if row.len() != n + 1 {
                return Err(config(format!("{prefix}.a[{i}]"), format!("need {} entries", n + 1)));
            }
            for (k, &v) in row.iter().enumerate() {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(config(format!("{prefix}.a[{i}][{k}]"), "must be >= 0"));
                }
            }
            if !(self.pi[i] > 0.0 && self.pi[i].is_finite()) {
                return Err(config(format!("{prefix}.pi[{i}]"), "must be positive"));
            }
        }
        if self.detailed_balance {
            for i in 0..n {
                if !(self.a[i][0] > 0.0) || !(self.a[i][i + 1] > 0.0) {
                    return Err(config(format!("{prefix}.a[{i}]"), "detailed balance needs a_i0 > 0 and a_ii > 0"));
                }
                for j in 0..n {
                    let l = self.pi[i] * self.a[i][j + 1];
                    let r = self.pi[j] * self.a[j][i + 1];
                    if (l - r).abs() > 1e-12 * l.abs().max(r.abs()).max(1.0) {
                        return Err(config(
                            format!("{prefix}.a[{i}][{}]", j + 1),
                            "violates pi_i a_ij = pi_j a_ji",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn p(&self, c: &[f64]) -> Vec<f64> {
        self.a
            .iter()
            .map(|row| row[0] + row[1..].iter().zip(c).map(|(a, &ck)| a * ck.powf(self.s)).sum::<f64>())
            .collect()
    }
}

/// `A_{ij}(c) = δ_ij p_i(c) + c_i ∂p_i/∂c_j(c)`.
///
/// ```
/// use erds::models::{skt_diffusion_matrix, SktParams};
/// let p = SktParams { s: 1.0, a: vec![vec![2.0, 0.5]], pi: vec![1.0], detailed_balance: false };
/// let a = skt_diffusion_matrix(&[3.0], &p).unwrap();
/// assert!((a[(0, 0)] - (2.0 + 2.0 * 0.5 * 3.0)).abs() < 1e-14);
/// ```
pub fn skt_diffusion_matrix(c: &[f64], params: &SktParams) -> Result<DMatrix<f64>> {
    check(c, params)?;
    Ok(diffusion_raw(c, params))
}

fn check(c: &[f64], params: &SktParams) -> Result<()> {
    if !(params.s >= 1.0 && params.s <= 2.0) {
        return Err(domain("skt", format!("s = {} outside [1, 2]", params.s)));
    }
    if c.len() != params.n() || c.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
        return Err(domain("skt", "need n nonnegative concentrations"));
    }
    Ok(())
}

fn diffusion_raw(c: &[f64], params: &SktParams) -> DMatrix<f64> {
    let n = params.n();
    let s = params.s;
    let p = params.p(c);
    DMatrix::from_fn(n, n, |i, j| {
        let cross = c[i] * params.a[i][j + 1] * s * c[j].powf(s - 1.0);
        if i == j {
            p[i] + cross
        } else {
            cross
        }
    })
}

/// Mobility `𝕄 = A (D²h)⁻¹` for `h = Σ π_i λ_s(c_i)`.
pub fn skt_mobility(c: &[f64], params: &SktParams) -> Result<DMatrix<f64>> {
    check(c, params)?;
    Ok(mobility_raw(c, params))
}

pub(crate) fn mobility_raw(c: &[f64], params: &SktParams) -> DMatrix<f64> {
    let s = params.s;
    let mut m = diffusion_raw(c, params);
    // (D²h)⁻¹ is diagonal with entries c_j^{2−s}/(s π_j)
    for j in 0..params.n() {
        let inv = c[j].powf(2.0 - s) / (s * params.pi[j]);
        for i in 0..params.n() {
            m[(i, j)] *= inv;
        }
    }
    m
}

/// Entropy `Σ π_i λ_s(c_i)` on states `(u, c)` with a passive `u` slot.
#[derive(Clone, Debug, PartialEq)]
pub struct SktEntropy {
    pub s: f64,
    pub pi: Vec<f64>,
}

impl Entropy for SktEntropy {
    fn dim(&self) -> usize {
        self.pi.len() + 1
    }

    fn density_raw(&self, z: &[f64]) -> f64 {
        self.pi.iter().zip(&z[1..]).map(|(p, &c)| p * lambda_s_derivs(c, self.s)[0]).sum()
    }

    fn gradient_raw(&self, z: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
        for (i, (p, &c)) in self.pi.iter().zip(&z[1..]).enumerate() {
            out[i + 1] = p * lambda_s_derivs(c, self.s)[1];
        }
    }

    fn hessian_raw(&self, z: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (i, (p, &c)) in self.pi.iter().zip(&z[1..]).enumerate() {
            m[(i + 1, i + 1)] = p * lambda_s_derivs(c, self.s)[2];
        }
        m
    }

    fn third_raw(&self, z: &[f64]) -> Tensor3 {
        let mut t = Tensor3::zeros(self.dim());
        for (i, (p, &c)) in self.pi.iter().zip(&z[1..]).enumerate() {
            t.set_sym(i + 1, i + 1, i + 1, p * lambda_s_derivs(c, self.s)[3]);
        }
        t
    }

    fn truncation(&self, z: &[f64], params: &TruncationParams) -> Jet {
        let c = &z[1..];
        let inner = if self.s > 1.0 {
            xi_star_s(c, params.e, params.n, self.s).expect("s checked at construction")
        } else {
            xi_star(c, params)
        };
        let d = self.dim();
        let mut jet = Jet::constant(d, inner.value);
        for i in 0..c.len() {
            jet.gradient[i + 1] = inner.gradient[i];
            for k in 0..c.len() {
                jet.hessian[(i + 1, k + 1)] = inner.hessian[(i, k)];
            }
        }
        jet
    }
}
