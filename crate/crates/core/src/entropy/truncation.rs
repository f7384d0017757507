//! Smooth truncations `ξ*`, `ξ*_s`, the coordinate cutoffs `φ_l^E`, and regimes.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};

/// Reversed quintic smoothstep: `ϑ(r) = 1 − (6r⁵ − 15r⁴ + 10r³)` on `[0, 1]`,
/// `1` below and `0` above. Returns `[ϑ, ϑ', ϑ'']`.
pub fn theta(r: f64) -> [f64; 3] {
    if r <= 0.0 {
        [1.0, 0.0, 0.0]
    } else if r >= 1.0 {
        [0.0, 0.0, 0.0]
    } else {
        let r2 = r * r;
        [
            1.0 - r2 * r * (10.0 - 15.0 * r + 6.0 * r2),
            -30.0 * r2 * (1.0 - r) * (1.0 - r),
            -60.0 * r * (1.0 - r) * (1.0 - 2.0 * r),
        ]
    }
}

/// Parameters of the truncation and of the generalized distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationParams {
    /// Lower truncation scale `E ≥ 2`.
    pub e: f64,
    /// Exponent `N ≥ 2`; `ξ*` vanishes above `E^N`.
    pub n: f64,
    /// Positivity margin `ι ∈ (0, 1)`.
    pub iota: f64,
    /// Weight `α > 0` of the energy distance.
    pub alpha: f64,
}

impl TruncationParams {
    pub fn new(e: f64, n: f64, iota: f64, alpha: f64) -> Result<Self> {
        let p = TruncationParams { e, n, iota, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e >= 2.0 && self.e.is_finite()) {
            return Err(config("truncation.E", "must be at least 2"));
        }
        if !(self.n >= 2.0 && self.n.is_finite()) {
            return Err(config("truncation.N", "must be at least 2"));
        }
        if !(self.n * self.e.log10() <= 300.0) {
            return Err(config("truncation.N", "E^N exceeds 1e300"));
        }
        if !(self.iota > 0.0 && self.iota < 1.0) {
            return Err(config("truncation.iota", "must lie in (0, 1)"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(config("truncation.alpha", "must be positive"));
        }
        Ok(())
    }

    /// Upper scale `E^N`.
    pub fn upper(&self) -> f64 {
        self.e.powf(self.n)
    }
}

/// Value, gradient and Hessian of a scalar function of the state.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: DMatrix<f64>,
}

impl Jet {
    pub fn constant(dim: usize, value: f64) -> Self {
        Jet {
            value,
            gradient: vec![0.0; dim],
            hessian: DMatrix::zeros(dim, dim),
        }
    }
}

/// `ξ*(z) = ϑ((log|z|₁ − log E)/(log E^N − log E))` with its derivatives.
///
/// ```
/// use erds::entropy::{xi_star, TruncationParams};
/// let p = TruncationParams::new(2.0, 2.0, 0.1, 1.0).unwrap();
/// let mid = 2f64.powf(1.5);
/// assert!((xi_star(&[mid, 0.0], &p).value - 0.5).abs() < 1e-12);
/// ```
pub fn xi_star(z: &[f64], params: &TruncationParams) -> Jet {
    let d = z.len();
    let s: f64 = z.iter().map(|v| v.abs()).sum();
    let le = params.e.ln();
    let width = (params.n - 1.0) * le;
    if s <= params.e {
        return Jet::constant(d, 1.0);
    }
    let r = (s.ln() - le) / width;
    if r >= 1.0 {
        return Jet::constant(d, 0.0);
    }
    let [t0, t1, t2] = theta(r);
    let g = t1 / (width * s);
    let h = (t2 / width - t1) / (width * s * s);
    Jet {
        value: t0,
        gradient: vec![g; d],
        hessian: DMatrix::from_element(d, d, h),
    }
}

/// `ρ_s(c) = (Σ (c_i + δ)^s)^{1/s}` with `δ = 1` for `s < 2` and `δ = 0` for `s = 2`.
pub fn rho_s(c: &[f64], s: f64) -> f64 {
    let delta = if s == 2.0 { 0.0 } else { 1.0 };
    c.iter().map(|&x| (x + delta).powf(s)).sum::<f64>().powf(1.0 / s)
}

/// Superlinear truncation `ξ*_s(c) = ϑ((log ρ_s(c) − log E)/(log E^N − log E))`.
pub fn xi_star_s(c: &[f64], e: f64, n: f64, s: f64) -> Result<Jet> {
    if !(s > 1.0 && s <= 2.0) {
        return Err(domain("xi_star_s", format!("s = {s} outside (1, 2]")));
    }
    if !(e > 1.0 && n > 1.0) {
        return Err(domain("xi_star_s", "need E > 1 and N > 1"));
    }
    let d = c.len();
    let delta = if s == 2.0 { 0.0 } else { 1.0 };
    let big_s: f64 = c.iter().map(|&x| (x + delta).powf(s)).sum();
    let rho = big_s.powf(1.0 / s);
    let le = e.ln();
    let width = (n - 1.0) * le;
    if rho <= e {
        return Ok(Jet::constant(d, 1.0));
    }
    let r = (rho.ln() - le) / width;
    if r >= 1.0 {
        return Ok(Jet::constant(d, 0.0));
    }
    let [t0, t1, t2] = theta(r);
    // derivatives of log ρ_s
    let q: Vec<f64> = c.iter().map(|&x| (x + delta).powf(s - 1.0) / big_s).collect();
    let gradient: Vec<f64> = q.iter().map(|qi| t1 / width * qi).collect();
    let hessian = DMatrix::from_fn(d, d, |i, k| {
        let mut l2 = -s * q[i] * q[k];
        if i == k {
            l2 += (s - 1.0) * (c[i] + delta).powf(s - 2.0) / big_s;
        }
        t2 / (width * width) * q[i] * q[k] + t1 / width * l2
    });
    Ok(Jet {
        value: t0,
        gradient,
        hessian,
    })
}

/// Coordinate cutoff `φ_l^E(z) = E φ_l(z/E)` where `φ_l(z) = z_l χ(|z|₁)`,
/// `χ = 1` on `[0, 1]` and `χ = 0` on `[2, ∞)`. Its derivative has compact support
/// and it coincides with `z_l` on `{|z|₁ ≤ E}`.
pub fn coordinate_cutoff(z: &[f64], l: usize, e: f64) -> Jet {
    let d = z.len();
    let s: f64 = z.iter().map(|v| v.abs()).sum::<f64>() / e;
    let [c0, c1, c2] = theta(s - 1.0);
    let zl = z[l];
    let mut gradient = vec![zl * c1 / e; d];
    gradient[l] += c0;
    let hessian = DMatrix::from_fn(d, d, |i, j| {
        let mut v = zl * c2 / (e * e);
        if i == l {
            v += c1 / e;
        }
        if j == l {
            v += c1 / e;
        }
        v
    });
    Jet {
        value: zl * c0,
        gradient,
        hessian,
    }
}

/// Partition of state space used by the stability estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `|z|₁ ≤ E` and `min z ≥ ι`.
    APlus,
    /// `|z|₁ ≤ E` and `min z < ι`.
    AZero,
    /// `E < |z|₁ < E^N`.
    B,
    /// `|z|₁ ≥ E^N`.
    C,
}

impl Regime {
    pub const ALL: [Regime; 4] = [Regime::APlus, Regime::AZero, Regime::B, Regime::C];

    pub fn name(self) -> &'static str {
        match self {
            Regime::APlus => "A_plus",
            Regime::AZero => "A_zero",
            Regime::B => "B",
            Regime::C => "C",
        }
    }
}

/// Classifies `z` into `A_plus`, `A_zero`, `B` or `C`.
pub fn regime_classify(z: &[f64], params: &TruncationParams) -> Regime {
    let s: f64 = z.iter().map(|v| v.abs()).sum();
    if s <= params.e {
        let min = z.iter().copied().fold(f64::INFINITY, f64::min);
        if min >= params.iota {
            Regime::APlus
        } else {
            Regime::AZero
        }
    } else if s >= params.upper() {
        Regime::C
    } else {
        Regime::B
    }
}
