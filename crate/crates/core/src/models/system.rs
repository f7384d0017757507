use nalgebra::DMatrix;

use super::mobility::{mobility_raw, rank_one_plus_diag, MobilitySpec, Variant};
use super::reaction::{reaction_raw, ReactionSpec};
use super::skt::{mobility_raw as skt_mobility_raw, SktEntropy, SktParams};
use crate::entropy::{log_mean, Entropy, EntropyModel, Jet, Tensor3, TruncationParams};
use crate::error::{config, Result};

/// An entropy together with a mobility and reactions: everything the scheme and
/// the diagnostics need to evaluate `∂_t z = ∇·(𝕄∇Dh) + R`.
pub trait GradientSystem: Entropy {
    /// Pointwise mobility `𝕄(z)`.
    fn mobility(&self, z: &[f64]) -> DMatrix<f64>;

    /// Mobility used on the face between two cells. Reduces to `𝕄(z)` when both
    /// states coincide.
    fn face_mobility(&self, zl: &[f64], zr: &[f64]) -> DMatrix<f64>;

    /// Reaction vector `(0, R_1, …, R_n)`.
    fn reaction_into(&self, z: &[f64], out: &mut [f64]);

    /// Energy flux coefficients `(a(z), m(z))`.
    fn energy_coefficients(&self, z: &[f64]) -> (f64, f64);

    /// `true` when `m ≡ 0`.
    fn energy_mobility_vanishes(&self) -> bool;

    /// `true` when some reaction acts on species `i` (1-based).
    fn reaction_touches(&self, i: usize) -> bool;

    fn reaction_vec(&self, z: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.dim()];
        self.reaction_into(z, &mut r);
        r
    }

    fn has_reactions(&self) -> bool {
        (1..self.dim()).any(|i| self.reaction_touches(i))
    }
}

/// Energy-reaction-diffusion system of type M0 or M1.
#[derive(Clone, Debug, PartialEq)]
pub struct ErdsSystem {
    pub entropy: EntropyModel,
    pub mobility: MobilitySpec,
    pub reactions: ReactionSpec,
}

impl ErdsSystem {
    pub fn new(entropy: EntropyModel, mobility: MobilitySpec, reactions: ReactionSpec) -> Result<Self> {
        entropy.validate("model.entropy")?;
        if mobility.variant == Variant::Skt {
            return Err(config("model.mobility.variant", "use SktSystem for variant skt"));
        }
        let n = entropy.n();
        mobility.validate(n, "model.mobility")?;
        reactions.validate(n, "model.reactions")?;
        Ok(ErdsSystem {
            entropy,
            mobility,
            reactions,
        })
    }

    /// Witness model M0 with `σ̂ = log u`, `w_i = √(1+u)`, `m = 0`, `p = 1`.
    pub fn witness(n: usize) -> Self {
        ErdsSystem {
            entropy: EntropyModel::witness(n),
            mobility: MobilitySpec::m0(n, super::EnergyMobility::Zero, 1.0),
            reactions: ReactionSpec::none(),
        }
    }
}

impl Entropy for ErdsSystem {
    fn dim(&self) -> usize {
        self.entropy.dim()
    }
    fn density_raw(&self, z: &[f64]) -> f64 {
        self.entropy.density_raw(z)
    }
    fn gradient_raw(&self, z: &[f64], out: &mut [f64]) {
        self.entropy.gradient_raw(z, out)
    }
    fn hessian_raw(&self, z: &[f64]) -> DMatrix<f64> {
        self.entropy.hessian_raw(z)
    }
    fn third_raw(&self, z: &[f64]) -> Tensor3 {
        self.entropy.third_raw(z)
    }
}

impl GradientSystem for ErdsSystem {
    fn mobility(&self, z: &[f64]) -> DMatrix<f64> {
        mobility_raw(z, &self.mobility, &self.entropy)
    }

    /// Face mobility built from difference quotients and logarithmic means so that
    /// the energy row of `𝕄_f (Dh(z_R) − Dh(z_L))` equals `p (u_R − u_L) + m_f (D_0h(z_R) − D_0h(z_L))`
    /// exactly, and the species part `m_{i,f} Δlog c_i` equals `Δc_i` for M0.
    fn face_mobility(&self, zl: &[f64], zr: &[f64]) -> DMatrix<f64> {
        let model = &self.entropy;
        let spec = &self.mobility;
        let d = zl.len();
        let (ul, ur) = (zl[0], zr[0]);
        let um = 0.5 * (ul + ur);
        let du = ur - ul;
        let small = du.abs() <= 1e-6 * um;
        let mut gamma_f = if small {
            -model.sigma.derivs(um)[2]
        } else {
            -(model.sigma.derivs(ur)[1] - model.sigma.derivs(ul)[1]) / du
        };
        let mut mu = vec![1.0; d];
        let mut diag = vec![0.0; d];
        for (i, s) in model.species.iter().enumerate() {
            let (cl, cr) = (zl[i + 1], zr[i + 1]);
            let cbar = 0.5 * (cl + cr);
            let lam = log_mean(cl, cr);
            let ll = s.log_derivs(ul);
            let lr = s.log_derivs(ur);
            let lbar = 0.5 * (ll[1] + lr[1]);
            let (dq1, dq0) = if small {
                let lm = s.log_derivs(um);
                (lm[2], lm[1])
            } else {
                ((lr[1] - ll[1]) / du, (lr[0] - ll[0]) / du)
            };
            gamma_f -= cbar * dq1 + lbar * lam * dq0;
            mu[i + 1] = lbar * lam;
            diag[i + 1] = lam * (spec.kappa0[i] + spec.kappa1[i] * cbar);
        }
        if !(gamma_f > 0.0 && gamma_f.is_finite()) {
            let mid: Vec<f64> = zl.iter().zip(zr).map(|(a, b)| 0.5 * (a + b)).collect();
            gamma_f = model.gamma_raw(&mid);
        }
        diag[0] = spec.m_coeff.eval(gamma_f);
        rank_one_plus_diag(&diag, spec.pi1_scale / gamma_f, &mu)
    }

    fn reaction_into(&self, z: &[f64], out: &mut [f64]) {
        reaction_raw(z, &self.reactions, &self.entropy, out)
    }

    fn energy_coefficients(&self, z: &[f64]) -> (f64, f64) {
        let gamma = self.entropy.gamma_raw(z);
        (self.mobility.pi1_scale / gamma * gamma, self.mobility.m_coeff.eval(gamma))
    }

    fn energy_mobility_vanishes(&self) -> bool {
        self.mobility.m_coeff.is_zero()
    }

    fn reaction_touches(&self, i: usize) -> bool {
        self.reactions.touches(i)
    }
}

/// Cross-diffusion system with a passive, spatially constant `u` slot.
#[derive(Clone, Debug, PartialEq)]
pub struct SktSystem {
    pub params: SktParams,
    entropy: SktEntropy,
}

impl SktSystem {
    pub fn new(params: SktParams) -> Result<Self> {
        params.validate("model.mobility.skt")?;
        let entropy = SktEntropy {
            s: params.s,
            pi: params.pi.clone(),
        };
        Ok(SktSystem { params, entropy })
    }
}

impl Entropy for SktSystem {
    fn dim(&self) -> usize {
        self.entropy.dim()
    }
    fn density_raw(&self, z: &[f64]) -> f64 {
        self.entropy.density_raw(z)
    }
    fn gradient_raw(&self, z: &[f64], out: &mut [f64]) {
        self.entropy.gradient_raw(z, out)
    }
    fn hessian_raw(&self, z: &[f64]) -> DMatrix<f64> {
        self.entropy.hessian_raw(z)
    }
    fn third_raw(&self, z: &[f64]) -> Tensor3 {
        self.entropy.third_raw(z)
    }
    fn truncation(&self, z: &[f64], params: &TruncationParams) -> Jet {
        self.entropy.truncation(z, params)
    }
}

impl GradientSystem for SktSystem {
    fn mobility(&self, z: &[f64]) -> DMatrix<f64> {
        let d = z.len();
        let inner = skt_mobility_raw(&z[1..], &self.params);
        let mut m = DMatrix::zeros(d, d);
        m.view_mut((1, 1), (d - 1, d - 1)).copy_from(&inner);
        m
    }

    fn face_mobility(&self, zl: &[f64], zr: &[f64]) -> DMatrix<f64> {
        let mid: Vec<f64> = zl.iter().zip(zr).map(|(a, b)| 0.5 * (a + b)).collect();
        let m = self.mobility(&mid);
        // symmetrize: the detailed-balance mobility is symmetric up to rounding
        (&m + m.transpose()) * 0.5
    }

    fn reaction_into(&self, _z: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }

    fn energy_coefficients(&self, _z: &[f64]) -> (f64, f64) {
        (0.0, 0.0)
    }

    fn energy_mobility_vanishes(&self) -> bool {
        true
    }

    fn reaction_touches(&self, _i: usize) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::EnergyMobility;

    #[test]
    fn face_mobility_reduces_to_pointwise() {
        let sys = ErdsSystem::new(
            EntropyModel::default(),
            MobilitySpec::m0(2, EnergyMobility::Bounded { value: 0.5 }, 1.3),
            ReactionSpec::none(),
        )
        .unwrap();
        let z = [1.3, 0.7, 2.1];
        let diff = (sys.face_mobility(&z, &z) - sys.mobility(&z)).abs().max();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn face_energy_row_is_exact() {
        let sys = ErdsSystem::new(
            EntropyModel::default(),
            MobilitySpec::m0(2, EnergyMobility::Zero, 0.8),
            ReactionSpec::none(),
        )
        .unwrap();
        let zl = [1.0, 0.5, 2.0];
        let zr = [1.4, 0.9, 1.1];
        let m = sys.face_mobility(&zl, &zr);
        let d: Vec<f64> = sys
            .gradient_vec(&zr)
            .iter()
            .zip(sys.gradient_vec(&zl))
            .map(|(a, b)| a - b)
            .collect();
        let f0: f64 = (0..3).map(|l| m[(0, l)] * d[l]).sum();
        assert!((f0 - 0.8 * 0.4).abs() < 1e-14, "{f0}");
        let f1: f64 = (0..3).map(|l| m[(1, l)] * d[l]).sum();
        // species flux: Δc − Λ Δlog w + μ a Δu
        assert!(f1.is_finite());
    }
}
