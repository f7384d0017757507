use nalgebra::{DMatrix, DVector};

use crate::entropy::TruncationParams;
use crate::error::{domain, Result};
use crate::models::GradientSystem;

/// Pointwise evolution densities of `h*_rel` and `g_rel`, term by term.
#[derive(Clone, Debug, PartialEq)]
pub struct RhoDensities {
    /// The five terms of `ρ^(h)`: dissipation, the `ξ*` cross term, the
    /// reference cross term, the reference reaction term and the reaction difference.
    pub h_terms: [f64; 5],
    /// The four terms of `ρ^(en)`.
    pub en_terms: [f64; 4],
    pub rho_h: f64,
    pub rho_en: f64,
    pub rho_alpha: f64,
}

/// Evaluates `ρ^(h)`, `ρ^(en)` and `ρ_α = ρ^(h) + α ρ^(en)` at a point, given the
/// states and their spatial gradients.
///
/// ```
/// use erds::diagnostics::rho_densities;
/// use erds::entropy::TruncationParams;
/// use erds::models::ErdsSystem;
/// let sys = ErdsSystem::witness(1);
/// let p = TruncationParams::new(10.0, 2.0, 0.1, 1.0).unwrap();
/// let z = [1.0, 1.0];
/// let g = [0.3, -0.2];
/// let r = rho_densities(&z, &z, &g, &g, &p, &sys).unwrap();
/// assert!(r.rho_alpha.abs() < 1e-14);
/// ```
pub fn rho_densities<S: GradientSystem + ?Sized>(
    z: &[f64],
    zt: &[f64],
    grad_z: &[f64],
    grad_zt: &[f64],
    params: &TruncationParams,
    system: &S,
) -> Result<RhoDensities> {
    system.check_point("rho_densities", z, true)?;
    system.check_point("rho_densities", zt, true)?;
    let d = system.dim();
    if grad_z.len() != d || grad_zt.len() != d {
        return Err(domain("rho_densities", "gradient length does not match the state"));
    }
    if grad_z.iter().chain(grad_zt).any(|g| !g.is_finite()) {
        return Err(domain("rho_densities", "gradients must be finite"));
    }
    Ok(rho_raw(z, zt, grad_z, grad_zt, params, system, true))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(v)).as_slice().to_vec()
}

/// Unchecked evaluation; `reactions = false` drops the two reaction terms so that
/// gradient and reaction parts can be assembled at different locations.
pub(crate) fn rho_raw<S: GradientSystem + ?Sized>(
    z: &[f64],
    zt: &[f64],
    gz: &[f64],
    gzt: &[f64],
    params: &TruncationParams,
    system: &S,
    reactions: bool,
) -> RhoDensities {
    let d = z.len();
    let hz = system.hessian_raw(z);
    let hzt = system.hessian_raw(zt);
    let dh_zt = system.gradient_vec(zt);
    let xi = system.truncation(z, params);

    // ∇Dh(z), ∇Dh(z̃) and the fluxes 𝕄∇Dh
    let gdz = mat_vec(&hz, gz);
    let gdzt = mat_vec(&hzt, gzt);
    let flux_z = mat_vec(&system.mobility(z), &gdz);
    let flux_zt = mat_vec(&system.mobility(zt), &gdzt);

    let t1 = -dot(&gdz, &flux_z);

    // v_i = D_i(ξ z_j) D_jh(z̃), expanded by the chain rule
    let hxg = mat_vec(&xi.hessian, gz);
    let dxg = dot(&xi.gradient, gz);
    let z_dhzt = dot(z, &dh_zt);
    let gz_dhzt = dot(gz, &dh_zt);
    let z_gdzt = dot(z, &gdzt);
    let grad_v: Vec<f64> = (0..d)
        .map(|i| {
            hxg[i] * z_dhzt
                + xi.gradient[i] * gz_dhzt
                + dxg * dh_zt[i]
                + xi.gradient[i] * z_gdzt
                + xi.value * gdzt[i]
        })
        .collect();
    let t2 = dot(&grad_v, &flux_z);

    // y_i = D_ijh(z̃)(ξ z_j − z̃_j)
    let w: Vec<f64> = (0..d).map(|j| xi.value * z[j] - zt[j]).collect();
    let tc = system.third_raw(zt).contract(gzt);
    let dw: Vec<f64> = (0..d).map(|j| dxg * z[j] + xi.value * gz[j] - gzt[j]).collect();
    let tw = mat_vec(&tc, &w);
    let hdw = mat_vec(&hzt, &dw);
    let grad_y: Vec<f64> = (0..d).map(|i| tw[i] + hdw[i]).collect();
    let t3 = dot(&grad_y, &flux_zt);

    let (t4, t5) = if reactions && system.has_reactions() {
        let y = mat_vec(&hzt, &w);
        let r_zt = system.reaction_vec(zt);
        let r_z = system.reaction_vec(z);
        let dh_z = system.gradient_vec(z);
        let t5 = (0..d)
            .map(|i| (dh_z[i] - xi.gradient[i] * z_dhzt - xi.value * dh_zt[i]) * r_z[i])
            .sum::<f64>();
        (-dot(&y, &r_zt), t5)
    } else {
        (0.0, 0.0)
    };

    let (a, m) = system.energy_coefficients(z);
    let (at, mt) = system.energy_coefficients(zt);
    let du = gz[0] - gzt[0];
    let e1 = -a * du * du;
    let e2 = -(a - at) * du * gzt[0];
    let e3 = -m * du * (gdz[0] - gdzt[0]);
    let e4 = -(m - mt) * du * gdzt[0];

    let h_terms = [t1, t2, t3, t4, t5];
    let en_terms = [e1, e2, e3, e4];
    let rho_h: f64 = h_terms.iter().sum();
    let rho_en: f64 = en_terms.iter().sum();
    RhoDensities {
        h_terms,
        en_terms,
        rho_h,
        rho_en,
        rho_alpha: rho_h + params.alpha * rho_en,
    }
}

/// Dissipation `P(z) = ∇Dh(z)·𝕄(z)∇Dh(z)` for a given spatial gradient of `z`.
pub(crate) fn dissipation_raw<S: GradientSystem + ?Sized>(z: &[f64], gz: &[f64], system: &S) -> f64 {
    let gd = mat_vec(&system.hessian_raw(z), gz);
    dot(&gd, &mat_vec(&system.mobility(z), &gd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::EntropyModel;
    use crate::entropy::Entropy;
    use crate::models::{EnergyMobility, ErdsSystem, MobilitySpec, ReactionSpec};

    fn system() -> ErdsSystem {
        ErdsSystem::new(
            EntropyModel::default(),
            MobilitySpec::m0(2, EnergyMobility::Bounded { value: 0.5 }, 1.0),
            ReactionSpec::single(1, 2, 1.5),
        )
        .unwrap()
    }

    #[test]
    fn zero_gradients_without_reactions_vanish() {
        let sys = ErdsSystem::witness(2);
        let p = TruncationParams::new(10.0, 2.0, 0.1, 1.0).unwrap();
        let r = rho_densities(&[1.2, 0.5, 0.9], &[1.0, 0.7, 1.1], &[0.0; 3], &[0.0; 3], &p, &sys).unwrap();
        assert_eq!(r.rho_h, 0.0);
        assert_eq!(r.rho_en, 0.0);
    }

    #[test]
    fn equal_states_cancel() {
        let sys = system();
        let p = TruncationParams::new(10.0, 2.0, 0.1, 0.5).unwrap();
        let z = [1.3, 0.8, 0.6];
        let g = [0.4, -0.3, 0.7];
        let r = rho_densities(&z, &z, &g, &g, &p, &sys).unwrap();
        assert!(r.rho_alpha.abs() < 1e-13, "{r:?}");
    }

    /// In regime C the general evaluator must agree with the short formula
    /// `−P(z) − ∇(D²h(z̃)z̃)·𝕄(z̃)∇Dh(z̃)` when `R = 0`.
    #[test]
    fn regime_c_matches_short_formula() {
        let sys = ErdsSystem::new(
            EntropyModel::default(),
            MobilitySpec::m0(2, EnergyMobility::Constant { value: 0.3 }, 1.0),
            ReactionSpec::none(),
        )
        .unwrap();
        let p = TruncationParams::new(3.0, 2.0, 0.1, 1.0).unwrap();
        let z = [40.0, 30.0, 25.0];
        let zt = [1.1, 0.7, 1.4];
        let gz = [0.5, -1.2, 0.8];
        let gzt = [0.2, 0.3, -0.4];
        let r = rho_densities(&z, &zt, &gz, &gzt, &p, &sys).unwrap();

        // independent evaluation
        let hzt = sys.hessian_raw(&zt);
        let t = sys.third_raw(&zt);
        let d = 3;
        let mut grad_y = [0.0; 3];
        for i in 0..d {
            for j in 0..d {
                grad_y[i] += hzt[(i, j)] * gzt[j];
                for k in 0..d {
                    grad_y[i] += t.get(i, j, k) * gzt[k] * zt[j];
                }
            }
        }
        let gdzt: Vec<f64> = (0..d).map(|i| (0..d).map(|j| hzt[(i, j)] * gzt[j]).sum()).collect();
        let mzt = sys.mobility(&zt);
        let mut cross = 0.0;
        for i in 0..d {
            for l in 0..d {
                cross += grad_y[i] * mzt[(i, l)] * gdzt[l];
            }
        }
        let expected = -dissipation_raw(&z, &gz, &sys) - cross;
        assert!((r.rho_h - expected).abs() < 1e-10 * (1.0 + expected.abs()), "{} vs {expected}", r.rho_h);
    }

    #[test]
    fn reaction_terms_only_with_reactions() {
        let sys = system();
        let p = TruncationParams::new(10.0, 2.0, 0.1, 1.0).unwrap();
        let r = rho_raw(&[1.0, 2.0, 0.5], &[1.0, 1.0, 1.0], &[0.0; 3], &[0.0; 3], &p, &sys, true);
        assert!(r.h_terms[3] != 0.0 && r.h_terms[4] != 0.0);
        let r = rho_raw(&[1.0, 2.0, 0.5], &[1.0, 1.0, 1.0], &[0.0; 3], &[0.0; 3], &p, &sys, false);
        assert_eq!(r.rho_h, 0.0);
    }
}
