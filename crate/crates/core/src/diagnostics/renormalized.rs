use crate::entropy::{coordinate_cutoff, Jet, TruncationParams};
use crate::error::{domain, Result};
use crate::models::GradientSystem;
use crate::solver::face_flux;
use crate::solver::Trajectory;

/// Renormalizing function `ξ` with derivatives of compact support.
#[derive(Clone, Debug, PartialEq)]
pub enum Renormalizer {
    Constant(f64),
    /// The system's own truncation `ξ*`.
    XiStar(TruncationParams),
    /// `φ_l^E`, equal to `z_l` on `{|z|₁ ≤ E}`.
    Cutoff { l: usize, e: f64 },
}

impl Renormalizer {
    pub fn jet<S: GradientSystem + ?Sized>(&self, z: &[f64], system: &S) -> Jet {
        match self {
            Renormalizer::Constant(v) => Jet::constant(z.len(), *v),
            Renormalizer::XiStar(p) => system.truncation(z, p),
            Renormalizer::Cutoff { l, e } => coordinate_cutoff(z, *l, *e),
        }
    }
}

/// Absolute residual of the discrete renormalized formulation over a dense
/// trajectory:
///
/// `∫ξ(z)ψ|_0^T − Σ_k ∫ξ(z^{k+1})(ψ^{k+1} − ψ^k)` against
/// `Σ_k dt_k [−∫ D²ξ(z)(F, ∇z) ψ − ∫ Dξ(z)·F ∇ψ + ∫ Dξ(z)·R(z) ψ]`,
/// with `F` the solver's face fluxes, gradients as face differences and
/// face values of `z`, `ψ` as arithmetic means.
pub fn renormalized_residual<S, P>(traj: &Trajectory, xi: &Renormalizer, psi: P, system: &S) -> Result<f64>
where
    S: GradientSystem + ?Sized,
    P: Fn(f64, f64) -> f64,
{
    if !traj.is_dense() {
        return Err(domain("renormalized_residual", "trajectory must store every step (snapshot_stride = 1)"));
    }
    if let Renormalizer::Cutoff { l, e } = xi {
        if *l >= traj.dim || !(*e > 0.0) {
            return Err(domain("renormalized_residual", "cutoff index or scale out of range"));
        }
    }
    let grid = traj.grid;
    let cells = grid.cells;
    let dx = grid.dx();
    let d = traj.dim;
    let psi_at = |t: f64| -> Result<Vec<f64>> {
        let v: Vec<f64> = (0..cells).map(|j| psi(t, grid.x(j))).collect();
        if v.iter().any(|p| !p.is_finite()) {
            return Err(domain("renormalized_residual", format!("test function is not finite at t = {t}")));
        }
        Ok(v)
    };
    let xi_integral = |k: usize, weights: &[f64]| -> f64 {
        let s = &traj.states[k];
        (0..cells).map(|j| xi.jet(s.cell(j), system).value * weights[j] * dx).sum()
    };

    let steps = traj.steps();
    let mut psi_k = psi_at(traj.series[0].t)?;
    let mut lhs = -xi_integral(0, &psi_k);
    let mut rhs = 0.0;
    let mut r = vec![0.0; d];
    for k in 0..steps {
        let t_next = traj.series[k + 1].t;
        let dt = traj.series[k + 1].dt;
        let state = &traj.states[k];
        let mut step_sum = 0.0;
        for j in 0..cells.saturating_sub(1) {
            let (zl, zr) = (state.cell(j), state.cell(j + 1));
            let f = face_flux(zl, zr, dx, system);
            let zf: Vec<f64> = zl.iter().zip(zr).map(|(a, b)| 0.5 * (a + b)).collect();
            let grad: Vec<f64> = zl.iter().zip(zr).map(|(a, b)| (b - a) / dx).collect();
            let jet = xi.jet(&zf, system);
            let psi_f = 0.5 * (psi_k[j] + psi_k[j + 1]);
            let dpsi = (psi_k[j + 1] - psi_k[j]) / dx;
            let mut second = 0.0;
            let mut first = 0.0;
            for i in 0..d {
                first += jet.gradient[i] * f[i];
                for l in 0..d {
                    second += jet.hessian[(i, l)] * f[i] * grad[l];
                }
            }
            step_sum += (-second * psi_f - first * dpsi) * dx;
        }
        if system.has_reactions() {
            for j in 0..cells {
                let z = state.cell(j);
                system.reaction_into(z, &mut r);
                let jet = xi.jet(z, system);
                step_sum += jet.gradient.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() * psi_k[j] * dx;
            }
        }
        rhs += dt * step_sum;
        let psi_next = psi_at(t_next)?;
        let diff: Vec<f64> = psi_next.iter().zip(&psi_k).map(|(a, b)| a - b).collect();
        if diff.iter().any(|v| *v != 0.0) {
            lhs -= xi_integral(k + 1, &diff);
        }
        psi_k = psi_next;
    }
    lhs += xi_integral(steps, &psi_k);
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ErdsSystem;
    use crate::solver::{simulate, Grid1D, StateField, TimeConfig};
    use std::f64::consts::PI;

    fn run() -> (ErdsSystem, Trajectory) {
        let sys = ErdsSystem::witness(1);
        let s = StateField::from_fn(Grid1D::unit(16), 2, |x| {
            vec![1.0 + 0.2 * (2.0 * PI * x).cos(), 1.0 + 0.3 * (2.0 * PI * x).sin()]
        });
        let tr = simulate(&sys, &s, &TimeConfig::fixed(0.02, 2e-4, 1)).unwrap();
        (sys, tr)
    }

    #[test]
    fn constant_renormalizer_has_zero_residual() {
        let (sys, tr) = run();
        let r = renormalized_residual(&tr, &Renormalizer::Constant(2.0), |t, x| t + x, &sys).unwrap();
        assert!(r < 1e-14, "{r}");
    }

    #[test]
    fn cutoff_reduces_to_conservation() {
        let (sys, tr) = run();
        for l in 0..2 {
            let r = renormalized_residual(&tr, &Renormalizer::Cutoff { l, e: 100.0 }, |_, _| 1.0, &sys).unwrap();
            assert!(r <= 1e-12, "{r}");
        }
    }

    #[test]
    fn rejects_sparse_and_non_finite() {
        let (sys, tr) = run();
        assert!(renormalized_residual(&tr, &Renormalizer::Constant(1.0), |_, _| f64::NAN, &sys).is_err());
        let s = tr.initial().clone();
        let sparse = simulate(&sys, &s, &TimeConfig::fixed(0.02, 2e-4, 5)).unwrap();
        assert!(renormalized_residual(&sparse, &Renormalizer::Constant(1.0), |_, _| 1.0, &sys).is_err());
    }
}
