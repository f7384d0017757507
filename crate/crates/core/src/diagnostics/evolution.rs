use super::rho::rho_raw;
use crate::entropy::{dist_raw, TruncationParams};
use crate::error::{domain, Result};
use crate::models::GradientSystem;
use crate::solver::{StateField, Trajectory};

/// `∫ρ_α` on discrete fields: gradient terms at interior faces with face-difference
/// gradients and mean face states, reaction terms at cell centers.
pub fn rho_alpha_integral<S: GradientSystem + ?Sized>(
    state: &StateField,
    reference: &StateField,
    params: &TruncationParams,
    system: &S,
) -> f64 {
    let dx = state.grid.dx();
    let d = state.dim;
    let mut total = 0.0;
    for j in 0..state.cells().saturating_sub(1) {
        let (zl, zr) = (state.cell(j), state.cell(j + 1));
        let (tl, tr) = (reference.cell(j), reference.cell(j + 1));
        let zf: Vec<f64> = (0..d).map(|k| 0.5 * (zl[k] + zr[k])).collect();
        let tf: Vec<f64> = (0..d).map(|k| 0.5 * (tl[k] + tr[k])).collect();
        let gz: Vec<f64> = (0..d).map(|k| (zr[k] - zl[k]) / dx).collect();
        let gt: Vec<f64> = (0..d).map(|k| (tr[k] - tl[k]) / dx).collect();
        total += rho_raw(&zf, &tf, &gz, &gt, params, system, false).rho_alpha * dx;
    }
    if system.has_reactions() {
        let zero = vec![0.0; d];
        for j in 0..state.cells() {
            total += rho_raw(state.cell(j), reference.cell(j), &zero, &zero, params, system, true).rho_alpha * dx;
        }
    }
    total
}

/// `Dist_α(t)` and `∫₀^t∫ρ_α` (trapezoid rule over snapshots) for two runs sharing
/// their snapshot times.
#[derive(Clone, Debug, PartialEq)]
pub struct DistEvolution {
    pub times: Vec<f64>,
    pub dist: Vec<f64>,
    pub rho_integral: Vec<f64>,
}

impl DistEvolution {
    /// `max_t [Dist_α(t) − Dist_α(0) − ∫₀^t∫ρ_α]`.
    pub fn excess(&self) -> f64 {
        self.dist
            .iter()
            .zip(&self.rho_integral)
            .map(|(d, r)| d - self.dist[0] - r)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn dist_evolution<S: GradientSystem + ?Sized>(
    run: &Trajectory,
    reference: &Trajectory,
    params: &TruncationParams,
    system: &S,
) -> Result<DistEvolution> {
    if run.times.len() != reference.times.len()
        || run.times.iter().zip(&reference.times).any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + b.abs()))
    {
        return Err(domain("dist_evolution", "runs do not share snapshot times"));
    }
    let mut out = DistEvolution {
        times: run.times.clone(),
        dist: Vec::with_capacity(run.times.len()),
        rho_integral: Vec::with_capacity(run.times.len()),
    };
    let dx = run.grid.dx();
    let mut prev_rho = 0.0;
    let mut cum = 0.0;
    for k in 0..run.times.len() {
        let (z, zt) = (&run.states[k], &reference.states[k]);
        let dist: f64 = (0..z.cells()).map(|j| dist_raw(z.cell(j), zt.cell(j), params, system) * dx).sum();
        let rho = rho_alpha_integral(z, zt, params, system);
        if k > 0 {
            cum += 0.5 * (rho + prev_rho) * (run.times[k] - run.times[k - 1]);
        }
        prev_rho = rho;
        out.dist.push(dist);
        out.rho_integral.push(cum);
    }
    Ok(out)
}
