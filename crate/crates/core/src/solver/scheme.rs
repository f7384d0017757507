//! Two-point flux in entropy variables and one explicit Euler step.

use super::grid::StateField;
use crate::error::{Error, Result};
use crate::models::GradientSystem;

/// Copy of `z` with `u ≥ floor` and `c_i ≥ floor`, used wherever the entropy
/// variables are evaluated.
pub(crate) fn floored(z: &[f64], floor: f64) -> Vec<f64> {
    z.iter().map(|&v| v.max(floor)).collect()
}

/// Flux `F = 𝕄_f (Dh(z_R) − Dh(z_L))/dx` across the face between two cells.
///
/// States are floored at `1e-12` before the entropy variables are evaluated.
pub fn face_flux<S: GradientSystem + ?Sized>(zl: &[f64], zr: &[f64], dx: f64, system: &S) -> Vec<f64> {
    let zl = floored(zl, 1e-12);
    let zr = floored(zr, 1e-12);
    let gl = system.gradient_vec(&zl);
    let gr = system.gradient_vec(&zr);
    let m = system.face_mobility(&zl, &zr);
    let d: Vec<f64> = gr.iter().zip(&gl).map(|(a, b)| a - b).collect();
    (0..d.len())
        .map(|i| (0..d.len()).map(|l| m[(i, l)] * d[l]).sum::<f64>() / dx)
        .collect()
}

/// Result of one explicit step together with the per-step dissipation rates
/// evaluated at the old state.
#[derive(Clone, Debug)]
pub struct StepOutput {
    pub state: StateField,
    /// `Σ_faces ΔDh·𝕄_f ΔDh / dx`.
    pub dissipation: f64,
    /// `Σ_j Dh(z_j)·R(z_j) dx`.
    pub reaction_dissipation: f64,
    /// `Σ_faces Δu F_0`, the discrete `∫ a|∇u|² + m ∇D_0h·∇u`.
    pub energy_dissipation: f64,
    /// Number of values raised to the positivity floor.
    pub floors: u64,
}

/// `z_j ← z_j + dt/dx (F_{j+1/2} − F_{j−1/2}) + dt R(z_j)` with zero boundary flux,
/// followed by the floor `u ≥ floor`, `c_i ≥ 0`.
pub fn step<S: GradientSystem + ?Sized>(
    state: &StateField,
    dt: f64,
    system: &S,
    floor: f64,
) -> Result<StepOutput> {
    let d = state.dim;
    let cells = state.cells();
    let dx = state.grid.dx();
    let mut dh = vec![0.0; cells * d];
    let mut fl = Vec::with_capacity(cells);
    for j in 0..cells {
        let z = floored(state.cell(j), floor);
        system.gradient_raw(&z, &mut dh[j * d..(j + 1) * d]);
        fl.push(z);
    }
    let mut next = state.clone();
    let mut dissipation = 0.0;
    let mut energy_dissipation = 0.0;
    let mut diff = vec![0.0; d];
    let mut flux = vec![0.0; d];
    for j in 0..cells.saturating_sub(1) {
        let m = system.face_mobility(&fl[j], &fl[j + 1]);
        for l in 0..d {
            diff[l] = dh[(j + 1) * d + l] - dh[j * d + l];
        }
        for i in 0..d {
            flux[i] = (0..d).map(|l| m[(i, l)] * diff[l]).sum::<f64>() / dx;
        }
        dissipation += diff.iter().zip(&flux).map(|(a, b)| a * b).sum::<f64>();
        energy_dissipation += (state.cell(j + 1)[0] - state.cell(j)[0]) * flux[0];
        let r = dt / dx;
        for i in 0..d {
            next.values[j * d + i] += r * flux[i];
            next.values[(j + 1) * d + i] -= r * flux[i];
        }
    }
    let mut reaction_dissipation = 0.0;
    let mut rv = vec![0.0; d];
    for j in 0..cells {
        system.reaction_into(state.cell(j), &mut rv);
        reaction_dissipation += dh[j * d..(j + 1) * d].iter().zip(&rv).map(|(a, b)| a * b).sum::<f64>() * dx;
        for i in 0..d {
            next.values[j * d + i] += dt * rv[i];
        }
    }
    if !next.is_finite() {
        return Err(Error::Solver {
            t: f64::NAN,
            dt,
            reason: "non-finite update".into(),
        });
    }
    let mut floors = 0;
    for j in 0..cells {
        let z = next.cell_mut(j);
        if z[0] < floor {
            z[0] = floor;
            floors += 1;
        }
        for c in &mut z[1..] {
            if *c < 0.0 {
                *c = 0.0;
                floors += 1;
            }
        }
    }
    Ok(StepOutput {
        state: next,
        dissipation,
        reaction_dissipation,
        energy_dissipation,
        floors,
    })
}

/// Largest `‖𝕄(z_j) D²h(z_j)‖_∞` over the cells, an upper bound for the
/// spectral radius of the local diffusion matrices.
pub(crate) fn max_diffusion_norm<S: GradientSystem + ?Sized>(state: &StateField, system: &S, floor: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..state.cells() {
        let z = floored(state.cell(j), floor);
        let a = system.mobility(&z) * system.hessian_raw(&z);
        for i in 0..a.nrows() {
            let row: f64 = a.row(i).iter().map(|v| v.abs()).sum();
            worst = worst.max(row);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::EntropyModel;
    use crate::models::{ErdsSystem, MobilitySpec, ReactionSpec};
    use crate::solver::Grid1D;

    #[test]
    fn face_flux_examples() {
        let sys = ErdsSystem::witness(1);
        let f = face_flux(&[1.0, 1.0], &[1.0, 1.0], 0.1, &sys);
        assert!(f.iter().all(|&v| v == 0.0));
        let f = face_flux(&[1.0, 1.0], &[1.1, 1.0], 0.1, &sys);
        assert!((f[0] - 1.0).abs() < 0.05);
        let g = face_flux(&[1.1, 1.0], &[1.0, 1.0], 0.1, &sys);
        assert_eq!(f[0], -g[0]);
        assert_eq!(f[1], -g[1]);
    }

    #[test]
    fn constant_state_is_fixed() {
        let sys = ErdsSystem::new(EntropyModel::default(), MobilitySpec::default(), ReactionSpec::none()).unwrap();
        let s = StateField::constant(Grid1D::unit(16), &[1.2, 0.4, 0.9]);
        let out = step(&s, 1e-4, &sys, 1e-12).unwrap();
        assert!(out.state.l1_distance(&s) < 1e-15);
        assert_eq!(out.dissipation, 0.0);
    }

    #[test]
    fn single_cell_exchange_matches_scalar_euler() {
        let model = EntropyModel::default();
        let sys = ErdsSystem::new(model.clone(), MobilitySpec::default(), ReactionSpec::single(1, 2, 2.0)).unwrap();
        let mut s = StateField::constant(Grid1D::unit(1), &[0.9, 1.5, 0.2]);
        let (w1, w2) = (model.species[0].derivs(0.9)[0], model.species[1].derivs(0.9)[0]);
        let (mut c1, mut c2) = (1.5f64, 0.2f64);
        let dt = 1e-3;
        for _ in 0..200 {
            let r = 2.0 * (c2 / w2 - c1 / w1);
            c1 += dt * r;
            c2 -= dt * r;
            s = step(&s, dt, &sys, 1e-12).unwrap().state;
        }
        assert!((s.cell(0)[1] - c1).abs() < 1e-12 && (s.cell(0)[2] - c2).abs() < 1e-12);
        assert_eq!(s.cell(0)[0], 0.9);
    }
}
