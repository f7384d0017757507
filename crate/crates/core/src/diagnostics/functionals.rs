use crate::entropy::{dist_raw, rel_raw, TruncationParams};
use crate::error::{config, domain, Result};
use crate::models::GradientSystem;
use crate::solver::{StateField, Trajectory};

/// Midpoint-rule integrals of one state.
#[derive(Clone, Debug, PartialEq)]
pub struct Integrals {
    /// `H = ∫ h(z)`.
    pub h: f64,
    /// `E = ∫ u`.
    pub energy: f64,
    /// `∫ c_i`.
    pub masses: Vec<f64>,
    /// `G = ½ ∫ u²`.
    pub g: f64,
}

/// `H`, `E`, the masses and `G` of a state.
///
/// ```
/// use erds::diagnostics::integrals;
/// use erds::models::ErdsSystem;
/// use erds::solver::{Grid1D, StateField};
/// let s = StateField::constant(Grid1D::unit(10), &[1.0, 1.0]);
/// let i = integrals(&s, &ErdsSystem::witness(1)).unwrap();
/// assert!((i.h + 0.3465735903).abs() < 1e-9);
/// ```
pub fn integrals<S: GradientSystem + ?Sized>(state: &StateField, system: &S) -> Result<Integrals> {
    check_state("integrals", state, system)?;
    let dx = state.grid.dx();
    let mut out = Integrals {
        h: 0.0,
        energy: 0.0,
        masses: vec![0.0; state.dim - 1],
        g: 0.0,
    };
    for j in 0..state.cells() {
        let z = state.cell(j);
        out.h += system.density_raw(z) * dx;
        out.energy += z[0] * dx;
        out.g += 0.5 * z[0] * z[0] * dx;
        for (m, c) in out.masses.iter_mut().zip(&z[1..]) {
            *m += c * dx;
        }
    }
    Ok(out)
}

fn check_state<S: GradientSystem + ?Sized>(func: &'static str, state: &StateField, system: &S) -> Result<()> {
    if state.dim != system.dim() {
        return Err(domain(func, "state dimension does not match the model"));
    }
    for j in 0..state.cells() {
        system.check_point(func, state.cell(j), false)?;
    }
    Ok(())
}

fn series_pair(traj: &Trajectory, s: usize, t: usize) -> (&crate::solver::SeriesRow, &crate::solver::SeriesRow) {
    (&traj.series[s], &traj.series[t])
}

/// `H(t) − H(s) + ∫_s^t∫P − ∫_s^t∫R·Dh` between series rows `s ≤ t`.
///
/// The entropy inequality holds when the result is at most a tolerance.
pub fn ed_residual(traj: &Trajectory, s: usize, t: usize) -> f64 {
    let (a, b) = series_pair(traj, s, t);
    b.h - a.h + (b.cum_p - a.cum_p) - (b.cum_rdh - a.cum_rdh)
}

/// `G(t) − G(s) + ∫_s^t∫(a|∇u|² + m∇D_0h·∇u)` between series rows `s ≤ t`.
pub fn ene_residual(traj: &Trajectory, s: usize, t: usize) -> f64 {
    let (a, b) = series_pair(traj, s, t);
    b.g - a.g + (b.cum_ene - a.cum_ene)
}

fn check_reference<S: GradientSystem + ?Sized>(
    func: &'static str,
    state: &StateField,
    reference: &StateField,
    system: &S,
) -> Result<()> {
    if state.grid != reference.grid || state.dim != reference.dim {
        return Err(domain(func, "states live on different grids"));
    }
    check_state(func, state, system)?;
    for j in 0..reference.cells() {
        system.check_point(func, reference.cell(j), true)?;
    }
    Ok(())
}

/// `Dist_α(z, z̃) = ∫ dist_α(z, z̃)`.
///
/// Fails with a configuration error when `E < 2B`, `B` the largest reference value.
pub fn dist_alpha_total<S: GradientSystem + ?Sized>(
    state: &StateField,
    reference: &StateField,
    params: &TruncationParams,
    system: &S,
) -> Result<f64> {
    check_reference("dist_alpha_total", state, reference, system)?;
    let b = reference.values.iter().copied().fold(0.0, f64::max);
    if params.e < 2.0 * b {
        return Err(config(
            "truncation.E",
            format!("E = {} is below 2B = {} for this reference", params.e, 2.0 * b),
        ));
    }
    let dx = state.grid.dx();
    Ok((0..state.cells())
        .map(|j| dist_raw(state.cell(j), reference.cell(j), params, system) * dx)
        .sum())
}

/// Untruncated `H_rel(z, z̄) + α G_rel(u, ū)`.
pub fn classical_dist_total<S: GradientSystem + ?Sized>(
    state: &StateField,
    reference: &StateField,
    alpha: f64,
    system: &S,
) -> Result<f64> {
    check_reference("classical_dist_total", state, reference, system)?;
    let dx = state.grid.dx();
    Ok((0..state.cells())
        .map(|j| {
            let (z, zt) = (state.cell(j), reference.cell(j));
            let du = z[0] - zt[0];
            (rel_raw(z, zt, system) + 0.5 * alpha * du * du) * dx
        })
        .sum())
}

/// `max_t (min_j u_j(0) − min_j u_j(t))` from the series.
///
/// Refuses systems with a nonvanishing energy mobility `m`.
pub fn min_principle_check<S: GradientSystem + ?Sized>(traj: &Trajectory, system: &S) -> Result<f64> {
    if !system.energy_mobility_vanishes() {
        return Err(domain("min_principle_check", "requires m ≡ 0"));
    }
    let u0 = traj.series[0].min_u;
    Ok(traj.series.iter().map(|r| u0 - r.min_u).fold(f64::NEG_INFINITY, f64::max))
}

/// Largest relative drift of `∫u` and of each `∫c_i` over the run.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservationDefects {
    pub energy: f64,
    pub masses: Vec<f64>,
}

pub fn conservation_defects(traj: &Trajectory) -> ConservationDefects {
    let first = &traj.series[0];
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
    let mut out = ConservationDefects {
        energy: 0.0,
        masses: vec![0.0; first.masses.len()],
    };
    for row in &traj.series {
        out.energy = out.energy.max(rel(row.energy, first.energy));
        for (k, m) in out.masses.iter_mut().enumerate() {
            *m = m.max(rel(row.masses[k], first.masses[k]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ErdsSystem;
    use crate::entropy::Entropy;
    use crate::solver::{simulate, Grid1D, TimeConfig};

    #[test]
    fn constant_state_integrals() {
        let sys = ErdsSystem::witness(2);
        let s = StateField::constant(Grid1D::unit(7), &[1.5, 0.3, 2.0]);
        let i = integrals(&s, &sys).unwrap();
        assert!((i.energy - 1.5).abs() < 1e-15);
        assert!((i.masses[1] - 2.0).abs() < 1e-15);
        assert!((i.g - 1.125).abs() < 1e-15);
        assert!((i.h - sys.density_raw(&[1.5, 0.3, 2.0])).abs() < 1e-14);
    }

    #[test]
    fn single_cell_distance() {
        let sys = ErdsSystem::witness(1);
        let z = StateField::constant(Grid1D::unit(1), &[1.1, 1.0]);
        let zt = StateField::constant(Grid1D::unit(1), &[1.0, 1.0]);
        let p = TruncationParams::new(10.0, 2.0, 0.1, 1.0).unwrap();
        let d = dist_alpha_total(&z, &zt, &p, &sys).unwrap();
        assert!((d - 0.0102947).abs() < 1e-7);
        assert_eq!(dist_alpha_total(&zt, &zt, &p, &sys).unwrap(), 0.0);
        let small = TruncationParams::new(2.0, 2.0, 0.1, 1.0).unwrap();
        let big = StateField::constant(Grid1D::unit(1), &[1.5, 1.0]);
        assert!(dist_alpha_total(&z, &big, &small, &sys).is_err());
    }

    #[test]
    fn residuals_vanish_on_constant_runs() {
        let sys = ErdsSystem::witness(1);
        let s = StateField::constant(Grid1D::unit(8), &[1.0, 2.0]);
        let tr = simulate(&sys, &s, &TimeConfig::fixed(0.1, 1e-3, 10)).unwrap();
        let k = tr.steps();
        assert!(ed_residual(&tr, 0, k).abs() < 1e-12);
        assert!(ene_residual(&tr, 0, k).abs() < 1e-12);
        assert_eq!(ed_residual(&tr, 3, 3), 0.0);
        assert!(min_principle_check(&tr, &sys).unwrap() <= 0.0);
    }
}
