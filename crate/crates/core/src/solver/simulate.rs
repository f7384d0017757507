use serde::{Deserialize, Serialize};

use super::grid::{Grid1D, StateField};
use super::scheme::{floored, max_diffusion_norm, step};
use crate::error::{config, Error, Result};
use crate::models::GradientSystem;

/// Time-stepping controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    /// Final time.
    #[serde(rename = "T")]
    pub t_end: f64,
    pub dt0: f64,
    #[serde(default = "one_usize")]
    pub snapshot_stride: usize,
    /// Grow `dt` by 1.1 after 20 accepted steps.
    #[serde(default = "yes")]
    pub adaptive: bool,
    /// Upper bound for `dt` when growing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_max: Option<f64>,
    /// Safety factor of the explicit stability bound `dt ≤ cfl·dx²/‖A‖`.
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Positivity floor for `u` and for evaluating entropy variables.
    #[serde(default = "default_floor")]
    pub floor: f64,
}

fn one_usize() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn default_cfl() -> f64 {
    0.45
}
fn default_floor() -> f64 {
    1e-12
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            t_end: 0.5,
            dt0: 5e-5,
            snapshot_stride: 100,
            adaptive: true,
            dt_max: None,
            cfl: default_cfl(),
            floor: default_floor(),
        }
    }
}

impl TimeConfig {
    /// Fixed step `dt` up to `t_end`, snapshots every `stride` steps.
    pub fn fixed(t_end: f64, dt: f64, stride: usize) -> Self {
        TimeConfig {
            t_end,
            dt0: dt,
            snapshot_stride: stride,
            adaptive: false,
            ..TimeConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(config("time.T", "must be finite and >= 0"));
        }
        if !(self.dt0 > 0.0 && self.dt0.is_finite()) {
            return Err(config("time.dt0", "must be positive"));
        }
        if self.snapshot_stride == 0 {
            return Err(config("time.snapshot_stride", "must be positive"));
        }
        if let Some(m) = self.dt_max {
            if !(m > 0.0) {
                return Err(config("time.dt_max", "must be positive"));
            }
        }
        if !(self.cfl > 0.0 && self.cfl <= 0.5) {
            return Err(config("time.cfl", "must lie in (0, 0.5]"));
        }
        if !(self.floor > 0.0 && self.floor < 1e-3) {
            return Err(config("time.floor", "must lie in (0, 1e-3)"));
        }
        Ok(())
    }
}

/// Per-step scalars.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesRow {
    pub t: f64,
    pub dt: f64,
    /// `H = ∫ h(z)`.
    pub h: f64,
    /// `∫ u`.
    pub energy: f64,
    /// `∫ c_i`.
    pub masses: Vec<f64>,
    /// `½ ∫ u²`.
    pub g: f64,
    /// `∫₀^t ∫ P`.
    pub cum_p: f64,
    /// `∫₀^t ∫ R·Dh`.
    pub cum_rdh: f64,
    /// `∫₀^t ∫ (a|∇u|² + m∇D_0h·∇u)`.
    pub cum_ene: f64,
    pub min_u: f64,
    /// Cumulative floor activations.
    pub floors: u64,
    /// Distance to a reference, filled in by experiments.
    pub dist_alpha: Option<f64>,
}

/// Snapshots and per-step series of one run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: Grid1D,
    pub dim: usize,
    /// Snapshot times.
    pub times: Vec<f64>,
    pub states: Vec<StateField>,
    /// Index into `series` of each snapshot.
    pub snapshot_steps: Vec<usize>,
    pub series: Vec<SeriesRow>,
    /// Number of rejected steps.
    pub rejections: usize,
}

impl Trajectory {
    pub fn initial(&self) -> &StateField {
        &self.states[0]
    }

    pub fn last(&self) -> &StateField {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn steps(&self) -> usize {
        self.series.len() - 1
    }

    /// `true` when every step was stored.
    pub fn is_dense(&self) -> bool {
        self.states.len() == self.series.len()
    }

    pub fn total_floors(&self) -> u64 {
        self.series.last().map(|r| r.floors).unwrap_or(0)
    }
}

pub(crate) fn series_row<S: GradientSystem + ?Sized>(state: &StateField, system: &S, floor: f64) -> (SeriesRow, f64) {
    let dx = state.grid.dx();
    let d = state.dim;
    let mut h = 0.0;
    let mut abs_h = 0.0;
    let mut energy = 0.0;
    let mut g = 0.0;
    let mut masses = vec![0.0; d - 1];
    let mut min_u = f64::INFINITY;
    for j in 0..state.cells() {
        let z = state.cell(j);
        let mut zf = floored(z, floor);
        for (k, c) in z[1..].iter().enumerate() {
            zf[k + 1] = *c;
        }
        let hj = system.density_raw(&zf);
        h += hj;
        abs_h += hj.abs();
        energy += z[0];
        g += z[0] * z[0];
        for (m, c) in masses.iter_mut().zip(&z[1..]) {
            *m += c;
        }
        min_u = min_u.min(z[0]);
    }
    masses.iter_mut().for_each(|m| *m *= dx);
    (
        SeriesRow {
            t: 0.0,
            dt: 0.0,
            h: h * dx,
            energy: energy * dx,
            masses,
            g: 0.5 * g * dx,
            cum_p: 0.0,
            cum_rdh: 0.0,
            cum_ene: 0.0,
            min_u,
            floors: 0,
            dist_alpha: None,
        },
        abs_h * dx,
    )
}

/// Runs the explicit scheme from `initial` to `time.t_end`.
///
/// A step is retried with half the time step when the entropy grows beyond
/// rounding or a value turns non-finite (at most 40 times); with
/// `time.adaptive` the step grows by 1.1 after 20 accepted steps. The step is
/// never larger than `cfl·dx²/max‖𝕄D²h‖`.
pub fn simulate<S: GradientSystem + ?Sized>(system: &S, initial: &StateField, time: &TimeConfig) -> Result<Trajectory> {
    time.validate()?;
    if initial.dim != system.dim() {
        return Err(config("initial", "state dimension does not match the model"));
    }
    if !initial.is_finite() || (0..initial.cells()).any(|j| {
        let z = initial.cell(j);
        !(z[0] > 0.0) || z[1..].iter().any(|&c| c < 0.0)
    }) {
        return Err(config("initial", "initial data must be finite with u > 0 and c_i >= 0"));
    }
    let floor = time.floor;
    let dx = initial.grid.dx();
    let (row0, mut abs_h) = series_row(initial, system, floor);
    let mut traj = Trajectory {
        grid: initial.grid,
        dim: initial.dim,
        times: vec![0.0],
        states: vec![initial.clone()],
        snapshot_steps: vec![0],
        series: vec![row0],
        rejections: 0,
    };
    let mut state = initial.clone();
    let mut t = 0.0;
    let mut dt = time.dt0;
    let mut since_growth = 0usize;
    let mut steps = 0usize;
    let t_end = time.t_end;
    while t < t_end {
        let cap = time.cfl * dx * dx / max_diffusion_norm(&state, system, floor).max(f64::MIN_POSITIVE);
        let mut dt_try = dt.min(cap);
        let remaining = t_end - t;
        let mut last = false;
        if remaining <= dt_try * (1.0 + 1e-9) {
            dt_try = remaining;
            last = true;
        }
        let prev = traj.series.last().expect("series starts with the initial row").clone();
        let mut halvings = 0;
        let (out, row, new_abs_h) = loop {
            if dt_try < 1e-14 {
                return Err(Error::Solver {
                    t,
                    dt: dt_try,
                    reason: dump(&state),
                });
            }
            let attempt = step(&state, dt_try, system, floor);
            if let Ok(out) = attempt {
                let (row, ah) = series_row(&out.state, system, floor);
                let slack = 1e-12 * (1.0 + abs_h.max(ah));
                if row.h.is_finite() && row.h - prev.h <= slack {
                    break (out, row, ah);
                }
            }
            halvings += 1;
            traj.rejections += 1;
            if halvings > 40 {
                return Err(Error::Solver {
                    t,
                    dt: dt_try,
                    reason: format!("step rejected 40 times; {}", dump(&state)),
                });
            }
            dt_try *= 0.5;
            last = false;
        };
        abs_h = new_abs_h;
        t = if last { t_end } else { t + dt_try };
        steps += 1;
        let row = SeriesRow {
            t,
            dt: dt_try,
            cum_p: prev.cum_p + dt_try * out.dissipation,
            cum_rdh: prev.cum_rdh + dt_try * out.reaction_dissipation,
            cum_ene: prev.cum_ene + dt_try * out.energy_dissipation,
            floors: prev.floors + out.floors,
            ..row
        };
        traj.series.push(row);
        state = out.state;
        if halvings > 0 {
            dt = dt_try;
            since_growth = 0;
        } else {
            since_growth += 1;
            if time.adaptive && since_growth >= 20 {
                dt = (dt * 1.1).min(time.dt_max.unwrap_or(f64::INFINITY));
                since_growth = 0;
            }
        }
        if steps % time.snapshot_stride == 0 || t >= t_end {
            traj.times.push(t);
            traj.states.push(state.clone());
            traj.snapshot_steps.push(steps);
        }
    }
    Ok(traj)
}

fn dump(state: &StateField) -> String {
    let d = state.dim;
    let mut parts = Vec::new();
    for k in 0..d {
        let col = state.component(k);
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        parts.push(format!("z_{k} in [{lo:e}, {hi:e}]"));
    }
    parts.join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ErdsSystem;

    #[test]
    fn zero_horizon_keeps_initial_state() {
        let sys = ErdsSystem::witness(1);
        let s = StateField::constant(Grid1D::unit(8), &[1.0, 1.0]);
        let tr = simulate(&sys, &s, &TimeConfig::fixed(0.0, 1e-3, 1)).unwrap();
        assert_eq!(tr.states.len(), 1);
        assert_eq!(tr.series.len(), 1);
    }

    #[test]
    fn constant_data_is_stationary() {
        let sys = ErdsSystem::witness(2);
        let s = StateField::constant(Grid1D::unit(16), &[1.0, 0.5, 2.0]);
        let tr = simulate(&sys, &s, &TimeConfig { t_end: 1.0, dt0: 1e-3, ..TimeConfig::default() }).unwrap();
        assert!(tr.last().l1_distance(&s) < 1e-12);
        assert_eq!(tr.series.last().unwrap().t, 1.0);
    }

    #[test]
    fn rejects_bad_initial_data() {
        let sys = ErdsSystem::witness(1);
        let s = StateField::constant(Grid1D::unit(8), &[0.0, 1.0]);
        assert!(simulate(&sys, &s, &TimeConfig::fixed(0.1, 1e-3, 1)).is_err());
    }
}
