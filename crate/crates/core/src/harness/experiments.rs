use serde::{Deserialize, Serialize};

use super::initial::{Perturbation, SmoothPositive};
use crate::diagnostics::{
    anchored_envelope, classical_dist_total, conservation_defects, decay_fit, dist_alpha_total, dist_evolution, tune_truncation, Check,
    DiagnosticsReport, ReferenceBox, TuneRequest, Tuned,
};
use crate::entropy::Entropy;
use crate::error::{config, Result};
use crate::models::{ErdsSystem, GradientSystem, Variant};
use crate::solver::{simulate, Grid1D, StateField, TimeConfig, Trajectory};

/// Everything an experiment needs besides the model.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub grid: Grid1D,
    pub time: TimeConfig,
    pub initial: SmoothPositive,
    pub perturbation: Perturbation,
    pub truncation: TuneRequest,
    /// Sample count for the tuning schedule.
    pub samples: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    /// `J` cells on the unit interval, fixed `dt`, default data.
    pub fn new(cells: usize, t_end: f64, dt: f64) -> Self {
        ExperimentConfig {
            grid: Grid1D::unit(cells),
            time: TimeConfig::fixed(t_end, dt, 1),
            initial: SmoothPositive::default(),
            perturbation: Perturbation::default(),
            truncation: TuneRequest::default(),
            samples: 20_000,
            seed: 0,
        }
    }

    fn fixed_time(&self) -> TimeConfig {
        TimeConfig {
            adaptive: false,
            ..self.time.clone()
        }
    }
}

/// A report plus the run whose series goes to `series.csv`.
#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub report: DiagnosticsReport,
    pub trajectory: Trajectory,
}

/// Per-snapshot series of `Dist_α` for each amplitude.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistSeries {
    pub amplitude: f64,
    pub times: Vec<f64>,
    pub dist: Vec<f64>,
}

fn state_range(traj: &Trajectory) -> (f64, f64) {
    traj.states.iter().flat_map(|s| s.values.iter()).fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}

fn record_tuning(report: &mut DiagnosticsReport, t: &Tuned, bx: ReferenceBox) {
    report.parameter("E", t.params.e);
    report.parameter("N", t.params.n);
    report.parameter("iota", t.params.iota);
    report.parameter("alpha", t.params.alpha);
    report.parameter("B", t.b);
    report.parameter("reference_min", bx.lo);
    report.scalar("tuning_growth_eps", t.growth_eps);
    report.scalar("tuning_b_margin", t.b_margin);
    report.scalar("tuning_n_capped", if t.n_capped { 1.0 } else { 0.0 });
}

fn record_time(report: &mut DiagnosticsReport, cfg: &ExperimentConfig) {
    report.parameter("cells", cfg.grid.cells as f64);
    report.parameter("length", cfg.grid.length);
    report.parameter("T", cfg.time.t_end);
    report.parameter("dt0", cfg.time.dt0);
}

fn dist_series<S: GradientSystem + ?Sized>(
    run: &Trajectory,
    reference: &Trajectory,
    params: &crate::entropy::TruncationParams,
    system: &S,
) -> Result<Vec<f64>> {
    if run.states.len() != reference.states.len() {
        return Err(config("time", "perturbed and reference runs stored different snapshot counts"));
    }
    run.states
        .iter()
        .zip(&reference.states)
        .map(|(z, zt)| dist_alpha_total(z, zt, params, system))
        .collect()
}

fn attach_dist(traj: &mut Trajectory, dist: &[f64]) {
    for (k, &step) in traj.snapshot_steps.iter().enumerate() {
        traj.series[step].dist_alpha = Some(dist[k]);
    }
}

/// Runs the reference from smooth data and perturbed runs with amplitudes
/// `ε, ε/2, ε/4` and `0` at a shared fixed step, then compares them through
/// `Dist_α`.
///
/// Checks: zero perturbation, quadratic scaling of `Dist_α(0)`, a finite fitted
/// growth rate with small envelope violation, and ratio tracking at final time.
pub fn weak_strong_experiment<S: GradientSystem + ?Sized>(
    system: &S,
    cfg: &ExperimentConfig,
) -> Result<ExperimentOutput> {
    let n = system.dim() - 1;
    let time = cfg.fixed_time();
    let base = cfg.initial.build(cfg.grid, n)?;
    let reference = simulate(system, &base, &time)?;
    if reference.states.len() < 10 {
        return Err(config("time.snapshot_stride", "the growth fit needs at least 10 snapshots"));
    }
    let (lo, hi) = state_range(&reference);
    let bx = ReferenceBox { lo, hi };
    let tuned = tune_truncation(system, bx, cfg.truncation, cfg.samples, cfg.seed)?;
    let params = tuned.params;

    let mut report = DiagnosticsReport::new("stability");
    record_time(&mut report, cfg);
    record_tuning(&mut report, &tuned, bx);
    report.parameter("amplitude", cfg.perturbation.amplitude);

    let eps = cfg.perturbation.amplitude;
    let mut runs = Vec::new();
    let mut series = Vec::new();
    for amp in [eps, 0.5 * eps, 0.25 * eps] {
        let data = cfg.perturbation.with_amplitude(amp).apply(&base)?;
        let run = simulate(system, &data, &time)?;
        let dist = dist_series(&run, &reference, &params, system)?;
        series.push(DistSeries {
            amplitude: amp,
            times: run.times.clone(),
            dist,
        });
        runs.push(run);
    }
    let zero = simulate(system, &base, &time)?;
    let zero_max = dist_series(&zero, &reference, &params, system)?.into_iter().fold(0.0, f64::max);
    report.check(Check::at_most("zero_perturbation_dist", zero_max, 1e-12));

    let d0: Vec<f64> = series.iter().map(|s| s.dist[0]).collect();
    let dt: Vec<f64> = series.iter().map(|s| *s.dist.last().unwrap()).collect();
    for (k, s) in series.iter().enumerate() {
        report.scalar(format!("dist0_{k}"), d0[k]);
        report.scalar(format!("distT_{k}"), dt[k]);
        report.scalar(format!("dist_max_{k}"), s.dist.iter().copied().fold(0.0, f64::max));
    }
    report.check(Check::within("initial_scaling_half", d0[1] / d0[0], 0.2, 0.3));
    report.check(Check::within("initial_scaling_quarter", d0[2] / d0[1], 0.2, 0.3));

    let main = &series[0];
    let fit = decay_fit(&main.times, &main.dist)?;
    let growth = fit.slope;
    report.scalar("growth_rate", growth);
    report.scalar("fit_intercept", fit.intercept);
    report.scalar("fit_points", fit.points as f64);
    let env = anchored_envelope(&main.times, &main.dist)?;
    report.scalar("envelope_rate", env.rate);
    report.scalar("envelope_violation_anchored", env.max_violation);
    report.check(Check::at_most("growth_rate_abs", growth.abs(), f64::MAX));
    report.check(Check::at_most(
        "envelope_violation",
        fit.max_violation,
        0.05 * main.dist[0].ln().abs(),
    ));
    let tracking = (dt[1] / dt[0]) / (d0[1] / d0[0]);
    report.check(Check::within("final_ratio_tracking", tracking, 0.25, 4.0));

    // the evolution identity needs every step
    let dense = TimeConfig {
        snapshot_stride: 1,
        ..time.clone()
    };
    let ref_dense = simulate(system, &base, &dense)?;
    let run_dense = simulate(system, &cfg.perturbation.apply(&base)?, &dense)?;
    let evo = dist_evolution(&run_dense, &ref_dense, &params, system)?;
    report.check(Check::at_most("dist_evolution_excess", evo.excess(), 0.01 * evo.dist[0]));
    report.scalar("rho_integral_final", *evo.rho_integral.last().unwrap());

    let mut trajectory = runs.swap_remove(0);
    attach_dist(&mut trajectory, &main.dist);
    Ok(ExperimentOutput { report, trajectory })
}

/// Runs identical data at `dt₀/2^k`, `k = 0..levels`, and checks that successive
/// final-time `L¹` differences shrink by at least 1.8.
pub fn uniqueness_smoke<S: GradientSystem + ?Sized>(
    system: &S,
    cfg: &ExperimentConfig,
    levels: usize,
) -> Result<ExperimentOutput> {
    if levels < 3 {
        return Err(config("experiment.levels", "need at least 3 levels"));
    }
    let n = system.dim() - 1;
    let base = cfg.initial.build(cfg.grid, n)?;
    let mut report = DiagnosticsReport::new("uniqueness");
    record_time(&mut report, cfg);
    report.parameter("levels", levels as f64);
    let mut finals: Vec<StateField> = Vec::new();
    let mut last = None;
    for k in 0..levels {
        let dt = cfg.time.dt0 / 2f64.powi(k as i32);
        let stride = cfg.time.snapshot_stride.saturating_mul(1 << k);
        let time = TimeConfig {
            dt0: dt,
            snapshot_stride: stride,
            adaptive: false,
            ..cfg.time.clone()
        };
        let run = simulate(system, &base, &time)?;
        let capped = run.series.iter().skip(1).rev().skip(1).filter(|r| r.dt < dt * (1.0 - 1e-12)).count();
        report.tally("capped_steps", format!("level_{k}"), capped as u64);
        finals.push(run.last().clone());
        last = Some(run);
    }
    let diffs: Vec<f64> = finals.windows(2).map(|w| w[0].l1_distance(&w[1])).collect();
    for (k, d) in diffs.iter().enumerate() {
        report.scalar(format!("difference_{k}"), *d);
    }
    for k in 0..diffs.len() - 1 {
        let ratio = if diffs[k + 1] == 0.0 {
            f64::INFINITY
        } else {
            diffs[k] / diffs[k + 1]
        };
        report.check(Check::at_least(format!("difference_ratio_{k}"), ratio, 1.8));
    }
    Ok(ExperimentOutput {
        report,
        trajectory: last.expect("levels >= 3"),
    })
}

/// Relaxation of an M0 system without reactions towards the constant state of
/// the initial averages, measured by the untruncated distance.
pub fn equilibrium_experiment(system: &ErdsSystem, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    if system.has_reactions() {
        return Err(config("model.reactions", "the equilibrium experiment needs R = 0"));
    }
    if system.mobility.variant != Variant::M0 {
        return Err(config("model.mobility.variant", "the equilibrium experiment needs M0"));
    }
    let n = system.dim() - 1;
    let alpha = match cfg.truncation.alpha {
        Some(a) if a > 0.0 && a.is_finite() => a,
        Some(_) => return Err(config("truncation.alpha", "must be positive")),
        None if system.energy_mobility_vanishes() => 1.0,
        None => 0.5,
    };
    let base = cfg.initial.build(cfg.grid, n)?;
    let zbar = StateField::constant(cfg.grid, &base.means());
    let mut traj = simulate(system, &base, &cfg.time)?;

    let mut report = DiagnosticsReport::new("equilibrium");
    record_time(&mut report, cfg);
    report.parameter("alpha", alpha);
    for (k, m) in zbar.cell(0).iter().enumerate() {
        report.parameter(format!("zbar_{k}"), *m);
    }

    let defects = conservation_defects(&traj);
    report.check(Check::at_most("energy_conservation", defects.energy, 1e-12));
    let mass = defects.masses.iter().copied().fold(0.0, f64::max);
    report.check(Check::at_most("mass_conservation", mass, 1e-12));
    report.tally("solver", "floor_activations", traj.total_floors());

    let dist: Vec<f64> = traj
        .states
        .iter()
        .map(|s| classical_dist_total(s, &zbar, alpha, system))
        .collect::<Result<_>>()?;
    attach_dist(&mut traj, &dist);
    let rise = dist.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    report.scalar("dist0", dist[0]);
    report.scalar("distT", *dist.last().unwrap());
    report.check(Check::at_most("monotone_decay", rise.max(0.0), 1e-10));

    if dist[0] > 0.0 {
        // the fit stops where the distance reaches the rounding floor
        let floor = 1e-10 * dist[0];
        let keep = dist.iter().take_while(|&&d| d > floor).count();
        let fit = decay_fit(&traj.times[..keep], &dist[..keep])?;
        report.scalar("decay_rate", fit.rate);
        report.scalar("fit_max_violation", fit.max_violation);
        report.scalar("fit_points", fit.points as f64);
        report.check(Check::at_least("decay_rate_positive", fit.rate, f64::MIN_POSITIVE));
    } else {
        report.check(Check::at_most("constant_data_dist", dist.iter().copied().fold(0.0, f64::max), 0.0));
    }

    // ‖c_i − c̄_i‖²_{L¹} against the entropy part of the distance
    let dx = cfg.grid.dx();
    let mut ckp: f64 = 0.0;
    for s in &traj.states {
        let h = classical_dist_total(s, &zbar, 0.0, system)?;
        let l1: f64 = (1..=n)
            .map(|i| {
                let d: f64 = (0..s.cells()).map(|j| (s.cell(j)[i] - zbar.cell(j)[i]).abs()).sum::<f64>() * dx;
                d * d
            })
            .sum();
        if h > 1e-13 * dist[0].max(f64::MIN_POSITIVE) {
            ckp = ckp.max(l1 / h);
        }
    }
    report.scalar("ckp_constant", ckp);
    report.check(Check::at_most("ckp_constant_finite", ckp, f64::MAX));
    Ok(ExperimentOutput {
        report,
        trajectory: traj,
    })
}

/// A single run with conservation and dissipation diagnostics.
pub fn simulate_experiment<S: GradientSystem + ?Sized>(system: &S, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let n = system.dim() - 1;
    let base = cfg.initial.build(cfg.grid, n)?;
    let traj = simulate(system, &base, &cfg.time)?;
    let mut report = DiagnosticsReport::new("simulate");
    record_time(&mut report, cfg);
    let defects = conservation_defects(&traj);
    report.check(Check::at_most("energy_conservation", defects.energy, 1e-11));
    for (i, m) in defects.masses.iter().enumerate() {
        if !system.reaction_touches(i + 1) {
            report.check(Check::at_most(format!("mass_conservation_{}", i + 1), *m, 1e-11));
        }
    }
    let steps = traj.series.len() - 1;
    let ed = crate::diagnostics::ed_residual(&traj, 0, steps);
    let ene = crate::diagnostics::ene_residual(&traj, 0, steps);
    report.scalar("ed_residual", ed);
    report.scalar("ene_residual", ene);
    report.scalar("rejections", traj.rejections as f64);
    report.tally("solver", "floor_activations", traj.total_floors());
    report.tally("solver", "steps", steps as u64);
    if system.energy_mobility_vanishes() {
        let defect = crate::diagnostics::min_principle_check(&traj, system)?;
        report.check(Check::at_most("min_principle_defect", defect, 1e-10));
    }
    Ok(ExperimentOutput {
        report,
        trajectory: traj,
    })
}
