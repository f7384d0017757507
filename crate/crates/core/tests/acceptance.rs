//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints its PASS/FAIL line; exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use erds::diagnostics::{
    coercivity_check, conservation_defects, derivative_check, ed_residual, ene_residual, min_principle_check,
    renormalized_residual, sign_check, stability_density_check, tune_truncation, ReferenceBox, Renormalizer,
    StabilitySampling, TuneRequest, Tuned,
};
use erds::entropy::{Entropy, TruncationParams};
use erds::harness::{
    equilibrium_experiment, skt_suite, structure_identity_error, uniqueness_smoke, weak_strong_experiment,
    witness_identity_error, ExperimentConfig, SmoothPositive, SuiteConfig,
};
use erds::io::{parse_config, Model};
use erds::models::{EnergyMobility, ErdsSystem, MobilitySpec, ReactionSpec, SktParams};
use erds::solver::{simulate, Grid1D, TimeConfig, Trajectory};

fn report(id: u32, name: &str, pass: bool, detail: String, start: Instant) {
    println!(
        "criterion {id:2} {name}: {} ({detail}; {:.1}s)",
        if pass { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
}

fn default_system() -> ErdsSystem {
    match parse_config("{}").unwrap().model.build().unwrap() {
        Model::Erds(s) => s,
        Model::Skt(_) => unreachable!(),
    }
}

fn run(system: &ErdsSystem, initial: &SmoothPositive, cells: usize, time: &TimeConfig) -> Trajectory {
    let z0 = initial.build(Grid1D::unit(cells), 2).unwrap();
    simulate(system, &z0, time).unwrap()
}

fn default_initial() -> SmoothPositive {
    let mut init = SmoothPositive::default();
    init.fill_defaults(2);
    init
}

fn c01_structure_identities() -> bool {
    let start = Instant::now();
    let structure = structure_identity_error(&default_system(), 10_000, 1).unwrap();
    let witness = witness_identity_error();
    let pass = structure < 1e-10 && witness <= 1e-12;
    report(1, "structure identities", pass, format!("flux form {structure:.2e}, witness {witness:.2e}"), start);
    pass
}

fn c02_derivative_correctness() -> bool {
    let start = Instant::now();
    let sys = default_system();
    let e = derivative_check(&sys, 1_000, 2, 1e-3, 1e3);
    let worst = e.gradient.max(e.hessian).max(e.third);
    let pass = worst <= 1e-5;
    report(
        2,
        "derivative correctness",
        pass,
        format!("gradient {:.2e}, hessian {:.2e}, third {:.2e}", e.gradient, e.hessian, e.third),
        start,
    );
    pass
}

fn c03_sign_structure() -> bool {
    let start = Instant::now();
    let v = sign_check(&default_system(), 100_000, 3);
    let pass = v.total() == 0;
    report(3, "sign structure", pass, format!("{} violations in 1e5 samples", v.total()), start);
    pass
}

fn c04_conservation() -> bool {
    let start = Instant::now();
    let traj = run(&default_system(), &default_initial(), 64, &TimeConfig::fixed(1.0, 4e-5, 1000));
    let d = conservation_defects(&traj);
    let worst = d.masses.iter().copied().fold(d.energy, f64::max);
    let floors = traj.total_floors();
    let pass = worst <= 1e-11 && floors == 0;
    report(4, "conservation", pass, format!("max relative drift {worst:.2e}, floors {floors}"), start);
    pass
}

fn c05_entropy_dissipation() -> bool {
    let start = Instant::now();
    let sys = default_system();
    let init = default_initial();
    let residuals = |dt: f64| {
        let traj = run(&sys, &init, 64, &TimeConfig::fixed(1.0, dt, 1000));
        let last = traj.series.len() - 1;
        (ed_residual(&traj, 0, last).abs(), ene_residual(&traj, 0, last).abs())
    };
    let (ed1, ene1) = residuals(4e-5);
    let (ed2, ene2) = residuals(2e-5);
    let (r_ed, r_ene) = (ed1 / ed2, ene1 / ene2);
    let in_band = |r: f64| (1.7..=2.3).contains(&r);
    let pass = ed1 <= 1e-3 && ene1 <= 1e-3 && in_band(r_ed) && in_band(r_ene);
    report(
        5,
        "entropy dissipation",
        pass,
        format!("ed {ed1:.2e} (ratio {r_ed:.3}), ene {ene1:.2e} (ratio {r_ene:.3})"),
        start,
    );
    pass
}

fn c06_minimum_principle() -> bool {
    let start = Instant::now();
    let sys = default_system();
    let init = SmoothPositive {
        u_amp: 0.5,
        ..default_initial()
    };
    let traj = run(&sys, &init, 64, &TimeConfig::fixed(1.0, 4e-5, 1000));
    let defect = min_principle_check(&traj, &sys).unwrap();
    let pass = traj.series[0].min_u >= 0.5 - 1e-12 && defect <= 1e-10;
    report(6, "minimum principle", pass, format!("defect {defect:.2e}"), start);
    pass
}

const BOX: ReferenceBox = ReferenceBox { lo: 0.2, hi: 2.0 };

fn tuned_on_box(sys: &ErdsSystem) -> Tuned {
    tune_truncation(sys, BOX, TuneRequest::default(), 10_000, 7).unwrap()
}

fn c07_coercivity() -> bool {
    let start = Instant::now();
    let sys = default_system();
    let tuned = tuned_on_box(&sys);
    let params = TruncationParams { alpha: 1.0, ..tuned.params };
    let c = coercivity_check(&sys, BOX, &params, 10_000, 8);
    let pass = c.quadratic_min > 0.0 && c.growth_eps >= 1e-3;
    report(
        7,
        "coercivity",
        pass,
        format!("quadratic constant {:.3e}, growth epsilon {:.3e}", c.quadratic_min, c.growth_eps),
        start,
    );
    pass
}

fn c08_stability_density() -> bool {
    let start = Instant::now();
    let sys = default_system();
    let tuned = tuned_on_box(&sys);
    let sampling = StabilitySampling {
        samples: 100_000,
        seed: 9,
        ..StabilitySampling::default()
    };
    let stats = stability_density_check(&sys, &tuned.params, BOX, sampling);
    let pass = stats.unbounded() == 0 && stats.all_finite();
    report(8, "stability density", pass, format!("unbounded {}, per-regime constants finite {}", stats.unbounded(), stats.all_finite()), start);
    pass
}

fn c09_weak_strong_stability() -> bool {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::new(64, 0.5, 4e-5);
    cfg.time.snapshot_stride = 250;
    let out = weak_strong_experiment(&default_system(), &cfg).unwrap();
    let r = &out.report;
    for c in &r.checks {
        println!("  {} {} = {:.4e}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.value);
    }
    let pass = r.passed();
    let failed: Vec<&str> = r.failures().iter().map(|c| c.name.as_str()).collect();
    report(9, "weak-strong stability", pass, format!("failed checks {failed:?}"), start);
    pass
}

fn c10_uniqueness_smoke() -> bool {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::new(64, 0.5, 4e-5);
    cfg.time.snapshot_stride = 1000;
    let out = uniqueness_smoke(&default_system(), &cfg, 4).unwrap();
    let r = &out.report;
    let ratios: Vec<String> = r.checks.iter().map(|c| format!("{:.3}", c.value)).collect();
    let pass = r.passed() && !r.checks.is_empty();
    report(10, "uniqueness smoke", pass, format!("difference ratios {}", ratios.join(", ")), start);
    pass
}

fn single_species() -> ErdsSystem {
    let mut entropy = erds::entropy::EntropyModel::default();
    entropy.species.truncate(1);
    ErdsSystem::new(entropy, MobilitySpec::m0(1, EnergyMobility::Zero, 1.0), ReactionSpec::none()).unwrap()
}

fn c11_exponential_equilibration() -> bool {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::new(64, 5.0, 4e-5);
    cfg.time.snapshot_stride = 100;
    let out = equilibrium_experiment(&single_species(), &cfg).unwrap();
    let r = &out.report;
    for c in &r.checks {
        println!("  {} {} = {:.4e}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.value);
    }
    let pass = r.passed();
    report(11, "exponential equilibration", pass, format!("rate {:.3e}", r.scalars.get("decay_rate").copied().unwrap_or(f64::NAN)), start);
    pass
}

fn dense_run(sys: &ErdsSystem, cells: usize, t_end: f64) -> Trajectory {
    let dx = 1.0 / cells as f64;
    run(sys, &default_initial(), cells, &TimeConfig::fixed(t_end, 0.1 * dx * dx, 1))
}

fn c12_renormalized_residual() -> bool {
    let start = Instant::now();
    let sys = default_system();
    let psi = |_t: f64, x: f64| (2.0 * PI * x).cos();
    let traj = dense_run(&sys, 64, 0.05);
    let exact = (0..sys.dim())
        .map(|l| renormalized_residual(&traj, &Renormalizer::Cutoff { l, e: 100.0 }, psi, &sys).unwrap().abs())
        .fold(0.0, f64::max);
    let params = TruncationParams::new(2.0, 2.0, 0.5, 1.0).unwrap();
    let xi = Renormalizer::XiStar(params);
    let levels: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&j| renormalized_residual(&dense_run(&sys, j, 0.05), &xi, psi, &sys).unwrap().abs())
        .collect();
    let ratios = [levels[0] / levels[1], levels[1] / levels[2]];
    let pass = exact <= 1e-11 && ratios.iter().all(|r| *r >= 1.5);
    report(
        12,
        "renormalized residual",
        pass,
        format!(
            "cutoff {exact:.2e}, truncation residuals {:.3e} {:.3e} {:.3e}, ratios {:.3} {:.3}",
            levels[0], levels[1], levels[2], ratios[0], ratios[1]
        ),
        start,
    );
    pass
}

fn skt_params(s: f64) -> SktParams {
    SktParams {
        s,
        a: vec![vec![1.0, 1.0, 0.5], vec![1.0, 0.25, 1.0]],
        pi: vec![1.0, 2.0],
        detailed_balance: true,
    }
}

fn c13_skt() -> bool {
    let start = Instant::now();
    let mut cfg = SuiteConfig::default();
    cfg.initial = SmoothPositive { u_amp: 0.0, ..default_initial() };
    let mut all = true;
    let mut parts = Vec::new();
    for s in [1.0, 2.0] {
        let r = skt_suite(&skt_params(s), &cfg).unwrap();
        for c in &r.checks {
            println!("  s={s} {} {} = {:.4e}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.value);
        }
        all &= r.passed();
        parts.push(format!("s={s}: {}", if r.passed() { "all checks pass" } else { "failures" }));
    }
    report(13, "SKT", all, parts.join(", "), start);
    all
}

fn main() {
    let criteria: [fn() -> bool; 13] = [
        c01_structure_identities,
        c02_derivative_correctness,
        c03_sign_structure,
        c04_conservation,
        c05_entropy_dissipation,
        c06_minimum_principle,
        c07_coercivity,
        c08_stability_density,
        c09_weak_strong_stability,
        c10_uniqueness_smoke,
        c11_exponential_equilibration,
        c12_renormalized_residual,
        c13_skt,
    ];
    let mut failed = Vec::new();
    for (k, c) in criteria.iter().enumerate() {
        match std::panic::catch_unwind(c) {
            Ok(true) => {}
            Ok(false) => failed.push(k + 1),
            Err(_) => {
                println!("criterion {:2}: FAIL (panicked)", k + 1);
                failed.push(k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        println!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
