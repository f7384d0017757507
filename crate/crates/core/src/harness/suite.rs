use nalgebra::DVector;

use super::initial::SmoothPositive;
use crate::diagnostics::{
    box_point, coercivity_check, derivative_check, dissipation_raw, gradient_sample, log_uniform, nondegeneracy_min,
    par_samples, sign_check, simplex_point, stability_density_check, tune_truncation, Check, DiagnosticsReport,
    ReferenceBox, StabilitySampling, TuneRequest,
};
use crate::entropy::{rho_s, xi_star, Entropy, TruncationParams};
use crate::error::Result;
use crate::models::{explicit_flux_m0, ErdsSystem, GradientSystem, SktParams, SktSystem, Variant};
use crate::solver::{simulate, Grid1D, TimeConfig};

/// Sample counts and boxes for the property suites.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Samples for sign structure, stability and flux bounds.
    pub samples: usize,
    pub structure_samples: usize,
    pub derivative_samples: usize,
    pub coercivity_samples: usize,
    pub reference_box: ReferenceBox,
    pub truncation: TuneRequest,
    /// Grid and time for the SKT entropy run.
    pub grid: Grid1D,
    pub time: TimeConfig,
    pub initial: SmoothPositive,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            samples: 100_000,
            structure_samples: 10_000,
            derivative_samples: 1_000,
            coercivity_samples: 10_000,
            reference_box: ReferenceBox { lo: 0.2, hi: 2.0 },
            truncation: TuneRequest::default(),
            grid: Grid1D::unit(64),
            time: TimeConfig {
                t_end: 0.05,
                dt0: 1e-5,
                snapshot_stride: 50,
                ..TimeConfig::default()
            },
            initial: SmoothPositive::default(),
        }
    }
}

fn fold_max(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

fn fold_min(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(f64::INFINITY, f64::min)
}

/// Sampled constants `C₁, C₂` of the derivative decay bounds for each
/// `N ∈ {2, 4, 8, 16}`; `ratios(z, N)` returns the two normalized derivative
/// sizes at `z` and `point` draws a state of given size in `(E, E^N)`.
fn decay_constants<F, P>(e: f64, samples: usize, seed: u64, ratios: F, point: P) -> Vec<[f64; 2]>
where
    F: Fn(&[f64], f64) -> [f64; 2] + Sync,
    P: Fn(&mut rand_chacha::ChaCha8Rng, f64) -> Vec<f64> + Sync,
{
    [2.0, 4.0, 8.0, 16.0]
        .iter()
        .map(|&n| {
            let upper = e.powf(n);
            let vals = par_samples(samples, seed, |rng| {
                let size = log_uniform(rng, e * (1.0 + 1e-9), upper * (1.0 - 1e-9));
                ratios(&point(rng, size), n)
            });
            [fold_max(vals.iter().map(|v| v[0])), fold_max(vals.iter().map(|v| v[1]))]
        })
        .collect()
}

/// Records the constants and checks that none exceeds 2.5 times its `N = 2` value.
fn record_decay(report: &mut DiagnosticsReport, prefix: &str, consts: &[[f64; 2]]) {
    for order in 0..2 {
        for (k, c) in consts.iter().enumerate() {
            report.scalar(format!("{prefix}_decay_c{}_n{}", order + 1, 2 << k), c[order]);
        }
        let growth = fold_max(consts.iter().map(|c| c[order] / consts[0][order]));
        report.check(Check::at_most(format!("{prefix}_decay_c{}_growth", order + 1), growth, 2.5));
    }
}

fn abs_max<'a>(v: impl IntoIterator<Item = &'a f64>) -> f64 {
    v.into_iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Monotonicity along rays and `ξ(1 − ξ) = 0` outside `(E, E^N)`; returns the
/// number of violations.
fn truncation_shape<F>(e: f64, n: f64, samples: usize, seed: u64, d: usize, value: F) -> u64
where
    F: Fn(&[f64]) -> (f64, f64) + Sync,
{
    let upper = e.powf(n);
    par_samples(samples, seed, |rng| {
        let dir = simplex_point(rng, d, 1.0);
        let s1 = log_uniform(rng, 1e-3, upper * 10.0);
        let s2 = s1 * log_uniform(rng, 1.0, 100.0);
        let z1: Vec<f64> = dir.iter().map(|v| v * s1).collect();
        let z2: Vec<f64> = dir.iter().map(|v| v * s2).collect();
        let (v1, size1) = value(&z1);
        let (v2, _) = value(&z2);
        let mut bad = 0;
        if v2 > v1 + 1e-15 {
            bad += 1;
        }
        if (size1 <= e && v1 != 1.0) || (size1 >= upper && v1 != 0.0) {
            bad += 1;
        }
        bad
    })
    .into_iter()
    .sum()
}

/// Empirical constants of the flux bounds and growth hypotheses for M0/M1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluxBounds {
    pub species: f64,
    pub energy: f64,
    pub a5: f64,
    pub a6: f64,
}

pub fn flux_bounds(system: &ErdsSystem, samples: usize, seed: u64) -> FluxBounds {
    let d = system.dim();
    let vals = par_samples(samples, seed, |rng| {
        let z = box_point(rng, d, 1e-3, 1e3);
        let g = gradient_sample(rng, &z, 1.0);
        let a = system.mobility(&z) * system.hessian_raw(&z);
        let f = &a * DVector::from_column_slice(&g);
        let p = dissipation_raw(&z, &g, system);
        let (coef_a, m) = system.energy_coefficients(&z);
        let sp = p.max(0.0).sqrt();
        let mut species: f64 = 0.0;
        for i in 1..d {
            species = species.max(f[i].abs() / (z[i].sqrt() * sp));
        }
        let energy = f[0].abs() / (g[0].abs() + m.sqrt() * sp);
        let a5 = (coef_a * g[0]).abs() / ((1.0 + z[0]) * sp);
        let norm1: f64 = z.iter().sum();
        let a6 = if norm1 >= 1.0 {
            let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let fmax = f.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            gn * fmax / (norm1 * p + norm1 * g[0] * g[0])
        } else {
            0.0
        };
        [species, energy, a5, a6]
    });
    let col = |k: usize| fold_max(vals.iter().map(|v| v[k]).filter(|v| v.is_finite()));
    let nonfinite = vals.iter().any(|v| v.iter().any(|x| !x.is_finite()));
    let inf = |x: f64| if nonfinite { f64::INFINITY } else { x };
    FluxBounds {
        species: inf(col(0)),
        energy: inf(col(1)),
        a5: inf(col(2)),
        a6: inf(col(3)),
    }
}

/// `max (−σ̂(u) + ε_β Σ c_i log c_i − h(u, c))/(1 + u^{κ_β})` over sampled states.
pub fn lower_bound_constant(system: &ErdsSystem, samples: usize, seed: u64) -> f64 {
    let d = system.dim();
    let (eps, kappa) = system.entropy.lower_bound_exponents();
    fold_max(par_samples(samples, seed, |rng| {
        let z = box_point(rng, d, 1e-3, 1e6);
        let sigma = system.entropy.sigma.derivs(z[0])[0];
        let ent: f64 = z[1..].iter().map(|c| c * c.ln()).sum();
        (-sigma + eps * ent - system.density_raw(&z)) / (1.0 + z[0].powf(kappa))
    }))
}

/// Largest relative mismatch between `A∇z` and the explicit flux over sampled
/// states, relative to `Σ_k |A_ik ∇z_k|`.
pub fn structure_identity_error(system: &ErdsSystem, samples: usize, seed: u64) -> Result<f64> {
    let d = system.dim();
    let vals = par_samples(samples, seed, |rng| {
        let z = box_point(rng, d, 1e-3, 1e3);
        let g = gradient_sample(rng, &z, 1.0);
        let a = system.mobility(&z) * system.hessian_raw(&z);
        let f = explicit_flux_m0(&z, &g, &system.mobility, &system.entropy).map(|f| f.as_slice().to_vec());
        f.map(|f| {
            (0..d)
                .map(|i| {
                    let ag: f64 = (0..d).map(|k| a[(i, k)] * g[k]).sum();
                    let scale: f64 = (0..d).map(|k| (a[(i, k)] * g[k]).abs()).sum();
                    (ag - f[i]).abs() / scale.max(f64::MIN_POSITIVE)
                })
                .fold(0.0, f64::max)
        })
    });
    Ok(fold_max(vals.into_iter().collect::<Result<Vec<_>>>()?))
}

/// `max |A − I|` for the witness model at `z = (1, 1)`.
pub fn witness_identity_error() -> f64 {
    let w = ErdsSystem::witness(1);
    let z = [1.0, 1.0];
    let a = w.mobility(&z) * w.hessian_raw(&z);
    let mut err: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let target = if i == j { 1.0 } else { 0.0 };
            err = err.max((a[(i, j)] - target).abs());
        }
    }
    err
}

/// Structure, sign, derivative, coercivity, truncation and stability checks for
/// an M0/M1 system.
pub fn property_suite(system: &ErdsSystem, cfg: &SuiteConfig) -> Result<DiagnosticsReport> {
    let mut report = DiagnosticsReport::new("check");
    let d = system.dim();
    let seed = cfg.seed;

    report.check(Check::at_most("witness_identity", witness_identity_error(), 1e-12));
    if matches!(system.mobility.variant, Variant::M0 | Variant::M1) {
        let e = structure_identity_error(system, cfg.structure_samples, seed)?;
        report.check(Check::at_most("structure_identity", e, 1e-10));
    }

    let der = derivative_check(system, cfg.derivative_samples, seed ^ 1, 1e-3, 1e3);
    report.check(Check::at_most("derivative_gradient", der.gradient, 1e-6));
    report.check(Check::at_most("derivative_hessian", der.hessian, 1e-5));
    report.check(Check::at_most("derivative_third", der.third, 1e-5));

    let signs = sign_check(system, cfg.samples, seed ^ 2);
    report.tally("sign_violations", "mobility_psd", signs.mobility_psd);
    report.tally("sign_violations", "hessian_pd", signs.hessian_pd);
    report.tally("sign_violations", "dissipation", signs.dissipation);
    report.tally("sign_violations", "reaction", signs.reaction);
    report.scalar("min_hessian_ratio", signs.min_hessian_ratio);
    report.check(Check::at_most("sign_structure", signs.total() as f64, 0.0));

    let bx = cfg.reference_box;
    let tuned = tune_truncation(system, bx, cfg.truncation, cfg.coercivity_samples, seed ^ 3)?;
    let params = tuned.params;
    report.parameter("E", params.e);
    report.parameter("N", params.n);
    report.parameter("iota", params.iota);
    report.parameter("alpha", params.alpha);
    report.parameter("B", tuned.b);
    report.scalar("tuning_b_margin", tuned.b_margin);
    report.scalar("tuning_n_capped", if tuned.n_capped { 1.0 } else { 0.0 });

    let coer = coercivity_check(system, bx, &params, cfg.coercivity_samples, seed ^ 4);
    report.scalar("dist_min", coer.dist_min);
    report.check(Check::at_least("coercivity_quadratic", coer.quadratic_min, f64::MIN_POSITIVE));
    report.check(Check::at_least("coercivity_growth", coer.growth_eps, 1e-3));

    let stab = stability_density_check(
        system,
        &params,
        bx,
        StabilitySampling {
            samples: cfg.samples,
            seed: seed ^ 5,
            ..StabilitySampling::default()
        },
    );
    for (regime, st) in &stab.regimes {
        report.scalar(format!("stability_{}_max_ratio", regime.name()), st.max_ratio);
        report.tally("stability_samples", regime.name(), st.samples);
        report.tally("stability_excluded", regime.name(), st.excluded);
    }
    report.check(Check::at_most("stability_unbounded", stab.unbounded() as f64, 0.0));
    report.check(Check::at_most(
        "stability_finite",
        if stab.all_finite() { 0.0 } else { 1.0 },
        0.0,
    ));

    let consts = decay_constants(
        params.e,
        cfg.structure_samples,
        seed ^ 6,
        |z, n| {
            let j = xi_star(z, &TruncationParams { n, ..params });
            let size: f64 = z.iter().sum();
            [abs_max(&j.gradient) * n * size, abs_max(j.hessian.iter()) * n * size * size]
        },
        |rng, size| simplex_point(rng, d, size),
    );
    record_decay(&mut report, "xi_star", &consts);
    let shape = truncation_shape(params.e, params.n, cfg.structure_samples, seed ^ 7, d, |z| {
        (xi_star(z, &params).value, z.iter().sum())
    });
    report.check(Check::at_most("xi_star_shape", shape as f64, 0.0));

    let lb = lower_bound_constant(system, cfg.structure_samples, seed ^ 8);
    report.scalar("lower_bound_constant", lb);
    report.check(Check::at_most("lower_bound_constant_finite", lb, f64::MAX));

    let nd = nondegeneracy_min(system, params.iota, 10.0, cfg.structure_samples, seed ^ 9);
    report.scalar("nondegeneracy_eps", nd);
    report.check(Check::at_least("nondegeneracy", nd, f64::MIN_POSITIVE));

    let fb = flux_bounds(system, cfg.samples, seed ^ 10);
    for (name, v) in [("species", fb.species), ("energy", fb.energy), ("a5", fb.a5), ("a6", fb.a6)] {
        report.scalar(format!("flux_bound_{name}"), v);
        report.check(Check::at_most(format!("flux_bound_{name}_finite"), v, f64::MAX));
    }
    Ok(report)
}

/// Largest `|𝕄 − 𝕄ᵀ|/|𝕄|` (max norms) over sampled concentrations.
pub fn skt_asymmetry(system: &SktSystem, samples: usize, seed: u64) -> f64 {
    let d = system.dim();
    fold_max(par_samples(samples, seed, |rng| {
        let z = box_point(rng, d, 1e-3, 1e3);
        let m = system.mobility(&z);
        let norm = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let asym = (&m - m.transpose()).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        asym / norm
    }))
}

/// `min P/(Σ|∇c_i^s|² + Σ|∇c_i^{s/2}|²)` over sampled concentrations and gradients.
pub fn skt_coercivity(system: &SktSystem, samples: usize, seed: u64) -> f64 {
    let d = system.dim();
    let s = system.params.s;
    fold_min(par_samples(samples, seed, |rng| {
        let mut z = box_point(rng, d, 1e-3, 1e3);
        z[0] = 1.0;
        let mut g = gradient_sample(rng, &z, 1.0);
        g[0] = 0.0;
        let p = dissipation_raw(&z, &g, system);
        let rhs: f64 = (1..d)
            .map(|i| {
                let a = s * z[i].powf(s - 1.0) * g[i];
                let b = 0.5 * s * z[i].powf(0.5 * s - 1.0) * g[i];
                a * a + b * b
            })
            .sum();
        if rhs > 0.0 {
            p / rhs
        } else {
            f64::INFINITY
        }
    }))
}

/// Detailed-balance symmetry, entropy decay on a run, the dissipation lower
/// bound and the shape of the truncation for a cross-diffusion system.
pub fn skt_suite(params: &SktParams, cfg: &SuiteConfig) -> Result<DiagnosticsReport> {
    let system = SktSystem::new(params.clone())?;
    let d = system.dim();
    let n = d - 1;
    let s = params.s;
    let seed = cfg.seed;
    let mut report = DiagnosticsReport::new("check");
    report.parameter("s", s);

    let asym = skt_asymmetry(&system, cfg.structure_samples, seed);
    if params.detailed_balance {
        report.check(Check::at_most("mobility_symmetry", asym, 1e-10));
    } else {
        report.scalar("mobility_asymmetry", asym);
    }

    let mut initial = cfg.initial.clone();
    initial.u_amp = 0.0;
    let data = initial.build(cfg.grid, n)?;
    let run = simulate(&system, &data, &cfg.time)?;
    let h0 = run.series[0].h;
    let rise = run.series.windows(2).map(|w| w[1].h - w[0].h).fold(f64::NEG_INFINITY, f64::max);
    report.scalar("entropy_initial", h0);
    report.scalar("entropy_final", run.series.last().unwrap().h);
    report.tally("solver", "steps", (run.series.len() - 1) as u64);
    report.check(Check::at_most("entropy_monotone", rise.max(0.0), 1e-12 * (1.0 + h0.abs())));

    let eps = skt_coercivity(&system, cfg.samples, seed ^ 1);
    report.scalar("coercivity_eps", eps);
    report.check(Check::at_least("coercivity", eps, f64::MIN_POSITIVE));

    let e = 4.0;
    let nn = 2.0;
    let tp = TruncationParams::new(e, nn, 0.1, 1.0)?;
    let size = |c: &[f64]| if s > 1.0 { rho_s(c, s) } else { c.iter().sum() };
    let shape = truncation_shape(e, nn, cfg.structure_samples, seed ^ 2, d, |z| {
        let mut zz = z.to_vec();
        zz[0] = 1.0;
        (system.truncation(&zz, &tp).value, size(&zz[1..]))
    });
    report.check(Check::at_most("xi_star_shape", shape as f64, 0.0));

    // weights `(c_i + δ)^{s−1}` and `(c_i + δ)^{s−2}` of the superlinear decay bound
    let delta = if s == 2.0 { 0.0 } else { 1.0 };
    let consts = decay_constants(
        e,
        cfg.structure_samples,
        seed ^ 3,
        |z, n| {
            let j = system.truncation(z, &TruncationParams { n, ..tp });
            let c = &z[1..];
            let big = size(c).powf(s);
            let w1: Vec<f64> = c.iter().map(|v| (v + delta).powf(s - 1.0)).collect();
            let w2: Vec<f64> = c.iter().map(|v| (v + delta).powf(s - 2.0)).collect();
            let mut c1: f64 = 0.0;
            let mut c2: f64 = 0.0;
            for i in 0..c.len() {
                c1 = c1.max(j.gradient[i + 1].abs() * n * big / w1[i]);
                for k in 0..c.len() {
                    let mut bound = w1[i] * w1[k] / (big * big);
                    if i == k {
                        bound += w2[i] / big;
                    }
                    c2 = c2.max(j.hessian[(i + 1, k + 1)].abs() * n / bound);
                }
            }
            [c1, c2]
        },
        |rng, target| {
            // rescale a random direction to the requested size
            let mut c = box_point(rng, n, 1e-3, 1.0);
            let mut k = target / size(&c);
            for _ in 0..60 {
                let trial: Vec<f64> = c.iter().map(|v| v * k).collect();
                let r = size(&trial);
                if (r / target - 1.0).abs() < 1e-12 {
                    break;
                }
                k *= target / r;
            }
            c.iter_mut().for_each(|v| *v *= k);
            let mut z = vec![1.0];
            z.extend(c);
            z
        },
    );
    record_decay(&mut report, "xi_star_s", &consts);
    Ok(report)
}
