//! Randomized checks over sampled states: derivative accuracy, sign structure,
//! coercivity, the truncation schedule and the stability density.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rho::{dissipation_raw, rho_raw};
use crate::entropy::{dist_raw, rel_raw, regime_classify, Entropy, Regime, TruncationParams};
use crate::error::{config, Result};
use crate::models::GradientSystem;

const CHUNK: usize = 512;

/// Draws `count` values in parallel; chunk `k` uses stream `k` of a ChaCha8
/// generator seeded with `seed`, so the output does not depend on the thread count.
pub(crate) fn par_samples<T, F>(count: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let n = CHUNK.min(count - k * CHUNK);
            (0..n).map(|_| f(&mut rng)).collect()
        })
        .collect();
    parts.into_iter().flatten().collect()
}

pub(crate) fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln())).exp()
}

pub(crate) fn box_point(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..d).map(|_| log_uniform(rng, lo, hi)).collect()
}

/// Point with `|z|₁ = total`, direction uniform on the simplex; with probability
/// 0.3 one component is shrunk by up to eight orders of magnitude.
pub(crate) fn simplex_point(rng: &mut ChaCha8Rng, d: usize, total: f64) -> Vec<f64> {
    let mut e: Vec<f64> = (0..d).map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-12).collect();
    if rng.gen::<f64>() < 0.3 {
        let k = rng.gen_range(0..d);
        e[k] *= 10f64.powf(-8.0 * rng.gen::<f64>());
    }
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s * total).collect()
}

pub(crate) fn gradient_sample(rng: &mut ChaCha8Rng, z: &[f64], bound: f64) -> Vec<f64> {
    z.iter().map(|v| rng.gen_range(-bound..=bound) * (1.0 + v)).collect()
}

/// Box `[lo, hi]^{1+n}` holding the reference states `z̃`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceBox {
    pub lo: f64,
    pub hi: f64,
}

impl ReferenceBox {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.hi >= self.lo && self.hi.is_finite()) {
            return Err(config("reference box", "need 0 < lo <= hi < inf"));
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
        if self.lo == self.hi {
            vec![self.lo; d]
        } else {
            box_point(rng, d, self.lo, self.hi)
        }
    }
}

// ---------------------------------------------------------------------------
// derivatives

/// Largest relative deviation of the analytic derivatives from finite differences.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivativeErrors {
    pub gradient: f64,
    pub hessian: f64,
    pub third: f64,
}

/// Five-point derivative together with a rounding allowance `10³ ε |f|/h` per entry;
/// only the part of the deviation beyond that allowance counts as error.
fn stencil<F: Fn(f64) -> Vec<f64>>(f: F, x: f64, h: f64) -> (Vec<f64>, Vec<f64>) {
    let a = f(x - 2.0 * h);
    let b = f(x - h);
    let c = f(x + h);
    let e = f(x + 2.0 * h);
    let deriv = (0..a.len())
        .map(|k| (a[k] - 8.0 * b[k] + 8.0 * c[k] - e[k]) / (12.0 * h))
        .collect();
    let noise = (0..a.len())
        .map(|k| 1e3 * f64::EPSILON * a[k].abs().max(b[k].abs()).max(c[k].abs()).max(e[k].abs()) / h)
        .collect();
    (deriv, noise)
}

fn rel_errors(exact: &[f64], (approx, noise): &(Vec<f64>, Vec<f64>)) -> f64 {
    exact
        .iter()
        .zip(approx.iter().zip(noise))
        .map(|(e, (a, n))| {
            let excess = ((e - a).abs() - n).max(0.0);
            if excess == 0.0 {
                0.0
            } else {
                excess / e.abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Compares gradient, Hessian and third derivatives with five-point differences
/// at points drawn log-uniformly from `[lo, hi]^{1+n}`.
pub fn derivative_check<E: Entropy + ?Sized>(model: &E, samples: usize, seed: u64, lo: f64, hi: f64) -> DerivativeErrors {
    let d = model.dim();
    let errs = par_samples(samples, seed, |rng| {
        let z = box_point(rng, d, lo, hi);
        let mut out = [0.0f64; 3];
        let g = model.gradient_vec(&z);
        let hm = model.hessian_raw(&z);
        let t = model.third_raw(&z);
        for k in 0..d {
            let h = 1e-3 * z[k];
            let at = |x: f64| {
                let mut y = z.clone();
                y[k] = x;
                y
            };
            let fd_g = stencil(|x| vec![model.density_raw(&at(x))], z[k], h);
            out[0] = out[0].max(rel_errors(&[g[k]], &fd_g));
            let fd_h = stencil(|x| model.gradient_vec(&at(x)), z[k], h);
            let col: Vec<f64> = (0..d).map(|i| hm[(i, k)]).collect();
            out[1] = out[1].max(rel_errors(&col, &fd_h));
            let fd_t = stencil(|x| model.hessian_raw(&at(x)).as_slice().to_vec(), z[k], h);
            let slab: Vec<f64> = (0..d * d).map(|idx| t.get(idx % d, idx / d, k)).collect();
            out[2] = out[2].max(rel_errors(&slab, &fd_t));
        }
        out
    });
    let mut res = DerivativeErrors {
        gradient: 0.0,
        hessian: 0.0,
        third: 0.0,
    };
    for e in errs {
        res.gradient = res.gradient.max(e[0]);
        res.hessian = res.hessian.max(e[1]);
        res.third = res.third.max(e[2]);
    }
    res
}

// ---------------------------------------------------------------------------
// sign structure

/// Violation counts of the sign conditions over random states and gradients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignViolations {
    pub samples: usize,
    pub mobility_psd: u64,
    pub hessian_pd: u64,
    pub dissipation: u64,
    pub reaction: u64,
    /// Smallest eigenvalue of `D²h` divided by its largest one.
    pub min_hessian_ratio: f64,
}

impl SignViolations {
    pub fn total(&self) -> u64 {
        self.mobility_psd + self.hessian_pd + self.dissipation + self.reaction
    }
}

/// Checks `𝕄 ⪰ 0`, `D²h ≻ 0`, `P ≥ 0` and `Dh·R ≤ 0` at states in
/// `[10⁻³, 10³]^{1+n}`.
pub fn sign_check<S: GradientSystem + ?Sized>(system: &S, samples: usize, seed: u64) -> SignViolations {
    let d = system.dim();
    let rows = par_samples(samples, seed, |rng| {
        let z = box_point(rng, d, 1e-3, 1e3);
        let gz = gradient_sample(rng, &z, 1.0);
        let m = system.mobility(&z);
        let h = system.hessian_raw(&z);
        let mmax = m.amax();
        let m_eig = m.clone().symmetric_eigenvalues();
        let psd = m_eig.min() >= -1e-12 * mmax;
        let h_eig = h.clone().symmetric_eigenvalues();
        let pd = h.clone().cholesky().is_some() && h_eig.min() > 0.0;
        let p = dissipation_raw(&z, &gz, system);
        let gd = &h * nalgebra::DVector::from_column_slice(&gz);
        let p_ok = p >= -1e-12 * mmax * gd.norm_squared();
        let dh = system.gradient_vec(&z);
        let r = system.reaction_vec(&z);
        let rd: f64 = dh.iter().zip(&r).map(|(a, b)| a * b).sum();
        let scale: f64 = dh.iter().zip(&r).map(|(a, b)| (a * b).abs()).sum();
        let r_ok = rd <= 1e-12 * scale;
        (psd, pd, p_ok, r_ok, h_eig.min() / h_eig.max())
    });
    let mut out = SignViolations {
        samples,
        mobility_psd: 0,
        hessian_pd: 0,
        dissipation: 0,
        reaction: 0,
        min_hessian_ratio: f64::INFINITY,
    };
    for (psd, pd, p, r, ratio) in rows {
        out.mobility_psd += u64::from(!psd);
        out.hessian_pd += u64::from(!pd);
        out.dissipation += u64::from(!p);
        out.reaction += u64::from(!r);
        out.min_hessian_ratio = out.min_hessian_ratio.min(ratio);
    }
    out
}

// ---------------------------------------------------------------------------
// coercivity

/// Sampled constants of the coercivity bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Coercivity {
    /// `min h*_rel(z, z̃)/|z − z̃|²` over `|z|₁ ≤ E`.
    pub quadratic_min: f64,
    /// `min (dist_α − 1)/(Σ c_i log₊ c_i + u²)` over `|z|₁ > E`.
    pub growth_eps: f64,
    /// `min dist_α` over all samples.
    pub dist_min: f64,
}

fn log_plus_mass(z: &[f64]) -> f64 {
    z[1..].iter().map(|&c| if c > 1.0 { c * c.ln() } else { 0.0 }).sum::<f64>() + z[0] * z[0]
}

fn outside_point(rng: &mut ChaCha8Rng, d: usize, e: f64) -> Vec<f64> {
    let total = log_uniform(rng, e * (1.0 + 1e-9), (e * 1e8).min(1e100));
    simplex_point(rng, d, total)
}

fn inside_point(rng: &mut ChaCha8Rng, zt: &[f64], e: f64) -> Vec<f64> {
    let d = zt.len();
    if rng.gen::<bool>() {
        let delta = log_uniform(rng, 1e-4, 0.5);
        zt.iter().map(|&v| v * (1.0 + delta * rng.gen_range(-1.0..1.0))).collect()
    } else {
        let total = log_uniform(rng, 1e-3, e);
        simplex_point(rng, d, total)
    }
}

/// Samples `z̃` from the box and `z` inside and outside `{|z|₁ ≤ E}`.
pub fn coercivity_check<S: GradientSystem + ?Sized>(
    system: &S,
    bx: ReferenceBox,
    params: &TruncationParams,
    samples: usize,
    seed: u64,
) -> Coercivity {
    let d = system.dim();
    let rows = par_samples(samples, seed, |rng| {
        let zt = bx.sample(rng, d);
        let inside = rng.gen::<bool>();
        let z = if inside {
            inside_point(rng, &zt, params.e)
        } else {
            outside_point(rng, d, params.e)
        };
        let dist = dist_raw(&z, &zt, params, system);
        if inside {
            let q: f64 = z.iter().zip(&zt).map(|(a, b)| (a - b) * (a - b)).sum();
            let hrel = dist - 0.5 * params.alpha * (z[0] - zt[0]).powi(2);
            let ratio = if q > 0.0 { hrel / q } else { f64::INFINITY };
            (ratio, f64::INFINITY, dist)
        } else {
            (f64::INFINITY, (dist - 1.0) / log_plus_mass(&z), dist)
        }
    });
    let mut out = Coercivity {
        quadratic_min: f64::INFINITY,
        growth_eps: f64::INFINITY,
        dist_min: f64::INFINITY,
    };
    for (q, g, dd) in rows {
        out.quadratic_min = out.quadratic_min.min(q);
        out.growth_eps = out.growth_eps.min(g);
        out.dist_min = out.dist_min.min(dd);
    }
    out
}

/// Tests a candidate `E` for every `N` at once: outside `{|z|₁ ≤ E}` both the
/// relative entropy (`ξ* = 1`) and `h(z) + Dh(z̃)·z̃ − h(z̃)` (`ξ* = 0`), plus the
/// energy term, must exceed `ε(Σ c log₊c + u²) + 1`. Returns the smallest sampled `ε`.
fn growth_eps_any_n<S: GradientSystem + ?Sized>(
    system: &S,
    bx: ReferenceBox,
    e: f64,
    alpha: f64,
    samples: usize,
    seed: u64,
) -> f64 {
    let d = system.dim();
    par_samples(samples, seed, |rng| {
        let zt = bx.sample(rng, d);
        let z = outside_point(rng, d, e);
        let g = system.gradient_vec(&zt);
        let hz = system.density_raw(&z);
        let hzt = system.density_raw(&zt);
        let lin: f64 = g.iter().zip(&zt).map(|(a, b)| a * b).sum();
        let energy = 0.5 * alpha * (z[0] - zt[0]).powi(2);
        let full = rel_raw(&z, &zt, system) + energy;
        let cut = hz + lin - hzt + energy;
        (full.min(cut) - 1.0) / log_plus_mass(&z)
    })
    .into_iter()
    .fold(f64::INFINITY, f64::min)
}

// ---------------------------------------------------------------------------
// truncation schedule

/// Requested truncation parameters; `None` means "tune".
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TuneRequest {
    pub e: Option<f64>,
    pub n: Option<f64>,
    pub iota: Option<f64>,
    pub alpha: Option<f64>,
}

/// Outcome of the parameter schedule `ι → E → N → α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tuned {
    pub params: TruncationParams,
    /// Largest reference value.
    pub b: f64,
    /// Sampled growth constant at the chosen `E`.
    pub growth_eps: f64,
    /// `max |ξ*-cross term|/(P + |∇u|²)` on `ℬ` samples at the chosen `N`.
    pub b_margin: f64,
    /// `true` when `N` hit the cap `E^N ≤ 10¹⁰⁰` before the margin reached ¼.
    pub n_capped: bool,
}

/// Largest `N` allowed by the tuner: keeps `E^N ≤ 10¹⁰⁰` so that squares of
/// sampled states stay finite.
pub fn n_cap(e: f64) -> f64 {
    100.0 / e.log10()
}

/// Sampled `ℬ`-regime margin for given parameters.
pub fn b_regime_margin<S: GradientSystem + ?Sized>(
    system: &S,
    bx: ReferenceBox,
    params: &TruncationParams,
    samples: usize,
    seed: u64,
) -> f64 {
    let d = system.dim();
    let (lo, hi) = (params.e, params.upper());
    par_samples(samples, seed, |rng| {
        let zt = bx.sample(rng, d);
        let total = log_uniform(rng, lo * (1.0 + 1e-9), hi * (1.0 - 1e-9));
        let z = simplex_point(rng, d, total);
        let gz = gradient_sample(rng, &z, 1.0);
        let gzt = gradient_sample(rng, &zt, 1.0);
        let xi = system.truncation(&z, params);
        let dh_zt = system.gradient_vec(&zt);
        let hz = system.hessian_raw(&z);
        let hzt = system.hessian_raw(&zt);
        let gdz = &hz * nalgebra::DVector::from_column_slice(&gz);
        let gdzt = &hzt * nalgebra::DVector::from_column_slice(&gzt);
        let flux = system.mobility(&z) * &gdz;
        let hxg = &xi.hessian * nalgebra::DVector::from_column_slice(&gz);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let dxg = dot(&xi.gradient, &gz);
        let z_dh = dot(&z, &dh_zt);
        let gz_dh = dot(&gz, &dh_zt);
        let z_gd = dot(&z, gdzt.as_slice());
        let k: f64 = (0..d)
            .map(|i| (hxg[i] * z_dh + xi.gradient[i] * (gz_dh + z_gd) + dxg * dh_zt[i]) * flux[i])
            .sum();
        let p = gdz.dot(&flux);
        k.abs() / (p + gz[0] * gz[0])
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// Runs the schedule: `ι` from the box, then `E ≥ max(2B, Ē)` by doubling, then
/// `N` by doubling until the `ℬ` margin is at most ¼, then `α` (1 when `m ≡ 0`,
/// ½ otherwise). Requested values are checked instead of tuned.
pub fn tune_truncation<S: GradientSystem + ?Sized>(
    system: &S,
    bx: ReferenceBox,
    request: TuneRequest,
    samples: usize,
    seed: u64,
) -> Result<Tuned> {
    bx.validate()?;
    let iota = match request.iota {
        Some(i) => i,
        None => (0.5 * bx.lo).min(0.5),
    };
    if !(iota > 0.0 && iota < 1.0) {
        return Err(config("truncation.iota", "must lie in (0, 1)"));
    }
    if bx.lo < 2.0 * iota * (1.0 - 1e-12) {
        return Err(config(
            "truncation.iota",
            format!("reference minimum {} is below 2·iota = {}", bx.lo, 2.0 * iota),
        ));
    }
    let alpha = match request.alpha {
        Some(a) => a,
        None if system.energy_mobility_vanishes() => 1.0,
        None => 0.5,
    };
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(config("truncation.alpha", "must be positive"));
    }
    let b = bx.hi;
    let e_floor = (2.0 * b).max(2.0);
    let accept = |e: f64, k: u64| growth_eps_any_n(system, bx, e, alpha, samples, seed ^ (k << 32));
    let (e, growth_eps) = match request.e {
        Some(e) => {
            if e < 2.0 * b {
                return Err(config("truncation.E", format!("E = {e} is below 2B = {}", 2.0 * b)));
            }
            let eps = accept(e, 0);
            if eps < 1e-3 {
                return Err(config(
                    "truncation.E",
                    format!("E = {e} is below the sampled threshold (growth constant {eps:.3e} < 1e-3)"),
                ));
            }
            (e, eps)
        }
        None => {
            let mut e = e_floor;
            let mut k = 0;
            loop {
                let eps = accept(e, k);
                if eps >= 1e-3 {
                    break (e, eps);
                }
                k += 1;
                e *= 2.0;
                if k > 40 {
                    return Err(config("truncation.E", "no E up to 2^40·2B satisfies the growth bound"));
                }
            }
        }
    };
    let margin_samples = (samples / 10).max(1000);
    let (n, b_margin, n_capped) = match request.n {
        Some(n) => {
            let p = TruncationParams::new(e, n, iota, alpha)?;
            (n, b_regime_margin(system, bx, &p, margin_samples, seed.wrapping_add(1)), false)
        }
        None => {
            let cap = n_cap(e);
            let mut n = 2.0f64;
            loop {
                let p = TruncationParams::new(e, n.min(cap), iota, alpha)?;
                let m = b_regime_margin(system, bx, &p, margin_samples, seed.wrapping_add(1));
                if m <= 0.25 {
                    break (n.min(cap), m, false);
                }
                if n >= cap {
                    break (cap, m, true);
                }
                n *= 2.0;
            }
        }
    };
    let params = TruncationParams::new(e, n, iota, alpha)?;
    Ok(Tuned {
        params,
        b,
        growth_eps,
        b_margin,
        n_capped,
    })
}

// ---------------------------------------------------------------------------
// stability density

/// Per-regime statistics of `ρ_α/dist_α`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RegimeStats {
    pub samples: u64,
    /// Samples with `dist_α < 10⁻¹⁴`.
    pub excluded: u64,
    pub max_ratio: f64,
    /// Non-finite ratios, or excluded samples with `ρ_α > 10⁻¹⁰`.
    pub unbounded: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityStats {
    pub regimes: BTreeMap<Regime, RegimeStats>,
}

impl StabilityStats {
    pub fn unbounded(&self) -> u64 {
        self.regimes.values().map(|r| r.unbounded).sum()
    }

    /// `true` when every regime was sampled and every ratio is finite.
    pub fn all_finite(&self) -> bool {
        Regime::ALL.iter().all(|r| {
            self.regimes
                .get(r)
                .is_some_and(|s| s.samples > 0 && s.max_ratio.is_finite())
        }) && self.unbounded() == 0
    }
}

/// Sampling controls of [`stability_density_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilitySampling {
    pub samples: usize,
    pub seed: u64,
    /// `|∂_x z_i| ≤ bound·(1 + z_i)`.
    pub gradient_bound: f64,
    pub reference_gradient_bound: f64,
    pub zero_gradients: bool,
}

impl Default for StabilitySampling {
    fn default() -> Self {
        StabilitySampling {
            samples: 100_000,
            seed: 0,
            gradient_bound: 1.0,
            reference_gradient_bound: 1.0,
            zero_gradients: false,
        }
    }
}

fn regime_point(rng: &mut ChaCha8Rng, target: Regime, zt: &[f64], p: &TruncationParams) -> Vec<f64> {
    let d = zt.len();
    let top = p.e / d as f64;
    match target {
        Regime::APlus => {
            let k = rng.gen_range(0..10);
            if k == 0 {
                zt.to_vec()
            } else if k < 4 {
                let delta = log_uniform(rng, 1e-6, 1e-1);
                zt.iter()
                    .map(|&v| (v * (1.0 + delta * rng.gen_range(-1.0..1.0))).max(p.iota))
                    .collect()
            } else {
                box_point(rng, d, p.iota, top)
            }
        }
        Regime::AZero => {
            let mut z = box_point(rng, d, p.iota, top);
            let k = rng.gen_range(0..d);
            z[k] = log_uniform(rng, 1e-8, p.iota * (1.0 - 1e-12));
            z
        }
        Regime::B => {
            let total = log_uniform(rng, p.e * (1.0 + 1e-9), p.upper() * (1.0 - 1e-9));
            simplex_point(rng, d, total)
        }
        Regime::C => {
            let total = log_uniform(rng, p.upper(), p.upper() * 1e3);
            simplex_point(rng, d, total)
        }
    }
    .into_iter()
    .map(|v| v.max(1e-8))
    .collect()
}

/// Samples `(z, z̃, ∇z, ∇z̃)` evenly over the four regimes and records
/// `max ρ_α/dist_α` in each; samples with `dist_α < 10⁻¹⁴` instead require
/// `ρ_α ≤ 10⁻¹⁰`.
pub fn stability_density_check<S: GradientSystem + ?Sized>(
    system: &S,
    params: &TruncationParams,
    bx: ReferenceBox,
    sampling: StabilitySampling,
) -> StabilityStats {
    let d = system.dim();
    let rows = par_samples(sampling.samples, sampling.seed, |rng| {
        let target = Regime::ALL[rng.gen_range(0..4)];
        let zt = bx.sample(rng, d);
        let z = regime_point(rng, target, &zt, params);
        let (gz, gzt) = if sampling.zero_gradients {
            (vec![0.0; d], vec![0.0; d])
        } else {
            (
                gradient_sample(rng, &z, sampling.gradient_bound),
                gradient_sample(rng, &zt, sampling.reference_gradient_bound),
            )
        };
        let regime = regime_classify(&z, params);
        let dist = dist_raw(&z, &zt, params, system);
        let rho = rho_raw(&z, &zt, &gz, &gzt, params, system, true).rho_alpha;
        (regime, dist, rho)
    });
    let mut regimes: BTreeMap<Regime, RegimeStats> = BTreeMap::new();
    for r in Regime::ALL {
        regimes.insert(
            r,
            RegimeStats {
                max_ratio: f64::NEG_INFINITY,
                ..RegimeStats::default()
            },
        );
    }
    for (regime, dist, rho) in rows {
        let st = regimes.get_mut(&regime).expect("all regimes present");
        st.samples += 1;
        if dist < 1e-14 {
            st.excluded += 1;
            if !(rho <= 1e-10) {
                st.unbounded += 1;
            }
            continue;
        }
        let ratio = rho / dist;
        if ratio.is_finite() {
            st.max_ratio = st.max_ratio.max(ratio);
        } else {
            st.unbounded += 1;
        }
    }
    StabilityStats { regimes }
}

/// Largest `ε` with `𝕄 − diag(m, 0, …, 0) ⪰ ε diag(0, 1, …, 1)`, minimized over
/// states in `[ι, hi]^{1+n}`. Computed as the smallest eigenvalue of the Schur
/// complement of the energy entry.
pub fn nondegeneracy_min<S: GradientSystem + ?Sized>(system: &S, iota: f64, hi: f64, samples: usize, seed: u64) -> f64 {
    let d = system.dim();
    par_samples(samples, seed, |rng| {
        let z = box_point(rng, d, iota, hi);
        let m: DMatrix<f64> = system.mobility(&z);
        let (_, mm) = system.energy_coefficients(&z);
        let n00 = m[(0, 0)] - mm;
        let mut schur = m.view((1, 1), (d - 1, d - 1)).clone_owned();
        if n00 > 0.0 {
            for i in 0..d - 1 {
                for k in 0..d - 1 {
                    schur[(i, k)] -= m[(i + 1, 0)] * m[(0, k + 1)] / n00;
                }
            }
        }
        schur.symmetric_eigenvalues().min()
    })
    .into_iter()
    .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::EntropyModel;
    use crate::models::{EnergyMobility, ErdsSystem, MobilitySpec, ReactionSpec};

    #[test]
    fn sampling_is_deterministic() {
        let a = par_samples(2000, 7, |rng| rng.gen::<u64>());
        let b = par_samples(2000, 7, |rng| rng.gen::<u64>());
        let c = par_samples(2000, 8, |rng| rng.gen::<u64>());
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 2000);
    }

    #[test]
    fn witness_derivatives() {
        let e = derivative_check(&EntropyModel::default(), 200, 1, 1e-3, 1e3);
        assert!(e.gradient < 1e-6 && e.hessian < 1e-5 && e.third < 1e-5, "{e:?}");
    }

    #[test]
    fn signs_hold() {
        let sys = ErdsSystem::new(
            EntropyModel::default(),
            MobilitySpec::m0(2, EnergyMobility::Bounded { value: 1.0 }, 1.0),
            ReactionSpec::single(1, 2, 1.0),
        )
        .unwrap();
        let v = sign_check(&sys, 2000, 3);
        assert_eq!(v.total(), 0, "{v:?}");
    }

    #[test]
    fn zero_gradient_stability_is_finite() {
        let sys = ErdsSystem::witness(1);
        let p = TruncationParams::new(8.0, 4.0, 0.1, 1.0).unwrap();
        let s = stability_density_check(
            &sys,
            &p,
            ReferenceBox { lo: 0.2, hi: 2.0 },
            StabilitySampling {
                samples: 4000,
                zero_gradients: true,
                ..StabilitySampling::default()
            },
        );
        assert!(s.all_finite(), "{s:?}");
        assert!(s.regimes[&Regime::APlus].excluded > 0);
    }
}
