//! Functionals, residuals, evolution densities and sampled inequality checks.

mod fit;
mod evolution;
mod functionals;
mod renormalized;
mod report;
mod rho;
mod sampling;

pub use evolution::{dist_evolution, rho_alpha_integral, DistEvolution};
pub use fit::{anchored_envelope, decay_fit, DecayFit, Envelope};
pub use functionals::{
    classical_dist_total, conservation_defects, dist_alpha_total, ed_residual, ene_residual, integrals,
    min_principle_check, ConservationDefects, Integrals,
};
pub use renormalized::{renormalized_residual, Renormalizer};
pub use report::{Check, Comparison, DiagnosticsReport};
pub use rho::{rho_densities, RhoDensities};
pub use sampling::{
    b_regime_margin, coercivity_check, derivative_check, n_cap, nondegeneracy_min, sign_check,
    stability_density_check, tune_truncation, Coercivity, DerivativeErrors, ReferenceBox, RegimeStats,
    SignViolations, StabilitySampling, StabilityStats, TuneRequest, Tuned,
};
pub(crate) use rho::dissipation_raw;
pub(crate) use sampling::{box_point, gradient_sample, log_uniform, par_samples, simplex_point};
