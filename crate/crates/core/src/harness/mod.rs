//! Packaged experiments and property suites, each producing a `DiagnosticsReport`.

mod experiments;
mod initial;
mod suite;

pub use experiments::{
    equilibrium_experiment, simulate_experiment, uniqueness_smoke, weak_strong_experiment, DistSeries,
    ExperimentConfig, ExperimentOutput,
};
pub use initial::{Perturbation, SmoothPositive};
pub use suite::{
    flux_bounds, lower_bound_constant, property_suite, skt_asymmetry, skt_coercivity, skt_suite,
    structure_identity_error, witness_identity_error, FluxBounds, SuiteConfig,
};
