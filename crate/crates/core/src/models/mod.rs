//! Mobility and diffusion matrices, fluxes, dissipation, reactions, and the
//! assembled gradient systems consumed by the solver.

mod mobility;
mod reaction;
mod skt;
mod system;

pub use mobility::{
    diffusion_matrix, dissipation_density, energy_coefficients, explicit_flux_m0, mobility_matrix,
    EnergyMobility, MobilitySpec, Variant,
};
pub use reaction::{reaction, ExchangePair, ReactionSpec};
pub use skt::{skt_diffusion_matrix, skt_mobility, SktEntropy, SktParams};
pub use system::{ErdsSystem, GradientSystem, SktSystem};
