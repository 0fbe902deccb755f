//! Mode-by-mode evolution of the wave equation on the exterior, in the
//! tortoise coordinate, with energy, localized-energy and integrated-identity
//! monitors.

mod identity;
mod operator;
mod run;
mod state;

pub use identity::{base_identity_residual, identity_balance, History, IdentityBalance, IdentityWeights, MAX_CADENCE};
pub use operator::{reduce_wave_operator, RadialOperator, TortoiseMesh};
pub use run::{
    evolve, evolve_mode, EnergyLeSeries, EvolutionConfig, InitialData, ModeRun, ProfileKind, CONTAMINATION_LEVEL,
    REFERENCE_COURANT, REFERENCE_DX,
};
pub use state::{energy_of_mode, le_density, le_increment, modified_energy, step, ModeState, CFL_LIMIT};
