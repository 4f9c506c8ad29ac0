//! Coherent single-photon transport through arrays of giant atoms coupled
//! to a one-dimensional waveguide.
//!
//! The [`engine`] module holds the general real-space solution valid for any
//! layout, [`modes`] its collective-mode decomposition, [`transfer`] the
//! cascade and closed-form solvers for separate arrays, [`analysis`] the
//! closed-form spectral features, and [`ssh`] the topological chain built from
//! decoherence-free interactions. [`scenario`], [`presets`] and [`verify`]
//! drive sweeps and oracle checks from configuration files.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod engine;
pub mod error;
pub mod layout;
pub mod linalg;
pub mod model;
pub mod modes;
pub mod output;
pub mod presets;
pub mod scenario;
pub mod ssh;
pub mod sweep;
pub mod transfer;
pub mod verify;

pub use engine::{build_system_matrices, scatter, ScatteringResult, SystemMatrices};
pub use error::{Error, Result};
pub use layout::{build_braided_array, build_nested_array, build_separate_array};
pub use model::{
    characteristics, classify_configuration, pair_characteristics, phase_delay,
    single_atom_characteristics, AtomArray, Characteristics, Configuration, CouplingPoint,
    GiantAtom, Regime,
};
pub use modes::{collective_modes, reconstruct_from_modes, CollectiveMode};
pub use transfer::{cascade_scatter, chebyshev_u, periodic_reflectance, PeriodicStructure};
pub use analysis::{
    band_gap_width, fit_lorentzian, lorentzian_r, reflection_minima, superradiance_params,
    SpectralFeature, Superradiance,
};
pub use ssh::{build_ssh_probe_array, edge_state_model, gap_spectrum_approx, ssh_bands, SshSpec};
pub use sweep::{sweep, Execution, Grid, Solver, SpectrumTable};
pub use config::ScenarioConfig;
pub use scenario::{run_scenario, ScenarioReport};
pub use verify::{run_verification, VerifyOptions, VerifyReport};
