//! Deterministic multi-photon Fock-state generation from a single
//! Zeeman-structured atom in a single-mode cavity.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration and
//! the command-line front end live in the `fockpulse` companion crate.
#![no_std]
extern crate alloc;

pub mod analytic;
pub mod angular_momentum;
pub mod atom_model;
pub mod dynamics;
pub mod error;
pub mod ode;
pub mod pulse;
pub mod quadrature;

pub use analytic::{closed_form_distribution, compare, n_out_closed_form, ComparisonReport, FockDistribution};
pub use angular_momentum::{wigner_3j, wigner_6j, HalfInt, SymbolValue};
pub use atom_model::{
    build_coupling_table, derived_rates, validity_report, AtomSpec, CouplingMode, CouplingTable, DerivedRates,
    PhysicalParams, Polarization, ValidityReport,
};
pub use dynamics::{
    flux_at, integrate, rate_derivatives, run_train, InitialState, PopulationState, PulseCount, RateSet,
    SimulationOptions, SimulationResult,
};
pub use error::{Error, Result};
pub use ode::Tolerances;
pub use pulse::{theta_of_t, PulseSchedule, PulseShape, ScheduledPulse, ThetaAccumulator};
