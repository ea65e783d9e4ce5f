//! Mutual-coupling-aware RIS simulation in the scattering-parameter domain.
//!
//! Channel generation, effective RIS models, the inner MMSE precoder/phase
//! solver, the outer scattering-parameter optimizers and an experiment
//! harness that reproduces sum-rate sweeps.

pub mod cascade;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiment;
pub mod inner_solver;
pub mod numerics;
pub mod outer;
pub mod outer_reflective;
pub mod outer_transmissive;
pub mod output;
pub mod scattering;
pub mod seeding;

pub use config::{load_config, parse_config, Baseline, ExperimentSpec, Mode, SweepKind};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ResultTable};
pub use numerics::{CMatrix, C64};
pub use output::emit_results;
