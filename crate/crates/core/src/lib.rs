//! Agent-based simulation of airborne quanta transmission in a ventilated
//! waiting room.
//!
//! One infector coughs into a cylinder of air around its seat while
//! susceptible agents breathe from whichever zone they sit in. The room is
//! ventilated and the cough zone mixes with the rest of the air each second.
//! [`oracle`] holds the closed-form single-zone reference and
//! [`experiments`] the replicated placement, density and volume sweeps.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod air;
pub mod cli;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod oracle;
pub mod output;
pub mod rng;
pub mod scenario;

pub use air::{AirState, Zone};
pub use engine::{run, AgentRecord, RunResult, Simulation, StepRecord};
pub use error::{Error, Result};
pub use experiments::{ExperimentKind, ExperimentOptions, ExperimentReport, Parallelism};
pub use oracle::GnParameters;
pub use rng::MersenneTwister;
pub use scenario::{default_config, parse_config, Role, ScenarioConfig, WeightClass};
