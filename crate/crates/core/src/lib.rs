//! Train a small tanh network by simulated annealing, then refine it by
//! seeded random perturbation of its hidden-layer weights, keeping a
//! perturbation only when it lowers the error.
//!
//! ```
//! use anneal_noise_core::experiments::{run_scenario, Scenario, TargetFunction};
//!
//! let result = run_scenario(&Scenario::new(TargetFunction::Sqrt, 4.0, 7)).unwrap();
//! assert!(result.final_error <= result.initial_error);
//! ```

pub mod annealing;
pub mod config;
pub mod error;
pub mod experiments;
pub mod network;
pub mod output;
pub mod prng;
pub mod refine;

pub use annealing::{accept_move, anneal, propose_move, AnnealResult, AnnealingSchedule};
pub use error::{Error, Result};
pub use experiments::{
    evaluation_grid, objective, run_scenario, run_table, training_set, ExperimentResult, Scenario,
    TableConfig, TableRow, TargetFunction,
};
pub use network::{rms_error, Network, TrainingSet, WeightBounds};
pub use prng::{Prng, RandomSource};
pub use refine::{
    add_hidden_noise, backup_state, refine, restore_state, NoiseSpec, Objective, RefinementTrace,
    Snapshot, TraceRow,
};
