//! Command-line front end: config loading, experiment drivers and
//! CSV/JSON emission.

pub mod config;
pub mod run;

pub use config::{ExperimentConfig, SweepVariant};
pub use run::{
    hierarchy_info, run_bound, run_levelset, run_lyapunov_sweep, run_solve, LevelsetResult,
    LevelsetRow, LevelsetStatus, SolveResult, SweepResult, SweepRow,
};
