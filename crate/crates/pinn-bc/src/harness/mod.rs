//! Experiment harness: configuration, training runs, the training-free
//! least-squares oracle, convergence studies, sweeps, export, and the CLI.

pub mod cli;
pub mod config;
pub mod export;
pub mod oracle;
pub mod run;
pub mod study;
pub mod sweep;

pub use config::{ExperimentConfig, ModelKind, PlacementKind};
pub use export::{export_records, export_study_series, load_records, save_records, ExportFormat};
pub use oracle::{least_squares_oracle, oracle_rows, residual_norm_at, solve_least_squares, OracleSolution};
pub use run::{load_reference, pinn_points, run_experiment, target_field, RunRecord};
pub use study::{convergence_study, fit_rate, StudyMode, StudyResult};
pub use sweep::{sweep, SweepEntry};
