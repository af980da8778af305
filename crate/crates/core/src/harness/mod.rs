//! Experiment orchestration and file I/O.

pub mod config;
pub mod experiment;
pub mod export;
pub mod pool_io;

pub use config::ExperimentConfig;
pub use experiment::{run_experiment, sweep_pool_size, ExperimentReport, SweepRow};
pub use export::{export_report, export_sweep};
pub use pool_io::{ingest_pool, write_pool, PoolSummary};
