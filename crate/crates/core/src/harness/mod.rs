//! Configuration, sweeps, file output and the CLI self-checks.

pub mod check;
pub mod config;
pub mod output;
pub mod sweep;

pub use config::{parse_config, EstimateConfig, SimConfig, SweepAxis, SweepParam};
pub use output::{emit_snapshot, emit_timeseries, read_numeric_csv, read_snapshot_csv};
pub use sweep::{classify_empirical, run_sweep, Empirical, EmpiricalClass, PhaseCell, SweepReport, SweepSpec};
