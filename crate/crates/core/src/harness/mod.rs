//! Experiment plumbing: configuration files, field persistence and ε-sweeps.

pub mod config;
pub mod field_io;
pub mod sweep;

pub use config::{parse_config, parse_config_with_overrides, Check, ExperimentConfig, Modes, Resolution};
pub use field_io::{decode_field, encode_field, load_field, save_field, StoredField};
pub use sweep::{run_sweep, SweepEntry, SweepOutcome, Verdict, VerdictState};
