//! Configuration, data ingest, pattern files and the command implementations.

pub mod commands;
pub mod config;
pub mod ingest;
pub mod pattern_csv;

pub use commands::{cmd_compare, cmd_fit, cmd_simulate, cmd_study, run, RunOptions};
pub use config::{Command, DataSource, EventFilter, ExperimentConfig, FitPreset};
pub use ingest::{ingest_events, ingest_events_file, IngestReport};
pub use pattern_csv::{pattern_from_csv, pattern_to_csv, read_pattern, write_pattern};
