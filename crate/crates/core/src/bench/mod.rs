//! Benchmark harness: configuration, seeded runs, aggregation and file output.

pub mod config;
pub mod output;
pub mod runner;
pub mod table;

pub use config::{parse_config, PartialConfig, RunConfig};
pub use output::{read_runs, write_results};
pub use runner::{instance_seed, run_seed, run_single, run_suite, RunRecord};
pub use table::{aggregate, find_cell, format_table, TableCell};
