//! Scenario configs, the built-in catalog, sweeps and their CSV records.

pub mod catalog;
pub mod config;
pub mod records;
pub mod run;

pub use catalog::{builtin, builtin_names, list_scenarios};
pub use config::{parse_snr_range, KernelChoice, KernelConfig, Overrides, ScenarioConfig, SnrConfig};
pub use records::{read_csv, sweep_records, write_csv, CsvRecord, CSV_COLUMNS};
pub use run::{analyze, design, format_analysis, run, DesignOutput, RunOutput, SeriesAnalysis};
