//! Configuration parsing, dispatch and report emission.
//!
//! A run reads sectioned TOML, validates all of it up front, and writes a
//! JSON summary (verdicts, constants, residuals) plus one CSV per scan.
//! Summaries carry a hash of the configuration and no timestamp, so
//! identical inputs give byte-identical output.

mod config;
mod run;

pub use config::{
    parse_config, BackgroundSection, EvolutionSection, GridSection, HardySection, Mode, MultiplierSection,
    OutputSection, RunConfig,
};
pub use run::{
    config_hash, execute, exit, exit_code, run, EvolutionRecord, HardyRecord, Provenance, ReportRecord, RunOutput,
    Summary, HARDY_SPREAD_LIMIT,
};
