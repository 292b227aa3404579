//! Scenario configs, batch orchestration and versioned reports for the
//! `catent` binary.

pub mod config;
pub mod presets;
pub mod report;
pub mod run;

pub use config::{load_batch, load_config, load_config_file, ScenarioConfig, Violation};
pub use presets::{list_builtin_models, preset, Preset};
pub use report::{emit_batch, emit_report, series_csv, Format, ReportRecord};
pub use run::{run_batch, run_scenario, RunOptions};

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const INPUT: u8 = 1;
    pub const NUMERIC: u8 = 2;
    pub const CONTRACT: u8 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid config:\n{}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Engine(#[from] catent_core::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| format!("  {x}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Engine(e) => engine_exit_code(e),
            _ => exit::INPUT,
        }
    }
}

pub fn engine_exit_code(e: &catent_core::Error) -> u8 {
    use catent_core::Error as E;
    match e {
        E::Input(_) | E::DimensionMismatch { .. } => exit::INPUT,
        E::Numeric(_) | E::Resource(_) => exit::NUMERIC,
        E::Contract(_) | E::Collapse(_) => exit::CONTRACT,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use catent_core::Error as E;

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(CliError::Parse("x".into()).exit_code(), exit::INPUT);
        assert_eq!(CliError::Invalid(Vec::new()).exit_code(), exit::INPUT);
        assert_eq!(CliError::Engine(E::Input("x".into())).exit_code(), exit::INPUT);
        assert_eq!(CliError::Engine(E::Numeric("x".into())).exit_code(), exit::NUMERIC);
        assert_eq!(CliError::Engine(E::Resource("x".into())).exit_code(), exit::NUMERIC);
        assert_eq!(CliError::Engine(E::Contract("x".into())).exit_code(), exit::CONTRACT);
    }
}
