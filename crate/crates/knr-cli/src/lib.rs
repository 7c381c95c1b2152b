//! Scenario runner for the Kerr-resonator simulator: TOML scenario files,
//! builtin operating points, a master-equation path and a reproducible
//! parallel trajectory path, CSV/JSON emission, and summary extraction.

pub mod error;
pub mod output;
pub mod report;
pub mod runner;
pub mod scenario;

pub use error::CliError;
