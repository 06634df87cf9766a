//! Batch front end for the `thermoconvex` library: configuration, check
//! suites, reports and the `eval` and `list` commands.

pub mod config;
pub mod error;
pub mod eval;
pub mod list;
pub mod presets;
pub mod report;
pub mod suites;

pub use config::{RunConfig, Suite};
pub use error::CliError;
pub use report::RunReport;
pub use suites::run_check;
