//! Verification suites and reports for the `verify` command.

pub mod config;
pub mod report;
pub mod suites;

pub use config::{resolve, Cli, ConfigError, Format, Suite, SuiteConfig};
pub use report::{emit, Record, Report, Summary};
pub use suites::run;
