//! Configuration, experiment runners, norm reports and the verification
//! suite behind the `apdiff` binary.

pub mod config;
pub mod error;
pub mod norms;
pub mod output;
pub mod pool;
pub mod report;
pub mod run;
pub mod verify;

pub use config::{ExperimentConfig, LoadedConfig};
pub use error::CliError;
pub use report::{CheckResult, Status, VerificationReport};
pub use run::{run_experiment, RunSummary};
pub use verify::{run_suite, SuiteOptions};
