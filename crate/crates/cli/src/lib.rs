//! Library side of the `vrx` command-line tool: instance-spec parsing,
//! suite orchestration, and deterministic JSON reports.

pub mod report;
pub mod spec;
pub mod suite;

pub use report::{CheckReport, SCHEMA_VERSION};
pub use spec::{parse_instance, InstanceSpec, SpecError};
pub use suite::{default_suites, run_suite, SuiteConfig, SUITES};
