//! JSON-facing check reports. The serialized form is deterministic:
//! no timestamps or timing fields, map keys in sorted order, and
//! base-ring elements rendered as canonical strings.

use serde::Serialize;
use vrx_core::report::GridReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "camelCase")]
pub struct CheckReport {
    pub schema_version: u32,
    pub check: String,
    pub instance: String,
    pub grid_size: u64,
    pub passed: u64,
    pub skipped: u64,
    pub failed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

impl CheckReport {
    pub fn from_grid(instance: &str, grid: &GridReport) -> Self {
        CheckReport {
            schema_version: SCHEMA_VERSION,
            check: grid.check.clone(),
            instance: instance.to_string(),
            grid_size: grid.total,
            passed: grid.passed,
            skipped: grid.skipped,
            failed: grid.failed,
            first_failure: grid.first_failure.clone(),
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }

    pub fn line(&self) -> String {
        format!(
            "{} {:<28} passed {:>6}  skipped {:>6}  failed {:>4}{}",
            if self.ok() { "PASS" } else { "FAIL" },
            self.check,
            self.passed,
            self.skipped,
            self.failed,
            match &self.first_failure {
                Some(w) => format!("  first: {w}"),
                None => String::new(),
            }
        )
    }
}
