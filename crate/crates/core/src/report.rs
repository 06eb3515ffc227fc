//! Grid check reports. Every identity checker sweeps a finite grid and
//! counts passes, window rejections (skips) and failures; the first
//! failure keeps a rendered witness.

use crate::vertexcore::{Avail, State};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridReport {
    pub check: String,
    pub total: u64,
    pub passed: u64,
    pub skipped: u64,
    pub failed: u64,
    pub first_failure: Option<String>,
}

impl GridReport {
    pub fn new(check: &str) -> Self {
        GridReport {
            check: check.to_string(),
            total: 0,
            passed: 0,
            skipped: 0,
            failed: 0,
            first_failure: None,
        }
    }

    pub fn pass(&mut self) {
        self.total += 1;
        self.passed += 1;
    }

    pub fn skip(&mut self) {
        self.total += 1;
        self.skipped += 1;
    }

    pub fn fail(&mut self, witness: impl FnOnce() -> String) {
        self.total += 1;
        self.failed += 1;
        if self.first_failure.is_none() {
            self.first_failure = Some(witness());
        }
    }

    /// Records a residual evaluation: pass iff exactly zero, skip on
    /// truncation escape.
    pub fn record_residual(&mut self, r: Avail<State>, witness: impl FnOnce(&State) -> String) {
        match r {
            Ok(res) if res.is_zero() => self.pass(),
            Ok(res) => self.fail(|| witness(&res)),
            Err(_) => self.skip(),
        }
    }

    pub fn record_bool(&mut self, r: Avail<bool>, witness: impl FnOnce() -> String) {
        match r {
            Ok(true) => self.pass(),
            Ok(false) => self.fail(witness),
            Err(_) => self.skip(),
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }

    pub fn absorb(&mut self, other: &GridReport) {
        self.total += other.total;
        self.passed += other.passed;
        self.skipped += other.skipped;
        self.failed += other.failed;
        if self.first_failure.is_none() {
            self.first_failure = other.first_failure.clone();
        }
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: {}/{} passed, {} skipped, {} failed{}",
            self.check,
            self.passed,
            self.total,
            self.skipped,
            self.failed,
            match &self.first_failure {
                Some(w) => format!(" (first: {w})"),
                None => String::new(),
            }
        )
    }
}
