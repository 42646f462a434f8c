//! Check outcomes and the run configuration they embed.
//!
//! Every verifier returns a [`CheckReport`].  Reports are fully
//! deterministic: parameters live in ordered maps, values are canonical
//! rational strings, and no timing or host information is recorded, so two
//! runs with the same configuration serialize byte-for-byte identically.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use crate::scalar::Scalar;
use crate::Rat;

/// Knobs shared by all checks.  A check may deepen a window beyond the
/// configured hint when its factor count requires more room — the resolved
/// values it actually used are embedded in its report.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Tensor leg dimension N.
    pub dim: u32,
    /// h-adic truncation order K: exponents of h run over 0..K-1.
    pub h_order: u32,
    /// Default cap for nonnegative series orders (Taylor max, Laurent high).
    pub series_order: i16,
    /// Default Laurent floor hint (non-positive).
    pub laurent_low: i16,
    /// Level values c to run at; `None` lets each check pick its default.
    pub level: Option<Vec<Rat>>,
    /// Maximum generator-word length for basis enumerations.
    pub pbw_degree: u32,
    /// Largest generator mode allowed before a window error is raised.
    pub mode_bound: u32,
    /// Cap for the searched multiplier exponent in existential axioms.
    pub r_cap: u32,
    /// Family size n for multi-current checks.
    pub n: u32,
    /// Expect the check to fail; a clean failure is reported as a pass.
    pub negative_control: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 2,
            h_order: 2,
            series_order: 6,
            laurent_low: -6,
            level: None,
            pbw_degree: 2,
            mode_bound: 3,
            r_cap: 12,
            n: 1,
            negative_control: false,
        }
    }
}

impl RunConfig {
    /// The levels to run at, falling back to the check's own default.
    pub fn levels_or(&self, default: impl FnOnce() -> Vec<Rat>) -> Vec<Rat> {
        self.level.clone().unwrap_or_else(default)
    }

    /// Base parameter map each report starts from.
    pub fn params(&self) -> BTreeMap<String, Value> {
        let mut m = BTreeMap::new();
        m.insert("N".into(), json!(self.dim));
        m.insert("K".into(), json!(self.h_order));
        m.insert("series_order".into(), json!(self.series_order));
        m.insert("laurent_low".into(), json!(self.laurent_low));
        if let Some(levels) = &self.level {
            let ls: Vec<String> = levels.iter().map(|c| c.fmt_ratio()).collect();
            m.insert("level".into(), json!(ls));
        }
        m.insert("pbw_degree".into(), json!(self.pbw_degree));
        m.insert("mode_bound".into(), json!(self.mode_bound));
        m.insert("r_cap".into(), json!(self.r_cap));
        m.insert("n".into(), json!(self.n));
        m.insert("negative_control".into(), json!(self.negative_control));
        m
    }
}

/// Location and both values of the first disagreeing coefficient.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Counterexample {
    pub monomial: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub params: BTreeMap<String, Value>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl CheckReport {
    pub fn pass(check: &str, params: BTreeMap<String, Value>, detail: impl Into<String>) -> Self {
        CheckReport {
            check: check.into(),
            params,
            status: Status::Pass,
            counterexample: None,
            detail: detail.into(),
        }
    }

    pub fn fail(
        check: &str,
        params: BTreeMap<String, Value>,
        counterexample: Option<Counterexample>,
        detail: impl Into<String>,
    ) -> Self {
        CheckReport {
            check: check.into(),
            params,
            status: Status::Fail,
            counterexample,
            detail: detail.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Folds a negative control: an observed failure becomes a pass (the
    /// expectation was met), an observed pass becomes a failure.
    pub fn expect_failure(mut self) -> Self {
        match self.status {
            Status::Fail => {
                self.status = Status::Pass;
                self.detail = format!(
                    "negative control: failed as expected{}{}",
                    if self.detail.is_empty() { "" } else { " — " },
                    self.detail
                );
                self.counterexample = None;
            }
            Status::Pass => {
                self.status = Status::Fail;
                self.detail = format!(
                    "negative control: expected a failure but the identity held{}{}",
                    if self.detail.is_empty() { "" } else { " — " },
                    self.detail
                );
            }
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_control_flips_status() {
        let params = RunConfig::default().params();
        let failed = CheckReport::fail("x", params.clone(), None, "coefficient 3/2");
        let flipped = failed.expect_failure();
        assert!(flipped.passed());
        assert!(flipped.detail.contains("failed as expected"));
        let passed = CheckReport::pass("x", params, "");
        assert!(!passed.expect_failure().passed());
    }

    #[test]
    fn reports_serialize_deterministically() {
        let cfg = RunConfig::default();
        let r = CheckReport::pass("ybe", cfg.params(), "");
        let a = serde_json::to_string_pretty(&r).unwrap();
        let b = serde_json::to_string_pretty(&r).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"check\": \"ybe\""));
        assert!(a.contains("\"status\": \"pass\""));
    }
}
