//! Check results: named residuals against tolerances, plus run metadata.

use serde::{Deserialize, Serialize};

/// One named residual. `at_least` flips the comparison for quantities that
/// must exceed a threshold (convergence orders, fidelities, decays).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResidualEntry {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub at_least: bool,
}

impl ResidualEntry {
    pub fn new(name: &str, value: f64, tolerance: f64) -> Self {
        ResidualEntry {
            name: name.into(),
            value,
            tolerance,
            at_least: false,
        }
    }

    /// Entry that passes when `value ≥ tolerance`.
    pub fn floor(name: &str, value: f64, tolerance: f64) -> Self {
        ResidualEntry {
            name: name.into(),
            value,
            tolerance,
            at_least: true,
        }
    }

    /// Informational entry: reported, never gated.
    pub fn info(name: &str, value: f64) -> Self {
        ResidualEntry {
            name: name.into(),
            value,
            tolerance: f64::INFINITY,
            at_least: false,
        }
    }

    pub fn ok(&self) -> bool {
        if self.at_least {
            self.value >= self.tolerance
        } else {
            self.value <= self.tolerance
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct Metadata {
    pub dims: Vec<usize>,
    pub runtime_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub engine: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub residuals: Vec<ResidualEntry>,
    pub pass: bool,
    pub expected_nonzero: bool,
    pub metadata: Metadata,
    /// Present when the check errored instead of producing residuals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckResult {
    /// Assemble a result; `pass` is all residuals within tolerance unless
    /// the outcome is flagged expected-nonzero.
    pub fn from_residuals(
        name: &str,
        residuals: Vec<ResidualEntry>,
        expected_nonzero: bool,
        metadata: Metadata,
    ) -> Self {
        let pass = expected_nonzero || residuals.iter().all(|r| r.ok());
        CheckResult {
            name: name.into(),
            residuals,
            pass,
            expected_nonzero,
            metadata,
            error: None,
        }
    }

    pub fn from_error(name: &str, err: &crate::error::Error, metadata: Metadata) -> Self {
        CheckResult {
            name: name.into(),
            residuals: Vec::new(),
            pass: false,
            expected_nonzero: false,
            metadata,
            error: Some(err.to_string()),
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals
            .iter()
            .filter(|r| !r.at_least && r.tolerance.is_finite())
            .map(|r| r.value)
            .fold(0.0, f64::max)
    }
}

/// Pass/fail/flagged tallies over a run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub flagged: usize,
}

impl Summary {
    pub fn from_results(results: &[CheckResult]) -> Self {
        let mut s = Summary {
            total: results.len(),
            ..Summary::default()
        };
        for r in results {
            if r.expected_nonzero {
                s.flagged += 1;
            }
            if r.pass {
                s.passed += 1;
            } else {
                s.failed += 1;
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_semantics() {
        let ok = ResidualEntry::new("r", 1e-12, 1e-10);
        let bad = ResidualEntry::new("r", 1e-8, 1e-10);
        let floor_ok = ResidualEntry::floor("order", 1.8, 0.9);
        assert!(ok.ok() && !bad.ok() && floor_ok.ok());

        let r = CheckResult::from_residuals("x", vec![ok.clone(), bad.clone()], false, Metadata::default());
        assert!(!r.pass);
        let r2 = CheckResult::from_residuals("x", vec![bad], true, Metadata::default());
        assert!(r2.pass && r2.expected_nonzero);
    }

    #[test]
    fn summary_counts() {
        let m = Metadata::default();
        let results = vec![
            CheckResult::from_residuals("a", vec![ResidualEntry::new("r", 0.0, 1.0)], false, m.clone()),
            CheckResult::from_residuals("b", vec![ResidualEntry::new("r", 2.0, 1.0)], false, m.clone()),
            CheckResult::from_residuals("c", vec![ResidualEntry::new("r", 2.0, 1.0)], true, m),
        ];
        let s = Summary::from_results(&results);
        assert_eq!((s.total, s.passed, s.failed, s.flagged), (3, 2, 1, 1));
    }
}
