use serde::{Deserialize, Serialize};

use crate::config::Scenario;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    /// Folds per-case results into one check with a pass tally.
    pub fn tally(name: impl Into<String>, results: impl IntoIterator<Item = bool>) -> Self {
        let (mut ok, mut n) = (0usize, 0usize);
        for r in results {
            n += 1;
            ok += r as usize;
        }
        Check::new(name, ok == n).with_detail(format!("{ok}/{n}"))
    }
}

/// Settings that shape a run beyond the scenario file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Settings {
    pub budget: u64,
    pub seed: u64,
    pub counter: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    /// How recounts were routed, e.g. `exhaustive` or `compressed`.
    pub routes: Vec<(String, u64)>,
    pub result_matches: bool,
    pub checks_match: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mismatches: Vec<String>,
}

impl Verification {
    pub fn reproduced(&self) -> bool {
        self.result_matches && self.checks_match
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub mode: String,
    pub scenario: Scenario,
    pub settings: Settings,
    pub result: serde_json::Value,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
}
