//! Scenario runner for `scottlab-core`: reads a scenario file, dispatches to
//! a run mode, and emits a JSON report whose counts can be re-derived from
//! the report alone.

pub mod config;
pub mod error;
pub mod modes;
pub mod recount;
pub mod report;

use std::sync::Arc;

use scottlab_core::count::DEFAULT_BUDGET;
use scottlab_core::{CounterRegistry, Lab};
use serde_json::Value;

use config::{ConfigError, Scenario};
use error::CliError;
use modes::{Context, ModeRegistry, Outcome};
use recount::Recount;
use report::{Report, Settings, Verification, SCHEMA};

pub use error::exit;

/// Command-line values that take precedence over the `[run]` section.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<String>,
    pub budget: Option<u64>,
    pub seed: Option<u64>,
    pub counter: Option<String>,
    /// Extra `[run]` keys, e.g. from sweep flags.
    pub keys: Vec<(String, String)>,
}

pub const DEFAULT_COUNTER: &str = "exhaustive";

fn settings(scenario: &Scenario, o: &Overrides) -> Result<Settings, ConfigError> {
    Ok(Settings {
        budget: match o.budget {
            Some(b) => b,
            None => scenario.parse_key("budget")?.unwrap_or(DEFAULT_BUDGET),
        },
        seed: match o.seed {
            Some(s) => s,
            None => scenario.parse_key("seed")?.unwrap_or(0),
        },
        counter: o
            .counter
            .clone()
            .or_else(|| scenario.get("counter").map(str::to_string))
            .unwrap_or_else(|| DEFAULT_COUNTER.to_string()),
    })
}

fn execute(scenario: &Scenario, settings: &Settings, lab: Lab) -> Result<(String, Outcome), CliError> {
    let registry = ModeRegistry::standard();
    let name = scenario
        .get("mode")
        .ok_or_else(|| ConfigError::at(None, "missing `mode` in [run]"))?;
    let mode = registry.get(name).ok_or_else(|| {
        let known: Vec<&str> = registry.names().collect();
        ConfigError::at(
            scenario.line_of("mode"),
            format!("unknown mode {name:?}; expected one of {}", known.join(", ")),
        )
    })?;
    let ctx = Context {
        scenario,
        settings,
        lab,
    };
    Ok((name.to_string(), mode.run(&ctx)?))
}

/// Runs a scenario with command-line overrides applied.
pub fn run_scenario(mut scenario: Scenario, overrides: &Overrides) -> Result<Report, CliError> {
    if let Some(m) = &overrides.mode {
        scenario.set("mode", m.clone());
    }
    for (k, v) in &overrides.keys {
        scenario.set(k, v.clone());
    }
    let settings = settings(&scenario, overrides)?;
    let model = scenario.model()?;
    let counter = CounterRegistry::standard()
        .get(&settings.counter)
        .map_err(|e| ConfigError::at(scenario.line_of("counter"), e.to_string()))?;
    let lab = Lab::new(model, counter).with_budget(settings.budget);
    let (mode, outcome) = execute(&scenario, &settings, lab)?;
    let passed = outcome.checks.iter().all(|c| c.pass);
    Ok(Report {
        schema: SCHEMA,
        mode,
        scenario,
        settings,
        result: outcome.result,
        checks: outcome.checks,
        passed,
        verification: None,
    })
}

fn diff(path: &str, a: &Value, b: &Value, out: &mut Vec<String>) {
    const LIMIT: usize = 20;
    if out.len() >= LIMIT || a == b {
        return;
    }
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            for k in x.keys().chain(y.keys().filter(|k| !x.contains_key(*k))) {
                let null = Value::Null;
                diff(&format!("{path}/{k}"), x.get(k).unwrap_or(&null), y.get(k).unwrap_or(&null), out);
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            for (i, (u, v)) in x.iter().zip(y).enumerate() {
                diff(&format!("{path}/{i}"), u, v, out);
            }
        }
        _ => out.push(format!("{path}: recorded {a}, recounted {b}")),
    }
}

/// Re-runs the report's scenario with every count routed away from the
/// counter that produced it, and compares results and verdicts.
pub fn verify_report(report: &Report) -> Result<Verification, CliError> {
    if report.schema != SCHEMA {
        return Err(ConfigError::at(None, format!("unsupported report schema {}", report.schema)).into());
    }
    let model = report.scenario.model()?;
    let recount = Arc::new(Recount::new(&report.settings.counter));
    let lab = Lab::new(model, recount.clone()).with_budget(report.settings.budget);
    let (_, outcome) = execute(&report.scenario, &report.settings, lab)?;
    let mut mismatches = Vec::new();
    diff("result", &report.result, &outcome.result, &mut mismatches);
    let verdict = outcome.checks.iter().all(|c| c.pass);
    let checks_match = outcome.checks == report.checks && verdict == report.passed;
    if verdict != report.passed {
        mismatches.push(format!("verdict: recorded {}, recounted {verdict}", report.passed));
    }
    if !checks_match {
        for (a, b) in report.checks.iter().zip(&outcome.checks) {
            if a != b {
                mismatches.push(format!("check {}: recorded {}, recounted {}", a.name, a.pass, b.pass));
            }
        }
        if report.checks.len() != outcome.checks.len() {
            mismatches.push("the number of checks differs".into());
        }
    }
    Ok(Verification {
        routes: recount.routes(),
        result_matches: report.result == outcome.result,
        checks_match,
        mismatches,
    })
}
