//! Run modes, each behind [`Mode`] and looked up by name.

mod count;
mod ehrenfeucht;
mod filter;
mod generic;
mod lemma;

use std::collections::BTreeMap;

use scottlab_core::generic::Requirement;
use scottlab_core::{BinaryString, Lab};
use serde_json::Value;

use crate::config::{ConfigError, Entry, Scenario};
use crate::error::CliError;
use crate::report::{Check, Settings};

pub use lemma::LemmaKind;

pub struct Context<'a> {
    pub scenario: &'a Scenario,
    pub settings: &'a Settings,
    pub lab: Lab,
}

pub struct Outcome {
    pub result: Value,
    pub checks: Vec<Check>,
}

pub trait Mode: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, ctx: &Context<'_>) -> Result<Outcome, CliError>;
}

pub struct ModeRegistry {
    modes: BTreeMap<&'static str, Box<dyn Mode>>,
}

impl ModeRegistry {
    pub fn new() -> Self {
        Self {
            modes: BTreeMap::new(),
        }
    }

    pub fn standard() -> Self {
        let mut r = Self::new();
        r.register(count::Count);
        r.register(lemma::LemmaCheck);
        r.register(ehrenfeucht::Ehrenfeucht);
        r.register(generic::Generic);
        r.register(filter::Filter);
        r
    }

    pub fn register<M: Mode + 'static>(&mut self, mode: M) {
        self.modes.insert(mode.name(), Box::new(mode));
    }

    pub fn get(&self, name: &str) -> Option<&dyn Mode> {
        self.modes.get(name).map(|m| m.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.modes.keys().copied()
    }
}

impl Default for ModeRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

/// A label of length `level`; `""` stands for the empty label.
fn parse_label(text: &str, level: u32, line: Option<usize>) -> Result<BinaryString, ConfigError> {
    let text = if text == "\"\"" { "" } else { text };
    let s: BinaryString = text
        .parse()
        .map_err(|_| ConfigError::at(line, format!("invalid label {text:?}")))?;
    if s.len() != level as usize {
        return Err(ConfigError::at(line, format!("label {text:?} does not have length {level}")));
    }
    Ok(s)
}

fn parse_requirements(ctx: &Context<'_>) -> Result<Vec<Requirement>, ConfigError> {
    let model = ctx.lab.model();
    ctx.scenario
        .all("require")
        .map(|e: &Entry| {
            let r: Requirement = e
                .value
                .parse()
                .map_err(|err: scottlab_core::Error| ConfigError::at(e.line, err.to_string()))?;
            match &r {
                Requirement::Extend => {}
                Requirement::Disagree { function } | Requirement::Avoid { function, .. } => {
                    model
                        .function(function)
                        .map_err(|err| ConfigError::at(e.line, err.to_string()))?;
                }
            }
            if let Requirement::Avoid { target, .. } = &r {
                if target.len() != model.width() as usize {
                    return Err(ConfigError::at(
                        e.line,
                        format!("avoided target {target} does not have length {}", model.width()),
                    ));
                }
            }
            Ok(r)
        })
        .collect()
}
