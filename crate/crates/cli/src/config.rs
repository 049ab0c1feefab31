//! Scenario files: a line-oriented sectioned format.
//!
//! ```text
//! [model]
//! a = 4
//!
//! [functions]
//! succ/1 = a1 + 1
//!
//! [run]
//! mode = ehrenfeucht
//! depth = 4
//! funcs = f0, succ
//! target = 1010
//! ```
//!
//! Blank lines and lines starting with `#` or `;` are ignored. `[run]` keys
//! may repeat where noted (`require`, `family`, `formula`).

use std::fmt;
use std::str::FromStr;

use scottlab_core::model::FuncDef;
use scottlab_core::MiniModel;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl ConfigError {
    pub fn at(line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

const RUN_KEYS: &[(&str, bool)] = &[
    ("mode", false),
    ("depth", false),
    ("funcs", false),
    ("target", false),
    ("n_final", false),
    ("require", true),
    ("family", true),
    ("lemma", false),
    ("level", false),
    ("formula", true),
    ("sigma", false),
    ("args", false),
    ("function", false),
    ("g", false),
    ("a_range", false),
    ("all_functions", false),
    ("cases", false),
    ("budget", false),
    ("seed", false),
    ("counter", false),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub key: String,
    pub value: String,
    #[serde(skip)]
    pub line: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub a: u32,
    pub functions: Vec<String>,
    pub run: Vec<Entry>,
    #[serde(skip)]
    function_lines: Vec<Option<usize>>,
}

enum Section {
    None,
    Model,
    Functions,
    Run,
}

impl FromStr for Scenario {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut section = Section::None;
        let mut a = None;
        let mut functions = Vec::new();
        let mut function_lines = Vec::new();
        let mut run: Vec<Entry> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = Some(i + 1);
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') || t.starts_with(';') {
                continue;
            }
            if let Some(name) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = match name.trim() {
                    "model" => Section::Model,
                    "functions" => Section::Functions,
                    "run" => Section::Run,
                    other => return Err(ConfigError::at(line, format!("unknown section [{other}]"))),
                };
                continue;
            }
            match section {
                Section::None => return Err(ConfigError::at(line, "entry outside of any section")),
                Section::Functions => {
                    functions.push(t.to_string());
                    function_lines.push(line);
                }
                Section::Model | Section::Run => {
                    let (k, v) = t
                        .split_once('=')
                        .ok_or_else(|| ConfigError::at(line, "expected `key = value`"))?;
                    let (k, v) = (k.trim(), v.trim());
                    if matches!(section, Section::Model) {
                        match k {
                            "a" => {
                                a = Some(v.parse::<u32>().map_err(|_| ConfigError::at(line, format!("invalid width {v:?}")))?)
                            }
                            _ => return Err(ConfigError::at(line, format!("unknown [model] key {k:?}"))),
                        }
                        continue;
                    }
                    let Some(&(_, repeatable)) = RUN_KEYS.iter().find(|(name, _)| *name == k) else {
                        return Err(ConfigError::at(line, format!("unknown [run] key {k:?}")));
                    };
                    if !repeatable && run.iter().any(|e| e.key == k) {
                        return Err(ConfigError::at(line, format!("key {k:?} given twice")));
                    }
                    run.push(Entry {
                        key: k.to_string(),
                        value: v.to_string(),
                        line,
                    });
                }
            }
        }
        let a = a.ok_or_else(|| ConfigError::at(None, "missing `a` in [model]"))?;
        Ok(Scenario {
            a,
            functions,
            run,
            function_lines,
        })
    }
}

impl Scenario {
    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::at(None, format!("cannot read {}: {e}", path.display())))?;
        text.parse()
    }

    pub fn model(&self) -> Result<MiniModel, ConfigError> {
        let mut m = MiniModel::new(self.a).map_err(|e| ConfigError::at(None, e.to_string()))?;
        for (i, text) in self.functions.iter().enumerate() {
            let line = self.function_lines.get(i).copied().flatten();
            let def = FuncDef::parse(text).map_err(|e| ConfigError::at(line, e.to_string()))?;
            m.define(def).map_err(|e| ConfigError::at(line, e.to_string()))?;
        }
        Ok(m)
    }

    pub fn entry(&self, key: &str) -> Option<&Entry> {
        self.run.iter().find(|e| e.key == key)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entry(key).map(|e| e.value.as_str())
    }

    pub fn all(&self, key: &str) -> impl Iterator<Item = &Entry> {
        let key = key.to_string();
        self.run.iter().filter(move |e| e.key == key)
    }

    /// Replaces (or adds) a non-repeatable key, as command-line flags do.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.run.iter_mut().find(|e| e.key == key) {
            Some(e) => e.value = value,
            None => self.run.push(Entry {
                key: key.to_string(),
                value,
                line: None,
            }),
        }
    }

    pub fn parse_key<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|err| ConfigError::at(e.line, format!("invalid `{key}` value {:?}: {err}", e.value))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.parse_key(key)?
            .ok_or_else(|| ConfigError::at(None, format!("missing `{key}` in [run]")))
    }

    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.entry(key).and_then(|e| e.line)
    }
}

/// A comma-separated list; an empty value is the empty list.
pub fn split_list(value: &str) -> Vec<&str> {
    if value.trim().is_empty() {
        return Vec::new();
    }
    value.split(',').map(str::trim).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# comment
[model]
a = 4

[functions]
succ/1 = a1 + 1
bit3/1 = (a1)#3

[run]
mode = generic
require = extend
require = disagree f0
family = 0, 1
";

    #[test]
    fn parses_sections() {
        let s: Scenario = SAMPLE.parse().unwrap();
        assert_eq!(s.a, 4);
        assert_eq!(s.functions.len(), 2);
        assert_eq!(s.get("mode"), Some("generic"));
        assert_eq!(s.all("require").count(), 2);
        assert_eq!(s.entry("family").unwrap().line, Some(13));
        let m = s.model().unwrap();
        assert_eq!(m.apply("bit3", &[8]).unwrap(), 1);
    }

    #[test]
    fn reports_line_numbers() {
        let bad = "[model]\na = 4\n[run]\nmode = count\nmode = count\n";
        assert_eq!(bad.parse::<Scenario>().unwrap_err().line, Some(5));
        let bad = "[model]\na = 4\n[run]\nspeed = 3\n";
        assert_eq!(bad.parse::<Scenario>().unwrap_err().line, Some(4));
        let bad = "[model]\na = 4\n[functions]\nsucc/1 = a1 +\n";
        assert_eq!(bad.parse::<Scenario>().unwrap().model().unwrap_err().line, Some(4));
        assert!("[run]\nmode = count\n".parse::<Scenario>().is_err());
        assert!("a = 3\n".parse::<Scenario>().is_err());
    }

    #[test]
    fn typed_getters() {
        let s: Scenario = "[model]\na = 3\n[run]\ndepth = x\n".parse().unwrap();
        let err = s.require::<usize>("depth").unwrap_err();
        assert_eq!(err.line, Some(4));
        assert!(s.require::<usize>("n_final").is_err());
        assert_eq!(split_list(" f0 , succ"), vec!["f0", "succ"]);
        assert!(split_list("").is_empty());
    }
}
