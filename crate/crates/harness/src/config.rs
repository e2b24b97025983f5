//! Flat `key = value` experiment files.
//!
//! `#` starts a comment. Keys may repeat (e.g. one `line` per absorption
//! line); single-valued getters take the last occurrence, so later lines and
//! command-line overrides win.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lwir_core::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
struct Entry {
    key: String,
    value: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    source: PathBuf,
    entries: Vec<Entry>,
}

impl Config {
    pub fn parse(source: &Path, text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: source.to_path_buf(),
                    line: i + 1,
                    reason: format!("expected `key = value`, found `{line}`"),
                });
            };
            let key = k.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(Error::Parse {
                    path: source.to_path_buf(),
                    line: i + 1,
                    reason: format!("bad key `{key}`"),
                });
            }
            entries.push(Entry {
                key: key.to_string(),
                value: v.trim().to_string(),
            });
        }
        Ok(Self {
            source: source.to_path_buf(),
            entries,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path, &text)
    }

    pub fn source(&self) -> &Path {
        &self.source
    }

    /// Replace every occurrence of `key` with a single value.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.retain(|e| e.key != key);
        self.entries.push(Entry {
            key: key.to_string(),
            value: value.into(),
        });
    }

    /// Append one more occurrence of `key`.
    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.entries.push(Entry {
            key: key.to_string(),
            value: value.into(),
        });
    }

    pub fn remove(&mut self, key: &str) {
        self.entries.retain(|e| e.key != key);
    }

    /// Apply a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let Some((k, v)) = assignment.split_once('=') else {
            return Err(Error::field(assignment, "override must look like key=value"));
        };
        self.set(k.trim(), v.trim());
        Ok(())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.key.as_str())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|e| e.key == key)
            .map(|e| e.value.as_str())
    }

    pub fn get_all(&self, key: &str) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.key == key)
            .map(|e| e.value.as_str())
            .collect()
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::field(key, "missing"))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key).map(|v| parse_value(key, v)).transpose()
    }

    pub fn parsed_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn required<T: FromStr>(&self, key: &str) -> Result<T> {
        parse_value(key, self.require(key)?)
    }

    /// Whitespace- or comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.get(key).map(|v| parse_list(key, v)).transpose()
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            None => Ok(false),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(v) => Err(Error::field(key, format!("`{v}` is not a boolean"))),
        }
    }

    /// Fail on keys outside `known`, naming the first offender.
    pub fn check_known(&self, known: &[&str]) -> Result<()> {
        match self.keys().find(|k| !known.contains(k)) {
            Some(k) => Err(Error::field(k, format!("unknown key in {}", self.source.display()))),
            None => Ok(()),
        }
    }
}

pub fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::field(key, format!("cannot parse `{v}`")))
}

pub fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}
