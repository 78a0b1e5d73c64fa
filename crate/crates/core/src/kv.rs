//! Flat `key = value` text format shared by the config file and the AHP
//! data file.
//!
//! One entry per line, `#` starts a comment, blank lines are ignored. Keys
//! are case-sensitive and must be unique within a file.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KvError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
}

/// Parsed entries, in file order, with their line numbers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvEntries {
    pub entries: Vec<(usize, String, String)>,
}

impl KvEntries {
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(_, k, v)| (k.as_str(), v.as_str()))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }
}

pub fn parse(text: &str) -> Result<KvEntries, KvError> {
    let mut seen = BTreeMap::new();
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| KvError::Malformed {
            line,
            text: raw.trim().to_string(),
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(KvError::Malformed {
                line,
                text: raw.trim().to_string(),
            });
        }
        if seen.insert(key.to_string(), line).is_some() {
            return Err(KvError::Duplicate {
                line,
                key: key.to_string(),
            });
        }
        entries.push((line, key.to_string(), value.to_string()));
    }
    Ok(KvEntries { entries })
}
