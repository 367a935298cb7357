//! `key=value` benchmark configuration. Keys mirror the long flags of the
//! `benchmark` subcommand; `#` starts a comment.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

pub const KEYS: &[&str] = &[
    "scenarios",
    "sizes",
    "methods",
    "replicates",
    "grid",
    "lambdas",
    "gamma",
    "tau",
    "seed",
];

pub fn parse(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("line {}: expected key=value, got {line:?}", ln + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::usage(format!("line {}: unknown key {key:?}", ln + 1)));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

pub fn read(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| CliError::usage(format!("{}: {}", path.display(), e.message)))
}

/// Comma-separated list parsed element by element.
pub fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::usage(format!("{key}: cannot parse {:?}", s.trim())))
        })
        .collect()
}

pub fn scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::usage(format!("{key}: cannot parse {value:?}")))
}
