//! Flat key-value config files mirroring the CLI flags.
//!
//! One `key = value` pair per line, `#` starts a comment. Keys are the
//! long flag names; values use the same syntax as on the command line
//! (comma lists for repeatable flags, `a..b` for inclusive tau ranges).
//! Flags given on the command line override file entries. Unknown keys
//! are an error, not ignored.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{CliError, Result, io_err};

pub struct ConfigFile {
    path: String,
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path, allowed_keys: &[&str]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(io_err(format!("reading config {}", path.display())))?;
        let mut entries = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Parse {
                    path: path.display().to_string(),
                    line: idx + 1,
                    message: format!("expected `key = value`, got {raw_line:?}"),
                });
            };
            let key = key.trim().to_owned();
            if !allowed_keys.contains(&key.as_str()) {
                return Err(CliError::Parse {
                    path: path.display().to_string(),
                    line: idx + 1,
                    message: format!("unknown key {key:?}"),
                });
            }
            entries.insert(key, value.trim().to_owned());
        }
        Ok(Self { path: path.display().to_string(), entries })
    }

    fn bad_value(&self, key: &str, value: &str, what: &str) -> CliError {
        CliError::Usage(format!("config {}: key {key:?}: cannot parse {value:?} as {what}", self.path))
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.entries
            .get(key)
            .map(|v| v.parse().map_err(|_| self.bad_value(key, v, "an unsigned integer")))
            .transpose()
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        self.entries
            .get(key)
            .map(|v| v.parse().map_err(|_| self.bad_value(key, v, "an unsigned integer")))
            .transpose()
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.entries
            .get(key)
            .map(|v| v.parse().map_err(|_| self.bad_value(key, v, "a real number")))
            .transpose()
    }

    pub fn get_string(&self, key: &str) -> Option<String> {
        self.entries.get(key).cloned()
    }

    pub fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|item| {
                    item.trim()
                        .parse()
                        .map_err(|_| self.bad_value(key, item, "a real number"))
                })
                .collect::<Result<Vec<f64>>>()
                .map(Some),
        }
    }

    pub fn get_tau_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => {
                let mut out = Vec::new();
                for item in v.split(',') {
                    expand_tau_item(item.trim(), &mut out)
                        .map_err(|msg| self.bad_value(key, item, &msg))?;
                }
                Ok(Some(out))
            }
        }
    }
}

/// Parses one tau token: a bare index or an inclusive range `a..b`.
pub fn expand_tau_item(item: &str, out: &mut Vec<usize>) -> std::result::Result<(), String> {
    if let Some((lo, hi)) = item.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| "a change-point index".to_string())?;
        let hi: usize = hi.trim().parse().map_err(|_| "a change-point index".to_string())?;
        if lo > hi {
            return Err(format!("an increasing range (got {lo}..{hi})"));
        }
        out.extend(lo..=hi);
        Ok(())
    } else {
        let v: usize = item.trim().parse().map_err(|_| "a change-point index".to_string())?;
        out.push(v);
        Ok(())
    }
}

/// Parses the repeatable `--tau` flag values (each may be a range).
pub fn parse_tau_flags(items: &[String]) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in items {
        for piece in item.split(',') {
            expand_tau_item(piece.trim(), &mut out)
                .map_err(|msg| CliError::Usage(format!("--tau {piece:?}: expected {msg}")))?;
        }
    }
    Ok(out)
}
