//! `key = value` config files with `[section]` headers.
//!
//! Keys mirror the long flag names of the subcommand named by the section.
//! Keys before any header apply to every subcommand. File values are turned
//! into flags placed ahead of the command line, so explicit flags win.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Syntax { path: String, line: usize, message: String },
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct ConfigFile {
    sections: BTreeMap<String, Vec<(String, String)>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut section = String::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| ConfigError::Syntax { path: origin.to_string(), line: no + 1, message: message.to_string() };
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| err("unterminated section header"))?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected `key = value`"))?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(err("invalid key"));
            }
            let value = unquote(value.trim());
            cfg.sections.entry(section.clone()).or_default().push((key.to_string(), value));
        }
        Ok(cfg)
    }

    /// Flags for `subcommand`: global keys first, then the section's own.
    pub fn flags_for(&self, subcommand: &str) -> Vec<String> {
        let mut out = Vec::new();
        for name in ["", subcommand] {
            for (k, v) in self.sections.get(name).into_iter().flatten() {
                out.push(format!("--{k}"));
                out.push(v.clone());
            }
        }
        out
    }
}

fn unquote(v: &str) -> String {
    if v.len() >= 2 && v.starts_with('"') && v.ends_with('"') {
        v[1..v.len() - 1].to_string()
    } else {
        v.to_string()
    }
}

/// Renders one section; values are quoted so expressions survive a reload.
pub fn render(section: &str, entries: &[(&str, String)]) -> String {
    let mut s = format!("[{section}]\n");
    for (k, v) in entries {
        s.push_str(&format!("{k} = \"{v}\"\n"));
    }
    s
}
