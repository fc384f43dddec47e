//! JSON config files layered under command-line flags.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::parser::ValueSource;
use clap::ArgMatches;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

pub struct ConfigFile {
    pub path: PathBuf,
    text: String,
    entries: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config file {}", path.display()))?;
        let value: Value = serde_json::from_str(&text).map_err(|e| anyhow::anyhow!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))?;
        let Value::Object(entries) = value else {
            bail!("{}: top level must be a JSON object", path.display());
        };
        Ok(Self { path: path.to_path_buf(), text, entries })
    }

    /// 1-based line of the first occurrence of `"key"`.
    fn line_of(&self, key: &str) -> usize {
        let needle = format!("\"{key}\"");
        self.text.find(&needle).map(|at| self.text[..at].matches('\n').count() + 1).unwrap_or(1)
    }

    pub fn command(&self) -> Option<&str> {
        self.entries.get("command").and_then(Value::as_str)
    }

    /// Rejects keys that are neither in `allowed` nor `command`.
    pub fn check_keys(&self, allowed: &BTreeSet<String>) -> Result<()> {
        for key in self.entries.keys() {
            if key != "command" && !allowed.contains(key) {
                let expected: Vec<&str> = allowed.iter().map(String::as_str).collect();
                bail!(
                    "{}:{}: unknown field `{key}`, expected one of: {}",
                    self.path.display(),
                    self.line_of(key),
                    expected.join(", ")
                );
            }
        }
        Ok(())
    }
}

/// Keys that `value` serializes to.
pub fn field_names<T: Serialize>(value: &T) -> Result<BTreeSet<String>> {
    match serde_json::to_value(value)? {
        Value::Object(m) => Ok(m.keys().cloned().collect()),
        _ => bail!("options must serialize to an object"),
    }
}

fn given_on_command_line(matches: &[&ArgMatches], id: &str) -> bool {
    matches.iter().any(|m| m.try_get_raw(id).ok().flatten().is_some() && m.value_source(id) == Some(ValueSource::CommandLine))
}

/// Fields set on the command line win; the rest come from the file when
/// present there, else keep their defaults.
pub fn layer<T: Serialize + DeserializeOwned>(parsed: T, matches: &[&ArgMatches], file: Option<&ConfigFile>) -> Result<T> {
    let Some(file) = file else { return Ok(parsed) };
    let Value::Object(mut merged) = serde_json::to_value(&parsed)? else {
        bail!("options must serialize to an object");
    };
    for (key, slot) in merged.iter_mut() {
        if given_on_command_line(matches, key) {
            continue;
        }
        if let Some(v) = file.entries.get(key) {
            *slot = v.clone();
        }
    }
    serde_path_to_error::deserialize(Value::Object(merged)).map_err(|e| {
        let key = e.path().to_string();
        match file.entries.contains_key(&key) {
            true => anyhow::anyhow!("{}:{}: field `{key}`: {}", file.path.display(), file.line_of(&key), e.inner()),
            false => anyhow::anyhow!("field `{key}`: {}", e.inner()),
        }
    })
}
