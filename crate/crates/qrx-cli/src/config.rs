//! `--config` files: a JSON object overriding subcommand options.

use crate::error::{CliError, CliResult};
use crate::Command;
use serde_json::Value;
use std::path::Path;

const SUBCOMMAND_KEY: &str = "subcommand";

/// Applies the overrides in `text` to `command`, or to the defaults of the subcommand it names.
pub fn apply(command: Option<Command>, text: &str) -> CliResult<Command> {
    let overrides = match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(map)) => map,
        Ok(_) => return Err(CliError::config("config must be a JSON object")),
        Err(e) => return Err(CliError::config(format!("invalid config JSON: {e}"))),
    };
    let named = match overrides.get(SUBCOMMAND_KEY) {
        None => None,
        Some(Value::String(s)) => Some(s.as_str()),
        Some(_) => return Err(CliError::config("config 'subcommand' must be a string")),
    };
    let base = match (command, named) {
        (Some(c), Some(n)) if c.name() != n => {
            return Err(CliError::config(format!("config names subcommand '{n}' but '{}' was given", c.name())));
        }
        (Some(c), _) => c,
        (None, Some(n)) => Command::defaults(n)?,
        (None, None) => return Err(CliError::config("no subcommand given on the command line or in the config")),
    };
    let mut merged = match serde_json::to_value(&base) {
        Ok(Value::Object(map)) => map,
        _ => unreachable!("subcommands serialize to objects"),
    };
    for (key, value) in overrides {
        if key == SUBCOMMAND_KEY {
            continue;
        }
        if !merged.contains_key(&key) {
            return Err(CliError::config(format!("unknown option '{key}' for {}", base.name())));
        }
        let value = match (&merged[&key], value) {
            (Value::String(_), value) => Value::String(grid_text(value)?),
            (_, value) => value,
        };
        merged.insert(key, value);
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::config(format!("invalid config value: {e}")))
}

/// Text form of a string-typed option: numbers and lists are accepted alongside strings.
fn grid_text(value: Value) -> CliResult<String> {
    match value {
        Value::String(s) => Ok(s),
        Value::Number(n) => Ok(n.to_string()),
        Value::Array(items) if !items.is_empty() => {
            let parts = items
                .into_iter()
                .map(|item| match item {
                    Value::String(_) | Value::Number(_) => grid_text(item),
                    _ => Err(CliError::config("list options take numbers or strings")),
                })
                .collect::<CliResult<Vec<_>>>()?;
            Ok(parts.join(","))
        }
        other => Err(CliError::config(format!("expected a string, number or list, found {other}"))),
    }
}

/// Command after applying an optional config file.
pub fn resolve(command: Option<Command>, path: Option<&Path>) -> CliResult<Command> {
    match path {
        None => command.ok_or_else(|| CliError::config("no subcommand given")),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            apply(command, &text)
        }
    }
}
