//! Config files: TOML or JSON whose keys mirror long flags.
//!
//! Top-level scalar keys apply to every subcommand; a table named after the
//! subcommand applies to it alone. The derived flags are spliced in right after
//! the subcommand name, ahead of the user's own flags, so the command line wins.

use std::ffi::OsString;
use std::path::Path;

use serde_json::Value;

use crate::args::Command;
use crate::CliError;

/// Options that take a separate value before the subcommand.
const VALUE_GLOBALS: [&str; 2] = ["--threads", "--config"];

fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

/// Index of the subcommand token, skipping global options and their values.
fn subcommand_index(argv: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let s = argv[i].to_string_lossy();
        if VALUE_GLOBALS.contains(&s.as_ref()) {
            i += 2;
            continue;
        }
        if Command::NAMES.contains(&s.as_ref()) {
            return Some(i);
        }
        if !s.starts_with('-') {
            return None;
        }
        i += 1;
    }
    None
}

pub fn read_config(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
        || text.trim_start().starts_with('{');
    if is_json {
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    } else {
        let v: toml::Value = toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        serde_json::to_value(v)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

fn push_flag(out: &mut Vec<OsString>, key: &str, value: &Value) -> Result<(), CliError> {
    let flag = format!("--{}", key.replace('_', "-"));
    match value {
        Value::Bool(true) => out.push(flag.into()),
        Value::Bool(false) | Value::Null => {}
        Value::Number(n) => out.push(format!("{flag}={n}").into()),
        Value::String(s) => out.push(format!("{flag}={s}").into()),
        Value::Array(items) => {
            for item in items {
                push_flag(out, key, item)?;
            }
        }
        Value::Object(_) => {
            return Err(CliError::Usage(format!(
                "config key `{key}` cannot be a table"
            )))
        }
    }
    Ok(())
}

/// Flags derived from `config` for `subcommand`.
pub fn config_flags(config: &Value, subcommand: &str) -> Result<Vec<OsString>, CliError> {
    let Value::Object(map) = config else {
        return Err(CliError::Usage("config root must be a table".into()));
    };
    let mut out = Vec::new();
    for (key, value) in map {
        if key == "config" || value.is_object() {
            continue;
        }
        push_flag(&mut out, key, value)?;
    }
    if let Some(Value::Object(section)) = map.get(subcommand) {
        for (key, value) in section {
            push_flag(&mut out, key, value)?;
        }
    }
    Ok(out)
}

/// `argv` with config-file flags spliced in after the subcommand name.
pub fn expand_argv(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let Some(idx) = subcommand_index(&argv) else {
        return Ok(argv);
    };
    let config = read_config(Path::new(&path))?;
    let sub = argv[idx].to_string_lossy().into_owned();
    let extra = config_flags(&config, &sub)?;
    let mut out = Vec::with_capacity(argv.len() + extra.len());
    out.extend_from_slice(&argv[..=idx]);
    out.extend(extra);
    out.extend_from_slice(&argv[idx + 1..]);
    Ok(out)
}
