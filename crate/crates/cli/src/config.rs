//! `--config` files: a flat JSON object whose keys are long flag names of
//! the chosen subcommand (plus `format` and `out`). Values are spliced into
//! argv ahead of the user's own flags, so the command line wins.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgAction, Command};
use serde_json::Value;

const GLOBALS: [&str; 2] = ["format", "out"];

/// Value-taking global flags, needed to skip their values when locating
/// the subcommand words.
const VALUE_GLOBALS: [&str; 3] = ["--format", "--out", "--config"];

/// Finds `--config <path>` or `--config=<path>` in raw argv.
fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Index just past the subcommand path and the leaf command itself.
fn subcommand_path<'a>(args: &[OsString], root: &'a Command) -> (usize, &'a Command, Vec<String>) {
    let mut cmd = root;
    let mut path = Vec::new();
    let mut end = 1;
    let mut k = 1;
    while k < args.len() {
        let s = args[k].to_string_lossy();
        if VALUE_GLOBALS.contains(&s.as_ref()) {
            k += 2;
            continue;
        }
        if s.starts_with('-') {
            k += 1;
            continue;
        }
        match cmd.find_subcommand(s.as_ref()) {
            Some(sub) => {
                cmd = sub;
                path.push(s.into_owned());
                k += 1;
                end = k;
            }
            None => break,
        }
        if !cmd.has_subcommands() {
            break;
        }
    }
    (end, cmd, path)
}

fn render(key: &str, v: &Value) -> Result<String> {
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Array(items) => items
            .iter()
            .map(|i| match i {
                Value::String(_) | Value::Number(_) => render(key, i),
                _ => Err(anyhow!(
                    "config key {key:?}: list items must be numbers or strings"
                )),
            })
            .collect::<Result<Vec<_>>>()?
            .join(","),
        Value::Null | Value::Object(_) => {
            bail!("config key {key:?}: expected a number, string, boolean or list")
        }
    })
}

fn flags_for(key: &str, v: &Value, cmd: &Command) -> Result<Vec<OsString>> {
    let long = key.replace('_', "-");
    let arg = cmd
        .get_arguments()
        .find(|a| a.get_long() == Some(long.as_str()))
        .ok_or_else(|| {
            anyhow!(
                "unknown config key {key:?} for `{}`",
                cmd.get_bin_name().unwrap_or(cmd.get_name())
            )
        })?;
    if matches!(arg.get_action(), ArgAction::SetTrue) {
        return match v {
            Value::Bool(true) => Ok(vec![format!("--{long}").into()]),
            Value::Bool(false) => Ok(Vec::new()),
            _ => bail!("config key {key:?} must be a boolean"),
        };
    }
    Ok(vec![format!("--{long}={}", render(key, v)?).into()])
}

/// Returns argv with the config file's values inserted, or argv unchanged
/// when no `--config` is given.
pub fn expand(args: Vec<OsString>, root: &Command) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let doc: Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))?;
    let Value::Object(map) = doc else {
        bail!("config {} must be a JSON object", path.display());
    };
    let (end, leaf, _) = subcommand_path(&args, root);
    let mut globals = Vec::new();
    let mut locals = Vec::new();
    for (key, v) in &map {
        if key == "config" {
            bail!("config files cannot name another config");
        }
        if GLOBALS.contains(&key.as_str()) {
            globals.extend(flags_for(key, v, root)?);
        } else {
            locals.extend(flags_for(key, v, leaf)?);
        }
    }
    let mut out = Vec::with_capacity(args.len() + map.len());
    out.push(args[0].clone());
    out.extend(globals);
    out.extend(args[1..end].iter().cloned());
    out.extend(locals);
    out.extend(args[end..].iter().cloned());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn finds_the_leaf_command() {
        let root = crate::cli::Cli::command();
        let (end, leaf, path) = subcommand_path(
            &os(&["q8", "--format", "json", "reduced", "eigs", "--u", "1"]),
            &root,
        );
        assert_eq!(end, 5);
        assert_eq!(leaf.get_name(), "eigs");
        assert_eq!(path, ["reduced", "eigs"]);
    }

    #[test]
    fn renders_values() {
        assert_eq!(
            render("k", &serde_json::json!([1, -0.5, 2])).unwrap(),
            "1,-0.5,2"
        );
        assert_eq!(render("k", &serde_json::json!("a:b:3")).unwrap(), "a:b:3");
        assert!(render("k", &Value::Null).is_err());
    }
}
