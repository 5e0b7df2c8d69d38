//! Flat `key = value` config files.
//!
//! Values from the file are spliced into argv directly after the subcommand
//! path, so any flag given on the command line comes later and wins.

use std::ffi::OsString;
use std::path::Path;

use clap::{ArgAction, Command};

pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!(
                "config line {}: expected key = value, got '{raw}'",
                no + 1
            ));
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(format!("config line {}: empty key", no + 1));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Vec<(String, String)>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
    parse(&text)
}

/// Value of `--config` in raw argv, if any.
pub fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
        if s == "--" {
            break;
        }
    }
    None
}

/// Inserts config entries into `args` after the subcommand path. Keys the
/// selected subcommand does not know are skipped with a warning, so one file
/// can serve several subcommands.
pub fn splice(
    mut cmd: Command,
    args: Vec<OsString>,
    entries: &[(String, String)],
) -> Vec<OsString> {
    cmd.build();
    let mut leaf = &cmd;
    let mut insert_at = 1;
    for (pos, a) in args.iter().enumerate().skip(1) {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s.starts_with('-') {
            continue;
        }
        if let Some(sub) = leaf.find_subcommand(s.as_ref()) {
            leaf = sub;
            insert_at = pos + 1;
        }
    }
    let mut extra: Vec<OsString> = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            continue;
        }
        let Some(arg) = leaf
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
        else {
            log::warn!(
                "config key '{key}' does not apply to '{}'; ignored",
                leaf.get_name()
            );
            continue;
        };
        match arg.get_action() {
            ArgAction::SetTrue => {
                if value == "true" {
                    extra.push(format!("--{key}").into());
                }
            }
            _ => extra.push(format!("--{key}={value}").into()),
        }
    }
    let tail = args[insert_at..].to_vec();
    let mut out = args[..insert_at].to_vec();
    out.extend(extra);
    out.extend(tail);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_files() {
        let e = parse("# comment\n n = 64\neps_0=4\n\nk=8 \n").unwrap();
        assert_eq!(
            e,
            vec![
                ("n".to_string(), "64".to_string()),
                ("eps-0".to_string(), "4".to_string()),
                ("k".to_string(), "8".to_string())
            ]
        );
        assert!(parse("novalue").is_err());
        assert!(parse("=3").is_err());
    }

    #[test]
    fn finds_config_flag() {
        let a: Vec<OsString> = ["x", "detect", "--config", "f.conf"]
            .map(OsString::from)
            .to_vec();
        assert_eq!(config_path(&a), Some("f.conf".into()));
        let a: Vec<OsString> = ["x", "--config=g", "detect"].map(OsString::from).to_vec();
        assert_eq!(config_path(&a), Some("g".into()));
    }
}
