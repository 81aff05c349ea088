//! `key = value` config files, merged into the argument list so that flags win.

use crate::args::Cli;
use crate::error::CliError;
use clap::CommandFactory;
use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::Path;

/// Parses a flat config file. Blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", n + 1)));
        }
        out.push((k.replace('_', "-"), v.to_string()));
    }
    Ok(out)
}

fn config_path(raw: &[OsString]) -> Option<OsString> {
    let mut it = raw.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

/// Returns the argument list with the config file's entries placed right
/// after the subcommand and every command-line flag after them, so a later
/// occurrence (the flag) overrides the file.
pub fn expand_args(raw: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&raw) else {
        return Ok(raw);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let entries = parse_config(&text)?;

    let mut cmd = Cli::command();
    cmd.build();
    let names: Vec<String> = cmd.get_subcommands().map(|c| c.get_name().to_string()).collect();
    let Some(pos) = raw.iter().skip(1).position(|a| names.iter().any(|n| a.to_str() == Some(n))) else {
        // No subcommand: let clap report it.
        return Ok(raw);
    };
    let pos = pos + 1;
    let sub = cmd
        .find_subcommand(raw[pos].to_str().expect("matched a subcommand name"))
        .expect("subcommand exists");
    let accepted: BTreeSet<String> =
        sub.get_arguments().filter_map(|a| a.get_long()).map(str::to_string).collect();
    let known: BTreeSet<String> = cmd
        .get_subcommands()
        .flat_map(|c| c.get_arguments().filter_map(|a| a.get_long()).map(str::to_string))
        .chain(cmd.get_arguments().filter_map(|a| a.get_long()).map(str::to_string))
        .collect();

    let mut injected = Vec::new();
    for (k, v) in entries {
        if k == "config" {
            return Err(CliError::Usage("config files cannot include other config files".into()));
        }
        if !known.contains(&k) {
            return Err(CliError::Usage(format!("unknown config key `{k}`")));
        }
        if accepted.contains(&k) {
            injected.push(OsString::from(format!("--{k}")));
            injected.push(OsString::from(v));
        }
    }
    let mut out = vec![raw[0].clone(), raw[pos].clone()];
    out.extend(injected);
    out.extend(raw[1..pos].iter().cloned());
    out.extend(raw[pos + 1..].iter().cloned());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_comments_and_underscores() {
        let e = parse_config("# c\n\nmodel = linear\ncache_dir=/tmp/x\n").unwrap();
        assert_eq!(e, vec![("model".into(), "linear".into()), ("cache-dir".into(), "/tmp/x".into())]);
        assert!(matches!(parse_config("novalue"), Err(CliError::Usage(_))));
    }

    #[test]
    fn flags_come_after_file_entries() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("run.cfg");
        std::fs::write(&f, "dt = 0.5\nsteps = 4\nprofile = 000\n").unwrap();
        let raw = os(&["st", "--config", f.to_str().unwrap(), "simulate", "--dt", "0.25"]);
        let got = expand_args(raw).unwrap();
        let got: Vec<String> = got.iter().map(|s| s.to_string_lossy().into_owned()).collect();
        // `profile` belongs to other subcommands and is skipped here.
        assert_eq!(got[..6], ["st", "simulate", "--dt", "0.5", "--steps", "4"]);
        assert_eq!(got.last().unwrap(), "0.25");
    }

    #[test]
    fn unknown_key_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("bad.cfg");
        std::fs::write(&f, "colour = red\n").unwrap();
        let raw = os(&["st", "mse-table", "--config", f.to_str().unwrap()]);
        assert!(matches!(expand_args(raw), Err(CliError::Usage(_))));
    }
}
