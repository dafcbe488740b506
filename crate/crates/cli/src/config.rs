//! `key = value` config files spliced into the argument list.

use std::ffi::OsString;
use std::path::PathBuf;

use crate::Failure;

const SUBCOMMANDS: [&str; 3] = ["build", "sweep", "audit"];

/// Removes `--config FILE` from `args` and inserts the file's entries as
/// `--key=value` flags right after the subcommand, so that later command
/// line flags override them.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, Failure> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path: Option<PathBuf> = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            let p = it.next().ok_or_else(|| Failure::parse("--config needs a file"))?;
            path = Some(p.into());
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.into());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    let flags = parse(&text).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    let at = rest
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
        .map_or(rest.len(), |i| i + 1);
    rest.splice(at..at, flags.into_iter().map(OsString::from));
    Ok(rest)
}

pub fn parse(text: &str) -> Result<Vec<String>, String> {
    let mut flags = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        match value {
            "true" | "yes" | "on" => flags.push(format!("--{key}")),
            "false" | "no" | "off" => {}
            _ if key == "input" => flags.push(value.to_string()),
            _ => flags.push(format!("--{key}={value}")),
        }
    }
    Ok(flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flags_and_booleans() {
        let flags = parse("# sweep defaults\nimpurity = powers:2,powers:3\nbest_of = true\noffset=false\n").unwrap();
        assert_eq!(flags, ["--impurity=powers:2,powers:3", "--best-of"]);
        assert!(parse("nonsense").is_err());
    }

    #[test]
    fn inserts_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("c.conf");
        std::fs::write(&file, "budget = 2\n").unwrap();
        let args: Vec<OsString> =
            ["dfep", "--config", file.to_str().unwrap(), "build", "--budget", "3"].iter().map(OsString::from).collect();
        let out = expand(args).unwrap();
        assert_eq!(out, ["dfep", "build", "--budget=2", "--budget", "3"]);
    }
}
