//! `--config` support: a flat `key = value` file whose keys are flag names
//! without the leading dashes. Values from the file are spliced into the
//! argument list ahead of the command-line flags, so flags given explicitly
//! win.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context};
use clap::{Arg, Command};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub fn parse(text: &str) -> anyhow::Result<Vec<Entry>> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected key=value, got `{line}`", i + 1);
        };
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() {
            bail!("line {}: empty key", i + 1);
        }
        entries.push(Entry {
            line: i + 1,
            key: key.to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(entries)
}

fn find_long<'a>(cmd: &'a Command, key: &str) -> Option<&'a Arg> {
    cmd.get_arguments().find(|a| a.get_long() == Some(key))
}

fn push(out: &mut Vec<OsString>, arg: &Arg, entry: &Entry) -> anyhow::Result<()> {
    let flag = format!("--{}", entry.key);
    if arg.get_action().takes_values() {
        out.push(flag.into());
        out.push(entry.value.clone().into());
        return Ok(());
    }
    match entry.value.as_str() {
        "true" | "yes" | "1" | "" => out.push(flag.into()),
        "false" | "no" | "0" => {}
        other => bail!(
            "line {}: `{}` expects true or false, got `{other}`",
            entry.line,
            entry.key
        ),
    }
    Ok(())
}

/// Long options of the root command that consume the following argument.
fn root_value_flags(root: &Command) -> Vec<String> {
    root.get_arguments()
        .filter(|a| a.get_action().takes_values())
        .filter_map(|a| a.get_long().map(|l| format!("--{l}")))
        .collect()
}

/// Locates the `--config` value and the subcommand token in raw arguments.
fn scan(root: &Command, args: &[OsString]) -> (Option<OsString>, Option<usize>) {
    let value_flags = root_value_flags(root);
    let mut config = None;
    let mut sub = None;
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if a == "--" {
            break;
        }
        if let Some(v) = a.strip_prefix("--config=") {
            config = Some(v.into());
        } else if a == "--config" {
            config = args.get(i + 1).cloned();
            i += 1;
        } else if sub.is_none() && value_flags.iter().any(|f| *f == a) {
            i += 1;
        } else if sub.is_none() && !a.starts_with('-') && root.find_subcommand(a.as_ref()).is_some()
        {
            sub = Some(i);
        }
        i += 1;
    }
    (config, sub)
}

/// Returns `args` with the config file's entries inserted, or unchanged when
/// no `--config` is given.
pub fn expand_args(root: &Command, args: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let (Some(path), sub) = scan(root, &args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let entries = parse(&text).with_context(|| format!("in config file {}", path.display()))?;
    let sub_cmd = sub.and_then(|i| root.find_subcommand(args[i].to_string_lossy().as_ref()));

    let mut global = Vec::new();
    let mut local = Vec::new();
    for entry in &entries {
        if entry.key == "config" {
            bail!(
                "{}: line {}: config files cannot include other config files",
                path.display(),
                entry.line
            );
        }
        if let Some(arg) = find_long(root, &entry.key) {
            push(&mut global, arg, entry)?;
        } else if let Some(arg) = sub_cmd.and_then(|c| find_long(c, &entry.key)) {
            push(&mut local, arg, entry)?;
        } else if !root
            .get_subcommands()
            .any(|c| find_long(c, &entry.key).is_some())
        {
            bail!(
                "{}: line {}: unknown key `{}`",
                path.display(),
                entry.line,
                entry.key
            );
        }
    }

    let mut out = Vec::with_capacity(args.len() + global.len() + local.len());
    out.push(args[0].clone());
    out.extend(global);
    match sub {
        Some(i) => {
            out.extend(args[1..=i].iter().cloned());
            out.extend(local);
            out.extend(args[i + 1..].iter().cloned());
        }
        None => out.extend(args[1..].iter().cloned()),
    }
    Ok(out)
}
