use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgMatches, Command, CommandFactory};

use crate::args::Cli;
use crate::error::{Error, Result};

/// Flags that select the same quantity; a command-line member hides the
/// others in the config file.
const EXCLUSIVE: &[&[&str]] = &[
    &["beta", "T", "T-rel"],
    &["la", "partition"],
    &["L", "sizes"],
];

/// `key = value` pairs, in file order. Blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::usage(format!(
                "config line {}: expected `key = value`, got `{line}`",
                i + 1
            ))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"').to_string();
        if key.is_empty() {
            return Err(Error::usage(format!("config line {}: empty key", i + 1)));
        }
        entries.push((key, value));
    }
    Ok(entries)
}

fn given(matches: &ArgMatches, id: &str) -> bool {
    matches!(
        matches.value_source(id),
        Some(ValueSource::CommandLine) | Some(ValueSource::EnvVariable)
    )
}

fn long_to_id<'a>(cmd: &'a Command, long: &str) -> Option<&'a clap::Arg> {
    cmd.get_arguments().find(|a| a.get_long() == Some(long))
}

/// Command line with the config-file entries appended for every flag the
/// user did not set (directly or through the environment).
pub fn merged_args(argv: Vec<OsString>) -> std::result::Result<Vec<OsString>, MergeError> {
    let matches = Cli::command()
        .try_get_matches_from(&argv)
        .map_err(MergeError::Clap)?;
    let Some(path) = matches.get_one::<std::path::PathBuf>("config") else {
        return Ok(argv);
    };
    let text = read(path).map_err(MergeError::Cli)?;
    let entries = parse_config(&text).map_err(MergeError::Cli)?;

    let root = Cli::command();
    let (name, sub_matches) = matches.subcommand().expect("subcommand is required");
    let sub = root
        .find_subcommand(name)
        .expect("parsed subcommand exists");
    let mut extra: Vec<OsString> = Vec::new();
    for (key, value) in entries {
        let (arg, scope) = match (long_to_id(sub, &key), long_to_id(&root, &key)) {
            (Some(a), _) => (a, sub_matches),
            (None, Some(a)) => (a, &matches),
            (None, None) => {
                if root
                    .get_subcommands()
                    .any(|c| long_to_id(c, &key).is_some())
                {
                    continue;
                }
                return Err(MergeError::Cli(Error::usage(format!(
                    "unknown config key `{key}`"
                ))));
            }
        };
        if key == "config" {
            return Err(MergeError::Cli(Error::usage(
                "config files cannot include other config files",
            )));
        }
        if given(scope, arg.get_id().as_str()) {
            continue;
        }
        let shadowed = EXCLUSIVE
            .iter()
            .filter(|set| set.contains(&key.as_str()))
            .any(|set| {
                set.iter()
                    .filter_map(|other| long_to_id(sub, other))
                    .any(|a| given(sub_matches, a.get_id().as_str()))
            });
        if shadowed {
            continue;
        }
        if arg.get_action().takes_values() {
            extra.push(format!("--{key}").into());
            extra.push(value.into());
        } else {
            match value.as_str() {
                "true" => extra.push(format!("--{key}").into()),
                "false" => {}
                _ => {
                    return Err(MergeError::Cli(Error::usage(format!(
                        "config key `{key}` takes `true` or `false`, got `{value}`"
                    ))))
                }
            }
        }
    }
    let mut out = argv;
    out.extend(extra);
    Ok(out)
}

#[derive(Debug)]
pub enum MergeError {
    Clap(clap::Error),
    Cli(Error),
}

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}
