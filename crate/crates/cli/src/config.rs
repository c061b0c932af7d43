//! `--config` files and resolved-configuration echoes.
//!
//! A config file holds `key = value` lines whose keys are the subcommand's
//! long flag names (`-` or `_` both accepted). Flags given on the command
//! line win over the file; keys that name no flag are rejected. The echo
//! written to run manifests uses the same keys, so a manifest can be fed
//! back as a config file.

use std::ffi::OsString;
use std::fs;

use clap::parser::ValueSource;
use clap::{ArgAction, CommandFactory, FromArgMatches};
use lesion_harness::kv;

pub const CONFIG_ARG: &str = "config";
/// Scheduling only; left out of echoes so outputs do not depend on it.
pub const JOBS_ARG: &str = "jobs";

#[derive(Debug)]
pub enum ParseFailure {
    Clap(clap::Error),
    Config(String),
}

/// Fully resolved subcommand configuration, in flag declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct Echo {
    pub command: String,
    pub config_file: Option<String>,
    pub pairs: Vec<(String, String)>,
}

impl Echo {
    pub fn render(&self) -> String {
        let mut out = format!(
            "# lesion-harness {} {}\n",
            env!("CARGO_PKG_VERSION"),
            self.command
        );
        if let Some(path) = &self.config_file {
            out.push_str(&format!("# config file: {path}\n"));
        }
        out.push_str(&kv::render(
            self.pairs.iter().map(|(k, v)| (k.as_str(), v.clone())),
        ));
        out
    }
}

fn relaxed(mut cmd: clap::Command) -> clap::Command {
    let ids: Vec<clap::Id> = cmd.get_arguments().map(|a| a.get_id().clone()).collect();
    for id in ids {
        cmd = cmd.mut_arg(id, |a| a.required(false));
    }
    let subs: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    for name in subs {
        cmd = cmd.mut_subcommand(name, relaxed);
    }
    cmd
}

fn key_of(long: &str) -> String {
    long.replace('-', "_")
}

fn truthy(key: &str, value: &str) -> Result<bool, ParseFailure> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(ParseFailure::Config(format!(
            "config key '{key}' expects true or false, got '{value}'"
        ))),
    }
}

/// Parses `raw` (including the program name), merging in the file named by
/// `--config` if present.
pub fn parse_with_config<C: CommandFactory + FromArgMatches>(
    raw: Vec<OsString>,
) -> Result<(C, Echo), ParseFailure> {
    let mut cmd = C::command();
    cmd.build();
    // required flags may come from the config file, so the first pass only
    // locates the subcommand and --config
    let first = match relaxed(cmd.clone()).try_get_matches_from(&raw) {
        Ok(m) => m,
        Err(e) => {
            return Err(ParseFailure::Clap(
                cmd.clone().try_get_matches_from(&raw).err().unwrap_or(e),
            ))
        }
    };
    let (sub_name, sub_first) = first
        .subcommand()
        .ok_or_else(|| ParseFailure::Config("missing subcommand".into()))?;
    let sub_cmd = cmd
        .find_subcommand(sub_name)
        .expect("matched subcommand exists")
        .clone();

    let config_file = first
        .get_one::<std::path::PathBuf>(CONFIG_ARG)
        .map(|p| p.display().to_string());
    let mut argv = raw;
    if let Some(path) = &config_file {
        let text = fs::read_to_string(path)
            .map_err(|e| ParseFailure::Config(format!("cannot read config {path}: {e}")))?;
        let pairs = kv::parse(&text)
            .map_err(|e| ParseFailure::Config(format!("config {path}: {e}")))?;
        for (key, value) in pairs {
            let long = key.replace('_', "-");
            let arg = sub_cmd
                .get_arguments()
                .find(|a| a.get_long() == Some(long.as_str()) && long != CONFIG_ARG)
                .ok_or_else(|| {
                    ParseFailure::Config(format!(
                        "config {path}: unknown key '{key}' for '{sub_name}'"
                    ))
                })?;
            if sub_first.value_source(arg.get_id().as_str()) == Some(ValueSource::CommandLine) {
                continue;
            }
            match arg.get_action() {
                ArgAction::SetTrue => {
                    if truthy(&key, &value)? {
                        argv.push(format!("--{long}").into());
                    }
                }
                ArgAction::Append => {
                    for token in value.split_whitespace() {
                        argv.push(format!("--{long}={token}").into());
                    }
                }
                _ => argv.push(format!("--{long}={value}").into()),
            }
        }
    }

    let matches = cmd.try_get_matches_from(&argv).map_err(ParseFailure::Clap)?;
    let parsed = C::from_arg_matches(&matches).map_err(ParseFailure::Clap)?;
    let (_, sub) = matches.subcommand().expect("subcommand present");
    let mut pairs = Vec::new();
    for arg in sub_cmd.get_arguments() {
        let Some(long) = arg.get_long() else { continue };
        if long == CONFIG_ARG || long == JOBS_ARG || matches!(arg.get_action(), ArgAction::Help | ArgAction::Version) {
            continue;
        }
        let id = arg.get_id().as_str();
        let Some(values) = sub.get_raw(id) else { continue };
        let joined: Vec<String> = values.map(|v| v.to_string_lossy().into_owned()).collect();
        pairs.push((key_of(long), joined.join(" ")));
    }
    Ok((
        parsed,
        Echo {
            command: sub_name.to_string(),
            config_file,
            pairs,
        },
    ))
}
