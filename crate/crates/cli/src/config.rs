//! `--config` files and the resolved-configuration line written at the top of every output.

use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgAction, ArgMatches, Command, CommandFactory};

use crate::args::Cli;
use crate::Failure;

/// `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, Failure> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Failure::Usage(format!("config line {}: expected `key = value`", n + 1)));
        };
        let k = k.trim().trim_start_matches("--");
        if k.is_empty() {
            return Err(Failure::Usage(format!("config line {}: empty key", n + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// The innermost subcommand selected by `m`, with its matches.
pub fn leaf<'a>(mut cmd: &'a Command, mut m: &'a ArgMatches) -> (&'a Command, &'a ArgMatches, Vec<String>) {
    let mut path = Vec::new();
    while let Some((name, sub)) = m.subcommand() {
        path.push(name.to_string());
        cmd = cmd.find_subcommand(name).expect("matched subcommand exists");
        m = sub;
    }
    (cmd, m, path)
}

pub fn flag_list(cmd: &Command) -> String {
    let mut names: Vec<String> = cmd
        .get_arguments()
        .filter_map(|a| a.get_long())
        .filter(|l| *l != "help" && *l != "version")
        .map(|l| format!("--{l}"))
        .collect();
    names.push("--config".into());
    names.join(", ")
}

/// Append the config file's settings for every flag not given on the command line.
pub fn merge(argv: Vec<OsString>) -> Result<Vec<OsString>, Failure> {
    let cmd = Cli::command();
    let m = cmd.clone().try_get_matches_from(&argv).map_err(Failure::Clap)?;
    let Some(path) = m.get_one::<std::path::PathBuf>("config").cloned() else {
        return Ok(argv);
    };
    let text = read_config(&path)?;
    let (leaf_cmd, leaf_m, _) = leaf(&cmd, &m);
    let mut extra = Vec::new();
    for (k, v) in parse_config(&text)? {
        if k == "config" {
            return Err(Failure::Usage("config files cannot include other config files".into()));
        }
        let Some(arg) = leaf_cmd.get_arguments().find(|a| a.get_long() == Some(k.as_str())) else {
            return Err(Failure::Usage(format!(
                "unknown config key `{k}`; valid keys: {}",
                flag_list(leaf_cmd).replace("--", "")
            )));
        };
        if leaf_m.value_source(arg.get_id().as_str()) == Some(ValueSource::CommandLine) {
            continue;
        }
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match v.as_str() {
                "true" | "yes" | "1" => extra.push(OsString::from(format!("--{k}"))),
                "false" | "no" | "0" => {}
                _ => {
                    return Err(Failure::Usage(format!(
                        "config key `{k}` takes true or false, got `{v}`"
                    )))
                }
            }
        } else {
            extra.push(OsString::from(format!("--{k}={v}")));
        }
    }
    let mut merged = argv;
    merged.extend(extra);
    Ok(merged)
}

fn read_config(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))
}

/// `# srspiral <command> key=value ...` with every flag's final value, keys sorted.
pub fn resolved_line(cmd: &Command, m: &ArgMatches) -> String {
    let (leaf_cmd, leaf_m, path) = leaf(cmd, m);
    let mut kv: Vec<(String, String)> = leaf_cmd
        .get_arguments()
        .filter_map(|a| {
            let long = a.get_long()?;
            if long == "config" {
                return None;
            }
            let raw = leaf_m.get_raw(a.get_id().as_str())?;
            let vals: Vec<String> = raw.map(|s| s.to_string_lossy().into_owned()).collect();
            Some((long.to_string(), vals.join(",")))
        })
        .collect();
    kv.sort();
    let mut line = format!("# srspiral {}", path.join(" "));
    for (k, v) in kv {
        line.push_str(&format!(" {k}={v}"));
    }
    line
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines() {
        let c = parse_config("# scan\nmodel = s3\n\nh0=10,20 # trailing\n--c = 0.5\n").unwrap();
        assert_eq!(
            c,
            vec![
                ("model".into(), "s3".into()),
                ("h0".into(), "10,20".into()),
                ("c".into(), "0.5".into())
            ]
        );
        assert!(parse_config("model s3").is_err());
    }
}
