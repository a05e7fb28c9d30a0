//! Command-line front end: `srspiral <command> [flags]`.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on numerical failures.

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::{CommandFactory, FromArgMatches};

pub mod args;
mod commands;
pub mod config;
pub mod output;
pub mod svg;

use args::Cli;

#[derive(Debug)]
pub enum Failure {
    Clap(clap::Error),
    Usage(String),
    Numerical(String),
}

impl From<spiral_core::Error> for Failure {
    fn from(e: spiral_core::Error) -> Self {
        use spiral_core::Error as E;
        match e {
            E::UnknownModel(_) | E::InvalidParameter(_) | E::RegimeGuard(_) | E::DegreeMismatch(..) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

/// Run with the process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let code = match execute(argv.clone(), out) {
        Ok(()) => 0,
        Err(Failure::Clap(e)) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = write!(out, "{}", e.render());
            0
        }
        Err(Failure::Clap(e)) => {
            let _ = write!(err, "{}", e.render());
            let _ = writeln!(err, "valid flags: {}", valid_flags(&argv));
            1
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Numerical(msg)) => {
            let _ = writeln!(err, "numerical failure: {msg}");
            2
        }
    };
    let _ = out.flush();
    code
}

fn execute(argv: Vec<OsString>, out: &mut dyn Write) -> Result<(), Failure> {
    let merged = config::merge(argv)?;
    let cmd = Cli::command();
    let m = cmd.clone().try_get_matches_from(&merged).map_err(Failure::Clap)?;
    let cli = Cli::from_arg_matches(&m).map_err(Failure::Clap)?;
    let line = config::resolved_line(&cmd, &m);
    commands::dispatch(cli.command, &line, out)
}

/// Flags of the deepest subcommand named on the command line.
fn valid_flags(argv: &[OsString]) -> String {
    let root = Cli::command();
    let mut cmd = &root;
    for a in argv.iter().skip(1) {
        if let Some(sub) = a.to_str().and_then(|s| cmd.find_subcommand(s)) {
            cmd = sub;
        }
    }
    if cmd.get_subcommands().next().is_some()
        && !cmd.get_arguments().any(|a| {
            a.get_long()
                .is_some_and(|l| l != "help" && l != "version" && l != "config")
        })
    {
        let names: Vec<&str> = cmd.get_subcommands().map(|s| s.get_name()).collect();
        return format!("{} (subcommands: {})", config::flag_list(cmd), names.join(", "));
    }
    config::flag_list(cmd)
}
