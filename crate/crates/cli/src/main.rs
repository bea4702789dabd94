mod cli;
mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{error::ErrorKind, CommandFactory, FromArgMatches};
use serde_json::Value;

use cli::{Cli, Command, GroupCmd, HopfCmd, NetworkCmd, ReducedCmd, TorusCmd};
use output::Report;

/// Validation problems exit 1, numerical failures exit 2.
fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err
        .chain()
        .filter_map(|e| e.downcast_ref::<q8_core::error::Error>())
        .any(q8_core::error::Error::is_numerical);
    if numerical {
        2
    } else {
        1
    }
}

fn command() -> clap::Command {
    fn override_self(c: clap::Command) -> clap::Command {
        c.args_override_self(true).mut_subcommands(override_self)
    }
    override_self(Cli::command())
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("Q8_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .with_context(|| format!("Q8_THREADS={v:?} is not a positive integer"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    Ok(())
}

fn cfg<T: serde::Serialize>(v: &T) -> serde_json::Result<Value> {
    serde_json::to_value(v)
}

fn dispatch(cmd: &Command) -> Result<(String, Value, Report)> {
    Ok(match cmd {
        Command::Group {
            cmd: GroupCmd::Verify,
        } => (
            "group verify".into(),
            Value::Null,
            commands::group_verify()?,
        ),
        Command::Network {
            cmd: NetworkCmd::Simulate(a),
        } => (
            "network simulate".into(),
            cfg(a)?,
            commands::network_simulate(a)?,
        ),
        Command::Network {
            cmd: NetworkCmd::Audit,
        } => (
            "network audit".into(),
            Value::Null,
            commands::network_audit()?,
        ),
        Command::Hopf {
            cmd: HopfCmd::Classify(a),
        } => ("hopf classify".into(), cfg(a)?, commands::hopf_classify(a)?),
        Command::Hopf {
            cmd: HopfCmd::Isotropy,
        } => (
            "hopf isotropy".into(),
            Value::Null,
            commands::hopf_isotropy()?,
        ),
        Command::Torus {
            cmd: TorusCmd::Catalog,
        } => (
            "torus catalog".into(),
            Value::Null,
            commands::torus_catalog()?,
        ),
        Command::Torus {
            cmd: TorusCmd::Field(a),
        } => ("torus field".into(), cfg(a)?, commands::torus_field(a)?),
        Command::Reduced {
            cmd: ReducedCmd::Eigs(a),
        } => ("reduced eigs".into(), cfg(a)?, commands::reduced_eigs(a)?),
        Command::Reduced {
            cmd: ReducedCmd::Connect(a),
        } => (
            "reduced connect".into(),
            cfg(a)?,
            commands::reduced_connect(a)?,
        ),
        Command::Classify(a) => ("classify".into(), cfg(a)?, commands::classify_cmd(a)?),
        Command::Sweep(a) => ("sweep".into(), cfg(a)?, commands::sweep_cmd(a)?),
        Command::Discrepancies => (
            "discrepancies".into(),
            Value::Null,
            commands::discrepancies()?,
        ),
    })
}

fn run(args: Vec<OsString>) -> Result<ExitCode> {
    let root = command();
    let args = config::expand(args, &root)?;
    let matches = match root.try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.print()?;
            return Ok(ExitCode::SUCCESS);
        }
        Err(e) => {
            e.print()?;
            return Ok(ExitCode::from(1));
        }
    };
    let cli = Cli::from_arg_matches(&matches)?;
    configure_threads()?;
    let format = cli.format.unwrap_or_default();
    let (name, args, report) = dispatch(&cli.command)?;
    let mut config = serde_json::Map::new();
    config.insert("format".into(), serde_json::to_value(format)?);
    if let Some(out) = &cli.out {
        config.insert("out".into(), Value::String(out.display().to_string()));
    }
    if let Value::Object(m) = args {
        config.extend(m);
    }
    let body = output::render(&report, format, &name, &Value::Object(config))?;
    output::emit(&body, cli.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
