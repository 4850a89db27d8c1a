//! The `krillwalk` command line: `analyze`, `ballot`, `simulate`, `series`
//! and `tails`.
//!
//! Every parameter can come from a flag, from a flat `key = value` file given
//! with `--config`, or from its default; the seed can also come from
//! `KRILLWALK_SEED`. The resolved [`RunConfig`] is echoed to standard error
//! and embedded in every output. Run metadata that changes between runs
//! (wall-clock time, thread count) goes to a `.meta.json` sidecar instead.
//!
//! Exit codes: 0 success, 1 runtime failure (a `.partial` marker is left
//! next to the intended output), 2 usage error, 3 invalid input.

mod commands;
mod config;
mod output;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Arg, ArgAction};
use thiserror::Error;

use crate::engine::EngineError;
use crate::lab::LabError;
use crate::model::ModelError;
use crate::pathlaw::PathError;

pub use config::{parse_kv, Command, Kind, Key, RunConfig, Sources};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid input: {0}")]
    Semantic(String),
    #[error("runtime failure: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Semantic(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        if e.is_syntax() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Semantic(e.to_string())
        }
    }
}

impl From<PathError> for CliError {
    fn from(e: PathError) -> Self {
        match e {
            PathError::Model(m) => m.into(),
            e if e.is_semantic() => CliError::Semantic(e.to_string()),
            e => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Model(m) => m.into(),
            EngineError::Path(p) => p.into(),
            EngineError::ThreadPool(_)
            | EngineError::BudgetExceeded { .. }
            | EngineError::OffSpineBudget(_) => CliError::Runtime(e.to_string()),
            e => CliError::Semantic(e.to_string()),
        }
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Model(m) => m.into(),
            LabError::Path(p) => p.into(),
            LabError::Engine(g) => g.into(),
            e => CliError::Semantic(e.to_string()),
        }
    }
}

fn clap_command() -> clap::Command {
    let mut root = clap::Command::new("krillwalk")
        .version(output::VERSION)
        .about("Killed branching random walks: exact path laws and Monte Carlo experiments")
        .subcommand_required(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .help("flat key = value file; flags take precedence"),
        )
        .arg(
            Arg::new("threads")
                .long("threads")
                .global(true)
                .value_name("N")
                .help("worker threads, 0 for one per logical core [default: 0]"),
        );
    for command in Command::ALL {
        let mut sub = clap::Command::new(command.name()).about(command.about());
        for key in command.schema() {
            let mut arg = Arg::new(key.name).long(key.name).help(key.help);
            arg = match key.kind {
                Kind::Flag => arg.action(ArgAction::SetTrue),
                _ => arg.allow_hyphen_values(true).value_name("VALUE"),
            };
            if let Some(d) = key.default.filter(|_| key.kind != Kind::Flag) {
                arg = arg.help(format!("{} [default: {d}]", key.help));
            }
            sub = sub.arg(arg);
        }
        root = root.subcommand(sub);
    }
    root
}

/// Runs the command line and returns the process exit code.
pub fn run(args: impl IntoIterator<Item = OsString>, env_seed: Option<String>) -> i32 {
    let matches = match clap_command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let command = Command::from_name(name).expect("known subcommand");
    let mut flags = BTreeMap::new();
    for key in command.schema() {
        match key.kind {
            Kind::Flag => {
                if sub.get_flag(key.name) {
                    flags.insert(key.name.to_string(), "true".to_string());
                }
            }
            _ => {
                if let Some(v) = sub.get_one::<String>(key.name) {
                    flags.insert(key.name.to_string(), v.clone());
                }
            }
        }
    }
    let config_path = sub.get_one::<String>("config").or(matches.get_one::<String>("config"));
    let threads_flag = sub.get_one::<String>("threads").or(matches.get_one::<String>("threads"));
    match execute(command, flags, config_path.map(PathBuf::from), threads_flag.cloned(), env_seed) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("krillwalk: {e}");
            e.exit_code()
        }
    }
}

fn execute(
    command: Command,
    flags: BTreeMap<String, String>,
    config_path: Option<PathBuf>,
    threads_flag: Option<String>,
    env_seed: Option<String>,
) -> Result<(), CliError> {
    let mut file = match &config_path {
        Some(p) => config::read_config_file(p)?,
        None => BTreeMap::new(),
    };
    let threads_raw = threads_flag.or_else(|| file.remove("threads"));
    file.remove("threads");
    let threads: usize = match threads_raw {
        Some(t) => t
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("--threads: bad count {t:?}")))?,
        None => 0,
    };
    let cfg = RunConfig::resolve(
        command,
        Sources {
            flags,
            file,
            env_seed,
        },
    )?;
    eprint!("{}", cfg.to_kv().lines().map(|l| format!("# {l}\n")).collect::<String>());

    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    let outputs = commands::outputs(&cfg);
    let result = commands::run(&cfg, threads);
    let effective_threads = if threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        threads
    };
    match result {
        Ok(()) => {
            let meta = output::RunMeta {
                tool: output::TOOL,
                version: output::VERSION,
                command: command.name(),
                seed: cfg.get("seed"),
                threads: effective_threads,
                started_unix_seconds: started,
                wall_clock_seconds: clock.elapsed().as_secs_f64(),
            };
            for path in outputs.primary.iter().chain(&outputs.extra) {
                output::write_meta(&output::sidecar(path), &meta)?;
            }
            if outputs.primary.is_none() && outputs.extra.is_empty() {
                eprintln!("# wall_clock_seconds = {:.3}", meta.wall_clock_seconds);
            }
            Ok(())
        }
        Err(e) => {
            if let CliError::Runtime(msg) = &e {
                let target = outputs.primary.as_deref().or(outputs.extra.first().map(|p| p.as_path()));
                let marker = output::partial_marker(target);
                let body = format!("{}error = {msg}\n", cfg.to_kv());
                if std::fs::write(&marker, body).is_ok() {
                    eprintln!("krillwalk: partial-results marker written to {}", marker.display());
                }
            }
            Err(e)
        }
    }
}

/// Entry point for the binary: reads the process arguments and `KRILLWALK_SEED`.
pub fn run_from_env() -> i32 {
    run(std::env::args_os(), std::env::var("KRILLWALK_SEED").ok())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clap_tree_is_consistent() {
        clap_command().debug_assert();
    }
}
