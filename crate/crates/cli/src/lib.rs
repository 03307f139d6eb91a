//! `placescope` command-line front end. Every subcommand reads files, calls the
//! core library, and writes its outputs atomically.
//!
//! Exit codes: 0 on success, 1 when a pipeline stage fails on the data, 2 on
//! usage errors (bad flags, missing inputs, invalid parameter values).

use std::ffi::OsString;
use std::fmt::Display;
use std::path::PathBuf;

use clap::Parser;

pub mod args;
mod commands;
pub mod config;
pub mod io;

pub use args::Cli;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{stage} stage failed: {source}")]
    Domain {
        stage: String,
        source: placescope_core::Error,
    },
    #[error("io stage failed: {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn usage(e: impl Display) -> Self {
        CliError::Usage(e.to_string())
    }

    /// Domain failure in `stage`, unless the error already names its own stage.
    pub fn domain(stage: &str, e: placescope_core::Error) -> Self {
        match e {
            placescope_core::Error::Stage { stage, source } => CliError::Domain {
                stage: stage.to_string(),
                source: *source,
            },
            e => CliError::Domain {
                stage: stage.to_string(),
                source: e,
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain { .. } | CliError::Io { .. } => 1,
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_env("PLACESCOPE_LOG")
        .format_timestamp(None)
        .try_init();
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    pool.install(|| commands::dispatch(&cli.command))
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match config::expand_argv(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("placescope: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    init_logging(cli.verbose);
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("placescope: {e}");
            e.exit_code()
        }
    }
}
