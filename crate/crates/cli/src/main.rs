mod args;
mod commands;
mod config;
mod input;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Exit codes: 2 bad input or flags, 3 incomplete instance, 4 violated
/// bound or property, 5 instance beyond oracle limits.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub const PARSE: u8 = 2;
    pub const INCOMPLETE: u8 = 3;
    pub const VIOLATED: u8 = 4;
    pub const LIMIT: u8 = 5;

    pub fn parse(message: impl Into<String>) -> Self {
        Failure { code: Self::PARSE, message: message.into() }
    }

    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("DFEP_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| Failure::parse(format!("DFEP_THREADS=`{v}` is not a count")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::parse(e.to_string()))?;
    }
    Ok(())
}

fn run() -> Result<(), Failure> {
    let argv = config::expand(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            return commands::emit(&e.render().to_string());
        }
        Err(e) => {
            let text = e.render().to_string();
            return Err(Failure::parse(text.trim_start_matches("error: ").trim_end()));
        }
    };
    configure_threads()?;
    match cli.command {
        Command::Build(a) => commands::build(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Audit(a) => commands::audit(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
