//! `soler <command> --config <path> [--out <dir>]`

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use soler_cli::config::load_config;
use soler_cli::execute::{execute, Command, RunError};

#[derive(Parser)]
#[command(name = "soler", version, about = "Stability analysis of Soler solitary waves")]
struct Args {
    command: Command,
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the one in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var("SOLER_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("SOLER_THREADS must be a positive integer, got `{v}`")),
        },
    }
}

fn run(args: &Args) -> Result<Vec<PathBuf>, RunError> {
    let config = load_config(&args.config)?;
    let out = args.out.clone().or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from("."));
    execute(&config, args.command, &out)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match threads_from_env() {
        Ok(Some(n)) => {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().expect("global pool is built once");
        }
        Ok(None) => {}
        Err(msg) => {
            eprintln!("configuration error: {msg}");
            return ExitCode::from(1);
        }
    }
    match run(&args) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
