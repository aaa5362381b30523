use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use optoweak_cli::config::{self, RunConfig};
use optoweak_cli::{run, thread_cap, CliError, Command, Scenario, THREADS_ENV};

/// Weak-value amplification of single-photon radiation pressure on a
/// membrane: reproduction and validation commands.
#[derive(Debug, Parser)]
#[command(name = "optoweak", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,

    /// TOML configuration; the built-in preset is used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Artifact path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Wigner scenario, overriding `[wigner] scenario`.
    #[arg(long, value_enum)]
    scenario: Option<Scenario>,
}

fn execute(args: &Args) -> Result<String, CliError> {
    let threads = std::env::var(THREADS_ENV).ok();
    if let Some(n) = thread_cap(threads.as_deref())? {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = match &args.config {
        Some(path) => config::load(path)?,
        None => RunConfig::default(),
    };
    run(args.command, &cfg, args.out.as_deref(), args.scenario)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match execute(&args) {
        Ok(summary) => {
            eprintln!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
