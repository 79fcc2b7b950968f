use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lossy_walk_cli::{run, CliError, Command, RunConfig, Settings};

/// Dissipative quantum walks on a lossy bipartite lattice.
#[derive(Debug, Parser)]
#[command(name = "lossy-walk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    settings: Settings,

    /// JSON object with keys named like the flags (e.g. "L", "v-grid").
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            let message = message.lines().next().unwrap_or_default().trim_start_matches("error: ");
            return fail(&CliError::config("arguments", message));
        }
    };
    let result = cli
        .config
        .as_deref()
        .map(Settings::load)
        .transpose()
        .and_then(|file| RunConfig::resolve(cli.command, cli.settings, file))
        .and_then(|cfg| run(&cfg));
    match result {
        Ok(outcome) => {
            if let Some(s) = outcome.summary {
                eprintln!("{s}");
            }
            let failed: usize = outcome.artifacts.iter().map(|a| a.errors.len()).sum();
            if failed > 0 {
                eprintln!("{failed} point computation(s) failed (recorded in the error sidecar or on stderr)");
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.record());
    ExitCode::from(e.exit_code() as u8)
}
