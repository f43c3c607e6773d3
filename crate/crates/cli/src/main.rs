mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use output::{Numerical, Usage};

/// Exit status for an error: 1 for I/O and format problems, 2 for bad input,
/// 3 for numerical failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Usage>() {
            return 2;
        }
        if cause.is::<Numerical>() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<opsplit::Error>() {
            return match e {
                opsplit::Error::Io { .. } | opsplit::Error::Format(_) => 1,
                e if e.is_numerical() => 3,
                _ => 2,
            };
        }
        if cause.is::<std::io::Error>() || cause.is::<csv::Error>() || cause.is::<serde_json::Error>() {
            return 1;
        }
    }
    1
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.global.workers {
        if n == 0 {
            anyhow::bail!(Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let g = &cli.global;
    match &cli.command {
        Command::Generate(a) => commands::generate(g, a),
        Command::Search(a) => commands::search_cmd(g, a),
        Command::Rollout(a) => commands::rollout_cmd(g, a),
        Command::Identify(a) => commands::identify(g, a),
        Command::Scaling(a) => commands::scaling(g, a),
        Command::WeakestLink(a) => commands::weakest_link(g, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
