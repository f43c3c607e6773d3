use std::fs;
use std::path::Path;

use anyhow::{Context as _, Result};
use serde::Serialize;
use thiserror::Error;

use crate::args::Global;

/// Bad arguments detected after parsing.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct Usage(pub String);

/// A rollout or solve that blew up.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct Numerical(pub String);

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct Provenance<'a, A: Serialize> {
    command: &'a str,
    argv: Vec<String>,
    seed: u64,
    workers: usize,
    opsplit_version: &'a str,
    cli_version: &'a str,
    args: &'a A,
}

/// Record how the outputs in `dir` were produced.
pub fn write_provenance<A: Serialize>(dir: &Path, command: &str, g: &Global, args: &A) -> Result<()> {
    write_json(
        &dir.join("provenance.json"),
        &Provenance {
            command,
            argv: std::env::args().collect(),
            seed: g.seed,
            workers: rayon::current_num_threads(),
            opsplit_version: opsplit::VERSION,
            cli_version: env!("CARGO_PKG_VERSION"),
            args,
        },
    )
}
