//! Test-time generalization by operator splitting.
//!
//! A [`Dictionary`] holds single-physics flows with fixed coefficients. Given
//! a short window of an unseen PDE's trajectory, [`search::search`] finds the
//! [`OperatorSubset`] whose Lie or Strang composition best explains the
//! observed one-step transitions. The chosen subset both forecasts the
//! dynamics ([`splitting::rollout`]) and identifies coefficients
//! ([`identify::identify_parameters`]).
//!
//! ```
//! use opsplit::experiments::LinearTask;
//! use opsplit::SearchConfig;
//!
//! let task = LinearTask::new(0.5, 0.2, &[0.25, 0.5], &[0.1, 0.2], 0)?;
//! let report = task.search(8, &SearchConfig::beam(2, 2, 0.0))?;
//! assert_eq!(report.best_subset.len(), 2);
//! assert!(report.best_loss < 1e-10);
//! # Ok::<(), opsplit::Error>(())
//! ```

/// Version of this crate, recorded in output provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod datagen;
pub mod dictionary;
pub mod error;
pub mod experiments;
pub mod field;
pub mod identify;
pub mod physics;
pub mod search;
pub mod splitting;

#[cfg(doctest)]
mod book;

pub use datagen::Trajectory;
pub use dictionary::{build_dictionary, Dictionary, DictionarySpec, OperatorEntry};
pub use error::{Error, FormatError, Result};
pub use field::{Field, Grid, Spectrum};
pub use search::{Context, SearchConfig, SearchReport};
pub use splitting::{OperatorSubset, Scheme};
