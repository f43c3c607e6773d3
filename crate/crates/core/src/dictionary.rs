//! Dictionaries of single-physics flow operators.
//!
//! A dictionary is built from a declarative [`DictionarySpec`], usually read
//! from TOML:
//!
//! ```toml
//! dt = 0.1
//!
//! [grid]
//! dims = 1
//! points = 256
//! length = 16.0
//!
//! # optional; any field of SolverConfig
//! [solver]
//! advective_cfl = 0.4
//!
//! [[kinds]]
//! kind = "advection"
//! coeff = "c"
//! values = [0.25, 0.5, 0.75, 1.0]
//!
//! [[kinds]]
//! kind = "diffusion_kill"
//! coeff = "k"
//! range = { start = 0.051, stop = 0.070, count = 20 }
//! fixed = { D_A = 2e-5, D_B = 1e-5 }
//!
//! [[kinds]]
//! kind = "diffusion2d"
//! coeff = "nu"
//! range = { start = 1e-4, stop = 1e-2, count = 16, spacing = "log" }
//!
//! [[kinds]]
//! kind = "euler"
//! ```
//!
//! Kinds are `advection`, `diffusion`, `nonlinear_advection`, `dispersion`,
//! `reaction`, `diffusion_kill`, `euler` and `diffusion2d`. Each `[[kinds]]`
//! block sweeps one coefficient over `values` or `range` and holds the rest
//! of the kind's coefficients at `fixed`. A `reaction` block without a
//! `delta` in `fixed` uses unit reaction strength. Entries are sorted by
//! (kind, coefficients), duplicates are dropped with a warning, and ids are
//! assigned in that order.

use std::cmp::Ordering;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datagen::Benchmark;
use crate::error::{Error, Result};
use crate::field::Grid;
use crate::physics::{
    format_coefficients, Coeff, Coefficients, Flow, FlowOperator, PhysicsKind, PhysicsParams, SolverConfig,
    GS_DIFFUSION_A, GS_DIFFUSION_B,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl CoeffRange {
    pub fn linear(start: f64, stop: f64, count: usize) -> Self {
        CoeffRange { start, stop, count, spacing: Spacing::Linear }
    }

    pub fn log(start: f64, stop: f64, count: usize) -> Self {
        CoeffRange { start, stop, count, spacing: Spacing::Log }
    }

    /// Endpoints included; a single point is `start`.
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(Error::Config("coefficient range needs count >= 1".into()));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::Config("coefficient range endpoints must be finite".into()));
        }
        let (a, b) = match self.spacing {
            Spacing::Linear => (self.start, self.stop),
            Spacing::Log => {
                if self.start <= 0.0 || self.stop <= 0.0 {
                    return Err(Error::Config("log spacing needs positive endpoints".into()));
                }
                (self.start.ln(), self.stop.ln())
            }
        };
        let n = self.count;
        Ok((0..n)
            .map(|i| {
                let v = if n == 1 {
                    a
                } else if i == n - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                };
                match self.spacing {
                    Spacing::Linear => v,
                    Spacing::Log if i == 0 => self.start,
                    Spacing::Log if i == n - 1 => self.stop,
                    Spacing::Log => v.exp(),
                }
            })
            .collect())
    }
}

/// One `[[kinds]]` block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KindSpec {
    pub kind: PhysicsKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff: Option<Coeff>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<CoeffRange>,
    #[serde(default, skip_serializing_if = "Coefficients::is_empty")]
    pub fixed: Coefficients,
}

impl KindSpec {
    pub fn values(kind: PhysicsKind, coeff: Coeff, values: Vec<f64>) -> Self {
        KindSpec { kind, coeff: Some(coeff), values: Some(values), range: None, fixed: Coefficients::new() }
    }

    pub fn range(kind: PhysicsKind, coeff: Coeff, range: CoeffRange) -> Self {
        KindSpec { kind, coeff: Some(coeff), values: None, range: Some(range), fixed: Coefficients::new() }
    }

    pub fn with_fixed(mut self, fixed: Coefficients) -> Self {
        self.fixed = fixed;
        self
    }

    fn expand(&self) -> Result<Vec<PhysicsParams>> {
        let mut fixed = self.fixed.clone();
        if self.kind == PhysicsKind::ReactionGS {
            fixed.entry(Coeff::Delta).or_insert(1.0);
        }
        let Some(coeff) = self.coeff else {
            if self.values.is_some() || self.range.is_some() {
                return Err(Error::Config(format!("{}: values given without `coeff`", self.kind)));
            }
            return Ok(vec![PhysicsParams::new(self.kind, fixed)?]);
        };
        let values = match (&self.values, &self.range) {
            (Some(v), None) => v.clone(),
            (None, Some(r)) => r.values()?,
            _ => {
                return Err(Error::Config(format!(
                    "{}: give exactly one of `values` or `range`",
                    self.kind
                )))
            }
        };
        if values.is_empty() {
            return Err(Error::Config(format!("{}: empty coefficient list", self.kind)));
        }
        values
            .into_iter()
            .map(|v| {
                let mut coeffs = fixed.clone();
                coeffs.insert(coeff, v);
                PhysicsParams::new(self.kind, coeffs)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DictionarySpec {
    pub dt: f64,
    pub grid: Grid,
    #[serde(default)]
    pub solver: SolverConfig,
    pub kinds: Vec<KindSpec>,
}

impl DictionarySpec {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// The dictionary used for a benchmark's beam search.
    pub fn preset(benchmark: Benchmark) -> Self {
        use PhysicsKind::*;
        let kinds = match benchmark {
            Benchmark::AdvDiff => vec![
                KindSpec::range(Advection1D, Coeff::C, CoeffRange::linear(0.01, 1.0, 128)),
                KindSpec::range(Diffusion1D, Coeff::D, CoeffRange::linear(0.001, 1.0, 128)),
            ],
            Benchmark::Combined => vec![
                KindSpec::range(NonlinAdvection1D, Coeff::Alpha, CoeffRange::linear(1.0 / 32.0, 1.0, 32)),
                KindSpec::range(Diffusion1D, Coeff::D, CoeffRange::linear(0.4 / 32.0, 0.4, 32)),
                KindSpec::range(Dispersion1D, Coeff::Gamma, CoeffRange::linear(1.0 / 32.0, 1.0, 32)),
            ],
            Benchmark::GrayScott => vec![
                KindSpec::range(ReactionGS, Coeff::F, CoeffRange::linear(0.005, 0.1, 20))
                    .with_fixed([(Coeff::Delta, 1.0)].into()),
                KindSpec::range(DiffusionKillGS, Coeff::K, CoeffRange::linear(0.051, 0.070, 20))
                    .with_fixed([(Coeff::DA, GS_DIFFUSION_A), (Coeff::DB, GS_DIFFUSION_B)].into()),
            ],
            Benchmark::NavierStokes => vec![
                KindSpec {
                    kind: Euler2D,
                    coeff: None,
                    values: None,
                    range: None,
                    fixed: Coefficients::new(),
                },
                KindSpec::range(Diffusion2D, Coeff::Nu, CoeffRange::log(1e-4, 1e-2, 16)),
            ],
        };
        DictionarySpec { dt: benchmark.frame_dt(), grid: benchmark.grid(), solver: SolverConfig::default(), kinds }
    }
}

/// One dictionary item.
#[derive(Clone)]
pub struct OperatorEntry {
    pub id: usize,
    pub kind: PhysicsKind,
    /// The coefficients of the operator's kind; all others are zero.
    pub mu: Coefficients,
    pub provenance: String,
    pub flow: Arc<dyn Flow>,
}

impl OperatorEntry {
    pub fn from_operator(id: usize, op: FlowOperator, provenance: impl Into<String>) -> Self {
        OperatorEntry {
            id,
            kind: op.kind(),
            mu: op.params().coeffs.clone(),
            provenance: provenance.into(),
            flow: Arc::new(op),
        }
    }

    pub fn label(&self) -> String {
        if self.mu.is_empty() {
            self.kind.to_string()
        } else {
            format!("{}({})", self.kind, format_coefficients(&self.mu))
        }
    }
}

impl fmt::Debug for OperatorEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{} {}", self.id, self.label())
    }
}

/// Serializable description of an entry without its flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryMetadata {
    pub id: usize,
    pub kind: PhysicsKind,
    pub mu: Coefficients,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DictionaryMetadata {
    pub grid: Grid,
    pub dt: f64,
    pub entries: Vec<EntryMetadata>,
}

/// An immutable set of operators sharing one grid and native step, sorted by id.
#[derive(Clone, Debug)]
pub struct Dictionary {
    entries: Vec<OperatorEntry>,
    grid: Grid,
    dt: f64,
}

impl Dictionary {
    pub fn new(mut entries: Vec<OperatorEntry>) -> Result<Self> {
        let first = entries.first().ok_or_else(|| Error::invalid("a dictionary needs at least one entry"))?;
        let (grid, dt) = (first.flow.grid(), first.flow.native_dt());
        if entries.iter().any(|e| e.flow.grid() != grid || e.flow.native_dt() != dt) {
            return Err(Error::ShapeMismatch("dictionary entries must share grid and dt".into()));
        }
        entries.sort_by_key(|e| e.id);
        if entries.windows(2).any(|w| w[0].id == w[1].id) {
            return Err(Error::invalid("duplicate operator id"));
        }
        Ok(Dictionary { entries, grid, dt })
    }

    pub fn entries(&self) -> &[OperatorEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn get(&self, id: usize) -> Option<&OperatorEntry> {
        self.entries.binary_search_by_key(&id, |e| e.id).ok().map(|i| &self.entries[i])
    }

    pub fn metadata(&self) -> DictionaryMetadata {
        DictionaryMetadata {
            grid: self.grid,
            dt: self.dt,
            entries: self
                .entries
                .iter()
                .map(|e| EntryMetadata { id: e.id, kind: e.kind, mu: e.mu.clone(), provenance: e.provenance.clone() })
                .collect(),
        }
    }
}

fn compare_params(a: &PhysicsParams, b: &PhysicsParams) -> Ordering {
    a.kind.cmp(&b.kind).then_with(|| {
        for ((ka, va), (kb, vb)) in a.coeffs.iter().zip(&b.coeffs) {
            let o = ka.cmp(kb).then_with(|| va.total_cmp(vb));
            if o != Ordering::Equal {
                return o;
            }
        }
        a.coeffs.len().cmp(&b.coeffs.len())
    })
}

/// One entry per distinct (kind, coefficients), ordered and numbered from 0.
pub fn build_dictionary(spec: &DictionarySpec) -> Result<Dictionary> {
    spec.solver.validate()?;
    if spec.kinds.is_empty() {
        return Err(Error::Config("dictionary spec lists no kinds".into()));
    }
    let mut params = Vec::new();
    for k in &spec.kinds {
        params.extend(k.expand()?);
    }
    params.sort_by(compare_params);
    let before = params.len();
    params.dedup_by(|a, b| compare_params(a, b) == Ordering::Equal);
    if params.len() < before {
        log::warn!("dictionary spec repeats {} (kind, coefficient) pairs; duplicates dropped", before - params.len());
    }
    let entries = params
        .into_iter()
        .enumerate()
        .map(|(id, p)| {
            let provenance = format!("{}:{}", p.kind, format_coefficients(&p.coeffs));
            let op = FlowOperator::new(p, spec.dt, spec.grid, spec.solver)?;
            Ok(OperatorEntry::from_operator(id, op, provenance))
        })
        .collect::<Result<Vec<_>>>()?;
    Dictionary::new(entries)
}

/// Seeded uniform subsample of `n` entries without replacement; order and ids preserved.
pub fn subsample(d: &Dictionary, n: usize, seed: u64) -> Result<Dictionary> {
    if n > d.len() {
        return Err(Error::invalid(format!("cannot subsample {n} of {} entries", d.len())));
    }
    if n == 0 {
        return Err(Error::invalid("subsample size must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, d.len(), n).into_vec();
    picked.sort_unstable();
    Dictionary::new(picked.into_iter().map(|i| d.entries[i].clone()).collect())
}
