//! Test-time search for the operator subset that best explains a context
//! window.
//!
//! The fitting loss of a subset is its mean teacher-forced one-step NRMSE
//! over the context. [`uniform_search`] samples random subsets after scoring
//! every singleton; [`beam_search`] grows compositions level by level,
//! keeping the `B` best at each size.
//!
//! Cost is counted in flow applications. Scoring a subset with `m` entries on
//! a context of `L` frames costs `(L - 1) * m` applications under Lie
//! splitting and `(L - 1) * (2m - 1)` under Strang.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::Trajectory;
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::identify::{identify_parameters, nrmse, ParameterEstimate};
use crate::splitting::{OperatorSubset, Scheme};

/// `L` consecutive observed frames.
#[derive(Clone, Debug)]
pub struct Context {
    frames: Vec<Field>,
    dt: f64,
}

impl Context {
    pub fn new(frames: Vec<Field>, dt: f64) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::invalid("a context needs at least two frames"));
        }
        let traj = Trajectory::new(frames, dt)?;
        Ok(Context { dt: traj.dt(), frames: traj.into_frames() })
    }

    /// The first `l` frames of a trajectory.
    pub fn from_trajectory(t: &Trajectory, l: usize) -> Result<Self> {
        if l > t.len() {
            return Err(Error::invalid(format!("context of {l} frames from a trajectory of {}", t.len())));
        }
        Self::new(t.frames()[..l].to_vec(), t.dt())
    }

    pub fn frames(&self) -> &[Field] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn transitions(&self) -> usize {
        self.frames.len() - 1
    }
}

/// Mean one-step NRMSE of `s` over the context's transitions.
///
/// A numerical failure in any transition yields `f64::INFINITY`, which ranks
/// after every finite loss.
pub fn fitting_loss(s: &OperatorSubset, ctx: &Context) -> Result<f64> {
    let mut total = 0.0;
    for pair in ctx.frames.windows(2) {
        let pred = match s.step(&pair[0], ctx.dt) {
            Ok(p) => p,
            Err(e) if e.is_numerical() => return Ok(f64::INFINITY),
            Err(e) => return Err(e),
        };
        let err = nrmse(&pred, &pair[1])?;
        if !err.is_finite() {
            return Ok(f64::INFINITY);
        }
        total += err;
    }
    Ok(total / ctx.transitions() as f64)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Uniform,
    #[default]
    Beam,
    Exhaustive,
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(Strategy::Uniform),
            "beam" => Ok(Strategy::Beam),
            "exhaustive" => Ok(Strategy::Exhaustive),
            _ => Err(Error::Config(format!("unknown search strategy `{s}`"))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Uniform => "uniform",
            Strategy::Beam => "beam",
            Strategy::Exhaustive => "exhaustive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub strategy: Strategy,
    /// Random subsets drawn by uniform search.
    pub trials: usize,
    pub beam_width: usize,
    /// Largest composition considered.
    pub max_len: usize,
    /// Beam search stops once a level improves the best loss by less than
    /// this fraction.
    pub threshold: f64,
    pub scheme: Scheme,
    pub seed: u64,
    /// Evaluate every subset in ascending id order instead of selection order.
    pub canonical_order: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            strategy: Strategy::Beam,
            trials: 100,
            beam_width: 4,
            max_len: 5,
            threshold: 0.05,
            scheme: Scheme::Strang,
            seed: 0,
            canonical_order: false,
        }
    }
}

impl SearchConfig {
    pub fn uniform(trials: usize, max_len: usize) -> Self {
        SearchConfig { strategy: Strategy::Uniform, trials, max_len, ..Default::default() }
    }

    pub fn beam(beam_width: usize, max_len: usize, threshold: f64) -> Self {
        SearchConfig { strategy: Strategy::Beam, beam_width, max_len, threshold, ..Default::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.beam_width == 0 || self.max_len == 0 {
            return Err(Error::Config("beam width and max length must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.threshold) {
            return Err(Error::Config(format!("threshold must lie in [0, 1), got {}", self.threshold)));
        }
        Ok(())
    }
}

/// Best loss seen after a given amount of work.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub applications: u64,
    pub evaluations: usize,
    pub best_loss: f64,
}

/// Summary of one beam level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    /// Composition size at this level.
    pub size: usize,
    pub candidates: usize,
    pub best_ids: Vec<usize>,
    pub best_loss: f64,
    /// Cumulative applications when the level finished.
    pub applications: u64,
}

#[derive(Clone, Debug)]
pub struct SearchReport {
    pub strategy: Strategy,
    pub best_subset: OperatorSubset,
    pub best_loss: f64,
    pub history: Vec<HistoryPoint>,
    pub evaluations: usize,
    pub applications: u64,
    pub levels: Vec<LevelSummary>,
    pub estimate: ParameterEstimate,
    /// Grid points per field, for FLOP estimates.
    pub points: usize,
}

/// JSON form of a [`SearchReport`]. Infinite losses serialize as `null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReportJson {
    pub strategy: Strategy,
    pub scheme: Scheme,
    pub best_ids: Vec<usize>,
    pub best_labels: Vec<String>,
    pub best_loss: f64,
    pub evaluations: usize,
    pub applications: u64,
    pub flops: f64,
    pub identified: ParameterEstimate,
    pub levels: Vec<LevelSummary>,
    pub history: Vec<HistoryPoint>,
}

impl SearchReport {
    pub fn to_json(&self) -> SearchReportJson {
        SearchReportJson {
            strategy: self.strategy,
            scheme: self.best_subset.scheme(),
            best_ids: self.best_subset.ids(),
            best_labels: self.best_subset.labels(),
            best_loss: self.best_loss,
            evaluations: self.evaluations,
            applications: self.applications,
            flops: flops_per_application(self.points) * self.applications as f64,
            identified: self.estimate.clone(),
            levels: self.levels.clone(),
            history: self.history.clone(),
        }
    }

    /// Lowest loss reached within `applications` flow applications.
    pub fn best_at_budget(&self, applications: u64) -> Option<f64> {
        self.history.iter().take_while(|h| h.applications <= applications).last().map(|h| h.best_loss)
    }
}

/// FLOP estimate for one spectral flow application on `points` grid points: `10 P log2 P`.
pub fn flops_per_application(points: usize) -> f64 {
    let p = points as f64;
    10.0 * p * p.log2()
}

/// One row of a budget curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetRow {
    pub flops: f64,
    pub applications: u64,
    pub best_loss: f64,
}

/// `(flops, applications, best_loss)` after each evaluation.
pub fn budget_curve(report: &SearchReport) -> Vec<BudgetRow> {
    let per = flops_per_application(report.points);
    report
        .history
        .iter()
        .map(|h| BudgetRow { flops: per * h.applications as f64, applications: h.applications, best_loss: h.best_loss })
        .collect()
}

/// Loss first, then the id tuple; the infinite sentinel sorts last.
fn rank(a: &(Vec<usize>, f64), b: &(Vec<usize>, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0))
}

struct Tracker {
    history: Vec<HistoryPoint>,
    applications: u64,
    evaluations: usize,
    best: Option<(Vec<usize>, f64)>,
    transitions: u64,
    scheme: Scheme,
}

impl Tracker {
    fn new(ctx: &Context, scheme: Scheme) -> Self {
        Tracker {
            history: Vec::new(),
            applications: 0,
            evaluations: 0,
            best: None,
            transitions: ctx.transitions() as u64,
            scheme,
        }
    }

    fn record(&mut self, ids: &[usize], loss: f64) {
        let m = ids.len() as u64;
        let per_step = match self.scheme {
            Scheme::Lie => m,
            Scheme::Strang => 2 * m - 1,
        };
        self.applications += per_step * self.transitions;
        self.evaluations += 1;
        let cand = (ids.to_vec(), loss);
        if self.best.as_ref().is_none_or(|b| rank(&cand, b) == Ordering::Less) {
            self.best = Some(cand);
        }
        self.history.push(HistoryPoint {
            applications: self.applications,
            evaluations: self.evaluations,
            best_loss: self.best.as_ref().map_or(f64::INFINITY, |b| b.1),
        });
    }

    fn finish(self, dict: &Dictionary, cfg: &SearchConfig, levels: Vec<LevelSummary>) -> Result<SearchReport> {
        let (ids, best_loss) = self.best.ok_or_else(|| Error::invalid("search evaluated no subsets"))?;
        let best_subset = OperatorSubset::from_ids(dict, &ids, cfg.scheme)?;
        Ok(SearchReport {
            strategy: cfg.strategy,
            estimate: identify_parameters(&best_subset, dict),
            best_subset,
            best_loss,
            history: self.history,
            evaluations: self.evaluations,
            applications: self.applications,
            levels,
            points: dict.grid().len(),
        })
    }
}

/// Score candidates in parallel; results come back in input order.
fn evaluate(dict: &Dictionary, ctx: &Context, cfg: &SearchConfig, candidates: Vec<Vec<usize>>) -> Result<Vec<(Vec<usize>, f64)>> {
    candidates
        .into_par_iter()
        .map(|mut ids| {
            if cfg.canonical_order {
                ids.sort_unstable();
            }
            let s = OperatorSubset::from_ids(dict, &ids, cfg.scheme)?;
            Ok((ids, fitting_loss(&s, ctx)?))
        })
        .collect()
}

fn check_inputs(dict: &Dictionary, ctx: &Context) -> Result<()> {
    if ctx.frames[0].grid() != &dict.grid() {
        return Err(Error::ShapeMismatch("context grid differs from the dictionary grid".into()));
    }
    Ok(())
}

fn singletons(dict: &Dictionary) -> Vec<Vec<usize>> {
    dict.entries().iter().map(|e| vec![e.id]).collect()
}

/// Best singleton, then `trials` subsets with size uniform in `1..=M` and
/// members drawn uniformly without replacement.
pub fn uniform_search(dict: &Dictionary, ctx: &Context, cfg: &SearchConfig) -> Result<SearchReport> {
    cfg.validate()?;
    check_inputs(dict, ctx)?;
    if cfg.max_len > dict.len() {
        return Err(Error::Config(format!("max length {} exceeds dictionary size {}", cfg.max_len, dict.len())));
    }
    let mut tracker = Tracker::new(ctx, cfg.scheme);
    for (ids, loss) in evaluate(dict, ctx, cfg, singletons(dict))? {
        tracker.record(&ids, loss);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ids: Vec<usize> = dict.entries().iter().map(|e| e.id).collect();
    let draws: Vec<Vec<usize>> = (0..cfg.trials)
        .map(|_| {
            let m = rng.random_range(1..=cfg.max_len);
            rand::seq::index::sample(&mut rng, ids.len(), m).into_iter().map(|i| ids[i]).collect()
        })
        .collect();
    for (ids, loss) in evaluate(dict, ctx, cfg, draws)? {
        tracker.record(&ids, loss);
    }
    tracker.finish(dict, cfg, Vec::new())
}

/// Level-wise beam search over compositions of up to `M` distinct entries.
///
/// Level 1 keeps the `B` best singletons. Each further level extends every
/// beam member by one unused entry, drops candidates whose id set was
/// already generated, and keeps the `B` best. The search stops at size `M`
/// or when a level's best loss improves on the previous level's by less than
/// the threshold. The returned subset is the best over all levels; equal
/// losses go to the lexicographically smallest id tuple.
pub fn beam_search(dict: &Dictionary, ctx: &Context, cfg: &SearchConfig) -> Result<SearchReport> {
    cfg.validate()?;
    check_inputs(dict, ctx)?;
    let mut tracker = Tracker::new(ctx, cfg.scheme);
    let mut levels = Vec::new();

    let mut scored = evaluate(dict, ctx, cfg, singletons(dict))?;
    for (ids, loss) in &scored {
        tracker.record(ids, *loss);
    }
    let mut size = 1;
    loop {
        let candidates = scored.len();
        scored.sort_by(rank);
        scored.truncate(cfg.beam_width);
        let level_best = scored[0].1;
        levels.push(LevelSummary {
            size,
            candidates,
            best_ids: scored[0].0.clone(),
            best_loss: level_best,
            applications: tracker.applications,
        });
        if let [.., prev, _] = levels.as_slice() {
            // an infinite previous best always counts as improved upon
            if prev.best_loss.is_finite() {
                let improvement = if prev.best_loss > 0.0 { (prev.best_loss - level_best) / prev.best_loss } else { 0.0 };
                if improvement < cfg.threshold {
                    break;
                }
            }
        }
        if size >= cfg.max_len.min(dict.len()) {
            break;
        }

        let mut seen = std::collections::HashSet::new();
        let mut next = Vec::new();
        for (ids, _) in &scored {
            for e in dict.entries() {
                if ids.contains(&e.id) {
                    continue;
                }
                let mut cand = ids.clone();
                cand.push(e.id);
                let mut key = cand.clone();
                key.sort_unstable();
                if seen.insert(key) {
                    next.push(cand);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        scored = evaluate(dict, ctx, cfg, next)?;
        for (ids, loss) in &scored {
            tracker.record(ids, *loss);
        }
        size += 1;
    }
    tracker.finish(dict, cfg, levels)
}

/// Score every subset of up to `max_len` distinct entries, each in ascending id order.
///
/// The reference optimum for small dictionaries: `sum_{m<=M} C(N, m)` evaluations.
pub fn exhaustive_search(dict: &Dictionary, ctx: &Context, max_len: usize, scheme: Scheme) -> Result<SearchReport> {
    check_inputs(dict, ctx)?;
    if max_len == 0 || max_len > dict.len() {
        return Err(Error::Config(format!("max length must be in 1..={}, got {max_len}", dict.len())));
    }
    let cfg = SearchConfig { strategy: Strategy::Exhaustive, canonical_order: true, scheme, max_len, ..SearchConfig::default() };
    let ids: Vec<usize> = dict.entries().iter().map(|e| e.id).collect();
    let all: Vec<Vec<usize>> = (1..=max_len).flat_map(|m| ids.iter().copied().combinations(m)).collect();
    let mut tracker = Tracker::new(ctx, scheme);
    for (ids, loss) in evaluate(dict, ctx, &cfg, all)? {
        tracker.record(&ids, loss);
    }
    tracker.finish(dict, &cfg, Vec::new())
}

/// Dispatch on `cfg.strategy`.
pub fn search(dict: &Dictionary, ctx: &Context, cfg: &SearchConfig) -> Result<SearchReport> {
    match cfg.strategy {
        Strategy::Uniform => uniform_search(dict, ctx, cfg),
        Strategy::Beam => beam_search(dict, ctx, cfg),
        Strategy::Exhaustive => exhaustive_search(dict, ctx, cfg.max_len, cfg.scheme),
    }
}
