//! Ready-made studies shared by the command line tool and the acceptance checks.

use serde::{Deserialize, Serialize};

use crate::datagen::{generate_benchmark, Benchmark, GenerateConfig, Trajectory};
use crate::dictionary::{build_dictionary, Dictionary, DictionarySpec, KindSpec, OperatorEntry};
use crate::error::{Error, Result};
use crate::field::{Field, Grid};
use crate::identify::{nrmse, nrmse_frames};
use crate::physics::{
    linear_1d_flow, perturb_operator, Coeff, FlowOperator, PhysicsKind, PhysicsParams, SolverConfig,
};
use crate::search::{search, Context, SearchConfig, SearchReport};
use crate::splitting::{rollout, OperatorSubset, Scheme};

/// `spacing, 2 spacing, ..., max` (rounded to the nearest whole count).
pub fn coefficient_grid(spacing: f64, max: f64) -> Vec<f64> {
    let n = (max / spacing).round() as usize;
    (1..=n).map(|i| i as f64 * spacing).collect()
}

/// An advection-diffusion trajectory with a dictionary of pure advection and
/// pure diffusion entries at the trajectory's frame interval.
#[derive(Clone, Debug)]
pub struct LinearTask {
    pub truth: Trajectory,
    pub dict: Dictionary,
}

impl LinearTask {
    pub fn new(c: f64, d: f64, speeds: &[f64], diffusivities: &[f64], seed: u64) -> Result<Self> {
        let mu = [(Coeff::C, c), (Coeff::D, d)].into();
        let truth = generate_benchmark(&GenerateConfig::preset(Benchmark::AdvDiff, mu, seed))?;
        let mut kinds = Vec::new();
        if !speeds.is_empty() {
            kinds.push(KindSpec::values(PhysicsKind::Advection1D, Coeff::C, speeds.to_vec()));
        }
        if !diffusivities.is_empty() {
            kinds.push(KindSpec::values(PhysicsKind::Diffusion1D, Coeff::D, diffusivities.to_vec()));
        }
        let dict = build_dictionary(&DictionarySpec {
            dt: truth.dt(),
            grid: *truth.grid(),
            solver: SolverConfig::default(),
            kinds,
        })?;
        Ok(LinearTask { truth, dict })
    }

    /// Both coefficients on a shared grid `spacing..=1`.
    pub fn on_grid(c: f64, d: f64, spacing: f64, seed: u64) -> Result<Self> {
        let g = coefficient_grid(spacing, 1.0);
        Self::new(c, d, &g, &g, seed)
    }

    pub fn context(&self, l: usize) -> Result<Context> {
        Context::from_trajectory(&self.truth, l)
    }

    pub fn search(&self, l: usize, cfg: &SearchConfig) -> Result<SearchReport> {
        search(&self.dict, &self.context(l)?, cfg)
    }
}

/// Parameters of the weakest-link study on a commuting heat plus dispersion pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakestLinkConfig {
    pub grid: Grid,
    pub diffusivity: f64,
    pub dispersion: f64,
    pub dt: f64,
    /// Rollout length for the `split_rollout` column.
    pub steps: usize,
    /// Relative perturbation magnitudes swept for each operator.
    pub eps: Vec<f64>,
    pub seed: u64,
}

impl Default for WeakestLinkConfig {
    fn default() -> Self {
        WeakestLinkConfig {
            grid: Grid::line(256, 16.0).expect("valid grid"),
            diffusivity: 0.1,
            dispersion: 0.05,
            dt: 0.1,
            steps: 20,
            eps: vec![0.0, 1e-3, 1e-2, 1e-1],
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakestLinkRow {
    pub eps_heat: f64,
    pub eps_dispersion: f64,
    /// One-step NRMSE of the perturbed heat flow against the exact heat flow.
    pub heat_err: f64,
    /// One-step NRMSE of the perturbed dispersion flow against the exact one.
    pub dispersion_err: f64,
    /// One Strang step of the perturbed pair against the coupled exact flow.
    pub split_next_step: f64,
    /// Space-time NRMSE of a `steps`-step rollout against the coupled exact flow.
    pub split_rollout: f64,
}

impl WeakestLinkRow {
    pub fn worst_individual(&self) -> f64 {
        self.heat_err.max(self.dispersion_err)
    }
}

/// Perturb each operator of the pair over the `eps` grid and measure how the
/// composition's error follows its constituents.
///
/// The heat operator is perturbed with `seed` and the dispersion operator with
/// `seed + 1`, so each column scales one fixed perturbation direction.
pub fn weakest_link_study(cfg: &WeakestLinkConfig, u0: &Field) -> Result<Vec<WeakestLinkRow>> {
    if cfg.steps == 0 || cfg.eps.is_empty() {
        return Err(Error::invalid("weakest-link study needs steps >= 1 and a nonempty eps sweep"));
    }
    let solver = SolverConfig::default();
    let heat = FlowOperator::new(PhysicsParams::diffusion(cfg.diffusivity)?, cfg.dt, cfg.grid, solver)?;
    let disp = FlowOperator::new(PhysicsParams::dispersion(cfg.dispersion)?, cfg.dt, cfg.grid, solver)?;
    let heat_exact = heat.step(u0)?;
    let disp_exact = disp.step(u0)?;

    let mut truth = vec![u0.clone()];
    for _ in 0..cfg.steps {
        let next = linear_1d_flow(truth.last().expect("nonempty"), 0.0, cfg.diffusivity, cfg.dispersion, cfg.dt)?;
        truth.push(next);
    }

    let mut rows = Vec::with_capacity(cfg.eps.len() * cfg.eps.len());
    for &eh in &cfg.eps {
        let h = perturb_operator(&heat, eh, cfg.seed)?;
        let heat_err = nrmse(&h.step(u0)?, &heat_exact)?;
        for &ed in &cfg.eps {
            let d = perturb_operator(&disp, ed, cfg.seed.wrapping_add(1))?;
            let dispersion_err = nrmse(&d.step(u0)?, &disp_exact)?;
            let pair = OperatorSubset::new(
                vec![
                    OperatorEntry::from_operator(0, h.clone(), format!("diffusion eps={eh}")),
                    OperatorEntry::from_operator(1, d, format!("dispersion eps={ed}")),
                ],
                Scheme::Strang,
            )?;
            let split_next_step = nrmse(&pair.step(u0, cfg.dt)?, &truth[1])?;
            let r = rollout(&pair, u0, cfg.dt, cfg.steps)?;
            let split_rollout = match r.failure {
                Some(_) => f64::INFINITY,
                None => nrmse_frames(&r.frames[1..], &truth[1..])?,
            };
            rows.push(WeakestLinkRow { eps_heat: eh, eps_dispersion: ed, heat_err, dispersion_err, split_next_step, split_rollout });
        }
    }
    Ok(rows)
}

/// Beam and uniform search on the same context, compared at the budget where
/// beam search finishes its first level.
#[derive(Clone, Debug)]
pub struct ScalingComparison {
    pub beam: SearchReport,
    pub uniform: SearchReport,
    pub level1_budget: u64,
    pub beam_at_level1: f64,
    pub uniform_at_level1: f64,
}

pub fn compare_strategies(dict: &Dictionary, ctx: &Context, beam: &SearchConfig, uniform: &SearchConfig) -> Result<ScalingComparison> {
    let beam = search(dict, ctx, beam)?;
    let uniform = search(dict, ctx, uniform)?;
    let level1_budget = beam
        .levels
        .first()
        .map(|l| l.applications)
        .ok_or_else(|| Error::invalid("beam report has no levels"))?;
    let beam_at_level1 = beam.best_at_budget(level1_budget).unwrap_or(f64::INFINITY);
    let uniform_at_level1 = uniform.best_at_budget(level1_budget).unwrap_or(f64::INFINITY);
    Ok(ScalingComparison { beam, uniform, level1_budget, beam_at_level1, uniform_at_level1 })
}
