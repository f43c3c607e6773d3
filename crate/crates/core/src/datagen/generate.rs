use serde_json::json;

use super::init::{InitKind, InitSpec};
use super::{Benchmark, Trajectory};
use crate::error::{Error, Result};
use crate::field::{Field, Grid};
use crate::physics::{
    advdiff_exact_flow, combined_eq_flow, grayscott_flow, navier_stokes_reference, Coeff, Coefficients, GrayScott,
    SolverConfig, GS_DIFFUSION_A, GS_DIFFUSION_B,
};

/// Everything needed to produce one reference trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerateConfig {
    pub benchmark: Benchmark,
    pub grid: Grid,
    pub mu: Coefficients,
    pub init: InitSpec,
    pub frames: usize,
    pub horizon: f64,
    pub solver: SolverConfig,
    /// Navier-Stokes only: solve on a finer grid and truncate back.
    pub internal_points: Option<usize>,
}

impl GenerateConfig {
    /// Benchmark defaults for grid, horizon, frame count and initial condition.
    pub fn preset(benchmark: Benchmark, mu: Coefficients, seed: u64) -> Self {
        GenerateConfig {
            benchmark,
            grid: benchmark.grid(),
            mu,
            init: default_init(benchmark, seed),
            frames: benchmark.frames(),
            horizon: benchmark.horizon_time(),
            solver: SolverConfig::default(),
            internal_points: None,
        }
    }

    pub fn frame_dt(&self) -> f64 {
        self.horizon / (self.frames - 1) as f64
    }
}

/// The initial-condition family each benchmark samples from.
pub fn default_init(benchmark: Benchmark, seed: u64) -> InitSpec {
    let kind = match benchmark {
        Benchmark::AdvDiff => InitKind::Fractaloid { degree: None, power: 3.0 },
        Benchmark::Combined => InitKind::FourierMix { modes: 5 },
        Benchmark::GrayScott => InitKind::ClusteredGaussians { clusters: 4, warm_up: 100.0 },
        Benchmark::NavierStokes => InitKind::LowFreqModes2d { modes: 5 },
    };
    InitSpec::new(kind, seed)
}

fn allowed(benchmark: Benchmark) -> &'static [Coeff] {
    match benchmark {
        Benchmark::AdvDiff => &[Coeff::C, Coeff::D],
        Benchmark::Combined => &[Coeff::Alpha, Coeff::D, Coeff::Gamma],
        Benchmark::GrayScott => &[Coeff::DA, Coeff::DB, Coeff::Delta, Coeff::F, Coeff::K],
        Benchmark::NavierStokes => &[Coeff::Nu],
    }
}

/// Run the benchmark's reference solver and attach metadata.
///
/// Missing coefficients are zero, except the Gray-Scott diffusivities and
/// reaction strength, which default to `D_A = 2e-5`, `D_B = 1e-5`, `delta = 1`.
pub fn generate_benchmark(cfg: &GenerateConfig) -> Result<Trajectory> {
    let b = cfg.benchmark;
    if cfg.frames < 2 {
        return Err(Error::invalid("need at least two frames"));
    }
    if !(cfg.horizon.is_finite() && cfg.horizon > 0.0) {
        return Err(Error::invalid("horizon must be positive"));
    }
    cfg.solver.validate()?;
    if let Some(c) = cfg.mu.keys().find(|c| !allowed(b).contains(c)) {
        return Err(Error::Config(format!("{b} does not use coefficient {c}")));
    }
    let get = |c: Coeff| cfg.mu.get(&c).copied().unwrap_or(0.0);
    let dt = cfg.frame_dt();
    let n = cfg.frames;
    let mut mu = cfg.mu.clone();

    let (frames, solver) = match b {
        Benchmark::AdvDiff => {
            let u0 = cfg.init.sample(cfg.grid, 0.0, 0.0, &cfg.solver)?;
            let (c, d) = (get(Coeff::C), get(Coeff::D));
            let frames = (0..n).map(|i| advdiff_exact_flow(&u0, c, d, i as f64 * dt)).collect::<Result<Vec<_>>>()?;
            (frames, json!({"scheme": "exact_fourier"}))
        }
        Benchmark::Combined => {
            let u0 = cfg.init.sample(cfg.grid, 0.0, 0.0, &cfg.solver)?;
            let (a, be, g) = (get(Coeff::Alpha), get(Coeff::D), get(Coeff::Gamma));
            let frames = march(u0, n, |u| combined_eq_flow(u, a, be, g, dt, &cfg.solver))?;
            (frames, json!({"scheme": "integrating_factor_rk4", "advective_cfl": cfg.solver.advective_cfl}))
        }
        Benchmark::GrayScott => {
            for (c, v) in [(Coeff::DA, GS_DIFFUSION_A), (Coeff::DB, GS_DIFFUSION_B), (Coeff::Delta, 1.0)] {
                mu.entry(c).or_insert(v);
            }
            let p = GrayScott {
                d_a: mu[&Coeff::DA],
                d_b: mu[&Coeff::DB],
                delta: mu[&Coeff::Delta],
                feed: get(Coeff::F),
                kill: get(Coeff::K),
            };
            let u0 = cfg.init.sample(cfg.grid, p.feed, p.kill, &cfg.solver)?;
            let frames = march(u0, n, |u| grayscott_flow(u, &p, dt, &cfg.solver))?;
            (frames, json!({"scheme": "integrating_factor_rk4", "reaction_limit": cfg.solver.reaction_limit}))
        }
        Benchmark::NavierStokes => {
            let w0 = cfg.init.sample(cfg.grid, 0.0, 0.0, &cfg.solver)?;
            let traj = navier_stokes_reference(&w0, get(Coeff::Nu), cfg.horizon, n, &cfg.solver, cfg.internal_points)?;
            let internal = traj.solver.get("internal_points").cloned().unwrap_or_default();
            (
                traj.into_frames(),
                json!({
                    "scheme": "implicit_midpoint",
                    "euler_cfl": cfg.solver.euler_cfl,
                    "fixed_point_tol": cfg.solver.fixed_point_tol,
                    "internal_points": internal,
                }),
            )
        }
    };
    let mut traj = Trajectory::new(frames, dt)?.with_metadata(mu, cfg.init.seed, b.name());
    if let serde_json::Value::Object(map) = solver {
        traj.solver.extend(map);
    }
    traj.solver.insert("init".into(), serde_json::to_value(&cfg.init).expect("init spec serializes"));
    Ok(traj)
}

fn march(u0: Field, n: usize, step: impl Fn(&Field) -> Result<Field>) -> Result<Vec<Field>> {
    let mut frames = Vec::with_capacity(n);
    frames.push(u0);
    for _ in 1..n {
        let next = step(frames.last().expect("nonempty"))?;
        frames.push(next);
    }
    Ok(frames)
}
