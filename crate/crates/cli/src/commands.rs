use std::fs;
use std::path::Path;

use anyhow::{bail, Context as _, Result};
use log::info;
use opsplit::datagen::{
    generate_benchmark, init_fourier_mix, read_trajectory, write_trajectory, Benchmark, GenerateConfig,
};
use opsplit::experiments::{compare_strategies, weakest_link_study, LinearTask, WeakestLinkConfig};
use opsplit::field::Grid;
use opsplit::identify::{evaluate_rollout, nrmse};
use opsplit::physics::{format_coefficients, parse_coefficients, Coeff, Coefficients};
use opsplit::search::{budget_curve, search, Context, SearchReport, Strategy};
use opsplit::splitting::rollout;
use opsplit::{build_dictionary, Dictionary, DictionarySpec, OperatorSubset, SearchConfig, Trajectory};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::{
    GenerateArgs, Global, IdentifyArgs, Inputs, RolloutArgs, ScalingArgs, SearchArgs, SearchOptions, WeakestLinkArgs,
};
use crate::output::{write_csv, write_json, write_provenance, Numerical, Usage};

fn default_mu(b: Benchmark) -> Coefficients {
    match b {
        Benchmark::AdvDiff => [(Coeff::C, 0.5), (Coeff::D, 0.3)].into(),
        Benchmark::Combined => [(Coeff::Alpha, 0.5), (Coeff::D, 0.2), (Coeff::Gamma, 0.5)].into(),
        Benchmark::GrayScott => [(Coeff::F, 0.04), (Coeff::K, 0.06)].into(),
        Benchmark::NavierStokes => [(Coeff::Nu, 1e-3)].into(),
    }
}

#[derive(Serialize)]
struct ManifestRow {
    file: String,
    benchmark: Benchmark,
    seed: u64,
    mu: String,
    frames: usize,
    dt: f64,
}

pub fn generate(g: &Global, a: &GenerateArgs) -> Result<()> {
    if a.n == 0 {
        bail!(Usage("--n must be at least 1".into()));
    }
    let mu = match &a.mu {
        Some(s) => parse_coefficients(s)?,
        None => default_mu(a.benchmark),
    };
    fs::create_dir_all(&g.out).with_context(|| format!("creating {}", g.out.display()))?;
    let configs: Vec<GenerateConfig> = (0..a.n as u64)
        .map(|i| {
            let mut cfg = GenerateConfig::preset(a.benchmark, mu.clone(), g.seed.wrapping_add(i));
            if let Some(frames) = a.frames {
                cfg.frames = frames;
            }
            if let Some(points) = a.points {
                cfg.grid = cfg.grid.with_points(points)?;
            }
            Ok(cfg)
        })
        .collect::<Result<_>>()?;
    let rows = configs
        .par_iter()
        .enumerate()
        .map(|(i, cfg)| -> Result<ManifestRow> {
            let t = generate_benchmark(cfg)?;
            let file = format!("{}_{i:04}.opstraj", a.benchmark);
            write_trajectory(g.out.join(&file), &t)?;
            info!("wrote {file}");
            Ok(ManifestRow {
                file,
                benchmark: a.benchmark,
                seed: cfg.init.seed,
                mu: format_coefficients(&t.mu),
                frames: t.len(),
                dt: t.dt(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_csv(&g.out.join("manifest.csv"), &rows)?;
    write_provenance(&g.out, "generate", g, a)
}

fn benchmark_of(inputs: &Inputs, t: &Trajectory) -> Result<Benchmark> {
    match inputs.benchmark {
        Some(b) => Ok(b),
        None => t.generator.parse().map_err(|_| {
            Usage(format!("cannot infer the benchmark from generator `{}`; pass --benchmark", t.generator)).into()
        }),
    }
}

/// The dictionary from `--dict`, or the benchmark preset on the trajectory's grid and frame interval.
fn load_dictionary(inputs: &Inputs, b: Benchmark, t: &Trajectory) -> Result<Dictionary> {
    let spec = match &inputs.dict {
        Some(path) => DictionarySpec::load(path)?,
        None => DictionarySpec { dt: t.dt(), grid: *t.grid(), ..DictionarySpec::preset(b) },
    };
    Ok(build_dictionary(&spec)?)
}

fn search_config(o: &SearchOptions, b: Benchmark, seed: u64) -> SearchConfig {
    let max_len = o.max_len.unwrap_or(match o.strategy {
        Strategy::Uniform => 4,
        _ => 5,
    });
    SearchConfig {
        strategy: o.strategy,
        trials: o.trials.unwrap_or(b.default_trials()),
        beam_width: o.beam_width.unwrap_or(b.default_beam_width()),
        max_len,
        threshold: o.threshold,
        scheme: o.scheme,
        seed,
        canonical_order: o.canonical_order,
    }
}

fn context(t: &Trajectory, l: usize) -> Result<Context> {
    if l < 2 || l > t.len() {
        bail!(Usage(format!("--context-len must be in 2..={}, got {l}", t.len())));
    }
    Ok(Context::from_trajectory(t, l)?)
}

fn run_search(g: &Global, data: &Path, inputs: &Inputs, o: &SearchOptions) -> Result<(Trajectory, Benchmark, Dictionary, SearchReport)> {
    let t = read_trajectory(data)?;
    let b = benchmark_of(inputs, &t)?;
    let dict = load_dictionary(inputs, b, &t)?;
    let ctx = context(&t, inputs.context_len)?;
    let cfg = search_config(o, b, g.seed);
    let report = search(&dict, &ctx, &cfg)?;
    info!(
        "{}: best {:?} loss {:.3e} after {} evaluations",
        data.display(),
        report.best_subset.labels(),
        report.best_loss,
        report.evaluations
    );
    Ok((t, b, dict, report))
}

pub fn search_cmd(g: &Global, a: &SearchArgs) -> Result<()> {
    let (_, _, _, report) = run_search(g, &a.data, &a.inputs, &a.search)?;
    fs::create_dir_all(&g.out)?;
    write_json(&g.out.join("report.json"), &report.to_json())?;
    write_csv(&g.out.join("budget.csv"), &budget_curve(&report))?;
    write_provenance(&g.out, "search", g, a)
}

/// The parts of a saved report needed to rebuild its subset.
#[derive(Deserialize)]
struct SavedReport {
    best_ids: Vec<usize>,
    scheme: opsplit::Scheme,
}

#[derive(Serialize)]
struct StepRow {
    step: usize,
    nrmse: f64,
}

pub fn rollout_cmd(g: &Global, a: &RolloutArgs) -> Result<()> {
    let t = read_trajectory(&a.data)?;
    let b = benchmark_of(&a.inputs, &t)?;
    let dict = load_dictionary(&a.inputs, b, &t)?;
    let (ids, scheme) = match (&a.report, &a.ids) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let saved: SavedReport = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            (saved.best_ids, saved.scheme)
        }
        (None, Some(ids)) => (ids.clone(), a.scheme),
        (None, None) => bail!(Usage("give --report or --ids".into())),
    };
    let subset = OperatorSubset::from_ids(&dict, &ids, scheme).map_err(|e| Usage(e.to_string()))?;
    let l = a.inputs.context_len;
    let h = a.horizon.unwrap_or(b.default_horizon());
    if l == 0 || h == 0 || t.len() < l + h {
        bail!(Usage(format!("need L + H <= {} frames, got L = {l}, H = {h}", t.len())));
    }
    let r = rollout(&subset, &t.frames()[l - 1], t.dt(), h)?;
    let rows = r.frames[1..]
        .iter()
        .zip(&t.frames()[l..])
        .enumerate()
        .map(|(i, (p, truth))| Ok(StepRow { step: i + 1, nrmse: nrmse(p, truth)? }))
        .collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(&g.out)?;
    write_csv(&g.out.join("rollout.csv"), &rows)?;
    if r.frames.len() >= 2 {
        let pred = Trajectory::new(r.frames.clone(), t.dt())?.with_metadata(
            opsplit::identify::identify_parameters(&subset, &dict).mu_hat,
            g.seed,
            "rollout",
        );
        write_trajectory(g.out.join("predicted.opstraj"), &pred)?;
    }
    write_provenance(&g.out, "rollout", g, a)?;
    if let Some(f) = r.failure {
        bail!(Numerical(format!("rollout failed at step {}: {}", f.step, f.error)));
    }
    info!("mean NRMSE over {h} steps: {:.3e}", rows.iter().map(|r| r.nrmse).sum::<f64>() / h as f64);
    Ok(())
}

#[derive(Serialize)]
struct EvaluationRow {
    benchmark: Benchmark,
    c_or_coeffs: String,
    strategy: Strategy,
    nrmse: f64,
    evaluations: usize,
    identified_params: String,
}

pub fn identify(g: &Global, a: &IdentifyArgs) -> Result<()> {
    let mut rows = Vec::new();
    let mut numerical = None;
    for path in &a.data {
        let (t, b, _, report) = run_search(g, path, &a.inputs, &a.search)?;
        let h = a.horizon.unwrap_or(b.default_horizon());
        let ev = evaluate_rollout(&report.best_subset, &t, a.inputs.context_len, h)
            .map_err(|e| Usage(format!("{}: {e}", path.display())))?;
        if let Some(step) = ev.failed_at {
            numerical.get_or_insert(format!("{}: rollout failed at step {step}", path.display()));
        }
        rows.push(EvaluationRow {
            benchmark: b,
            c_or_coeffs: format_coefficients(&t.mu),
            strategy: report.strategy,
            nrmse: ev.metric(a.block),
            evaluations: report.evaluations,
            identified_params: format_coefficients(&report.estimate.mu_hat),
        });
    }
    fs::create_dir_all(&g.out)?;
    write_csv(&g.out.join("evaluation.csv"), &rows)?;
    write_provenance(&g.out, "identify", g, a)?;
    match numerical {
        Some(msg) => bail!(Numerical(msg)),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct ScalingSummary {
    level1_budget: u64,
    beam_at_level1: f64,
    uniform_at_level1: f64,
    beam_final: f64,
    uniform_final: f64,
    beam_applications: u64,
    uniform_applications: u64,
}

pub fn scaling(g: &Global, a: &ScalingArgs) -> Result<()> {
    let (dict, ctx, b) = match &a.data {
        Some(path) => {
            let t = read_trajectory(path)?;
            let b = benchmark_of(&a.inputs, &t)?;
            (load_dictionary(&a.inputs, b, &t)?, context(&t, a.inputs.context_len)?, b)
        }
        None => {
            if !(a.spacing > 0.0 && a.spacing <= 1.0) {
                bail!(Usage(format!("--spacing must be in (0, 1], got {}", a.spacing)));
            }
            let task = LinearTask::on_grid(0.5, 0.3, a.spacing, g.seed)?;
            let ctx = task.context(a.inputs.context_len)?;
            (task.dict, ctx, Benchmark::AdvDiff)
        }
    };
    let beam = SearchConfig {
        scheme: a.scheme,
        seed: g.seed,
        ..SearchConfig::beam(a.beam_width.unwrap_or(b.default_beam_width()), a.max_len.unwrap_or(5), a.threshold)
    };
    let uniform = SearchConfig {
        scheme: a.scheme,
        seed: g.seed,
        ..SearchConfig::uniform(a.trials.unwrap_or(b.default_trials()), a.max_len.unwrap_or(4).min(dict.len()))
    };
    let cmp = compare_strategies(&dict, &ctx, &beam, &uniform)?;
    fs::create_dir_all(&g.out)?;
    write_csv(&g.out.join("budget_beam.csv"), &budget_curve(&cmp.beam))?;
    write_csv(&g.out.join("budget_uniform.csv"), &budget_curve(&cmp.uniform))?;
    write_json(
        &g.out.join("scaling.json"),
        &ScalingSummary {
            level1_budget: cmp.level1_budget,
            beam_at_level1: cmp.beam_at_level1,
            uniform_at_level1: cmp.uniform_at_level1,
            beam_final: cmp.beam.best_loss,
            uniform_final: cmp.uniform.best_loss,
            beam_applications: cmp.beam.applications,
            uniform_applications: cmp.uniform.applications,
        },
    )?;
    write_provenance(&g.out, "scaling", g, a)
}

pub fn weakest_link(g: &Global, a: &WeakestLinkArgs) -> Result<()> {
    let cfg = WeakestLinkConfig {
        grid: Grid::line(256, 16.0)?,
        diffusivity: a.diffusivity,
        dispersion: a.dispersion,
        dt: a.dt,
        steps: a.steps,
        eps: a.eps.clone(),
        seed: g.seed,
    };
    let u0 = init_fourier_mix(cfg.grid, 5, g.seed)?;
    let rows = weakest_link_study(&cfg, &u0)?;
    fs::create_dir_all(&g.out)?;
    write_csv(&g.out.join("weakest_link.csv"), &rows)?;
    write_provenance(&g.out, "weakest-link", g, a)
}
