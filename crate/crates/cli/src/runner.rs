//! Runs one experiment configuration over its seeds and writes the results.
//!
//! Output directory layout:
//! - `run.cfg`: the resolved configuration
//! - `trace_seed<N>.csv`: one trace per seed (see [`crate::trace`])
//! - `timing_seed<N>.csv`: per-step wall-clock times, kept apart from the
//!   traces so that traces are byte-identical across repeated runs
//! - `summary.txt`: aggregated metric curve (see [`crate::summary`])

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mvabo_core::benchmarks::{
    bird_benchmark, gp_sample_benchmark_with, linspace, newsvendor_benchmark, product_grid, rosenbrock_benchmark,
    truncated_normal_weights_scaled, Benchmark, BenchmarkKind, GpSampleParams, NewsvendorParams,
};
use mvabo_core::gp::{BetaSchedule, KernelSpec};
use mvabo_core::metrics::exact_objectives;
use mvabo_core::scenarios::{run_scenario, Problem, Scenario, ScenarioConfig, Trace};
use rayon::prelude::*;

use crate::config::{scenario_name, ExperimentConfig, InputSetting, KernelKind, Threshold};
use crate::summary::{summarize, trace_path, Summary};
use crate::trace::{timing_text, TraceFile, TraceRow};

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "MVABO_OUTPUT_ROOT";

fn benchmark(cfg: &ExperimentConfig, seed: u64) -> Result<Benchmark> {
    let b = match cfg.benchmark {
        BenchmarkKind::GpSample => {
            let params = GpSampleParams {
                n_design: cfg.n_design,
                n_env: cfg.n_env,
                ..GpSampleParams::default()
            };
            gp_sample_benchmark_with(seed, &params)?
        }
        BenchmarkKind::Bird => bird_benchmark(cfg.grid_points)?,
        BenchmarkKind::Rosenbrock => rosenbrock_benchmark(cfg.grid_points)?,
        BenchmarkKind::Newsvendor => {
            let params = NewsvendorParams {
                env_draws: cfg.newsvendor_draws,
                ..NewsvendorParams::default()
            };
            newsvendor_benchmark(&params, cfg.benchmark_seed)?
        }
    };
    Ok(b)
}

/// The finite problem for one seed. Only gp-sample depends on the seed.
pub fn build_problem(cfg: &ExperimentConfig, seed: u64) -> Result<Problem<f64>> {
    let bench = benchmark(cfg, seed)?;
    match cfg.input_mode {
        InputSetting::Joint => Ok(bench.problem()?),
        InputSetting::NoisyInput => {
            let (dx, _) = bench.dims();
            let axis = linspace(-2.0 * cfg.noise_scale, 2.0 * cfg.noise_scale, cfg.noise_points);
            let grid = product_grid(&vec![axis; dx]);
            let noise = truncated_normal_weights_scaled(&grid, cfg.noise_scale)?;
            let support = bench.env().support();
            let w_fixed: Vec<f64> = (0..support[0].len())
                .map(|k| {
                    let (lo, hi) = support
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), w| (lo.min(w[k]), hi.max(w[k])));
                    (lo + hi) / 2.0
                })
                .collect();
            Ok(bench.noisy_input_problem(noise, &w_fixed)?)
        }
    }
}

/// Median of the exact F2 over the design grid.
pub fn median_f2(problem: &Problem<f64>) -> Result<f64> {
    let (_, mut f2) = exact_objectives(problem.values(), problem.distribution())?;
    f2.sort_by(f64::total_cmp);
    let n = f2.len();
    Ok(if n % 2 == 1 { f2[n / 2] } else { (f2[n / 2 - 1] + f2[n / 2]) / 2.0 })
}

pub fn scenario_config(cfg: &ExperimentConfig, problem: &Problem<f64>) -> Result<ScenarioConfig<f64>> {
    let kernel = match cfg.kernel {
        KernelKind::Isotropic => KernelSpec::isotropic(cfg.kernel_variance, cfg.kernel_lengthscale[0])?,
        KernelKind::Ard => KernelSpec::ard(cfg.kernel_variance, cfg.kernel_lengthscale.clone())?,
    };
    let mut sc = ScenarioConfig::new(cfg.scenario, kernel, cfg.budget);
    sc.selector = cfg.method.selector();
    sc.recommend_target = cfg.method.recommend_target();
    sc.alpha = cfg.alpha;
    sc.epsilon = (cfg.epsilon1, cfg.epsilon2);
    sc.environment = cfg.environment;
    sc.rule = cfg.rule;
    sc.noise_variance = cfg.noise_variance;
    sc.beta = BetaSchedule::new(cfg.rkhs_bound, cfg.delta, cfg.delta_divisor)?;
    sc.refit_interval = cfg.refit_interval;
    sc.strict_order = cfg.strict_order;
    sc.reference = cfg.reference;
    sc.threshold = match cfg.h {
        Threshold::Value(h) => Some(h),
        Threshold::Median => {
            let h = median_f2(problem)?;
            if cfg.scenario == Scenario::Constrained && !(h < 0.0) {
                bail!("median of F2 is {h}; set a negative h explicitly");
            }
            (h < 0.0).then_some(h)
        }
    };
    Ok(sc)
}

/// Result of one seed: the core trace plus its file representation.
pub struct SeedRun {
    pub seed: u64,
    pub trace: Trace<f64>,
    pub file: TraceFile,
}

pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedRun> {
    let problem = build_problem(cfg, seed)?;
    let sc = scenario_config(cfg, &problem)?;
    let trace = run_scenario(&sc, &problem, seed)?;
    let t = &trace.truth;
    let opt = |v: Option<String>| v.unwrap_or_default();
    let header = vec![
        ("seed", seed.to_string()),
        ("benchmark", cfg.benchmark.name().to_string()),
        ("method", cfg.method.to_string()),
        ("scenario", scenario_name(cfg.scenario).to_string()),
        ("metric", cfg.metric_name().to_string()),
        ("n_design", problem.n_design().to_string()),
        ("n_env", problem.n_env().to_string()),
        ("h", opt(sc.threshold.map(|h| h.to_string()))),
        ("reference", format!("{},{}", t.reference.0, t.reference.1)),
        ("true_hv", t.hv.to_string()),
        ("x_star", t.x_star.to_string()),
        ("constrained_opt", opt(t.constrained_opt.map(|x| x.to_string()))),
        ("initial_contained", trace.initial_contained.to_string()),
        ("terminated", trace.terminated.to_string()),
    ];
    let file = TraceFile {
        header: header.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        rows: trace.records.iter().map(TraceRow::from).collect(),
    };
    Ok(SeedRun { seed, trace, file })
}

/// Output directory: the explicit path, else the config's `output_dir`, else
/// `<root>/<benchmark>-<method>` with root from [`OUTPUT_ROOT_ENV`] or `runs`.
pub fn resolve_output_dir(cfg: &ExperimentConfig, explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(p) = &cfg.output_dir {
        return p.clone();
    }
    let root = std::env::var_os(OUTPUT_ROOT_ENV).map_or_else(|| PathBuf::from("runs"), PathBuf::from);
    root.join(format!("{}-{}", cfg.benchmark.name(), cfg.method))
}

#[derive(Debug)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub completed: Vec<u64>,
    pub failures: Vec<(u64, String)>,
    pub summary: Option<Summary>,
}

/// Runs every seed on a pool of `workers` threads and writes all outputs.
///
/// Seed failures are collected rather than aborting the other seeds; the
/// summary covers the seeds that completed.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path, workers: usize) -> Result<RunReport> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut resolved = cfg.clone();
    resolved.output_dir = Some(out_dir.to_path_buf());
    std::fs::write(out_dir.join("run.cfg"), resolved.to_text())?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .context("building worker pool")?;
    let outcomes: Vec<(u64, Result<TraceFile>)> = pool.install(|| {
        resolved
            .seeds
            .par_iter()
            .map(|&seed| {
                let res = run_seed(&resolved, seed).and_then(|r| {
                    std::fs::write(trace_path(out_dir, seed), r.file.to_text())?;
                    std::fs::write(out_dir.join(format!("timing_seed{seed}.csv")), timing_text(&r.trace.elapsed_ms))?;
                    Ok(r.file)
                });
                (seed, res)
            })
            .collect()
    });

    let mut completed = Vec::new();
    let mut traces = Vec::new();
    let mut failures = Vec::new();
    for (seed, res) in outcomes {
        match res {
            Ok(t) => {
                completed.push(seed);
                traces.push(t);
            }
            Err(e) => failures.push((seed, format!("{e:#}"))),
        }
    }
    let summary = if traces.is_empty() {
        None
    } else {
        let s = summarize(&resolved, &traces)?;
        std::fs::write(out_dir.join("summary.txt"), s.to_text())?;
        Some(s)
    };
    Ok(RunReport {
        out_dir: out_dir.to_path_buf(),
        completed,
        failures,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Method;

    #[test]
    fn noisy_input_problem_shape() {
        let mut cfg = ExperimentConfig::new(BenchmarkKind::Rosenbrock, Method::MtMvaBo);
        cfg.grid_points = 4;
        cfg.input_mode = InputSetting::NoisyInput;
        cfg.noise_points = 3;
        let p = build_problem(&cfg, 0).unwrap();
        assert_eq!(p.n_design(), 16);
        assert_eq!(p.n_env(), 9);
        assert_eq!(p.input_dim(), 2);
    }

    #[test]
    fn median_threshold_is_resolved() {
        let mut cfg = ExperimentConfig::new(BenchmarkKind::Bird, Method::ConstrainedMvaBo);
        cfg.grid_points = 6;
        let p = build_problem(&cfg, 0).unwrap();
        let sc = scenario_config(&cfg, &p).unwrap();
        assert_eq!(sc.threshold, Some(median_f2(&p).unwrap()));
        assert!(sc.threshold.unwrap() < 0.0);
    }

    #[test]
    fn output_dir_precedence() {
        let mut cfg = ExperimentConfig::new(BenchmarkKind::Bird, Method::Rs);
        assert_eq!(resolve_output_dir(&cfg, Some(Path::new("a"))), PathBuf::from("a"));
        cfg.output_dir = Some(PathBuf::from("b"));
        assert_eq!(resolve_output_dir(&cfg, None), PathBuf::from("b"));
    }
}
