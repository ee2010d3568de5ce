//! Flat `key = value` experiment configuration.
//!
//! One setting per line, `#` starts a comment line, arrays are
//! comma-separated. Unknown or repeated keys are errors. [`ExperimentConfig::to_text`]
//! writes every key with its resolved value, and parsing that text back gives
//! the same configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use mvabo_core::benchmarks::BenchmarkKind;
use mvabo_core::scenarios::{EnvironmentMode, RecommendTarget, RecommendationRule, Scenario, Selector, StrictOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    MtMvaBo,
    MoMvaBo,
    ConstrainedMvaBo,
    Rs,
    Us,
    Bqoucb,
    BoVo,
    AdaBqoucb,
    AdaBoVo,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::MtMvaBo,
        Method::MoMvaBo,
        Method::ConstrainedMvaBo,
        Method::Rs,
        Method::Us,
        Method::Bqoucb,
        Method::BoVo,
        Method::AdaBqoucb,
        Method::AdaBoVo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::MtMvaBo => "mt-mva-bo",
            Method::MoMvaBo => "mo-mva-bo",
            Method::ConstrainedMvaBo => "constrained-mva-bo",
            Method::Rs => "rs",
            Method::Us => "us",
            Method::Bqoucb => "bqoucb",
            Method::BoVo => "bo-vo",
            Method::AdaBqoucb => "ada-bqoucb",
            Method::AdaBoVo => "ada-bo-vo",
        }
    }

    pub fn selector(self) -> Selector {
        match self {
            Method::MtMvaBo | Method::MoMvaBo | Method::ConstrainedMvaBo => Selector::Proposed,
            Method::Rs => Selector::Random,
            Method::Us => Selector::Uncertainty,
            Method::Bqoucb | Method::AdaBqoucb => Selector::MeanUcb,
            Method::BoVo | Method::AdaBoVo => Selector::VarianceUcb,
        }
    }

    /// Objective whose lower bound ranks past picks in the multi-task scenario.
    pub fn recommend_target(self) -> RecommendTarget {
        match self {
            Method::Bqoucb => RecommendTarget::F1,
            Method::BoVo => RecommendTarget::F2,
            _ => RecommendTarget::G,
        }
    }

    /// The scenario a proposed method is tied to; baselines run in any.
    pub fn fixed_scenario(self) -> Option<Scenario> {
        match self {
            Method::MtMvaBo => Some(Scenario::MultiTask),
            Method::MoMvaBo => Some(Scenario::MultiObjective),
            Method::ConstrainedMvaBo => Some(Scenario::Constrained),
            _ => None,
        }
    }
}

impl FromStr for Method {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            let known: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
            anyhow!("unknown method '{s}' (known: {})", known.join(", "))
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The constraint level `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// Median of the exact F2 over the design grid, resolved per seed.
    Median,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputSetting {
    Joint,
    NoisyInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Isotropic,
    Ard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub benchmark: BenchmarkKind,
    /// gp-sample design grid size.
    pub n_design: usize,
    /// gp-sample environment grid size.
    pub n_env: usize,
    /// Points per dimension for bird and rosenbrock.
    pub grid_points: usize,
    /// Frozen preference draws for the newsvendor environment grid.
    pub newsvendor_draws: usize,
    /// Seed of the frozen newsvendor draws.
    pub benchmark_seed: u64,
    pub method: Method,
    pub scenario: Scenario,
    pub alpha: f64,
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub h: Threshold,
    pub delta: f64,
    pub delta_divisor: u32,
    pub rkhs_bound: f64,
    pub noise_variance: f64,
    pub budget: usize,
    pub environment: EnvironmentMode,
    pub input_mode: InputSetting,
    pub noise_scale: f64,
    pub noise_points: usize,
    pub rule: RecommendationRule,
    pub refit_interval: usize,
    pub kernel: KernelKind,
    pub kernel_variance: f64,
    pub kernel_lengthscale: Vec<f64>,
    pub strict_order: StrictOrder,
    pub reference: Option<(f64, f64)>,
    pub seeds: Vec<u64>,
    pub output_dir: Option<PathBuf>,
}

/// Every accepted key, in the order [`ExperimentConfig::to_text`] writes them.
pub const KEYS: [&str; 30] = [
    "benchmark",
    "n_design",
    "n_env",
    "grid_points",
    "newsvendor_draws",
    "benchmark_seed",
    "method",
    "scenario",
    "alpha",
    "epsilon1",
    "epsilon2",
    "h",
    "delta",
    "delta_divisor",
    "rkhs_bound",
    "noise_variance",
    "budget",
    "environment",
    "input_mode",
    "noise_scale",
    "noise_points",
    "rule",
    "refit_interval",
    "kernel",
    "kernel_variance",
    "kernel_lengthscale",
    "strict_order",
    "reference",
    "seeds",
    "output_dir",
];

impl ExperimentConfig {
    /// Defaults for a benchmark and method, with one seed (0).
    pub fn new(benchmark: BenchmarkKind, method: Method) -> Self {
        let mut cfg = Self {
            benchmark,
            n_design: 100,
            n_env: 100,
            grid_points: 100,
            newsvendor_draws: 200,
            benchmark_seed: 0,
            method,
            scenario: method.fixed_scenario().unwrap_or(Scenario::MultiTask),
            alpha: 0.5,
            epsilon1: 0.1,
            epsilon2: 0.1,
            h: Threshold::Median,
            delta: 0.1,
            delta_divisor: 3,
            rkhs_bound: 2.0,
            noise_variance: 1e-4,
            budget: 100,
            environment: EnvironmentMode::SampledKnown,
            input_mode: InputSetting::Joint,
            noise_scale: 0.1,
            noise_points: 5,
            rule: RecommendationRule::PerStepBounds,
            refit_interval: 10,
            kernel: KernelKind::Ard,
            kernel_variance: 1.0,
            kernel_lengthscale: Vec::new(),
            strict_order: StrictOrder::AllCoordinates,
            reference: None,
            seeds: vec![0],
            output_dir: None,
        };
        cfg.apply_benchmark_defaults();
        cfg
    }

    fn apply_benchmark_defaults(&mut self) {
        match self.benchmark {
            BenchmarkKind::GpSample => {
                self.refit_interval = 0;
                self.kernel = KernelKind::Isotropic;
            }
            BenchmarkKind::Rosenbrock => self.grid_points = 30,
            BenchmarkKind::Bird | BenchmarkKind::Newsvendor => {}
        }
        self.reset_lengthscales();
    }

    /// gp-sample uses its true lengthscale 0.25, other benchmarks 0.5 per
    /// input dimension.
    fn reset_lengthscales(&mut self) {
        let l = if self.benchmark == BenchmarkKind::GpSample { 0.25 } else { 0.5 };
        let n = match self.kernel {
            KernelKind::Isotropic => 1,
            KernelKind::Ard => self.gp_input_dim(),
        };
        self.kernel_lengthscale = vec![l; n];
    }

    /// Dimension of the GP input for this benchmark and input mode.
    pub fn gp_input_dim(&self) -> usize {
        let (dx, dw) = match self.benchmark {
            BenchmarkKind::GpSample | BenchmarkKind::Bird => (1, 1),
            BenchmarkKind::Rosenbrock => (2, 1),
            BenchmarkKind::Newsvendor => (2, 2),
        };
        match self.input_mode {
            InputSetting::Joint => dx + dw,
            InputSetting::NoisyInput => dx,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected 'key = value', got '{line}'", no + 1))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                bail!("line {}: unknown key '{key}'", no + 1);
            }
            if entries.insert(key, (no + 1, value.trim())).is_some() {
                bail!("line {}: key '{key}' given twice", no + 1);
            }
        }

        let get = |k: &str| entries.get(k).map(|&(_, v)| v);
        let benchmark = match get("benchmark") {
            Some(v) => BenchmarkKind::from_name(v)?,
            None => bail!("missing required key 'benchmark'"),
        };
        let method: Method = match get("method") {
            Some(v) => v.parse()?,
            None => bail!("missing required key 'method'"),
        };
        let mut cfg = Self::new(benchmark, method);
        // Input mode and kernel family change the default lengthscales.
        if let Some(v) = get("input_mode") {
            cfg.input_mode = parse_input_mode(v)?;
        }
        if let Some(v) = get("kernel") {
            cfg.kernel = parse_kernel(v)?;
        }
        cfg.reset_lengthscales();

        for (&key, &(line, value)) in &entries {
            cfg.set(key, value).with_context(|| format!("line {line}: key '{key}'"))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "benchmark" | "method" | "input_mode" | "kernel" => {}
            "n_design" => self.n_design = num(v)?,
            "n_env" => self.n_env = num(v)?,
            "grid_points" => self.grid_points = num(v)?,
            "newsvendor_draws" => self.newsvendor_draws = num(v)?,
            "benchmark_seed" => self.benchmark_seed = num(v)?,
            "scenario" => self.scenario = parse_scenario(v)?,
            "alpha" => self.alpha = num(v)?,
            "epsilon1" => self.epsilon1 = num(v)?,
            "epsilon2" => self.epsilon2 = num(v)?,
            "h" => {
                self.h = match v {
                    "median" => Threshold::Median,
                    _ => Threshold::Value(num(v)?),
                }
            }
            "delta" => self.delta = num(v)?,
            "delta_divisor" => self.delta_divisor = num(v)?,
            "rkhs_bound" => self.rkhs_bound = num(v)?,
            "noise_variance" => self.noise_variance = num(v)?,
            "budget" => self.budget = num(v)?,
            "environment" => self.environment = parse_environment(v)?,
            "noise_scale" => self.noise_scale = num(v)?,
            "noise_points" => self.noise_points = num(v)?,
            "rule" => self.rule = parse_rule(v)?,
            "refit_interval" => self.refit_interval = num(v)?,
            "kernel_variance" => self.kernel_variance = num(v)?,
            "kernel_lengthscale" => self.kernel_lengthscale = list(v)?,
            "strict_order" => self.strict_order = parse_order(v)?,
            "reference" => {
                self.reference = match v {
                    "auto" => None,
                    _ => match list::<f64>(v)?.as_slice() {
                        &[a, b] => Some((a, b)),
                        _ => bail!("expected 'auto' or two comma-separated numbers"),
                    },
                }
            }
            "seeds" => self.seeds = parse_seeds(v)?,
            "output_dir" => self.output_dir = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
            _ => bail!("unknown key"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(fixed) = self.method.fixed_scenario() {
            if fixed != self.scenario {
                bail!(
                    "method {} runs the {} scenario, not {}",
                    self.method,
                    scenario_name(fixed),
                    scenario_name(self.scenario)
                );
            }
        }
        if self.seeds.is_empty() {
            bail!("seeds must be nonempty");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            bail!("alpha must lie in [0, 1]");
        }
        if !(self.epsilon1 >= 0.0 && self.epsilon2 >= 0.0) {
            bail!("epsilon1 and epsilon2 must be nonnegative");
        }
        if let Threshold::Value(h) = self.h {
            if !(h < 0.0) {
                bail!("h must be negative, got {h}");
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            bail!("delta must lie in (0, 1)");
        }
        if self.delta_divisor == 0 || !(self.rkhs_bound > 0.0) || !(self.noise_variance > 0.0) {
            bail!("delta_divisor, rkhs_bound and noise_variance must be positive");
        }
        if self.n_design == 0 || self.n_env == 0 || self.grid_points < 2 || self.newsvendor_draws == 0 {
            bail!("benchmark grids must be nonempty (grid_points at least 2)");
        }
        if self.input_mode == InputSetting::NoisyInput {
            if self.benchmark == BenchmarkKind::Newsvendor {
                bail!("noisy-input mode is not available for the newsvendor benchmark");
            }
            if !(self.noise_scale > 0.0) || self.noise_points == 0 {
                bail!("noisy-input mode needs noise_scale > 0 and noise_points >= 1");
            }
        }
        if !(self.kernel_variance > 0.0) || self.kernel_lengthscale.iter().any(|l| !(*l > 0.0)) {
            bail!("kernel parameters must be positive");
        }
        let expected = match self.kernel {
            KernelKind::Isotropic => 1,
            KernelKind::Ard => self.gp_input_dim(),
        };
        if self.kernel_lengthscale.len() != expected {
            bail!(
                "{} kernel needs {expected} lengthscale(s), got {}",
                kernel_name(self.kernel),
                self.kernel_lengthscale.len()
            );
        }
        Ok(())
    }

    /// Every key with its resolved value, one per line, in [`KEYS`] order.
    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        vec![
            ("benchmark", self.benchmark.name().to_string()),
            ("n_design", self.n_design.to_string()),
            ("n_env", self.n_env.to_string()),
            ("grid_points", self.grid_points.to_string()),
            ("newsvendor_draws", self.newsvendor_draws.to_string()),
            ("benchmark_seed", self.benchmark_seed.to_string()),
            ("method", self.method.to_string()),
            ("scenario", scenario_name(self.scenario).to_string()),
            ("alpha", self.alpha.to_string()),
            ("epsilon1", self.epsilon1.to_string()),
            ("epsilon2", self.epsilon2.to_string()),
            (
                "h",
                match self.h {
                    Threshold::Median => "median".to_string(),
                    Threshold::Value(h) => h.to_string(),
                },
            ),
            ("delta", self.delta.to_string()),
            ("delta_divisor", self.delta_divisor.to_string()),
            ("rkhs_bound", self.rkhs_bound.to_string()),
            ("noise_variance", self.noise_variance.to_string()),
            ("budget", self.budget.to_string()),
            ("environment", environment_name(self.environment).to_string()),
            (
                "input_mode",
                match self.input_mode {
                    InputSetting::Joint => "joint",
                    InputSetting::NoisyInput => "noisy-input",
                }
                .to_string(),
            ),
            ("noise_scale", self.noise_scale.to_string()),
            ("noise_points", self.noise_points.to_string()),
            (
                "rule",
                match self.rule {
                    RecommendationRule::PerStepBounds => "per-step-bounds",
                    RecommendationRule::CurrentStepBounds => "current-step-bounds",
                }
                .to_string(),
            ),
            ("refit_interval", self.refit_interval.to_string()),
            ("kernel", kernel_name(self.kernel).to_string()),
            ("kernel_variance", self.kernel_variance.to_string()),
            ("kernel_lengthscale", join(&self.kernel_lengthscale)),
            (
                "strict_order",
                match self.strict_order {
                    StrictOrder::AllCoordinates => "all",
                    StrictOrder::AnyCoordinate => "any",
                }
                .to_string(),
            ),
            (
                "reference",
                self.reference.map_or("auto".to_string(), |(a, b)| format!("{a},{b}")),
            ),
            (
                "seeds",
                self.seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","),
            ),
            (
                "output_dir",
                self.output_dir.as_ref().map_or(String::new(), |p| p.display().to_string()),
            ),
        ]
    }

    /// Name of the per-step metric recorded for this scenario.
    pub fn metric_name(&self) -> &'static str {
        match self.scenario {
            Scenario::MultiObjective => "hv_gap",
            Scenario::MultiTask | Scenario::Constrained => "regret",
        }
    }
}

fn num<T: FromStr>(v: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    v.parse::<T>().map_err(|e| anyhow!("invalid value '{v}': {e}"))
}

fn list<T: FromStr>(v: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    v.split(',').map(|s| num(s.trim())).collect()
}

/// Comma-separated seeds; `a..b` expands to the half-open range.
pub fn parse_seeds(v: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => out.extend(num::<u64>(a)?..num::<u64>(b)?),
            None => out.push(num(part)?),
        }
    }
    if out.is_empty() {
        bail!("seed list is empty");
    }
    Ok(out)
}

pub fn scenario_name(s: Scenario) -> &'static str {
    match s {
        Scenario::MultiTask => "multi-task",
        Scenario::MultiObjective => "multi-objective",
        Scenario::Constrained => "constrained",
    }
}

fn parse_scenario(v: &str) -> Result<Scenario> {
    Ok(match v {
        "multi-task" => Scenario::MultiTask,
        "multi-objective" => Scenario::MultiObjective,
        "constrained" => Scenario::Constrained,
        _ => bail!("expected multi-task, multi-objective or constrained"),
    })
}

fn environment_name(e: EnvironmentMode) -> &'static str {
    match e {
        EnvironmentMode::SampledKnown => "known",
        EnvironmentMode::SampledEmpirical => "empirical",
        EnvironmentMode::Simulator => "simulator",
    }
}

fn parse_environment(v: &str) -> Result<EnvironmentMode> {
    Ok(match v {
        "known" => EnvironmentMode::SampledKnown,
        "empirical" => EnvironmentMode::SampledEmpirical,
        "simulator" => EnvironmentMode::Simulator,
        _ => bail!("expected known, empirical or simulator"),
    })
}

fn parse_input_mode(v: &str) -> Result<InputSetting> {
    Ok(match v {
        "joint" => InputSetting::Joint,
        "noisy-input" => InputSetting::NoisyInput,
        _ => bail!("input_mode: expected joint or noisy-input, got '{v}'"),
    })
}

fn parse_rule(v: &str) -> Result<RecommendationRule> {
    Ok(match v {
        "per-step-bounds" => RecommendationRule::PerStepBounds,
        "current-step-bounds" => RecommendationRule::CurrentStepBounds,
        _ => bail!("expected per-step-bounds or current-step-bounds"),
    })
}

fn kernel_name(k: KernelKind) -> &'static str {
    match k {
        KernelKind::Isotropic => "isotropic",
        KernelKind::Ard => "ard",
    }
}

fn parse_kernel(v: &str) -> Result<KernelKind> {
    Ok(match v {
        "isotropic" => KernelKind::Isotropic,
        "ard" => KernelKind::Ard,
        _ => bail!("kernel: expected isotropic or ard, got '{v}'"),
    })
}

fn parse_order(v: &str) -> Result<StrictOrder> {
    Ok(match v {
        "all" => StrictOrder::AllCoordinates,
        "any" => StrictOrder::AnyCoordinate,
        _ => bail!("expected all or any"),
    })
}
