//! Oracles and environment distributions for the experiments.

mod functions;
mod gp_sample;
mod newsvendor;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::risk::EnvDistribution;
use crate::scenarios::Problem;

pub use functions::{bird, bird_benchmark, rosenbrock, rosenbrock_benchmark, BIRD_DOMAIN, ROSENBROCK_DOMAIN};
pub use gp_sample::{gp_sample_benchmark, gp_sample_benchmark_with, GpSampleParams, GP_SAMPLE_JITTER};
pub use newsvendor::{newsvendor_benchmark, newsvendor_profit, NewsvendorParams};

/// Deterministic map `(x, w) → f(x, w)`.
pub type Oracle = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// A tabulated problem: design grid, environment distribution and oracle.
#[derive(Clone)]
pub struct Benchmark {
    name: String,
    design: Vec<Vec<f64>>,
    env: EnvDistribution<f64>,
    oracle: Oracle,
    values: Vec<f64>,
}

impl fmt::Debug for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Benchmark")
            .field("name", &self.name)
            .field("n_design", &self.design.len())
            .field("n_env", &self.env.len())
            .finish()
    }
}

impl Benchmark {
    /// Tabulates `oracle` on every (design, environment) pair.
    pub fn new(name: impl Into<String>, design: Vec<Vec<f64>>, env: EnvDistribution<f64>, oracle: Oracle) -> Result<Self> {
        let name = name.into();
        if design.is_empty() {
            return Err(Error::invalid(format!("{name}: empty design grid")));
        }
        let values: Vec<f64> = design
            .iter()
            .flat_map(|x| env.support().iter().map(|w| oracle(x, w)))
            .collect();
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("{name}: oracle is not finite at table entry {bad}")));
        }
        Ok(Self {
            name,
            design,
            env,
            oracle,
            values,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn design(&self) -> &[Vec<f64>] {
        &self.design
    }

    pub fn env(&self) -> &EnvDistribution<f64> {
        &self.env
    }

    /// Design-major table `f(x_i, w_j)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, design: usize, env: usize) -> f64 {
        self.values[design * self.env.len() + env]
    }

    pub fn evaluate(&self, x: &[f64], w: &[f64]) -> f64 {
        (self.oracle)(x, w)
    }

    /// `(dim x, dim w)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.design[0].len(), self.env.support()[0].len())
    }

    pub fn problem(&self) -> Result<Problem<f64>> {
        Problem::joint(self.design.clone(), self.env.clone(), self.values.clone())
    }

    /// Noisy-input variant: the environment is pinned at `w_fixed` and the
    /// design input is perturbed by `ξ ~ noise`.
    pub fn noisy_input_problem(&self, noise: EnvDistribution<f64>, w_fixed: &[f64]) -> Result<Problem<f64>> {
        let mut values = Vec::with_capacity(self.design.len() * noise.len());
        for x in &self.design {
            for xi in noise.support() {
                if xi.len() != x.len() {
                    return Err(Error::invalid("perturbation and design dimensions differ"));
                }
                let shifted: Vec<f64> = x.iter().zip(xi).map(|(a, b)| a + b).collect();
                values.push((self.oracle)(&shifted, w_fixed));
            }
        }
        Problem::noisy_input(self.design.clone(), noise, values)
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![(lo + hi) / 2.0],
        _ => (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

/// Cartesian product of per-dimension axes, last axis varying fastest.
pub fn product_grid(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

/// Maps `t ∈ [−1, 1]` affinely onto `[lo, hi]`.
#[inline]
pub fn rescale(t: f64, (lo, hi): (f64, f64)) -> f64 {
    if t == -1.0 {
        lo
    } else if t == 1.0 {
        hi
    } else {
        lo + (t + 1.0) * 0.5 * (hi - lo)
    }
}

fn std_normal_pdf(v: f64) -> f64 {
    (-0.5 * v * v).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `p(w) ∝ Π_k φ(w_k)` restricted to the grid.
pub fn truncated_normal_weights(grid: &[Vec<f64>]) -> Result<EnvDistribution<f64>> {
    truncated_normal_weights_scaled(grid, 1.0)
}

/// Same with `φ` the density of `N(0, scale²)`.
pub fn truncated_normal_weights_scaled(grid: &[Vec<f64>], scale: f64) -> Result<EnvDistribution<f64>> {
    if !(scale > 0.0) {
        return Err(Error::invalid("scale must be positive"));
    }
    let masses = grid
        .iter()
        .map(|w| w.iter().map(|&v| std_normal_pdf(v / scale)).product())
        .collect();
    EnvDistribution::from_masses(grid.to_vec(), masses)
}

/// Benchmarks addressable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkKind {
    GpSample,
    Bird,
    Rosenbrock,
    Newsvendor,
}

impl BenchmarkKind {
    pub const ALL: [BenchmarkKind; 4] = [
        BenchmarkKind::GpSample,
        BenchmarkKind::Bird,
        BenchmarkKind::Rosenbrock,
        BenchmarkKind::Newsvendor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkKind::GpSample => "gp-sample",
            BenchmarkKind::Bird => "bird",
            BenchmarkKind::Rosenbrock => "rosenbrock",
            BenchmarkKind::Newsvendor => "newsvendor",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| {
                let known: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
                Error::invalid(format!("unknown benchmark '{name}' (known: {})", known.join(", ")))
            })
    }
}
