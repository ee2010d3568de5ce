use std::f64::consts::PI;
use std::sync::Arc;

use crate::benchmarks::{linspace, rescale, truncated_normal_weights, Benchmark};
use crate::error::Result;

/// Native domain of both Bird coordinates.
pub const BIRD_DOMAIN: (f64, f64) = (-2.0 * PI, 2.0 * PI);
/// Native domain of every Rosenbrock coordinate.
pub const ROSENBROCK_DOMAIN: (f64, f64) = (-2.048, 2.048);

/// `sin(a) e^{(1−cos b)²} + cos(b) e^{(1−sin a)²} + (a − b)²`.
pub fn bird(a: f64, b: f64) -> f64 {
    a.sin() * (1.0 - b.cos()).powi(2).exp() + b.cos() * (1.0 - a.sin()).powi(2).exp() + (a - b).powi(2)
}

/// `Σ_i 100 (z_{i+1} − z_i²)² + (1 − z_i)²`.
pub fn rosenbrock(z: &[f64]) -> f64 {
    z.windows(2)
        .map(|p| 100.0 * (p[1] - p[0] * p[0]).powi(2) + (1.0 - p[0]).powi(2))
        .sum()
}

fn unit_axis(n: usize) -> Vec<Vec<f64>> {
    linspace(-1.0, 1.0, n).into_iter().map(|v| vec![v]).collect()
}

/// Bird with `x` the first and `w` the second coordinate, both on `[−1, 1]`
/// grids of `n` points. The oracle is `−bird` so that maximizing it targets
/// the function's minima.
pub fn bird_benchmark(n: usize) -> Result<Benchmark> {
    let omega = unit_axis(n);
    let env = truncated_normal_weights(&omega)?;
    let oracle = Arc::new(|x: &[f64], w: &[f64]| -bird(rescale(x[0], BIRD_DOMAIN), rescale(w[0], BIRD_DOMAIN)));
    Benchmark::new("bird", unit_axis(n), env, oracle)
}

/// Three-dimensional Rosenbrock with `x` the first two coordinates and `w`
/// the third, each on a `[−1, 1]` grid of `n` points. The oracle is
/// `−rosenbrock`.
pub fn rosenbrock_benchmark(n: usize) -> Result<Benchmark> {
    let axis = linspace(-1.0, 1.0, n);
    let design = crate::benchmarks::product_grid(&[axis.clone(), axis]);
    let omega = unit_axis(n);
    let env = truncated_normal_weights(&omega)?;
    let oracle = Arc::new(|x: &[f64], w: &[f64]| {
        let z = [
            rescale(x[0], ROSENBROCK_DOMAIN),
            rescale(x[1], ROSENBROCK_DOMAIN),
            rescale(w[0], ROSENBROCK_DOMAIN),
        ];
        -rosenbrock(&z)
    });
    Benchmark::new("rosenbrock", design, env, oracle)
}
