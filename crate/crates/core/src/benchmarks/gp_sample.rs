use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::benchmarks::{linspace, product_grid, truncated_normal_weights, Benchmark};
use crate::error::{Error, Result};
use crate::gp::{KernelSpec, PackedCholesky};

/// Diagonal jitter of the noise-free interpolating fit.
pub const GP_SAMPLE_JITTER: f64 = 1e-10;

/// Random stream for drawing sample paths, kept apart from the run streams.
const PATH_STREAM: u64 = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct GpSampleParams {
    pub n_design: usize,
    pub n_env: usize,
    /// Anchor grid points per dimension on `[−1, 1]`.
    pub anchors_per_dim: usize,
    pub signal_variance: f64,
    pub lengthscale: f64,
}

impl Default for GpSampleParams {
    fn default() -> Self {
        Self {
            n_design: 100,
            n_env: 100,
            anchors_per_dim: 25,
            signal_variance: 1.0,
            lengthscale: 0.25,
        }
    }
}

impl GpSampleParams {
    pub fn kernel(&self) -> Result<KernelSpec<f64>> {
        KernelSpec::isotropic(self.signal_variance, self.lengthscale)
    }
}

struct AnchorFactor {
    anchors: Vec<Vec<f64>>,
    chol: PackedCholesky<f64>,
}

type FactorKey = (usize, u64, u64);

fn factor_cache() -> &'static Mutex<HashMap<FactorKey, Arc<AnchorFactor>>> {
    static CACHE: OnceLock<Mutex<HashMap<FactorKey, Arc<AnchorFactor>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Cholesky factor of `K + jitter · I` on the anchor grid, shared across seeds.
fn anchor_factor(params: &GpSampleParams, kernel: &KernelSpec<f64>) -> Result<Arc<AnchorFactor>> {
    let key = (
        params.anchors_per_dim,
        params.signal_variance.to_bits(),
        params.lengthscale.to_bits(),
    );
    let mut cache = factor_cache().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(f) = cache.get(&key) {
        return Ok(f.clone());
    }
    let axis = linspace(-1.0, 1.0, params.anchors_per_dim);
    let anchors = product_grid(&[axis.clone(), axis]);
    let chol = PackedCholesky::factor(anchors.len(), |i, j| {
        let k = kernel.eval_unchecked(&anchors[i], &anchors[j]);
        if i == j {
            k + GP_SAMPLE_JITTER
        } else {
            k
        }
    })
    .map_err(|(row, pivot)| Error::NumericalFailure {
        message: format!("anchor kernel matrix is not positive definite at row {row}"),
        size: anchors.len(),
        pivot,
        jitter: GP_SAMPLE_JITTER,
    })?;
    let f = Arc::new(AnchorFactor { anchors, chol });
    cache.insert(key, f.clone());
    Ok(f)
}

/// GP sample path benchmark with the default sizes.
pub fn gp_sample_benchmark(seed: u64) -> Result<Benchmark> {
    gp_sample_benchmark_with(seed, &GpSampleParams::default())
}

/// Draws a GP prior sample on the anchor grid over `[−1, 1]²` and uses the
/// posterior mean of a noise-free fit to those values as the oracle. `x` is the
/// first coordinate and `w` the second.
pub fn gp_sample_benchmark_with(seed: u64, params: &GpSampleParams) -> Result<Benchmark> {
    if params.anchors_per_dim < 2 || params.n_design == 0 || params.n_env == 0 {
        return Err(Error::invalid("gp-sample grids must be nonempty with at least 2 anchors per dimension"));
    }
    let kernel = params.kernel()?;
    let factor = anchor_factor(params, &kernel)?;

    let weights = path_weights(&factor, seed);
    let anchors = factor.anchors.clone();
    let oracle = Arc::new(move |x: &[f64], w: &[f64]| {
        let q = [x[0], w[0]];
        anchors
            .iter()
            .zip(&weights)
            .map(|(a, &c)| c * kernel.eval_unchecked(&q, a))
            .sum()
    });
    let design: Vec<Vec<f64>> = linspace(-1.0, 1.0, params.n_design).into_iter().map(|v| vec![v]).collect();
    let omega: Vec<Vec<f64>> = linspace(-1.0, 1.0, params.n_env).into_iter().map(|v| vec![v]).collect();
    let env = truncated_normal_weights(&omega)?;
    Benchmark::new("gp-sample", design, env, oracle)
}

/// Weights `c = L⁻ᵀ z` of the path `f = Σ_i c_i k(·, a_i)`.
///
/// The anchor values `K c` have covariance `K (K + jI)⁻¹ K`, which is within
/// `j` of `K` in spectral norm, and `c` is exactly the jitter-regularized fit
/// to the values `L z`. Scoring anchors against `K c` rather than `L z` keeps
/// the interpolation exact; against `L z` the residual `j c` reaches about
/// `√j` along the near-null directions of `K`.
fn path_weights(factor: &AnchorFactor, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(PATH_STREAM);
    let z: Vec<f64> = (0..factor.anchors.len()).map(|_| rng.sample(StandardNormal)).collect();
    factor.chol.back_solve(&z)
}

/// Anchor values of the drawn path, `K c = L (Lᵀ c) − j c`, computed through
/// the factor rather than the kernel so the oracle is checked independently.
#[cfg(test)]
fn path_values(seed: u64, params: &GpSampleParams) -> (Vec<Vec<f64>>, Vec<f64>) {
    let factor = anchor_factor(params, &params.kernel().unwrap()).unwrap();
    let c = path_weights(&factor, seed);
    let n = c.len();
    let lt_c: Vec<f64> = (0..n)
        .map(|j| (j..n).map(|i| factor.chol.row(i)[j] * c[i]).sum())
        .collect();
    let y = (0..n)
        .map(|i| factor.chol.row(i).iter().zip(&lt_c).map(|(l, v)| l * v).sum::<f64>() - GP_SAMPLE_JITTER * c[i])
        .collect();
    (factor.anchors.clone(), y)
}
