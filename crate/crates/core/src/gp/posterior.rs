use crate::error::{Error, Result};
use crate::gp::cholesky::PackedCholesky;
use crate::gp::kernel::KernelSpec;
use crate::Scalar;

/// Jitter added to the diagonal when the first factorization attempt fails.
pub const FALLBACK_JITTER: f64 = 1e-10;

/// One evaluation `((x, w), y)` together with the step it was taken at.
///
/// In the noisy-input setting `x` holds the perturbed input `x̃ + ξ` and `w` is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation<T> {
    pub x: Vec<T>,
    pub w: Vec<T>,
    pub y: T,
    pub step: usize,
}

impl<T: Scalar> Observation<T> {
    pub fn new(x: Vec<T>, w: Vec<T>, y: T, step: usize) -> Self {
        Self { x, w, y, step }
    }

    /// The joint input `(x, w)` seen by the GP.
    pub fn input(&self) -> Vec<T> {
        let mut z = Vec::with_capacity(self.x.len() + self.w.len());
        z.extend_from_slice(&self.x);
        z.extend_from_slice(&self.w);
        z
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<T> {
    pub mean: T,
    pub variance: T,
}

impl<T: Scalar> Moments<T> {
    pub fn std_dev(&self) -> T {
        self.variance.sqrt()
    }
}

/// Exact GP posterior with zero prior mean.
///
/// Holds a Cholesky factor `L` of `K_t + σ² I` and the whitened targets
/// `L⁻¹ y`. Updates append one row to `L`; if the new pivot is not positive
/// the whole factor is rebuilt with jitter, and a second failure is an error.
#[derive(Debug, Clone)]
pub struct GpPosterior<T> {
    kernel: KernelSpec<T>,
    noise_variance: T,
    data: Vec<Observation<T>>,
    inputs: Vec<Vec<T>>,
    chol: PackedCholesky<T>,
    whitened: Vec<T>,
    jitter: T,
    epoch: u64,
}

impl<T: Scalar> GpPosterior<T> {
    pub fn new(kernel: KernelSpec<T>, noise_variance: T) -> Result<Self> {
        if !(noise_variance > T::zero()) || !noise_variance.is_finite() {
            return Err(Error::invalid(format!(
                "noise variance must be positive, got {noise_variance}"
            )));
        }
        Ok(Self {
            kernel,
            noise_variance,
            data: Vec::new(),
            inputs: Vec::new(),
            chol: PackedCholesky::empty(),
            whitened: Vec::new(),
            jitter: T::zero(),
            epoch: 0,
        })
    }

    /// Builds the posterior for a whole dataset with a single factorization.
    pub fn with_data(kernel: KernelSpec<T>, noise_variance: T, data: Vec<Observation<T>>) -> Result<Self> {
        let mut model = Self::new(kernel, noise_variance)?;
        for obs in &data {
            model.validate(obs)?;
        }
        model.inputs = data.iter().map(Observation::input).collect();
        model.data = data;
        model.refit()?;
        Ok(model)
    }

    pub fn kernel(&self) -> &KernelSpec<T> {
        &self.kernel
    }

    pub fn noise_variance(&self) -> T {
        self.noise_variance
    }

    pub fn observations(&self) -> &[Observation<T>] {
        &self.data
    }

    pub fn inputs(&self) -> &[Vec<T>] {
        &self.inputs
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Jitter currently added on top of the noise variance (0 unless a factorization failed).
    pub fn jitter(&self) -> T {
        self.jitter
    }

    /// Incremented whenever the factor is rebuilt from scratch; caches keyed on
    /// the factor use it to tell an append from a rebuild.
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub(crate) fn factor(&self) -> &PackedCholesky<T> {
        &self.chol
    }

    pub(crate) fn whitened_targets(&self) -> &[T] {
        &self.whitened
    }

    fn input_dim(&self) -> Option<usize> {
        self.inputs.first().map(Vec::len)
    }

    fn validate(&self, obs: &Observation<T>) -> Result<()> {
        if !obs.y.is_finite() {
            return Err(Error::invalid(format!("observation value must be finite, got {}", obs.y)));
        }
        let dim = obs.x.len() + obs.w.len();
        if dim == 0 {
            return Err(Error::invalid("observation has an empty input"));
        }
        if let Some(d) = self.input_dim() {
            if d != dim {
                return Err(Error::invalid(format!(
                    "observation has dimension {dim}, model has {d}"
                )));
            }
        }
        self.kernel.check_dim(dim)
    }

    /// Adds one observation.
    pub fn update(&mut self, obs: Observation<T>) -> Result<()> {
        self.validate(&obs)?;
        let z = obs.input();
        let cross: Vec<T> = self
            .inputs
            .iter()
            .map(|zi| self.kernel.eval_unchecked(&z, zi))
            .collect();
        let diag = self.kernel.prior_variance() + self.noise_variance + self.jitter;
        self.inputs.push(z);
        self.data.push(obs);
        match self.chol.push_row(&cross, diag) {
            Ok(()) => {
                let n = self.chol.len() - 1;
                let row = self.chol.row(n);
                let mut acc = self.data[n].y;
                for (lij, wj) in row[..n].iter().zip(&self.whitened) {
                    acc -= *lij * *wj;
                }
                self.whitened.push(acc / row[n]);
                Ok(())
            }
            Err(_) => self.refit(),
        }
    }

    /// Swaps in new kernel hyperparameters and rebuilds the factor.
    pub fn set_kernel(&mut self, kernel: KernelSpec<T>) -> Result<()> {
        if let Some(dim) = self.input_dim() {
            kernel.check_dim(dim)?;
        }
        self.kernel = kernel;
        self.refit()
    }

    /// Rebuilds the factorization of `K + σ² I` from scratch.
    pub fn refit(&mut self) -> Result<()> {
        self.epoch += 1;
        let base = self.noise_variance;
        let attempt = |jitter: T| {
            let inputs = &self.inputs;
            let kernel = &self.kernel;
            PackedCholesky::factor(inputs.len(), |i, j| {
                if i == j {
                    kernel.prior_variance() + base + jitter
                } else {
                    kernel.eval_unchecked(&inputs[i], &inputs[j])
                }
            })
        };
        let chol = match attempt(T::zero()) {
            Ok(c) => {
                self.jitter = T::zero();
                c
            }
            Err(_) => {
                let jitter = T::lit(FALLBACK_JITTER);
                log::warn!("kernel matrix factorization failed, retrying with jitter {FALLBACK_JITTER:e}");
                match attempt(jitter) {
                    Ok(c) => {
                        self.jitter = jitter;
                        c
                    }
                    Err((row, pivot)) => {
                        return Err(Error::NumericalFailure {
                            message: format!("non-positive pivot at row {row}"),
                            size: self.inputs.len(),
                            pivot: pivot.as_f64(),
                            jitter: FALLBACK_JITTER,
                        })
                    }
                }
            }
        };
        let y: Vec<T> = self.data.iter().map(|o| o.y).collect();
        self.whitened = chol.forward_solve(&y);
        self.chol = chol;
        Ok(())
    }

    fn check_query_dim(&self, z: &[T]) -> Result<()> {
        if let Some(d) = self.input_dim() {
            if d != z.len() {
                return Err(Error::invalid(format!(
                    "query has dimension {}, model has {d}",
                    z.len()
                )));
            }
        }
        self.kernel.check_dim(z.len())
    }

    /// Posterior mean and variance at one point. The variance is clamped at 0.
    pub fn query_one(&self, z: &[T]) -> Result<Moments<T>> {
        self.check_query_dim(z)?;
        Ok(self.moments_unchecked(z))
    }

    pub(crate) fn moments_unchecked(&self, z: &[T]) -> Moments<T> {
        let prior = self.kernel.prior_variance();
        if self.data.is_empty() {
            return Moments {
                mean: T::zero(),
                variance: prior,
            };
        }
        let k: Vec<T> = self.inputs.iter().map(|zi| self.kernel.eval_unchecked(z, zi)).collect();
        let v = self.chol.forward_solve(&k);
        let mean = v.iter().zip(&self.whitened).map(|(&a, &b)| a * b).sum();
        let explained: T = v.iter().map(|&a| a * a).sum();
        Moments {
            mean,
            variance: (prior - explained).max(T::zero()),
        }
    }

    /// Posterior moments at every query point.
    pub fn query(&self, points: &[Vec<T>]) -> Result<Vec<Moments<T>>> {
        points.iter().map(|z| self.query_one(z)).collect()
    }

    /// `ln det(I + σ⁻² K_t)`; zero for an empty dataset.
    pub fn log_det_term(&self) -> T {
        let t = T::lit(self.len() as f64);
        let noise = self.noise_variance + self.jitter;
        (self.chol.log_det() - t * noise.ln()).max(T::zero())
    }

    /// Exact log marginal likelihood of the targets under the current kernel.
    pub fn log_marginal_likelihood(&self) -> T {
        let n = T::lit(self.len() as f64);
        let fit: T = self.whitened.iter().map(|&v| v * v).sum();
        -T::lit(0.5) * fit - T::lit(0.5) * self.chol.log_det() - T::lit(0.5) * n * (T::TAU()).ln()
    }

    /// Smallest diagonal entry of the Cholesky factor, a cheap conditioning diagnostic.
    pub fn min_pivot(&self) -> T {
        self.chol.min_diag()
    }
}

/// Free-function form of [`GpPosterior::query`].
pub fn posterior_query<T: Scalar>(model: &GpPosterior<T>, queries: &[Vec<T>]) -> Result<Vec<Moments<T>>> {
    model.query(queries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(x: f64, w: f64, y: f64) -> Observation<f64> {
        Observation::new(vec![x], vec![w], y, 0)
    }

    #[test]
    fn prior_moments() {
        let k = KernelSpec::isotropic(1.7, 0.3).unwrap();
        let gp = GpPosterior::new(k, 1e-4).unwrap();
        let m = gp.query_one(&[0.2, -0.4]).unwrap();
        assert_eq!(m.mean, 0.0);
        assert_eq!(m.variance, 1.7);
        assert_eq!(gp.log_det_term(), 0.0);
    }

    #[test]
    fn single_observation_by_hand() {
        let k = KernelSpec::isotropic(1.0, 0.25).unwrap();
        let mut gp = GpPosterior::new(k, 1e-4).unwrap();
        gp.update(obs(0.1, 0.2, 2.0)).unwrap();
        let m = gp.query_one(&[0.1, 0.2]).unwrap();
        assert!((m.mean - 2.0 / (1.0 + 1e-4)).abs() < 1e-12);
        assert!((m.variance - (1.0 - 1.0 / (1.0 + 1e-4))).abs() < 1e-12);
        assert!((m.mean - 1.9998).abs() < 1e-4);
        assert!((m.variance - 9.999e-5).abs() < 1e-8);
    }

    #[test]
    fn noiseless_limit_interpolates() {
        let k = KernelSpec::isotropic(1.0, 0.5).unwrap();
        let mut gp = GpPosterior::new(k, 1e-12).unwrap();
        gp.update(obs(0.3, -0.1, 0.77)).unwrap();
        gp.update(obs(-0.6, 0.4, -1.2)).unwrap();
        assert!((gp.query_one(&[0.3, -0.1]).unwrap().mean - 0.77).abs() < 1e-6);
        assert!((gp.query_one(&[-0.6, 0.4]).unwrap().mean + 1.2).abs() < 1e-6);
    }

    #[test]
    fn order_independent() {
        let k = KernelSpec::ard(1.0, vec![0.4, 0.7]).unwrap();
        let mut a = GpPosterior::new(k.clone(), 1e-3).unwrap();
        let mut b = GpPosterior::new(k, 1e-3).unwrap();
        a.update(obs(0.1, 0.2, 1.0)).unwrap();
        a.update(obs(-0.3, 0.5, -0.5)).unwrap();
        b.update(obs(-0.3, 0.5, -0.5)).unwrap();
        b.update(obs(0.1, 0.2, 1.0)).unwrap();
        for q in [[0.0, 0.0], [0.1, 0.2], [0.9, -0.9], [-0.3, 0.4]] {
            let ma = a.query_one(&q).unwrap();
            let mb = b.query_one(&q).unwrap();
            assert!((ma.mean - mb.mean).abs() < 1e-10);
            assert!((ma.variance - mb.variance).abs() < 1e-10);
        }
        assert!((a.log_det_term() - b.log_det_term()).abs() < 1e-10);
    }

    #[test]
    fn incremental_matches_refit() {
        let k = KernelSpec::isotropic(1.0, 0.3).unwrap();
        let mut gp = GpPosterior::new(k.clone(), 1e-4).unwrap();
        let mut data = Vec::new();
        for i in 0..25 {
            let x = ((i * 7) % 11) as f64 / 11.0 - 0.5;
            let w = ((i * 3) % 5) as f64 / 5.0 - 0.5;
            let o = obs(x, w, (3.0 * x).sin() + w);
            data.push(o.clone());
            gp.update(o).unwrap();
        }
        let fresh = GpPosterior::with_data(k, 1e-4, data).unwrap();
        for q in [[0.05, 0.1], [-0.4, 0.3], [0.45, -0.45]] {
            let a = gp.query_one(&q).unwrap();
            let b = fresh.query_one(&q).unwrap();
            assert!((a.mean - b.mean).abs() < 1e-9);
            assert!((a.variance - b.variance).abs() < 1e-10);
        }
        assert!((gp.log_det_term() - fresh.log_det_term()).abs() < 1e-8);
    }

    #[test]
    fn duplicate_points_stay_factorizable() {
        let k = KernelSpec::isotropic(1.0, 0.25).unwrap();
        let mut gp = GpPosterior::new(k, 1e-4).unwrap();
        for _ in 0..50 {
            gp.update(obs(0.0, 0.0, 1.0)).unwrap();
        }
        let m = gp.query_one(&[0.0, 0.0]).unwrap();
        assert!(m.variance < 1e-4 / 40.0);
        assert!((m.mean - 1.0).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_observations() {
        let k = KernelSpec::ard(1.0, vec![1.0, 1.0]).unwrap();
        let mut gp = GpPosterior::new(k, 1e-4).unwrap();
        assert!(gp.update(obs(0.0, 0.0, f64::NAN)).is_err());
        assert!(gp.update(Observation::new(vec![0.0], vec![], 1.0, 0)).is_err());
        assert!(gp.is_empty());
        gp.update(obs(0.0, 0.0, 1.0)).unwrap();
        assert!(gp.query_one(&[0.0]).is_err());
        assert!(GpPosterior::new(KernelSpec::isotropic(1.0, 1.0).unwrap(), 0.0).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let k = KernelSpec::isotropic(1.0f32, 0.25).unwrap();
        let mut gp = GpPosterior::new(k, 1e-2).unwrap();
        gp.update(Observation::new(vec![0.0], vec![0.0], 1.0, 1)).unwrap();
        let m = gp.query_one(&[0.0, 0.0]).unwrap();
        assert!((m.mean - 1.0 / 1.01).abs() < 1e-5);
    }
}
