use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    /// One lengthscale shared by every input dimension.
    IsotropicGaussian,
    /// One lengthscale per input dimension.
    ArdGaussian,
}

/// Gaussian (squared-exponential) kernel
/// `k(a, b) = σ² · exp(−Σᵢ (aᵢ − bᵢ)² / (2 lᵢ²))`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec<T> {
    family: KernelFamily,
    signal_variance: T,
    lengthscales: Vec<T>,
}

impl<T: Scalar> KernelSpec<T> {
    pub fn isotropic(signal_variance: T, lengthscale: T) -> Result<Self> {
        Self::new(KernelFamily::IsotropicGaussian, signal_variance, vec![lengthscale])
    }

    pub fn ard(signal_variance: T, lengthscales: Vec<T>) -> Result<Self> {
        Self::new(KernelFamily::ArdGaussian, signal_variance, lengthscales)
    }

    pub fn new(family: KernelFamily, signal_variance: T, lengthscales: Vec<T>) -> Result<Self> {
        if !(signal_variance > T::zero()) || !signal_variance.is_finite() {
            return Err(Error::invalid(format!(
                "signal variance must be positive, got {signal_variance}"
            )));
        }
        if lengthscales.is_empty() {
            return Err(Error::invalid("at least one lengthscale is required"));
        }
        if family == KernelFamily::IsotropicGaussian && lengthscales.len() != 1 {
            return Err(Error::invalid("isotropic kernel takes exactly one lengthscale"));
        }
        if let Some(bad) = lengthscales.iter().find(|l| !(**l > T::zero()) || !l.is_finite()) {
            return Err(Error::invalid(format!("lengthscales must be positive, got {bad}")));
        }
        Ok(Self {
            family,
            signal_variance,
            lengthscales,
        })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn signal_variance(&self) -> T {
        self.signal_variance
    }

    pub fn lengthscales(&self) -> &[T] {
        &self.lengthscales
    }

    /// Number of input dimensions the kernel is tied to; `None` for isotropic kernels.
    pub fn input_dim(&self) -> Option<usize> {
        match self.family {
            KernelFamily::IsotropicGaussian => None,
            KernelFamily::ArdGaussian => Some(self.lengthscales.len()),
        }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self.input_dim() {
            Some(d) if d != dim => Err(Error::invalid(format!(
                "kernel expects {d}-dimensional inputs, got {dim}"
            ))),
            _ => Ok(()),
        }
    }

    /// Same family with new parameters, as used by the hyperparameter search.
    pub fn with_params(&self, signal_variance: T, lengthscales: Vec<T>) -> Result<Self> {
        Self::new(self.family, signal_variance, lengthscales)
    }

    pub fn eval(&self, a: &[T], b: &[T]) -> Result<T> {
        if a.len() != b.len() {
            return Err(Error::invalid(format!(
                "point dimensions differ: {} vs {}",
                a.len(),
                b.len()
            )));
        }
        self.check_dim(a.len())?;
        Ok(self.eval_unchecked(a, b))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, a: &[T], b: &[T]) -> T {
        let half = T::lit(0.5);
        let scaled: T = match self.family {
            KernelFamily::IsotropicGaussian => {
                let l = self.lengthscales[0];
                let d2: T = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum();
                d2 / (l * l)
            }
            KernelFamily::ArdGaussian => a
                .iter()
                .zip(b)
                .zip(&self.lengthscales)
                .map(|((&x, &y), &l)| {
                    let d = (x - y) / l;
                    d * d
                })
                .sum(),
        };
        self.signal_variance * (-half * scaled).exp()
    }

    /// `k(z, z)`, identical for every z.
    #[inline]
    pub fn prior_variance(&self) -> T {
        self.signal_variance
    }
}

pub fn kernel_eval<T: Scalar>(spec: &KernelSpec<T>, z1: &[T], z2: &[T]) -> Result<T> {
    spec.eval(z1, z2)
}
