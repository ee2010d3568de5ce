//! Type-II maximum likelihood for the kernel hyperparameters.

use crate::error::{Error, Result};
use crate::gp::kernel::KernelSpec;
use crate::gp::posterior::{GpPosterior, Observation};
use crate::Scalar;

const LENGTHSCALE_RANGE: (f64, f64) = (1e-2, 1e1);
const SIGNAL_VARIANCE_RANGE: (f64, f64) = (1e-2, 1e2);

#[derive(Debug, Clone)]
pub struct FitOutcome<T> {
    pub kernel: KernelSpec<T>,
    pub log_likelihood: T,
    /// Set when every search start failed and `init` was returned as is.
    pub warning: Option<String>,
}

/// Maximizes the exact log marginal likelihood over the signal variance and
/// lengthscales, with the noise variance held fixed.
///
/// Runs a Nelder–Mead search on log-parameters from four deterministic starts
/// (the initial spec plus three lengthscale scales). Parameters are clamped to
/// lengthscales in [1e-2, 1e1] and signal variance in [1e-2, 1e2]. The result
/// never has a lower likelihood than `init`.
pub fn fit_hyperparameters<T: Scalar>(
    data: &[Observation<T>],
    init: &KernelSpec<T>,
    noise_variance: T,
) -> Result<FitOutcome<T>> {
    if data.len() < 2 {
        return Err(Error::invalid(format!(
            "hyperparameter fitting needs at least 2 observations, got {}",
            data.len()
        )));
    }
    let objective = Objective {
        data,
        init,
        noise_variance,
    };

    let init_ll = objective.log_likelihood(init);
    let dim = init.lengthscales().len();
    let mean_y = data.iter().map(|o| o.y).sum::<T>() / T::lit(data.len() as f64);
    let var_y = data.iter().map(|o| (o.y - mean_y) * (o.y - mean_y)).sum::<T>() / T::lit(data.len() as f64);
    let var_y = if var_y > T::zero() { var_y } else { T::one() };

    let mut starts = vec![encode(init)];
    for scale in [0.1, 0.5, 2.0] {
        let mut theta = vec![var_y.ln()];
        theta.extend(std::iter::repeat_n(T::lit(scale).ln(), dim));
        starts.push(theta);
    }

    let mut best: Option<(KernelSpec<T>, T)> = None;
    for start in starts {
        let theta = nelder_mead(|th| -objective.log_likelihood_at(th), clamp(&start), 200 + 60 * dim);
        let Some(spec) = objective.decode(&theta) else { continue };
        let ll = objective.log_likelihood(&spec);
        if !ll.is_finite() {
            continue;
        }
        if best.as_ref().is_none_or(|(_, b)| ll > *b) {
            best = Some((spec, ll));
        }
    }

    match best {
        Some((spec, ll)) if !(init_ll.is_finite() && init_ll >= ll) => Ok(FitOutcome {
            kernel: spec,
            log_likelihood: ll,
            warning: None,
        }),
        Some(_) => Ok(FitOutcome {
            kernel: init.clone(),
            log_likelihood: init_ll,
            warning: None,
        }),
        None => {
            log::warn!("hyperparameter search failed from every start; keeping the initial kernel");
            Ok(FitOutcome {
                kernel: init.clone(),
                log_likelihood: init_ll,
                warning: Some("hyperparameter search failed from every start".into()),
            })
        }
    }
}

struct Objective<'a, T> {
    data: &'a [Observation<T>],
    init: &'a KernelSpec<T>,
    noise_variance: T,
}

impl<T: Scalar> Objective<'_, T> {
    fn decode(&self, theta: &[T]) -> Option<KernelSpec<T>> {
        let theta = clamp(theta);
        let ls = theta[1..].iter().map(|v| v.exp()).collect();
        self.init.with_params(theta[0].exp(), ls).ok()
    }

    fn log_likelihood(&self, spec: &KernelSpec<T>) -> T {
        match GpPosterior::with_data(spec.clone(), self.noise_variance, self.data.to_vec()) {
            Ok(gp) if gp.jitter() == T::zero() => gp.log_marginal_likelihood(),
            _ => T::neg_infinity(),
        }
    }

    fn log_likelihood_at(&self, theta: &[T]) -> T {
        self.decode(theta)
            .map(|s| self.log_likelihood(&s))
            .unwrap_or(T::neg_infinity())
    }
}

fn encode<T: Scalar>(spec: &KernelSpec<T>) -> Vec<T> {
    let mut theta = vec![spec.signal_variance().ln()];
    theta.extend(spec.lengthscales().iter().map(|l| l.ln()));
    theta
}

fn clamp<T: Scalar>(theta: &[T]) -> Vec<T> {
    let bound = |v: T, (lo, hi): (f64, f64)| v.max(T::lit(lo.ln())).min(T::lit(hi.ln()));
    theta
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if i == 0 {
                bound(v, SIGNAL_VARIANCE_RANGE)
            } else {
                bound(v, LENGTHSCALE_RANGE)
            }
        })
        .collect()
}

/// Minimizes `f` with the Nelder–Mead simplex method; returns the best vertex.
fn nelder_mead<T: Scalar>(f: impl Fn(&[T]) -> T, start: Vec<T>, max_iter: usize) -> Vec<T> {
    let n = start.len();
    let eval = |x: &[T]| {
        let v = f(x);
        if v.is_nan() {
            T::infinity()
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
    simplex.push((start.clone(), eval(&start)));
    for i in 0..n {
        let mut p = start.clone();
        p[i] += T::lit(0.5);
        let v = eval(&p);
        simplex.push((p, v));
    }
    let (alpha, gamma, rho, sigma) = (T::one(), T::lit(2.0), T::lit(0.5), T::lit(0.5));
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let spread = simplex[n].1 - simplex[0].1;
        if spread.is_finite() && spread.abs() < T::lit(1e-9) {
            break;
        }
        let centroid: Vec<T> = (0..n)
            .map(|d| simplex[..n].iter().map(|(p, _)| p[d]).sum::<T>() / T::lit(n as f64))
            .collect();
        let along = |coef: T| -> Vec<T> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(&c, &w)| c + coef * (c - w))
                .collect()
        };
        let reflected = along(alpha);
        let fr = eval(&reflected);
        if fr < simplex[0].1 {
            let expanded = along(gamma);
            let fe = eval(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let contracted = along(-rho);
            let fc = eval(&contracted);
            if fc < simplex[n].1 {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let p: Vec<T> = best
                        .iter()
                        .zip(&vertex.0)
                        .map(|(&b, &x)| b + sigma * (x - b))
                        .collect();
                    let v = eval(&p);
                    *vertex = (p, v);
                }
            }
        }
    }
    simplex
        .into_iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(p, _)| p)
        .unwrap_or(start)
}
