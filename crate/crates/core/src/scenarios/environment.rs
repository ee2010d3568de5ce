use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gp::GpPosterior;
use crate::risk::EnvDistribution;
use crate::{argmax_indexed, Scalar};

/// Draws a support index from `p`.
pub fn env_sample<T: Scalar, R: Rng + ?Sized>(p: &EnvDistribution<T>, rng: &mut R) -> usize {
    let weights: Vec<f64> = p.weights().iter().map(|w| w.as_f64()).collect();
    // Valid distributions always have positive total mass.
    let dist = WeightedIndex::new(&weights).expect("distribution weights sum to one");
    dist.sample(rng)
}

/// Relative frequencies of the observed support indices.
pub fn empirical_env<T: Scalar>(support: &[Vec<T>], history: &[usize]) -> Result<EnvDistribution<T>> {
    if history.is_empty() {
        return Err(Error::invalid("empirical distribution needs at least one observation"));
    }
    let mut counts = vec![T::zero(); support.len()];
    for &i in history {
        let slot = counts
            .get_mut(i)
            .ok_or_else(|| Error::invalid(format!("observed index {i} outside the support")))?;
        *slot += T::one();
    }
    EnvDistribution::from_masses(support.to_vec(), counts)
}

/// Environment point with the largest posterior standard deviation at `x`.
pub fn simulator_env_select<T: Scalar>(model: &GpPosterior<T>, x: &[T], omega: &[Vec<T>]) -> Result<usize> {
    let queries: Vec<Vec<T>> = omega.iter().map(|w| [x, w.as_slice()].concat()).collect();
    let moments = model.query(&queries)?;
    weighted_std_argmax(&moments.iter().map(|m| m.std_dev()).collect::<Vec<_>>(), None)
}

/// Input perturbation maximizing `σ(x̃ + ξ) p(ξ)`.
pub fn noisy_simulator_select<T: Scalar>(
    model: &GpPosterior<T>,
    x: &[T],
    noise: &EnvDistribution<T>,
) -> Result<usize> {
    let queries: Vec<Vec<T>> = noise
        .support()
        .iter()
        .map(|xi| {
            if xi.len() != x.len() {
                return Err(Error::invalid("perturbation and design dimensions differ"));
            }
            Ok(x.iter().zip(xi).map(|(&a, &b)| a + b).collect())
        })
        .collect::<Result<_>>()?;
    let moments = model.query(&queries)?;
    weighted_std_argmax(&moments.iter().map(|m| m.std_dev()).collect::<Vec<_>>(), Some(noise.weights()))
}

/// Argmax of `std[j] · weights[j]` (or of `std[j]` alone), lowest index on ties.
pub(crate) fn weighted_std_argmax<T: Scalar>(std: &[T], weights: Option<&[T]>) -> Result<usize> {
    let scores = std.iter().enumerate().map(|(j, &s)| (j, weights.map_or(s, |w| s * w[j])));
    argmax_indexed(scores).ok_or_else(|| Error::invalid("empty environment grid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{KernelSpec, Observation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line(n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|i| vec![i as f64 / (n - 1).max(1) as f64]).collect()
    }

    #[test]
    fn single_atom_and_determinism() {
        let p = EnvDistribution::dirac(line(3), 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!((0..100).all(|_| env_sample(&p, &mut rng) == 2));

        let u = EnvDistribution::uniform(line(4)).unwrap();
        let a: Vec<_> = {
            let mut r = ChaCha8Rng::seed_from_u64(9);
            (0..50).map(|_| env_sample(&u, &mut r)).collect()
        };
        let b: Vec<_> = {
            let mut r = ChaCha8Rng::seed_from_u64(9);
            (0..50).map(|_| env_sample(&u, &mut r)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_frequencies() {
        let u = EnvDistribution::uniform(line(4)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut counts = [0usize; 4];
        let n = 100_000;
        for _ in 0..n {
            counts[env_sample(&u, &mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 0.01);
        }
    }

    #[test]
    fn empirical_counts() {
        let s = line(2);
        let p = empirical_env(&s, &[0, 0, 1]).unwrap();
        assert!((p.weights()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.weights()[1] - 1.0 / 3.0).abs() < 1e-15);
        let d = empirical_env(&s, &[1]).unwrap();
        assert_eq!(d.weights(), &[0.0, 1.0]);
        assert!(empirical_env(&s, &[]).is_err());
        assert!(empirical_env(&s, &[2]).is_err());
    }

    #[test]
    fn empirical_converges() {
        let support = line(5);
        let p = EnvDistribution::from_masses(support.clone(), vec![1.0, 2.0, 3.0, 2.0, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let history: Vec<usize> = (0..10_000).map(|_| env_sample(&p, &mut rng)).collect();
        let q = empirical_env(&support, &history).unwrap();
        let tv: f64 = p.weights().iter().zip(q.weights()).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
        assert!(tv < 0.05);
    }

    #[test]
    fn simulator_selection() {
        let k = KernelSpec::isotropic(1.0, 0.3).unwrap();
        let omega = line(5);
        let prior = GpPosterior::new(k.clone(), 1e-4).unwrap();
        assert_eq!(simulator_env_select(&prior, &[0.2], &omega).unwrap(), 0);

        let seen = GpPosterior::with_data(k, 1e-4, vec![Observation::new(vec![0.2], vec![0.0], 1.0, 1)]).unwrap();
        let j = simulator_env_select(&seen, &[0.2], &omega).unwrap();
        assert_ne!(j, 0);
        let sd: Vec<f64> = omega
            .iter()
            .map(|w| seen.query_one(&[0.2, w[0]]).unwrap().std_dev())
            .collect();
        assert!(sd[0] < sd[j]);
        assert_eq!(sd[j], sd.iter().cloned().fold(f64::MIN, f64::max));
    }

    #[test]
    fn noisy_selection_weights() {
        let k = KernelSpec::isotropic(1.0, 0.3).unwrap();
        let data = vec![Observation::new(vec![0.1], vec![], 0.5, 1)];
        let model = GpPosterior::with_data(k, 1e-4, data).unwrap();
        let deltas = vec![vec![-0.2], vec![0.0], vec![0.2]];
        let dirac = EnvDistribution::dirac(deltas.clone(), 1).unwrap();
        assert_eq!(noisy_simulator_select(&model, &[0.0], &dirac).unwrap(), 1);

        let uniform = EnvDistribution::uniform(deltas.clone()).unwrap();
        let plain: Vec<f64> = deltas
            .iter()
            .map(|d| model.query_one(&[d[0]]).unwrap().std_dev())
            .collect();
        let expected = weighted_std_argmax(&plain, None).unwrap();
        assert_eq!(noisy_simulator_select(&model, &[0.0], &uniform).unwrap(), expected);
    }
}
