use crate::gp::posterior::GpPosterior;
use crate::Scalar;

/// Posterior moments over a fixed set of query points, kept in sync with a
/// growing [`GpPosterior`].
///
/// For each query point it stores `v = L⁻¹ k_t(z)`. Appending an observation
/// only adds one entry per point, so a step costs O(N t) instead of O(N t²).
/// A rebuilt factor (new hyperparameters, jitter) triggers a full recompute.
#[derive(Debug, Clone)]
pub struct GridPosterior<T> {
    points: Vec<Vec<T>>,
    proj: Vec<Vec<T>>,
    mean: Vec<T>,
    raw_var: Vec<T>,
    synced: usize,
    epoch: Option<u64>,
}

impl<T: Scalar> GridPosterior<T> {
    pub fn new(points: Vec<Vec<T>>) -> Self {
        let n = points.len();
        Self {
            points,
            proj: vec![Vec::new(); n],
            mean: vec![T::zero(); n],
            raw_var: vec![T::zero(); n],
            synced: 0,
            epoch: None,
        }
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    /// Posterior variance clamped at 0.
    pub fn variance(&self) -> Vec<T> {
        self.raw_var.iter().map(|v| v.max(T::zero())).collect()
    }

    pub fn std_dev(&self) -> Vec<T> {
        self.raw_var.iter().map(|v| v.max(T::zero()).sqrt()).collect()
    }

    pub fn sync(&mut self, model: &GpPosterior<T>) {
        let fresh = self.epoch != Some(model.epoch()) || model.len() < self.synced;
        if fresh {
            self.rebuild(model);
        } else {
            for r in self.synced..model.len() {
                self.append_row(model, r);
            }
        }
        self.synced = model.len();
        self.epoch = Some(model.epoch());
    }

    fn rebuild(&mut self, model: &GpPosterior<T>) {
        let prior = model.kernel().prior_variance();
        let chol = model.factor();
        let white = model.whitened_targets();
        for (k, z) in self.points.iter().enumerate() {
            let cross: Vec<T> = model
                .inputs()
                .iter()
                .map(|zi| model.kernel().eval_unchecked(z, zi))
                .collect();
            let v = chol.forward_solve(&cross);
            self.mean[k] = v.iter().zip(white).map(|(&a, &b)| a * b).sum();
            self.raw_var[k] = prior - v.iter().map(|&a| a * a).sum::<T>();
            self.proj[k] = v;
        }
    }

    fn append_row(&mut self, model: &GpPosterior<T>, r: usize) {
        let row = model.factor().row(r);
        let (off, diag) = (&row[..r], row[r]);
        let z_new = &model.inputs()[r];
        let target = model.whitened_targets()[r];
        let kernel = model.kernel();
        for (k, z) in self.points.iter().enumerate() {
            let v = &mut self.proj[k];
            let dot: T = off.iter().zip(v.iter()).map(|(&a, &b)| a * b).sum();
            let entry = (kernel.eval_unchecked(z, z_new) - dot) / diag;
            v.push(entry);
            self.mean[k] += entry * target;
            self.raw_var[k] -= entry * entry;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{KernelSpec, Observation};

    #[test]
    fn tracks_direct_queries_across_refits() {
        let k = KernelSpec::isotropic(1.0, 0.3).unwrap();
        let mut gp = GpPosterior::new(k, 1e-3).unwrap();
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i % 8) as f64 / 4.0 - 1.0, (i / 8) as f64 / 2.5 - 1.0])
            .collect();
        let mut grid = GridPosterior::new(pts.clone());
        grid.sync(&gp);
        assert!(grid.variance().iter().all(|&v| v == 1.0));
        for t in 0..30 {
            let x = ((t * 5) % 13) as f64 / 6.5 - 1.0;
            let w = ((t * 3) % 7) as f64 / 3.5 - 1.0;
            gp.update(Observation::new(vec![x], vec![w], (2.0 * x).cos() * w, t)).unwrap();
            if t == 17 {
                gp.refit().unwrap();
            }
            grid.sync(&gp);
            let direct = gp.query(&pts).unwrap();
            let var = grid.variance();
            for (k, m) in direct.iter().enumerate() {
                assert!((grid.mean()[k] - m.mean).abs() < 1e-9);
                assert!((var[k] - m.variance).abs() < 1e-9);
            }
        }
    }
}
