//! Packed lower-triangular Cholesky factor that can grow one row at a time.

use crate::Scalar;

#[derive(Debug, Clone)]
pub(crate) struct PackedCholesky<T> {
    n: usize,
    // Row i occupies data[i*(i+1)/2 .. (i+1)*(i+2)/2]; its last entry is the diagonal.
    data: Vec<T>,
}

impl<T: Scalar> PackedCholesky<T> {
    pub fn empty() -> Self {
        Self { n: 0, data: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        let start = i * (i + 1) / 2;
        &self.data[start..start + i + 1]
    }

    #[inline]
    pub fn diag(&self, i: usize) -> T {
        self.data[i * (i + 1) / 2 + i]
    }

    /// Appends the row for a new point given its covariances with the existing
    /// points (`cross`) and its own diagonal entry. On a non-positive pivot the
    /// factor is left unchanged and the offending pivot is returned.
    pub fn push_row(&mut self, cross: &[T], diag: T) -> Result<(), T> {
        debug_assert_eq!(cross.len(), self.n);
        let l = self.forward_solve(cross);
        let sq: T = l.iter().map(|&v| v * v).sum();
        let pivot = diag - sq;
        if !(pivot > T::zero()) || !pivot.is_finite() {
            return Err(pivot);
        }
        self.data.extend_from_slice(&l);
        self.data.push(pivot.sqrt());
        self.n += 1;
        Ok(())
    }

    /// Factorizes the symmetric matrix whose entries are produced by `entry(i, j)` (j ≤ i).
    pub fn factor(n: usize, mut entry: impl FnMut(usize, usize) -> T) -> Result<Self, (usize, T)> {
        let mut chol = Self {
            n: 0,
            data: Vec::with_capacity(n * (n + 1) / 2),
        };
        let mut cross = Vec::with_capacity(n);
        for i in 0..n {
            cross.clear();
            cross.extend((0..i).map(|j| entry(i, j)));
            let d = entry(i, i);
            chol.push_row(&cross, d).map_err(|p| (i, p))?;
        }
        Ok(chol)
    }

    /// Solves `L x = b`.
    pub fn forward_solve(&self, b: &[T]) -> Vec<T> {
        let mut x = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let row = self.row(i);
            let mut acc = b[i];
            for (lij, xj) in row[..i].iter().zip(&x) {
                acc -= *lij * *xj;
            }
            x.push(acc / row[i]);
        }
        x
    }

    /// Solves `Lᵀ x = b`.
    pub fn back_solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        for i in (0..self.n).rev() {
            x[i] /= self.diag(i);
            let xi = x[i];
            let row = self.row(i);
            for j in 0..i {
                x[j] -= row[j] * xi;
            }
        }
        x
    }

    /// `ln det(L Lᵀ)`.
    pub fn log_det(&self) -> T {
        (0..self.n).map(|i| self.diag(i).ln()).sum::<T>() * T::lit(2.0)
    }

    pub fn min_diag(&self) -> T {
        (0..self.n).map(|i| self.diag(i)).fold(T::infinity(), T::min)
    }
}
