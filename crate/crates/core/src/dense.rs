//! Small dense square matrices for hub realizations.

use alloc::vec;
use alloc::vec::Vec;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Square {
    pub(crate) dim: usize,
    pub(crate) data: Vec<f64>,
}

impl Square {
    pub(crate) fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub(crate) fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    #[inline]
    pub(crate) fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub(crate) fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.dim + c] = v;
    }

    pub(crate) fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.get(r, c) * v[c]).sum())
            .collect()
    }

    /// `vᵀ·M`
    pub(crate) fn vec_mul(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|c| (0..self.dim).map(|r| v[r] * self.get(r, c)).sum())
            .collect()
    }

    /// Gauss–Jordan inverse with partial pivoting; `None` when singular.
    pub(crate) fn inverse(&self) -> Option<Square> {
        let n = self.dim;
        let mut a = self.clone();
        let mut inv = Square::identity(n);
        for col in 0..n {
            let pivot = (col..n).max_by(|&i, &j| {
                libm::fabs(a.get(i, col)).total_cmp(&libm::fabs(a.get(j, col)))
            })?;
            let p = a.get(pivot, col);
            if p == 0.0 || !p.is_finite() {
                return None;
            }
            if pivot != col {
                for k in 0..n {
                    a.data.swap(pivot * n + k, col * n + k);
                    inv.data.swap(pivot * n + k, col * n + k);
                }
            }
            for k in 0..n {
                a.set(col, k, a.get(col, k) / p);
                inv.set(col, k, inv.get(col, k) / p);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col);
                if f == 0.0 {
                    continue;
                }
                for k in 0..n {
                    a.set(r, k, a.get(r, k) - f * a.get(col, k));
                    inv.set(r, k, inv.get(r, k) - f * inv.get(col, k));
                }
            }
        }
        Some(inv)
    }
}
