//! Small dense symmetric positive-definite solves for the IRLS normal
//! equations. Matrices here are at most (p+1) x (p+1) with p a handful of
//! features, so a plain Cholesky is all that is needed.

#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};

/// Symmetric matrix stored dense row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    pub dim: usize,
    pub values: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            values: vec![0.0; dim * dim],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.dim + j] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.dim + j] += v;
    }

    /// Lower Cholesky factor; fails on non-positive pivots, which is how
    /// collinear feature sets surface.
    fn cholesky(&self) -> Result<Vec<f64>> {
        let n = self.dim;
        let mut l = vec![0.0; n * n];
        // Pivot tolerance relative to the largest diagonal entry.
        let scale = (0..n)
            .map(|i| self.get(i, i).abs())
            .fold(0.0_f64, f64::max)
            .max(1e-300);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.get(i, j);
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= scale * 1e-12 {
                        return Err(Error::CollinearFeatures);
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(l)
    }

    /// Solves `A x = b` for SPD `A`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim;
        let l = self.cholesky()?;
        // Forward substitution L y = b.
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut sum = b[i];
            for k in 0..i {
                sum -= l[i * n + k] * y[k];
            }
            y[i] = sum / l[i * n + i];
        }
        // Back substitution L^T x = y.
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut sum = y[i];
            for k in i + 1..n {
                sum -= l[k * n + i] * x[k];
            }
            x[i] = sum / l[i * n + i];
        }
        Ok(x)
    }

    /// Full inverse, column by column; used for the coefficient covariance.
    pub fn inverse(&self) -> Result<SymMatrix> {
        let n = self.dim;
        let mut inv = SymMatrix::zeros(n);
        for col in 0..n {
            let mut e = vec![0.0; n];
            e[col] = 1.0;
            let x = self.solve(&e)?;
            for row in 0..n {
                inv.set(row, col, x[row]);
            }
        }
        // Symmetrize away the last rounding crumbs.
        for i in 0..n {
            for j in 0..i {
                let avg = 0.5 * (inv.get(i, j) + inv.get(j, i));
                inv.set(i, j, avg);
                inv.set(j, i, avg);
            }
        }
        Ok(inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_known_system() {
        let mut a = SymMatrix::zeros(2);
        a.set(0, 0, 4.0);
        a.set(0, 1, 1.0);
        a.set(1, 0, 1.0);
        a.set(1, 1, 3.0);
        let x = a.solve(&[1.0, 2.0]).unwrap();
        // Solution of [[4,1],[1,3]] x = [1,2] is [1/11, 7/11].
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-12);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let mut a = SymMatrix::zeros(3);
        for (i, row) in [[5.0, 1.0, 0.5], [1.0, 4.0, 1.5], [0.5, 1.5, 3.0]].iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                a.set(i, j, v);
            }
        }
        let inv = a.inverse().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut prod = 0.0;
                for k in 0..3 {
                    prod += a.get(i, k) * inv.get(k, j);
                }
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((prod - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn singular_matrix_reports_collinearity() {
        let mut a = SymMatrix::zeros(2);
        a.set(0, 0, 1.0);
        a.set(0, 1, 1.0);
        a.set(1, 0, 1.0);
        a.set(1, 1, 1.0);
        assert!(matches!(a.solve(&[1.0, 1.0]), Err(Error::CollinearFeatures)));
    }
}
