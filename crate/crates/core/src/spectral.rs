//! The circulant matrix `C` with generator `(n-1, -1, ..., -1)`, its real
//! orthogonal eigenbasis, and the block Hessian
//!
//! ```text
//! Phi = [ n sin(2pi/n) C      0  ]
//!       [      0             2 C ]
//! ```
//!
//! of `phi` at the regular polygon.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, PartialEq)]
pub struct CirculantSystem {
    n: usize,
    generator: Vec<f64>,
    eigenvalues: Vec<f64>,
    basis: Vec<Vec<f64>>,
}

impl CirculantSystem {
    /// `v_0 = 1`, then `v_{2l-1}` (cosine) and `v_{2l}` (sine) for
    /// `l = 1..=n/2`, keeping indices `0..n`. For even n the sine vector at
    /// `l = n/2` vanishes identically and is dropped.
    pub fn new(n: usize) -> Self {
        assert!(n >= 3, "circulant system needs n >= 3");
        let mut generator = vec![-1.0; n];
        generator[0] = (n - 1) as f64;
        let mut basis = vec![vec![1.0; n]];
        for l in 1..=n / 2 {
            let w = TAU * l as f64 / n as f64;
            basis.push((0..n).map(|j| (w * j as f64).cos()).collect());
            if basis.len() < n {
                basis.push((0..n).map(|j| (w * j as f64).sin()).collect());
            }
        }
        basis.truncate(n);
        let eigenvalues = (0..n)
            .map(|k| if k == 0 { 0.0 } else { n as f64 })
            .collect();
        CirculantSystem {
            n,
            generator,
            eigenvalues,
            basis,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generator(&self) -> &[f64] {
        &self.generator
    }

    /// `lambda_k` for `k = 0..n`: zero, then n repeated.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvalue paired with basis vector `v_k`, i.e. `lambda_{ceil(k/2)}`.
    pub fn eigenvalue_of(&self, k: usize) -> f64 {
        self.eigenvalues[k.div_ceil(2)]
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn basis_norms(&self) -> Vec<f64> {
        self.basis
            .iter()
            .map(|v| v.iter().map(|a| a * a).sum::<f64>().sqrt())
            .collect()
    }

    /// Dense `C`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| self.generator[(j + n - i) % n])
    }

    /// `sum_k lambda_k v_k v_k^T / |v_k|^2`.
    pub fn spectral_reconstruction(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(n, n);
        for (k, v) in self.basis.iter().enumerate() {
            let v = DVector::from_column_slice(v);
            let w = self.eigenvalue_of(k) / v.norm_squared();
            m += &v * v.transpose() * w;
        }
        m
    }
}

pub fn build_circulant(n: usize) -> CirculantSystem {
    CirculantSystem::new(n)
}

/// Weight `n sin(2pi/n)` of the angle block.
pub fn angle_block_weight(n: usize) -> f64 {
    n as f64 * (TAU / n as f64).sin()
}

/// Weight of the radius block.
pub const RADIUS_BLOCK_WEIGHT: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockHessian {
    n: usize,
    matrix: DMatrix<f64>,
}

impl BlockHessian {
    pub fn new(n: usize) -> Self {
        let c = CirculantSystem::new(n).matrix();
        let mut matrix = DMatrix::zeros(2 * n, 2 * n);
        matrix
            .view_mut((0, 0), (n, n))
            .copy_from(&(&c * angle_block_weight(n)));
        matrix
            .view_mut((n, n), (n, n))
            .copy_from(&(&c * RADIUS_BLOCK_WEIGHT));
        BlockHessian { n, matrix }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `<Phi z, z>`.
    pub fn quadratic_form(&self, z: &[f64]) -> Result<f64> {
        if z.len() != 2 * self.n {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n,
                got: z.len(),
            });
        }
        let v = DVector::from_column_slice(z);
        Ok(v.dot(&(&self.matrix * &v)))
    }

    /// `<Phi z, z>` via the expansion in the orthogonal basis
    /// `b_k = (v_k; 0)`, `b_{n+k} = (0; v_k)`.
    pub fn spectral_quadratic_form(&self, z: &[f64]) -> Result<f64> {
        if z.len() != 2 * self.n {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n,
                got: z.len(),
            });
        }
        let n = self.n;
        let sys = CirculantSystem::new(n);
        let (x, r) = z.split_at(n);
        let block = |part: &[f64], weight: f64| -> f64 {
            sys.basis()
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let norm2: f64 = v.iter().map(|a| a * a).sum();
                    let alpha = v.iter().zip(part).map(|(a, b)| a * b).sum::<f64>() / norm2;
                    weight * sys.eigenvalue_of(k) * alpha * alpha * norm2
                })
                .sum()
        };
        Ok(block(x, angle_block_weight(n)) + block(r, RADIUS_BLOCK_WEIGHT))
    }
}

pub fn build_phi(n: usize) -> BlockHessian {
    BlockHessian::new(n)
}

pub fn quadratic_form(phi: &BlockHessian, z: &[f64]) -> Result<f64> {
    phi.quadratic_form(z)
}

/// Orthonormal basis (columns) of `Z = { sum x = 0, sum r = 0 }`.
pub fn zero_mean_basis(n: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(2, 2 * n);
    for i in 0..n {
        a[(0, i)] = 1.0;
        a[(1, n + i)] = 1.0;
    }
    linalg::null_space(&a, 1e-10)
}

/// Coercivity of `Phi` on the zero-mean subspace, computed two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coercivity {
    pub n: usize,
    /// `min(n^2 sin(2pi/n), 2n)` from the spectral expansion.
    pub closed_form: f64,
    /// Smallest eigenvalue of `Phi` restricted to an orthonormal basis of Z.
    pub numerical: f64,
}

impl Coercivity {
    pub fn relative_gap(&self) -> f64 {
        (self.numerical - self.closed_form).abs() / self.closed_form
    }
}

pub fn min_eig_on_z(n: usize) -> Coercivity {
    let nf = n as f64;
    let closed_form = (nf * nf * (TAU / nf).sin()).min(2.0 * nf);
    let restricted = linalg::restrict(BlockHessian::new(n).matrix(), &zero_mean_basis(n));
    let numerical = linalg::min_symmetric_eigenvalue(&restricted);
    debug_assert!(numerical > 0.0);
    Coercivity {
        n,
        closed_form,
        numerical,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn triangle_spectrum() {
        assert_eq!(build_circulant(3).eigenvalues(), &[0.0, 3.0, 3.0]);
    }

    #[test]
    fn square_basis_by_hand() {
        let sys = build_circulant(4);
        let want = [
            [1.0, 1.0, 1.0, 1.0],
            [1.0, 0.0, -1.0, 0.0],
            [0.0, 1.0, 0.0, -1.0],
            [1.0, -1.0, 1.0, -1.0],
        ];
        assert_eq!(sys.basis().len(), 4);
        for (v, w) in sys.basis().iter().zip(want) {
            for (a, b) in v.iter().zip(w) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn pentagon_eigenvector_by_dense_product() {
        let sys = build_circulant(5);
        let c = sys.matrix();
        let v = DVector::from_column_slice(&sys.basis()[2]);
        let cv = &c * &v;
        for (a, b) in cv.iter().zip(v.iter()) {
            assert!((a - 5.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn circulant_rows() {
        let c = build_circulant(5).matrix();
        assert_eq!(c[(0, 0)], 4.0);
        assert_eq!(c[(2, 3)], -1.0);
        assert_eq!(c, c.transpose());
        for i in 0..5 {
            assert_eq!(c.row(i).sum(), 0.0);
        }
    }

    #[test]
    fn phi_entries_for_square() {
        let phi = build_phi(4);
        let m = phi.matrix();
        assert_relative_eq!(m[(0, 0)], 12.0, epsilon = 1e-14);
        assert_relative_eq!(m[(0, 1)], -4.0, epsilon = 1e-14);
        assert_relative_eq!(m[(4, 4)], 6.0, epsilon = 1e-14);
        assert_relative_eq!(m[(5, 7)], -2.0, epsilon = 1e-14);
        assert_eq!(m[(1, 6)], 0.0);
        let mut ones_x = vec![0.0; 8];
        ones_x[..4].fill(1.0);
        let prod = m * DVector::from_column_slice(&ones_x);
        assert!(prod.amax() < 1e-14);
        let mut ones_r = vec![0.0; 8];
        ones_r[4..].fill(1.0);
        assert!((m * DVector::from_column_slice(&ones_r)).amax() < 1e-14);
    }

    #[test]
    fn quadratic_form_examples() {
        let phi = build_phi(4);
        let sys = build_circulant(4);
        let pad = |v: &[f64], upper: bool| {
            let mut z = vec![0.0; 8];
            let off = if upper { 0 } else { 4 };
            z[off..off + 4].copy_from_slice(v);
            z
        };
        assert!(phi.quadratic_form(&pad(&sys.basis()[0], true)).unwrap().abs() < 1e-13);
        assert_relative_eq!(
            phi.quadratic_form(&pad(&sys.basis()[1], true)).unwrap(),
            32.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            phi.quadratic_form(&pad(&sys.basis()[3], false)).unwrap(),
            32.0,
            epsilon = 1e-12
        );
        assert_eq!(
            phi.quadratic_form(&[1.0; 3]),
            Err(Error::DimensionMismatch {
                expected: 8,
                got: 3
            })
        );
    }

    #[test]
    fn coercivity_values() {
        for (n, want) in [(3, 6.0), (4, 8.0), (12, 24.0)] {
            let c = min_eig_on_z(n);
            assert_relative_eq!(c.numerical, want, max_relative = 1e-10);
            assert_relative_eq!(c.closed_form, want, max_relative = 1e-15);
        }
        let nine_sin = 9.0 * (TAU / 3.0).sin();
        assert!((nine_sin - 7.794).abs() < 1e-3 && nine_sin > 6.0);
    }
}
