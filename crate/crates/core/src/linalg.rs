//! Small dense linear-algebra helpers over nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Orthonormal basis (as columns) of the null space of `a`.
///
/// Eigenvectors of `a^T a` whose eigenvalue falls below `tol * max_eigenvalue`.
pub fn null_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let ata = a.transpose() * a;
    let eig = SymmetricEigen::new(ata);
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(1.0);
    let cols: Vec<DVector<f64>> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l.abs() < tol * top)
        .map(|(i, _)| eig.eigenvectors.column(i).into_owned())
        .collect();
    DMatrix::from_columns(&cols)
}

/// Eigenvalues of a symmetric matrix in ascending order, with matching eigenvectors.
pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let cols: Vec<DVector<f64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    (values, DMatrix::from_columns(&cols))
}

pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sorted_symmetric_eigen(m).0[0]
}

/// `basis^T m basis` for a matrix whose columns span a subspace.
pub fn restrict(m: &DMatrix<f64>, basis: &DMatrix<f64>) -> DMatrix<f64> {
    basis.transpose() * m * basis
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}
