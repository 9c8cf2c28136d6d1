//! Small dense complex linear algebra on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// Eigenpairs of a Hermitian matrix, eigenvalues in descending order and
/// eigenvector columns in matching order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn hermitian_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianEigen> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::dim("hermitian_eigen (square)", n, m.ncols()));
    }
    let failure = || Error::Eigen {
        dim: n,
        max_abs: max_abs(m),
        hermitian_defect: hermitian_defect(m),
    };
    if m.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(failure());
    }
    let eig = SymmetricEigen::try_new(m.clone(), EIGEN_EPS, EIGEN_MAX_ITER).ok_or_else(failure)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}
