//! Generic single-input multiple-output subspace identification.
//!
//! A source `s` drives `P` FIR channels of order `L`. Stacking `q`
//! consecutive output vectors gives `y_q = F_q(h)·s_{q+L} + n_q` where
//! `F_q(h)` is `qP × (q+L)` block Toeplitz: block row `i` holds the tap
//! vectors `h_0 … h_L` starting at column `i`. This serves as a small,
//! independent check of the same noise-subspace machinery used for CP-OFDM.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix};

use super::estimate::{minimize_form, orthogonality_form};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimoDims {
    pub outputs: usize,
    pub order: usize,
    pub window: usize,
}

impl SimoDims {
    pub fn rows(&self) -> usize {
        self.window * self.outputs
    }

    pub fn cols(&self) -> usize {
        self.window + self.order
    }

    pub fn unknowns(&self) -> usize {
        self.outputs * (self.order + 1)
    }

    /// Noise subspace dimension `qP − (q + L)`; the method needs it positive.
    pub fn noise_dim(&self) -> Result<usize> {
        if self.outputs == 0 || self.window == 0 {
            return Err(Error::Domain("SIMO outputs and window must be positive".into()));
        }
        self.rows()
            .checked_sub(self.cols())
            .filter(|&d| d > 0)
            .ok_or_else(|| {
                Error::Domain(format!(
                    "qP = {} must exceed q + L = {} for a noise subspace to exist",
                    self.rows(),
                    self.cols()
                ))
            })
    }
}

#[derive(Debug, Clone)]
pub struct SimoInstance {
    pub dims: SimoDims,
    /// Row `p` holds the `L + 1` taps of output `p`.
    pub taps: CMatrix,
}

impl SimoInstance {
    pub fn new(dims: SimoDims, taps: CMatrix) -> Result<Self> {
        if taps.shape() != (dims.outputs, dims.order + 1) {
            return Err(Error::dim("SIMO taps columns", dims.order + 1, taps.ncols()));
        }
        Ok(SimoInstance { dims, taps })
    }

    pub fn filtering_matrix(&self) -> CMatrix {
        filtering_matrix(&self.dims, &self.taps)
    }

    /// `F_q F_qᴴ + noise_var·I` for unit-power white input.
    pub fn exact_stats(&self, noise_var: f64) -> CMatrix {
        let f = self.filtering_matrix();
        let n = self.dims.rows();
        &f * f.adjoint() + CMatrix::identity(n, n) * Complex64::new(noise_var, 0.0)
    }
}

pub fn filtering_matrix(dims: &SimoDims, taps: &CMatrix) -> CMatrix {
    let (p_out, order) = (dims.outputs, dims.order);
    let mut f = CMatrix::zeros(dims.rows(), dims.cols());
    for i in 0..dims.window {
        for l in 0..=order {
            for p in 0..p_out {
                f[(i * p_out + p, i + l)] = taps[(p, l)];
            }
        }
    }
    f
}

/// Recovers the `P × (L+1)` taps, unit Frobenius norm, up to one complex scalar.
pub fn simo_subspace_estimate(dims: &SimoDims, exact_stats: &CMatrix) -> Result<CMatrix> {
    let noise_dim = dims.noise_dim()?;
    let n = dims.rows();
    if exact_stats.shape() != (n, n) {
        return Err(Error::dim("SIMO statistics", n, exact_stats.nrows()));
    }
    let eig = hermitian_eigen(exact_stats)?;
    let noise_vecs = eig.vectors.columns(n - noise_dim, noise_dim).into_owned();

    let images: Vec<CMatrix> = (0..dims.unknowns())
        .map(|u| {
            let mut e = CMatrix::zeros(dims.outputs, dims.order + 1);
            e[(u / (dims.order + 1), u % (dims.order + 1))] = Complex64::new(1.0, 0.0);
            filtering_matrix(dims, &e)
        })
        .collect();
    let q = orthogonality_form(&noise_vecs, &images);
    let (v, _, _) = minimize_form(&q)?;
    Ok(CMatrix::from_row_slice(dims.outputs, dims.order + 1, &v))
}
