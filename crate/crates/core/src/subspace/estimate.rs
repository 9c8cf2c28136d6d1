//! Noise-subspace extraction and the orthogonality-based channel solve.
//!
//! Every noise eigenvector `v_j` of the autocorrelation is orthogonal to the
//! column space of `H(h)`. Because `H` is linear in `h`, `v_jᴴ·H(h) = hᵀ·G_j`
//! where row `l` of `G_j` is `v_jᴴ·H(e_l)`. Stacking the conditions gives the
//! quadratic form
//!
//! ```text
//! q(h) = Σ_j ‖v_jᴴ·H(h)‖² = hᴴ·Q·h,   Q = Σ_j conj(G_j)·G_jᵀ
//! ```
//!
//! and the estimate is the unit-norm eigenvector of `Q` with the smallest
//! eigenvalue. It is defined only up to a complex scalar, which
//! [`resolve_ambiguity`] fixes from a few pilot blocks.

use num_complex::Complex64;

use crate::channel::ChannelTaps;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::ofdm::{Modem, OfdmConfig};
use crate::pilot::{ChannelEstimate, PilotFrame};

use super::autocorr::AutocorrState;
use super::matrix::basis_images;

/// Estimates with `cond_gap` below this are flagged as ill-conditioned.
pub const MIN_COND_GAP: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct SubspaceDecomposition {
    /// All eigenvalues, descending.
    pub eigvals: Vec<f64>,
    /// Eigenvectors of the `G` smallest eigenvalues, one per column.
    pub noise_vecs: CMatrix,
    /// Dimension of the signal subspace, `2M`.
    pub signal_dim: usize,
}

impl SubspaceDecomposition {
    /// `λ_{signal_dim-1} / λ_{signal_dim}`: how far the smallest signal
    /// eigenvalue stands above the largest noise eigenvalue.
    pub fn separation(&self) -> f64 {
        let s = self.eigvals[self.signal_dim - 1];
        let n = self.eigvals[self.signal_dim];
        if n > 0.0 {
            s / n
        } else if s > 0.0 {
            f64::INFINITY
        } else {
            1.0
        }
    }
}

pub fn noise_subspace(state: &AutocorrState, cfg: &OfdmConfig) -> Result<SubspaceDecomposition> {
    cfg.validate()?;
    let n = cfg.pair_len();
    if state.dim() != n {
        return Err(Error::dim("noise_subspace state", n, state.dim()));
    }
    let eig = hermitian_eigen(state.matrix())?;
    let signal_dim = 2 * cfg.subcarriers;
    let noise_vecs = eig.vectors.columns(signal_dim, n - signal_dim).into_owned();
    Ok(SubspaceDecomposition {
        eigvals: eig.values,
        noise_vecs,
        signal_dim,
    })
}

/// `G_j` for one noise vector: row `l` is `vᴴ·images[l]`.
pub fn structured_rows(v: &[Complex64], images: &[CMatrix]) -> CMatrix {
    let cols = images.first().map_or(0, |m| m.ncols());
    CMatrix::from_fn(images.len(), cols, |l, c| {
        images[l]
            .column(c)
            .iter()
            .zip(v)
            .map(|(h, vr)| vr.conj() * h)
            .sum()
    })
}

/// `Q = Σ_j conj(G_j)·G_jᵀ` over the columns of `noise_vecs`, so that
/// `hᴴ·Q·h = Σ_j ‖vⱼᴴ·Σ_l h_l·images[l]‖²`.
pub fn orthogonality_form(noise_vecs: &CMatrix, images: &[CMatrix]) -> CMatrix {
    let k = images.len();
    let mut q = CMatrix::zeros(k, k);
    for v in noise_vecs.column_iter() {
        let v: Vec<Complex64> = v.iter().copied().collect();
        let g = structured_rows(&v, images);
        q += g.map(|x| x.conj()) * g.transpose();
    }
    q
}

/// Smallest eigenpair of the form plus `λ₂ / λ₁` (bottom two eigenvalues).
pub(crate) fn minimize_form(q: &CMatrix) -> Result<(Vec<Complex64>, f64, f64)> {
    let eig = hermitian_eigen(q)?;
    let k = eig.values.len();
    let smallest = eig.values[k - 1];
    let second = if k > 1 { eig.values[k - 2] } else { f64::INFINITY };
    let cond_gap = if smallest > 0.0 {
        second / smallest
    } else if second > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    let v = eig.vectors.column(k - 1).iter().copied().collect();
    Ok((v, smallest, cond_gap))
}

pub fn estimate_channel(dec: &SubspaceDecomposition, cfg: &OfdmConfig) -> Result<ChannelEstimate> {
    let images = basis_images(cfg)?;
    estimate_channel_with(dec, &images)
}

pub(crate) fn estimate_channel_with(
    dec: &SubspaceDecomposition,
    images: &[CMatrix],
) -> Result<ChannelEstimate> {
    let rows = images.first().map_or(0, |m| m.nrows());
    if dec.noise_vecs.nrows() != rows {
        return Err(Error::dim("estimate_channel noise vectors", rows, dec.noise_vecs.nrows()));
    }
    if dec.noise_vecs.ncols() != images.len() {
        return Err(Error::dim("estimate_channel noise vector count", images.len(), dec.noise_vecs.ncols()));
    }
    let q = orthogonality_form(&dec.noise_vecs, images);
    let (taps, residual, cond_gap) = minimize_form(&q)?;
    // With no signal/noise separation the noise vectors are arbitrary.
    let separated = dec.separation() > 1.0 + 1e-9;
    Ok(ChannelEstimate {
        taps: ChannelTaps::full(taps),
        alpha: Complex64::new(1.0, 0.0),
        residual,
        cond_gap,
        ill_conditioned: cond_gap < MIN_COND_GAP || !separated,
    })
}

/// Fixes the complex scale of a blind estimate by least squares against the
/// pilot-observed response: `α̂ = Σ conj(Ĥ_est)·Ĥ_obs / Σ |Ĥ_est|²`.
pub fn resolve_ambiguity(
    est: &ChannelEstimate,
    pilots: &PilotFrame,
    cfg: &OfdmConfig,
) -> Result<ChannelEstimate> {
    resolve_ambiguity_with(est, pilots, &Modem::new(*cfg)?)
}

pub fn resolve_ambiguity_with(
    est: &ChannelEstimate,
    pilots: &PilotFrame,
    modem: &Modem,
) -> Result<ChannelEstimate> {
    let m = modem.config().subcarriers;
    let observed = pilots.raw_response(m)?;
    let predicted = modem.frequency_response(est.taps.as_slice())?;
    let energy: f64 = predicted.iter().map(|h| h.norm_sqr()).sum();
    if energy == 0.0 || !energy.is_finite() {
        return Err(Error::Domain("cannot resolve the scale of a zero-energy estimate".into()));
    }
    let inner: Complex64 = predicted
        .iter()
        .zip(&observed)
        .map(|(p, o)| p.conj() * o)
        .sum();
    let alpha = inner / energy;
    Ok(ChannelEstimate {
        taps: est.taps.scaled(alpha),
        alpha: est.alpha * alpha,
        ..est.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_channel, ChannelLine, PowerDelayProfile};
    use crate::linalg::max_abs;
    use crate::pilot::{aligned_nmse, nmse, pilot_blocks};
    use crate::subspace::matrix::build_channel_matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn analytic_state(h: &ChannelTaps, sigma2: f64) -> AutocorrState {
        AutocorrState::from_nearby(h, sigma2, &OfdmConfig::default(), 1.0).unwrap()
    }

    fn five_tap(seed: u64) -> ChannelTaps {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        draw_channel(&PowerDelayProfile::uniform(5).unwrap(), 8, &mut rng).unwrap()
    }

    fn pilot_frame(h: &ChannelTaps, noise_var: f64, count: usize, seed: u64) -> PilotFrame {
        let cfg = OfdmConfig::default();
        let modem = Modem::new(cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut line = ChannelLine::new(h.clone(), noise_var).unwrap();
        let tx_freq = pilot_blocks(&cfg, count);
        let rx_freq = tx_freq
            .iter()
            .map(|x| modem.demodulate(&line.propagate(&modem.modulate(x).unwrap(), &mut rng).unwrap()).unwrap())
            .collect();
        PilotFrame { tx_freq, rx_freq }
    }

    #[test]
    fn noise_eigenvalue_plateau() {
        let cfg = OfdmConfig::default();
        let dec = noise_subspace(&analytic_state(&five_tap(1), 0.1), &cfg).unwrap();
        assert_eq!(dec.noise_vecs.shape(), (72, 8));
        for &v in &dec.eigvals[64..] {
            assert!((v - 0.1).abs() < 1e-9, "{v}");
        }
        assert!(dec.eigvals[..64].iter().all(|&v| v > 0.1 + 1e-6));
        assert!(dec.eigvals.windows(2).all(|w| w[0] >= w[1]));
        let gram = dec.noise_vecs.adjoint() * &dec.noise_vecs;
        assert!(max_abs(&(gram - CMatrix::identity(8, 8))) < 1e-10);
    }

    #[test]
    fn noise_vectors_annihilate_channel_matrix() {
        let cfg = OfdmConfig::default();
        let h = five_tap(2);
        let dec = noise_subspace(&analytic_state(&h, 0.0), &cfg).unwrap();
        let hm = build_channel_matrix(&h, &cfg).unwrap().into_inner();
        assert!(max_abs(&(dec.noise_vecs.adjoint() * hm)) < 1e-8);
    }

    #[test]
    fn exact_statistics_recover_channel() {
        let cfg = OfdmConfig::default();
        let h = five_tap(3);
        let dec = noise_subspace(&analytic_state(&h, 0.1), &cfg).unwrap();
        let images = basis_images(&cfg).unwrap();
        let q = orthogonality_form(&dec.noise_vecs, &images);
        let hv = nalgebra::DVector::from_column_slice(h.as_slice());
        let q_true = (hv.adjoint() * &q * &hv)[(0, 0)].re;
        assert!(q_true < 1e-16 * max_abs(&q) * h.norm_sqr() * 10.0);

        let est = estimate_channel(&dec, &cfg).unwrap();
        assert!((est.taps.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(aligned_nmse(&est.taps, &h).unwrap() < 1e-8);
        assert!(!est.ill_conditioned);
        assert!(est.cond_gap > 1e6);
    }

    #[test]
    fn basis_identity_of_structured_rows() {
        let cfg = OfdmConfig::default();
        let dec = noise_subspace(&analytic_state(&five_tap(4), 0.05), &cfg).unwrap();
        let images = basis_images(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..20 {
            let h: Vec<Complex64> = (0..8).map(|_| Complex64::new(rng.random(), rng.random())).collect();
            let hm = build_channel_matrix(&ChannelTaps::full(h.clone()), &cfg).unwrap().into_inner();
            for v in dec.noise_vecs.column_iter() {
                let vv: Vec<Complex64> = v.iter().copied().collect();
                let g = structured_rows(&vv, &images);
                let lhs = v.adjoint() * &hm;
                let rhs = nalgebra::DVector::from_column_slice(&h).transpose() * &g;
                let err = (lhs - rhs).iter().map(|x| x.norm()).fold(0.0, f64::max);
                assert!(err < 1e-13, "{err}");
            }
        }
    }

    #[test]
    fn scaled_identity_state_is_degenerate() {
        let cfg = OfdmConfig::default();
        let s = AutocorrState::from_nearby(&ChannelTaps::zeros(8), 0.2, &cfg, 0.98).unwrap();
        let dec = noise_subspace(&s, &cfg).unwrap();
        assert!(dec.eigvals.iter().all(|&v| (v - 0.2).abs() < 1e-12));
        let est = estimate_channel(&dec, &cfg).unwrap();
        assert!(est.ill_conditioned);
    }

    #[test]
    fn identity_form_has_unit_gap() {
        let (_, residual, gap) = minimize_form(&CMatrix::identity(8, 8)).unwrap();
        assert!((residual - 1.0).abs() < 1e-15);
        assert!((gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ambiguity_resolution_exact() {
        let cfg = OfdmConfig::default();
        let h = five_tap(5);
        let norm = h.norm_sqr().sqrt();
        let frame = pilot_frame(&h, 0.0, 1, 50);
        for theta in [0.0, 0.7, -2.5] {
            let rot = Complex64::from_polar(1.0 / norm, theta);
            let est = ChannelEstimate {
                taps: h.scaled(rot),
                alpha: Complex64::new(1.0, 0.0),
                residual: 0.0,
                cond_gap: f64::INFINITY,
                ill_conditioned: false,
            };
            let fixed = resolve_ambiguity(&est, &frame, &cfg).unwrap();
            assert!((fixed.alpha - Complex64::from_polar(norm, -theta)).norm() < 1e-10);
            for (a, b) in fixed.taps.as_slice().iter().zip(h.as_slice()) {
                assert!((a - b).norm() < 1e-10);
            }
        }
        let zero = ChannelEstimate {
            taps: ChannelTaps::zeros(8),
            alpha: Complex64::new(1.0, 0.0),
            residual: 0.0,
            cond_gap: 1.0,
            ill_conditioned: true,
        };
        assert!(matches!(resolve_ambiguity(&zero, &frame, &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn noisy_pilot_resolution_close_to_optimal_scalar() {
        // Oracle: α* = argmin ‖α·ĥ − h‖ computed from the true channel.
        let cfg = OfdmConfig::default();
        let mut worse = 0;
        for seed in 0..50 {
            let h = five_tap(100 + seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // perturbed unit-norm direction standing in for a blind estimate
            let dir: Vec<Complex64> = h
                .as_slice()
                .iter()
                .map(|t| t + crate::channel::complex_gaussian(&mut rng, 0.01))
                .collect();
            let n = dir.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            let est = ChannelEstimate {
                taps: ChannelTaps::full(dir.iter().map(|x| x / n).collect()),
                alpha: Complex64::new(1.0, 0.0),
                residual: 0.0,
                cond_gap: f64::INFINITY,
                ill_conditioned: false,
            };
            let frame = pilot_frame(&h, 0.01, 4, 200 + seed);
            let fixed = resolve_ambiguity(&est, &frame, &cfg).unwrap();
            let got = nmse(&fixed.taps, &h).unwrap();
            let best = aligned_nmse(&est.taps, &h).unwrap();
            assert!(got >= best - 1e-12);
            assert!(got < nmse(&est.taps, &h).unwrap());
            if got > best + 0.01 {
                worse += 1;
            }
        }
        assert!(worse <= 2, "{worse} resolutions far from the optimal scalar");
    }

    #[test]
    fn scalar_ambiguity_invariance() {
        let cfg = OfdmConfig::default();
        let h = five_tap(6);
        let base = estimate_channel(&noise_subspace(&analytic_state(&h, 0.1), &cfg).unwrap(), &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        for _ in 0..5 {
            let c = Complex64::new(rng.random::<f64>() * 3.0 + 0.1, rng.random::<f64>() - 0.5);
            let other = estimate_channel(&noise_subspace(&analytic_state(&h.scaled(c), 0.1), &cfg).unwrap(), &cfg)
                .unwrap();
            let inner: Complex64 = base
                .taps
                .as_slice()
                .iter()
                .zip(other.taps.as_slice())
                .map(|(a, b)| a.conj() * b)
                .sum();
            assert!((inner.norm() - 1.0).abs() < 1e-8);
        }
    }
}
