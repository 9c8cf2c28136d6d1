//! Least-squares pilot estimation and channel-error metrics.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::ChannelTaps;
use crate::error::{Error, Result};
use crate::ofdm::{qpsk_modulate, BitStream, FreqSymbolBlock, Modem, OfdmConfig};

/// Seed of the fixed pilot sequence shared by transmitter and receiver.
pub const PILOT_SEED: u64 = 0x5049_4c4f_5453;

/// Known pilot blocks and the matching demodulated observations.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotFrame {
    pub tx_freq: Vec<FreqSymbolBlock>,
    pub rx_freq: Vec<FreqSymbolBlock>,
}

impl PilotFrame {
    pub fn len(&self) -> usize {
        self.tx_freq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tx_freq.is_empty()
    }

    fn check(&self, m: usize) -> Result<()> {
        if self.tx_freq.is_empty() {
            return Err(Error::dim("pilot frame blocks (at least one)", 1, 0));
        }
        if self.tx_freq.len() != self.rx_freq.len() {
            return Err(Error::dim("pilot frame rx blocks", self.tx_freq.len(), self.rx_freq.len()));
        }
        for block in self.tx_freq.iter().chain(&self.rx_freq) {
            if block.len() != m {
                return Err(Error::dim("pilot block length", m, block.len()));
            }
        }
        if self
            .tx_freq
            .iter()
            .flat_map(|b| b.as_slice())
            .any(|x| (x.norm() - 1.0).abs() > 1e-9)
        {
            return Err(Error::Domain("pilot symbols must have unit magnitude".into()));
        }
        Ok(())
    }

    /// Per-subcarrier `rx/tx` averaged over blocks.
    pub fn raw_response(&self, m: usize) -> Result<Vec<Complex64>> {
        self.check(m)?;
        let mut acc = vec![Complex64::new(0.0, 0.0); m];
        for (tx, rx) in self.tx_freq.iter().zip(&self.rx_freq) {
            for (a, (t, r)) in acc.iter_mut().zip(tx.as_slice().iter().zip(rx.as_slice())) {
                *a += r / t;
            }
        }
        let inv = (self.len() as f64).recip();
        acc.iter_mut().for_each(|a| *a *= inv);
        Ok(acc)
    }
}

/// The fixed QPSK pilot sequence: `count` blocks drawn from [`PILOT_SEED`].
pub fn pilot_blocks(cfg: &OfdmConfig, count: usize) -> Vec<FreqSymbolBlock> {
    let mut rng = ChaCha8Rng::seed_from_u64(PILOT_SEED);
    (0..count)
        .map(|_| {
            let bits = BitStream((0..2 * cfg.subcarriers).map(|_| rng.random_range(0..2u8)).collect());
            FreqSymbolBlock(qpsk_modulate(&bits).expect("even bit count"))
        })
        .collect()
}

/// Channel estimate produced by either estimator.
///
/// For the subspace estimator `residual` is the smallest eigenvalue of the
/// orthogonality quadratic form and `cond_gap` the ratio of its two smallest
/// eigenvalues. For the pilot estimator `residual` is the unbiased noise
/// variance estimate from the fit and `cond_gap` is infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub taps: ChannelTaps,
    pub alpha: Complex64,
    pub residual: f64,
    pub cond_gap: f64,
    /// Set when the minimizer is not well separated (`cond_gap < 10`) or the
    /// autocorrelation shows no signal/noise eigenvalue separation.
    pub ill_conditioned: bool,
}

/// Per-bin LS average, time-domain truncation to `G` taps.
pub fn ls_estimate(frame: &PilotFrame, cfg: &OfdmConfig) -> Result<ChannelEstimate> {
    let modem = Modem::new(*cfg)?;
    ls_estimate_with(frame, &modem)
}

pub fn ls_estimate_with(frame: &PilotFrame, modem: &Modem) -> Result<ChannelEstimate> {
    let cfg = modem.config();
    let (m, g) = (cfg.subcarriers, cfg.cp_len);
    let raw = frame.raw_response(m)?;
    let mut taps = modem.impulse_response(&raw)?;
    taps.truncate(g);
    let smooth = modem.frequency_response(&taps)?;

    let mut sse = 0.0;
    for (tx, rx) in frame.tx_freq.iter().zip(&frame.rx_freq) {
        for ((t, r), h) in tx.as_slice().iter().zip(rx.as_slice()).zip(&smooth) {
            sse += (r - h * t).norm_sqr();
        }
    }
    // G complex parameters were fitted from len * M observations.
    let dof = (frame.len() * m).saturating_sub(g).max(1);
    Ok(ChannelEstimate {
        taps: ChannelTaps::full(taps),
        alpha: Complex64::new(1.0, 0.0),
        residual: sse / dof as f64,
        cond_gap: f64::INFINITY,
        ill_conditioned: false,
    })
}

/// `‖est − truth‖² / ‖truth‖²`.
pub fn nmse(est: &ChannelTaps, truth: &ChannelTaps) -> Result<f64> {
    if est.len() != truth.len() {
        return Err(Error::dim("nmse tap vectors", truth.len(), est.len()));
    }
    let denom = truth.norm_sqr();
    if denom == 0.0 {
        return Err(Error::Domain("nmse against an all-zero channel".into()));
    }
    let num: f64 = est
        .as_slice()
        .iter()
        .zip(truth.as_slice())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(num / denom)
}

/// NMSE after the best complex rescaling `α* = argmin ‖α·est − truth‖`.
/// Measures subspace quality independently of how the ambiguity is resolved.
pub fn aligned_nmse(est: &ChannelTaps, truth: &ChannelTaps) -> Result<f64> {
    if est.len() != truth.len() {
        return Err(Error::dim("aligned_nmse tap vectors", truth.len(), est.len()));
    }
    let energy = est.norm_sqr();
    if energy == 0.0 {
        return Err(Error::Domain("aligned_nmse of an all-zero estimate".into()));
    }
    let inner: Complex64 = est
        .as_slice()
        .iter()
        .zip(truth.as_slice())
        .map(|(e, t)| e.conj() * t)
        .sum();
    nmse(&est.scaled(inner / energy), truth)
}
