//! Multipath channel realizations, correlated nearby-channel pairs, AWGN and
//! block-by-block propagation with inter-block memory.
//!
//! SNR is measured per time sample at the channel output: with unit-energy
//! taps and unit-power transmit samples, `σ² = 10^(-snr_db/10)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::ofdm::TimeSymbolBlock;

/// Channel impulse response stored with `G` entries; only the first
/// `active_len` may be nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTaps {
    taps: Vec<Complex64>,
    active_len: usize,
}

impl ChannelTaps {
    /// Fails if any entry at or beyond `active_len` is nonzero.
    pub fn new(taps: Vec<Complex64>, active_len: usize) -> Result<Self> {
        if active_len > taps.len() {
            return Err(Error::dim("active_len (at most tap count)", taps.len(), active_len));
        }
        if taps[active_len..].iter().any(|t| t.norm_sqr() != 0.0) {
            return Err(Error::Domain(format!(
                "taps beyond active length {active_len} must be zero"
            )));
        }
        Ok(ChannelTaps { taps, active_len })
    }

    /// All `taps` treated as potentially active.
    pub fn full(taps: Vec<Complex64>) -> Self {
        let active_len = taps.len();
        ChannelTaps { taps, active_len }
    }

    pub fn zeros(len: usize) -> Self {
        ChannelTaps::full(vec![Complex64::new(0.0, 0.0); len])
    }

    /// `[1, 0, ..., 0]` of length `len`.
    pub fn identity(len: usize) -> Self {
        let mut taps = vec![Complex64::new(0.0, 0.0); len];
        taps[0] = Complex64::new(1.0, 0.0);
        ChannelTaps { taps, active_len: 1 }
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn active_len(&self) -> usize {
        self.active_len
    }

    pub fn norm_sqr(&self) -> f64 {
        self.taps.iter().map(|t| t.norm_sqr()).sum()
    }

    pub fn scaled(&self, alpha: Complex64) -> ChannelTaps {
        ChannelTaps {
            taps: self.taps.iter().map(|t| alpha * t).collect(),
            active_len: self.active_len,
        }
    }
}

/// Average linear power of each active tap; sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDelayProfile {
    tap_powers: Vec<f64>,
}

impl PowerDelayProfile {
    /// Normalizes `powers` to unit sum.
    pub fn new(powers: Vec<f64>) -> Result<Self> {
        if powers.is_empty() {
            return Err(Error::Domain("power delay profile needs at least one tap".into()));
        }
        if powers.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Domain("tap powers must be finite and nonnegative".into()));
        }
        let total: f64 = powers.iter().sum();
        if total <= 0.0 {
            return Err(Error::Domain("power delay profile has zero total power".into()));
        }
        Ok(PowerDelayProfile {
            tap_powers: powers.into_iter().map(|p| p / total).collect(),
        })
    }

    pub fn uniform(paths: usize) -> Result<Self> {
        PowerDelayProfile::new(vec![1.0; paths])
    }

    pub fn tap_powers(&self) -> &[f64] {
        &self.tap_powers
    }

    pub fn paths(&self) -> usize {
        self.tap_powers.len()
    }
}

/// Circularly-symmetric complex Gaussian sample with the given variance.
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Rayleigh taps: tap `j` is `CN(0, tap_powers[j])`, padded with zeros to `len`.
pub fn draw_channel<R: Rng + ?Sized>(
    pdp: &PowerDelayProfile,
    len: usize,
    rng: &mut R,
) -> Result<ChannelTaps> {
    if pdp.paths() > len {
        return Err(Error::dim("tap vector length (at least path count)", pdp.paths(), len));
    }
    let mut taps = vec![Complex64::new(0.0, 0.0); len];
    for (t, &p) in taps.iter_mut().zip(pdp.tap_powers()) {
        *t = complex_gaussian(rng, p);
    }
    Ok(ChannelTaps {
        taps,
        active_len: pdp.paths(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NearbyPairSpec {
    pub rho: f64,
    pub pdp: PowerDelayProfile,
}

/// Draws `(h_A, h_B)` with `h_B = ρ·h_A + √(1-ρ²)·w`, where `w` is an
/// independent draw from the same profile. Both marginals follow the
/// profile and every tap pair has correlation coefficient `ρ`.
pub fn draw_correlated_pair<R: Rng + ?Sized>(
    spec: &NearbyPairSpec,
    len: usize,
    rng: &mut R,
) -> Result<(ChannelTaps, ChannelTaps)> {
    let rho = spec.rho;
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Domain(format!("correlation coefficient {rho} outside [0, 1]")));
    }
    let a = draw_channel(&spec.pdp, len, rng)?;
    let w = draw_channel(&spec.pdp, len, rng)?;
    let mix = (1.0 - rho * rho).sqrt();
    let b = a
        .taps
        .iter()
        .zip(&w.taps)
        .map(|(x, y)| rho * x + mix * y)
        .collect();
    let b = ChannelTaps {
        taps: b,
        active_len: a.active_len,
    };
    Ok((a, b))
}

pub fn snr_to_noise_var(snr_db: f64, signal_power: f64) -> Result<f64> {
    if signal_power <= 0.0 || !signal_power.is_finite() {
        return Err(Error::Domain(format!("signal power {signal_power} must be positive")));
    }
    Ok(signal_power / 10f64.powf(snr_db / 10.0))
}

/// A channel with memory: propagating consecutive blocks through one line is
/// equivalent to convolving their concatenation with the taps.
#[derive(Debug, Clone)]
pub struct ChannelLine {
    taps: ChannelTaps,
    memory: Vec<Complex64>,
    noise_var: f64,
}

impl ChannelLine {
    /// Memory holds the last `G - 1` transmitted samples and starts at zero.
    pub fn new(taps: ChannelTaps, noise_var: f64) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Domain("channel line needs at least one tap".into()));
        }
        if !(noise_var >= 0.0 && noise_var.is_finite()) {
            return Err(Error::Domain(format!("noise variance {noise_var} must be >= 0")));
        }
        let memory = vec![Complex64::new(0.0, 0.0); taps.len() - 1];
        Ok(ChannelLine {
            taps,
            memory,
            noise_var,
        })
    }

    pub fn taps(&self) -> &ChannelTaps {
        &self.taps
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn memory(&self) -> &[Complex64] {
        &self.memory
    }

    /// Noiseless convolution with the line's memory, then AWGN.
    pub fn propagate<R: Rng + ?Sized>(
        &mut self,
        tx: &TimeSymbolBlock,
        rng: &mut R,
    ) -> Result<TimeSymbolBlock> {
        let mut out = self.convolve(tx)?;
        if self.noise_var > 0.0 {
            for y in &mut out.0 {
                *y += complex_gaussian(rng, self.noise_var);
            }
        }
        Ok(out)
    }

    fn convolve(&mut self, tx: &TimeSymbolBlock) -> Result<TimeSymbolBlock> {
        let mem_len = self.memory.len();
        if tx.len() < mem_len {
            return Err(Error::dim("propagate block (at least G - 1 samples)", mem_len, tx.len()));
        }
        let h = self.taps.as_slice();
        let x = tx.as_slice();
        let sample = |i: isize| -> Complex64 {
            if i >= 0 {
                x[i as usize]
            } else {
                self.memory[(mem_len as isize + i) as usize]
            }
        };
        let out = (0..x.len() as isize)
            .map(|n| {
                h.iter()
                    .enumerate()
                    .map(|(l, &hl)| hl * sample(n - l as isize))
                    .sum()
            })
            .collect();
        self.memory.copy_from_slice(&x[x.len() - mem_len..]);
        Ok(TimeSymbolBlock(out))
    }
}
