//! QPSK mapping, CP-OFDM modulation and the zero-forcing equalizer.
//!
//! Conventions used throughout the crate:
//!
//! * QPSK is Gray mapped with unit symbol energy:
//!   `00 -> (+1+j)/√2`, `01 -> (-1+j)/√2`, `11 -> (-1-j)/√2`, `10 -> (+1-j)/√2`.
//!   The first bit of a pair selects the sign of the imaginary part and the
//!   second bit the sign of the real part.
//! * Both transform directions are unitary (scaled by `1/√M`), so the
//!   time-domain body of a block has the same 2-norm as its subcarrier values.
//! * The frequency response of a tap vector is the unscaled DFT
//!   `H[m] = Σ_l h[l]·e^{-j2πml/M}`. With the unitary transforms above a
//!   channel with CP intact acts on subcarriers as `Y[m] = H[m]·X[m]`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Dimensional parameters of the CP-OFDM link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OfdmConfig {
    /// Number of subcarriers `M`.
    pub subcarriers: usize,
    /// Cyclic prefix length `G`; also the length of every tap vector.
    pub cp_len: usize,
    /// Maximum channel delay `L`; the channel has `L + 1` active taps.
    pub max_delay: usize,
    pub pilot_symbols: usize,
    pub observed_symbols: usize,
}

impl Default for OfdmConfig {
    /// 32 subcarriers, CP of 8, five paths, 64 pilot and 64 observed blocks.
    fn default() -> Self {
        OfdmConfig {
            subcarriers: 32,
            cp_len: 8,
            max_delay: 4,
            pilot_symbols: 64,
            observed_symbols: 64,
        }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        let (m, g, l) = (self.subcarriers, self.cp_len, self.max_delay);
        if m == 0 || g == 0 {
            return Err(Error::Config(format!(
                "subcarriers ({m}) and cp_len ({g}) must be positive"
            )));
        }
        if m % g != 0 {
            return Err(Error::Config(format!(
                "subcarriers ({m}) must be a multiple of cp_len ({g})"
            )));
        }
        if l >= g {
            return Err(Error::Config(format!(
                "max_delay ({l}) must be smaller than cp_len ({g})"
            )));
        }
        Ok(())
    }

    /// Samples per transmitted block, `P = M + G`.
    pub fn symbol_len(&self) -> usize {
        self.subcarriers + self.cp_len
    }

    /// Length of a stacked two-block observation, `2M + G`.
    pub fn pair_len(&self) -> usize {
        2 * self.subcarriers + self.cp_len
    }

    /// Number of active channel taps, `L + 1`.
    pub fn paths(&self) -> usize {
        self.max_delay + 1
    }
}

/// Sequence of hard bits, each 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitStream(pub Vec<u8>);

impl BitStream {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    /// Number of positions where `self` and `other` differ. Extra trailing
    /// bits in the longer stream are not counted.
    pub fn hamming_distance(&self, other: &BitStream) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .filter(|(a, b)| a != b)
            .count()
    }
}

impl From<Vec<u8>> for BitStream {
    fn from(bits: Vec<u8>) -> Self {
        BitStream(bits)
    }
}

/// One complex value per subcarrier.
///
/// Transmitted blocks hold unit-magnitude QPSK points; received and
/// equalized blocks hold arbitrary values.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqSymbolBlock(pub Vec<Complex64>);

impl FreqSymbolBlock {
    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Time-domain block of `P` samples, cyclic prefix first.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSymbolBlock(pub Vec<Complex64>);

impl TimeSymbolBlock {
    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn qpsk_point(b0: u8, b1: u8) -> Complex64 {
    let re = if b1 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    let im = if b0 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    Complex64::new(re, im)
}

pub fn qpsk_modulate(bits: &BitStream) -> Result<Vec<Complex64>> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::dim("qpsk_modulate bit count (even)", bits.len() + 1, bits.len()));
    }
    if let Some(&bad) = bits.0.iter().find(|&&b| b > 1) {
        return Err(Error::Domain(format!("bit value {bad} is not 0 or 1")));
    }
    Ok(bits
        .0
        .chunks_exact(2)
        .map(|pair| qpsk_point(pair[0], pair[1]))
        .collect())
}

/// Minimum-distance hard decisions. A component lying exactly on a decision
/// boundary decides bit 0, which is the lower-valued bit pattern.
pub fn qpsk_demodulate(symbols: &[Complex64]) -> BitStream {
    let mut bits = Vec::with_capacity(2 * symbols.len());
    for s in symbols {
        bits.push(u8::from(s.im < 0.0));
        bits.push(u8::from(s.re < 0.0));
    }
    BitStream(bits)
}

/// Cached forward and inverse transforms for one [`OfdmConfig`].
#[derive(Clone)]
pub struct Modem {
    cfg: OfdmConfig,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for Modem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Modem").field("cfg", &self.cfg).finish()
    }
}

impl Modem {
    pub fn new(cfg: OfdmConfig) -> Result<Self> {
        cfg.validate()?;
        let mut planner = FftPlanner::new();
        Ok(Modem {
            cfg,
            forward: planner.plan_fft_forward(cfg.subcarriers),
            inverse: planner.plan_fft_inverse(cfg.subcarriers),
            scale: (cfg.subcarriers as f64).sqrt().recip(),
        })
    }

    pub fn config(&self) -> &OfdmConfig {
        &self.cfg
    }

    pub fn modulate(&self, freq: &FreqSymbolBlock) -> Result<TimeSymbolBlock> {
        let (m, g) = (self.cfg.subcarriers, self.cfg.cp_len);
        if freq.len() != m {
            return Err(Error::dim("ofdm_modulate input", m, freq.len()));
        }
        let mut body = freq.0.clone();
        self.inverse.process(&mut body);
        body.iter_mut().for_each(|x| *x *= self.scale);

        let mut samples = Vec::with_capacity(m + g);
        samples.extend_from_slice(&body[m - g..]);
        samples.extend_from_slice(&body);
        Ok(TimeSymbolBlock(samples))
    }

    pub fn demodulate(&self, time: &TimeSymbolBlock) -> Result<FreqSymbolBlock> {
        let p = self.cfg.symbol_len();
        if time.len() != p {
            return Err(Error::dim("ofdm_demodulate input", p, time.len()));
        }
        let mut body = time.0[self.cfg.cp_len..].to_vec();
        self.forward.process(&mut body);
        body.iter_mut().for_each(|x| *x *= self.scale);
        Ok(FreqSymbolBlock(body))
    }

    /// Unscaled `M`-point DFT of a tap vector (zero padded).
    pub fn frequency_response(&self, taps: &[Complex64]) -> Result<Vec<Complex64>> {
        let m = self.cfg.subcarriers;
        if taps.len() > m {
            return Err(Error::dim("frequency_response taps (at most M)", m, taps.len()));
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        buf[..taps.len()].copy_from_slice(taps);
        self.forward.process(&mut buf);
        Ok(buf)
    }

    /// Inverse of [`Modem::frequency_response`]: the `M` taps whose unscaled
    /// DFT is `response`.
    pub fn impulse_response(&self, response: &[Complex64]) -> Result<Vec<Complex64>> {
        let m = self.cfg.subcarriers;
        if response.len() != m {
            return Err(Error::dim("impulse_response input", m, response.len()));
        }
        let mut buf = response.to_vec();
        self.inverse.process(&mut buf);
        let inv_m = (m as f64).recip();
        buf.iter_mut().for_each(|x| *x *= inv_m);
        Ok(buf)
    }
}

pub fn ofdm_modulate(freq: &FreqSymbolBlock, cfg: &OfdmConfig) -> Result<TimeSymbolBlock> {
    Modem::new(*cfg)?.modulate(freq)
}

pub fn ofdm_demodulate(time: &TimeSymbolBlock, cfg: &OfdmConfig) -> Result<FreqSymbolBlock> {
    Modem::new(*cfg)?.demodulate(time)
}

/// Magnitude below which a channel bin is floored before division.
pub const ZF_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ZfOutput {
    pub symbols: FreqSymbolBlock,
    /// Number of bins whose channel magnitude was raised to [`ZF_FLOOR`].
    pub floored_bins: usize,
}

/// Per-subcarrier zero-forcing division `obs[m] / chan_freq[m]`.
pub fn zf_equalize(obs: &FreqSymbolBlock, chan_freq: &[Complex64]) -> Result<ZfOutput> {
    if obs.len() != chan_freq.len() {
        return Err(Error::dim("zf_equalize channel response", obs.len(), chan_freq.len()));
    }
    let mut floored_bins = 0;
    let symbols = obs
        .0
        .iter()
        .zip(chan_freq)
        .map(|(&y, &h)| {
            let mag = h.norm();
            if mag < ZF_FLOOR {
                floored_bins += 1;
                let phase = if mag > 0.0 { h / mag } else { Complex64::new(1.0, 0.0) };
                y / (phase * ZF_FLOOR)
            } else {
                y / h
            }
        })
        .collect();
    Ok(ZfOutput {
        symbols: FreqSymbolBlock(symbols),
        floored_bins,
    })
}
