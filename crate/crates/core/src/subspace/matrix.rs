//! Two-block stacking and the channel convolution matrix `H(h)`.
//!
//! A stacked observation is `r̄(k) = [r(k-1)[G..P], r(k)[0..P]]`, length
//! `2M + G`. It depends only on the `2M` information samples
//! `s̄(k) = [x(k-1), x(k)]` (the IDFT bodies of the two blocks), through
//! `r̄(k) = H(h)·s̄(k) + n̄(k)`.
//!
//! `H(h)` is built directly from linear convolution of the CP-extended
//! sample stream. Row `r` of `r̄` is stream position `G + r`; tap `l` reads
//! stream position `G + r - l`, which is either a body sample or a CP copy of
//! one. Each basis image `H(e_l)` is therefore a 0/1 matrix with exactly one
//! entry per row.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::channel::ChannelTaps;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::ofdm::{OfdmConfig, TimeSymbolBlock};

/// `2M + G` stacked received samples from two consecutive blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPair(pub DVector<Complex64>);

impl BlockPair {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn stack_blocks(
    prev: &TimeSymbolBlock,
    cur: &TimeSymbolBlock,
    cfg: &OfdmConfig,
) -> Result<BlockPair> {
    let p = cfg.symbol_len();
    if prev.len() != p {
        return Err(Error::dim("stack_blocks previous block", p, prev.len()));
    }
    if cur.len() != p {
        return Err(Error::dim("stack_blocks current block", p, cur.len()));
    }
    let values = prev.as_slice()[cfg.cp_len..]
        .iter()
        .chain(cur.as_slice())
        .copied();
    Ok(BlockPair(DVector::from_iterator(cfg.pair_len(), values)))
}

/// `(2M + G) × 2M` matrix mapping information samples to a stacked observation.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConvolutionMatrix(pub CMatrix);

impl ChannelConvolutionMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }
}

/// Column of `s̄` feeding stream position `pos` of two concatenated CP blocks.
fn source_column(pos: usize, cfg: &OfdmConfig) -> usize {
    let (m, g, p) = (cfg.subcarriers, cfg.cp_len, cfg.symbol_len());
    let (block, offset) = (pos / p, pos % p);
    let body = if offset < g { offset + m - g } else { offset - g };
    block * m + body
}

/// For each tap `l`, the `s̄` column read by every row of `r̄`.
pub(crate) fn tap_column_map(cfg: &OfdmConfig) -> Vec<Vec<usize>> {
    let g = cfg.cp_len;
    (0..g)
        .map(|l| {
            (0..cfg.pair_len())
                .map(|r| source_column(g + r - l, cfg))
                .collect()
        })
        .collect()
}

pub fn build_channel_matrix(h: &ChannelTaps, cfg: &OfdmConfig) -> Result<ChannelConvolutionMatrix> {
    cfg.validate()?;
    if h.len() != cfg.cp_len {
        return Err(Error::dim("build_channel_matrix taps", cfg.cp_len, h.len()));
    }
    let mut out = CMatrix::zeros(cfg.pair_len(), 2 * cfg.subcarriers);
    for (tap, cols) in h.as_slice().iter().zip(tap_column_map(cfg)) {
        if tap.norm_sqr() == 0.0 {
            continue;
        }
        for (r, c) in cols.into_iter().enumerate() {
            out[(r, c)] += tap;
        }
    }
    Ok(ChannelConvolutionMatrix(out))
}

/// `H(e_l)` for `l = 0..G`.
pub fn basis_images(cfg: &OfdmConfig) -> Result<Vec<CMatrix>> {
    cfg.validate()?;
    Ok(tap_column_map(cfg)
        .into_iter()
        .map(|cols| {
            let mut img = CMatrix::zeros(cfg.pair_len(), 2 * cfg.subcarriers);
            for (r, c) in cols.into_iter().enumerate() {
                img[(r, c)] = Complex64::new(1.0, 0.0);
            }
            img
        })
        .collect())
}
