//! CP-OFDM baseband simulation and subspace blind channel estimation.
//!
//! The estimator tracks the autocorrelation of stacked pairs of received
//! CP-OFDM blocks with a forgetting factor. Its initial state can be built
//! from a pilot-based estimate of an idle, nearby channel, which is the
//! mechanism the [`experiments`] module exercises across channel
//! correlations and forgetting factors.
//!
//! Module map:
//!
//! * [`ofdm`]: QPSK mapping, CP-OFDM modulation, zero-forcing equalization.
//! * [`channel`]: Rayleigh multipath taps, correlated nearby pairs, stateful propagation.
//! * [`pilot`]: least-squares pilot estimation and the NMSE metric.
//! * [`subspace`]: block stacking, channel convolution matrix, autocorrelation
//!   tracking, noise-subspace channel solve, ambiguity resolution, SIMO oracle.
//! * [`experiments`]: scenario presets, the Monte Carlo runner, CSV and config I/O.

pub mod channel;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod ofdm;
pub mod pilot;
pub mod subspace;

pub use num_complex::Complex64;

pub use channel::{ChannelLine, ChannelTaps, NearbyPairSpec, PowerDelayProfile};
pub use error::{Error, Result};
pub use ofdm::{BitStream, FreqSymbolBlock, OfdmConfig, TimeSymbolBlock};
pub use pilot::{ChannelEstimate, PilotFrame};
pub use subspace::{AutocorrState, BlockPair, SubspaceDecomposition, SubspaceEstimator};
