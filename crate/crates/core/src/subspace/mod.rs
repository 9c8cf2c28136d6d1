//! Subspace blind channel estimation for CP-OFDM.
//!
//! [`SubspaceEstimator`] ties the pieces together: it owns an
//! [`AutocorrState`] (empty, or seeded from a nearby-channel estimate), folds
//! in stacked block pairs, and produces a unit-norm channel estimate once the
//! autocorrelation has enough rank to expose the noise subspace.

mod autocorr;
mod estimate;
mod matrix;
pub mod simo;

pub use autocorr::{rank_check, AutocorrState, RankDiagnostic, RANK_FLOOR_REL};
pub use estimate::{
    estimate_channel, noise_subspace, orthogonality_form, resolve_ambiguity,
    resolve_ambiguity_with, structured_rows, SubspaceDecomposition, MIN_COND_GAP,
};
pub use matrix::{
    basis_images, build_channel_matrix, stack_blocks, BlockPair, ChannelConvolutionMatrix,
};
pub use simo::{simo_subspace_estimate, SimoDims, SimoInstance};

use crate::channel::ChannelTaps;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::ofdm::OfdmConfig;
use crate::pilot::ChannelEstimate;

use autocorr::rank_from_eigenvalues;
use estimate::estimate_channel_with;

#[derive(Debug, Clone)]
pub struct SubspaceEstimator {
    cfg: OfdmConfig,
    images: Vec<CMatrix>,
    state: AutocorrState,
}

impl SubspaceEstimator {
    /// Purely blind: the autocorrelation starts empty.
    pub fn blind(cfg: OfdmConfig, ff: f64) -> Result<Self> {
        let state = AutocorrState::zeros(&cfg, ff)?;
        Self::with_state(cfg, state)
    }

    /// Autocorrelation seeded with the statistics implied by `nearby`.
    pub fn nearby(cfg: OfdmConfig, ff: f64, nearby: &ChannelTaps, noise_var: f64) -> Result<Self> {
        let state = AutocorrState::from_nearby(nearby, noise_var, &cfg, ff)?;
        Self::with_state(cfg, state)
    }

    pub fn with_state(cfg: OfdmConfig, state: AutocorrState) -> Result<Self> {
        let images = basis_images(&cfg)?;
        if state.dim() != cfg.pair_len() {
            return Err(Error::dim("estimator state", cfg.pair_len(), state.dim()));
        }
        Ok(SubspaceEstimator { cfg, images, state })
    }

    pub fn state(&self) -> &AutocorrState {
        &self.state
    }

    pub fn observe(&mut self, pair: &BlockPair) -> Result<()> {
        self.state.update(pair)
    }

    /// Unit-norm estimate from the current state. Refuses with
    /// [`Error::RankDeficient`] when the rank check fails.
    pub fn estimate(&self) -> Result<ChannelEstimate> {
        Ok(self.estimate_with_diagnostic()?.0)
    }

    pub fn estimate_with_diagnostic(&self) -> Result<(ChannelEstimate, RankDiagnostic)> {
        let dec = noise_subspace(&self.state, &self.cfg)?;
        let rank = rank_from_eigenvalues(&dec.eigvals, &self.cfg);
        if !rank.valid {
            return Err(Error::RankDeficient {
                rank: rank.numerical_rank,
                required: rank.required_rank,
            });
        }
        Ok((estimate_channel_with(&dec, &self.images)?, rank))
    }

    /// Folds in each pair and estimates after every update.
    pub fn track<'a, I>(&mut self, pairs: I) -> Result<Vec<Result<ChannelEstimate>>>
    where
        I: IntoIterator<Item = &'a BlockPair>,
    {
        let mut out = Vec::new();
        for pair in pairs {
            self.observe(pair)?;
            out.push(self.estimate());
        }
        Ok(out)
    }
}
