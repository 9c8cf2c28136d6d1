//! Running autocorrelation of stacked observations with a forgetting factor.

use num_complex::Complex64;

use crate::channel::ChannelTaps;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::ofdm::OfdmConfig;

use super::matrix::{build_channel_matrix, BlockPair};

/// Eigenvalues above `RANK_FLOOR_REL · λ_max` count toward the numerical rank.
///
/// This sits roughly three decades above the round-off level of a 72-point
/// Hermitian eigensolve, so exponentially down-weighted observations still
/// count while exact rank deficiency does not.
pub const RANK_FLOOR_REL: f64 = 1e-13;

/// Hermitian autocorrelation estimate `R ← ff·R + (1 − ff)·r̄r̄ᴴ`.
#[derive(Debug, Clone)]
pub struct AutocorrState {
    matrix: CMatrix,
    ff: f64,
    update_count: usize,
    init_weight: f64,
}

fn check_ff(ff: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&ff) {
        return Err(Error::Domain(format!("forgetting factor {ff} outside [0, 1]")));
    }
    Ok(())
}

impl AutocorrState {
    /// Empty state: no prior information about the channel.
    pub fn zeros(cfg: &OfdmConfig, ff: f64) -> Result<Self> {
        check_ff(ff)?;
        let n = cfg.pair_len();
        Ok(AutocorrState {
            matrix: CMatrix::zeros(n, n),
            ff,
            update_count: 0,
            init_weight: 0.0,
        })
    }

    /// Statistics implied by a nearby channel estimate:
    /// `H(ĥ)·H(ĥ)ᴴ + noise_var·I`, assuming white unit-power symbols.
    pub fn from_nearby(
        nearby: &ChannelTaps,
        noise_var: f64,
        cfg: &OfdmConfig,
        ff: f64,
    ) -> Result<Self> {
        check_ff(ff)?;
        if !(noise_var >= 0.0 && noise_var.is_finite()) {
            return Err(Error::Domain(format!("noise variance {noise_var} must be >= 0")));
        }
        let h = build_channel_matrix(nearby, cfg)?.into_inner();
        let n = cfg.pair_len();
        let mut matrix = &h * h.adjoint();
        for i in 0..n {
            matrix[(i, i)] += noise_var;
        }
        Ok(AutocorrState {
            matrix,
            ff,
            update_count: 0,
            init_weight: 1.0,
        })
    }

    pub fn from_matrix(matrix: CMatrix, ff: f64) -> Result<Self> {
        check_ff(ff)?;
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::dim("autocorrelation matrix (square)", matrix.nrows(), matrix.ncols()));
        }
        let matrix = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(AutocorrState {
            matrix,
            ff,
            update_count: 0,
            init_weight: 1.0,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn ff(&self) -> f64 {
        self.ff
    }

    pub fn update_count(&self) -> usize {
        self.update_count
    }

    /// Remaining weight of the initial state, `ff^update_count` for an
    /// initialized state and 0 for an empty one.
    pub fn init_weight(&self) -> f64 {
        self.init_weight
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn update(&mut self, pair: &BlockPair) -> Result<()> {
        let n = self.dim();
        if pair.len() != n {
            return Err(Error::dim("autocorr_update pair", n, pair.len()));
        }
        let ff = Complex64::new(self.ff, 0.0);
        let fresh = Complex64::new(1.0 - self.ff, 0.0);
        self.matrix.gerc(fresh, &pair.0, &pair.0, ff);
        // re-impose exact Hermitian symmetry
        for r in 0..n {
            self.matrix[(r, r)].im = 0.0;
            for c in (r + 1)..n {
                let avg = 0.5 * (self.matrix[(r, c)] + self.matrix[(c, r)].conj());
                self.matrix[(r, c)] = avg;
                self.matrix[(c, r)] = avg.conj();
            }
        }
        self.update_count += 1;
        self.init_weight *= self.ff;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankDiagnostic {
    pub numerical_rank: usize,
    /// Rank of the signal part, `2M`.
    pub required_rank: usize,
    pub lambda_max: f64,
    pub floor: f64,
    /// False when the signal subspace cannot be fully represented.
    pub valid: bool,
}

pub fn rank_check(state: &AutocorrState, cfg: &OfdmConfig) -> Result<RankDiagnostic> {
    let eig = hermitian_eigen(state.matrix())?;
    Ok(rank_from_eigenvalues(&eig.values, cfg))
}

pub(crate) fn rank_from_eigenvalues(values: &[f64], cfg: &OfdmConfig) -> RankDiagnostic {
    let lambda_max = values.first().copied().unwrap_or(0.0).max(0.0);
    let floor = RANK_FLOOR_REL * lambda_max;
    let numerical_rank = if lambda_max > 0.0 {
        values.iter().filter(|&&v| v > floor).count()
    } else {
        0
    };
    let required_rank = 2 * cfg.subcarriers;
    RankDiagnostic {
        numerical_rank,
        required_rank,
        lambda_max,
        floor,
        valid: numerical_rank >= required_rank,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{complex_gaussian, draw_channel, PowerDelayProfile};
    use crate::linalg::{hermitian_defect, max_abs};
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> BlockPair {
        BlockPair(DVector::from_fn(n, |_, _| complex_gaussian(rng, 1.0)))
    }

    #[test]
    fn unit_forgetting_keeps_matrix() {
        let cfg = OfdmConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = draw_channel(&PowerDelayProfile::uniform(5).unwrap(), 8, &mut rng).unwrap();
        let mut s = AutocorrState::from_nearby(&h, 0.1, &cfg, 1.0).unwrap();
        let before = s.matrix().clone();
        for _ in 0..5 {
            s.update(&random_pair(&mut rng, 72)).unwrap();
        }
        assert_eq!(s.matrix(), &before);
        assert_eq!(s.update_count(), 5);
        assert_eq!(s.init_weight(), 1.0);
    }

    #[test]
    fn zero_forgetting_is_outer_product() {
        let cfg = OfdmConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut s = AutocorrState::from_nearby(&ChannelTaps::identity(8), 0.3, &cfg, 0.0).unwrap();
        let pair = random_pair(&mut rng, 72);
        s.update(&pair).unwrap();
        let outer = &pair.0 * pair.0.adjoint();
        assert!(max_abs(&(s.matrix() - &outer)) < 1e-15);
        let diag = rank_check(&s, &cfg).unwrap();
        assert_eq!(diag.numerical_rank, 1);
        assert!(!diag.valid);
    }

    #[test]
    fn nearby_init_with_zero_taps_is_scaled_identity() {
        let cfg = OfdmConfig::default();
        let s = AutocorrState::from_nearby(&ChannelTaps::zeros(8), 0.25, &cfg, 0.9).unwrap();
        let want = CMatrix::identity(72, 72) * Complex64::new(0.25, 0.0);
        assert_eq!(s.matrix(), &want);
        assert_eq!(s.update_count(), 0);
    }

    #[test]
    fn noiseless_init_has_rank_2m() {
        let cfg = OfdmConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = draw_channel(&PowerDelayProfile::uniform(5).unwrap(), 8, &mut rng).unwrap();
        let s = AutocorrState::from_nearby(&h, 0.0, &cfg, 0.98).unwrap();
        let eig = hermitian_eigen(s.matrix()).unwrap();
        assert!(eig.values.iter().all(|&v| v > -1e-9));
        let diag = rank_check(&s, &cfg).unwrap();
        assert_eq!(diag.numerical_rank, 64);
        assert!(diag.valid);
    }

    #[test]
    fn rank_grows_one_per_update_from_empty() {
        let cfg = OfdmConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut s = AutocorrState::zeros(&cfg, 0.5).unwrap();
        assert_eq!(rank_check(&s, &cfg).unwrap().numerical_rank, 0);
        for k in 1..=10 {
            s.update(&random_pair(&mut rng, 72)).unwrap();
            let d = rank_check(&s, &cfg).unwrap();
            assert_eq!(d.numerical_rank, k);
            assert!(!d.valid);
        }
    }

    #[test]
    fn noisy_nearby_init_is_full_rank() {
        let cfg = OfdmConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = draw_channel(&PowerDelayProfile::uniform(5).unwrap(), 8, &mut rng).unwrap();
        let s = AutocorrState::from_nearby(&h, 0.01, &cfg, 0.98).unwrap();
        let d = rank_check(&s, &cfg).unwrap();
        assert_eq!(d.numerical_rank, 72);
        assert!(d.valid);
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = OfdmConfig::default();
        assert!(AutocorrState::zeros(&cfg, 1.5).is_err());
        assert!(AutocorrState::from_nearby(&ChannelTaps::zeros(8), -1.0, &cfg, 0.9).is_err());
        let mut s = AutocorrState::zeros(&cfg, 0.9).unwrap();
        assert!(matches!(
            s.update(&BlockPair(DVector::zeros(71))),
            Err(Error::Dimension { .. })
        ));
        assert!(hermitian_defect(s.matrix()) == 0.0);
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use crate::channel::complex_gaussian;
    use crate::linalg::{hermitian_defect, hermitian_eigen};
    use nalgebra::DVector;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn convex_update_keeps_hermitian_psd_and_trace(
            seed in any::<u64>(),
            ff in 0.0f64..=1.0,
            updates in 1usize..12,
        ) {
            let cfg = OfdmConfig::default();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = AutocorrState::from_nearby(&ChannelTaps::identity(8), 0.1, &cfg, ff).unwrap();
            for _ in 0..updates {
                let pair = BlockPair(DVector::from_fn(72, |_, _| complex_gaussian(&mut rng, 1.0)));
                let old_trace = s.matrix().trace().re;
                s.update(&pair).unwrap();
                let want = ff * old_trace + (1.0 - ff) * pair.0.norm_squared();
                prop_assert!((s.matrix().trace().re - want).abs() < 1e-10 * want.max(1.0));
                prop_assert!(hermitian_defect(s.matrix()) < 1e-12);
            }
            let eig = hermitian_eigen(s.matrix()).unwrap();
            prop_assert!(eig.values.iter().all(|&v| v >= -1e-9));
            prop_assert!((s.init_weight() - ff.powi(updates as i32)).abs() < 1e-12);
        }
    }
}
