//! Monte Carlo BER runner.
//!
//! Every trial derives its own generator from `(seed, trial index)` and
//! draws from separate streams for each purpose, so a trial sees the same
//! channels, symbols and unit-variance noise at every SNR point and in every
//! curve that shares the seed. Curves therefore differ only in the parameter
//! being compared. Trials run in parallel; their results are collected in
//! trial order and summed sequentially, so output is independent of
//! scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{draw_correlated_pair, snr_to_noise_var, ChannelLine, ChannelTaps, NearbyPairSpec};
use crate::error::{Error, Result};
use crate::ofdm::{qpsk_demodulate, qpsk_modulate, zf_equalize, BitStream, FreqSymbolBlock, Modem, TimeSymbolBlock};
use crate::pilot::{ls_estimate_with, nmse, pilot_blocks, PilotFrame};
use crate::subspace::{resolve_ambiguity_with, stack_blocks, SubspaceEstimator};

use super::scenario::{EstimatorKind, Scenario};

/// Aggregate over all trials at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub bits: u64,
    pub bit_errors: u64,
    /// `bit_errors / bits`; NaN when every trial was invalid.
    pub ber: f64,
    /// Mean NMSE of the final channel estimate over valid trials.
    pub mean_nmse: f64,
    pub invalid_trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveResult {
    pub scenario: Scenario,
    pub points: Vec<BerPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum TrialOutcome {
    Counted { bits: u64, errors: u64, nmse: f64 },
    /// The subspace estimator refused: autocorrelation rank too low.
    Invalid,
}

#[derive(Clone, Copy)]
#[repr(u64)]
enum Stream {
    Channel = 0,
    NearbyNoise = 1,
    TrainingSymbols = 2,
    TrainingNoise = 3,
    PayloadBits = 4,
    PayloadNoise = 5,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `splitmix64(seed ^ splitmix64(trial))`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    splitmix64(seed ^ splitmix64(trial))
}

fn stream_rng(trial_seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    rng.set_stream(stream as u64);
    rng
}

fn random_qpsk_block<R: Rng>(m: usize, rng: &mut R) -> (BitStream, FreqSymbolBlock) {
    let bits = BitStream((0..2 * m).map(|_| rng.random_range(0..2u8)).collect());
    let symbols = qpsk_modulate(&bits).expect("even bit count");
    (bits, FreqSymbolBlock(symbols))
}

fn send_pilots<R: Rng>(
    line: &mut ChannelLine,
    modem: &Modem,
    tx_freq: Vec<FreqSymbolBlock>,
    rng: &mut R,
) -> Result<(PilotFrame, Vec<TimeSymbolBlock>)> {
    let mut rx_time = Vec::with_capacity(tx_freq.len());
    let mut rx_freq = Vec::with_capacity(tx_freq.len());
    for x in &tx_freq {
        let y = line.propagate(&modem.modulate(x)?, rng)?;
        rx_freq.push(modem.demodulate(&y)?);
        rx_time.push(y);
    }
    Ok((PilotFrame { tx_freq, rx_freq }, rx_time))
}

struct Trial<'a> {
    s: &'a Scenario,
    modem: &'a Modem,
    noise_var: f64,
    nearby_noise_var: f64,
    seed: u64,
}

impl Trial<'_> {
    fn run(&self) -> Result<TrialOutcome> {
        let s = self.s;
        let cfg = *self.modem.config();
        let spec = NearbyPairSpec {
            rho: s.rho,
            pdp: s.pdp.clone(),
        };
        let (h_main, h_nearby) =
            draw_correlated_pair(&spec, cfg.cp_len, &mut stream_rng(self.seed, Stream::Channel))?;

        let mut line = ChannelLine::new(h_main.clone(), self.noise_var)?;
        let mut training_noise = stream_rng(self.seed, Stream::TrainingNoise);

        let estimate = match s.estimator {
            EstimatorKind::Pilot => {
                let pilots = pilot_blocks(&cfg, cfg.pilot_symbols);
                let (frame, _) = send_pilots(&mut line, self.modem, pilots, &mut training_noise)?;
                ls_estimate_with(&frame, self.modem)?.taps
            }
            EstimatorKind::Blind | EstimatorKind::BlindNearbyInit => {
                let mut estimator = if s.estimator == EstimatorKind::Blind {
                    SubspaceEstimator::blind(cfg, s.ff)?
                } else {
                    let mut nearby_line = ChannelLine::new(h_nearby, self.nearby_noise_var)?;
                    let pilots = pilot_blocks(&cfg, cfg.pilot_symbols);
                    let mut rng = stream_rng(self.seed, Stream::NearbyNoise);
                    let (frame, _) = send_pilots(&mut nearby_line, self.modem, pilots, &mut rng)?;
                    let nearby = ls_estimate_with(&frame, self.modem)?;
                    SubspaceEstimator::nearby(cfg, s.ff, &nearby.taps, nearby.residual)?
                };

                let pilots = pilot_blocks(&cfg, s.ambiguity_pilots);
                let (frame, rx) = send_pilots(&mut line, self.modem, pilots, &mut training_noise)?;
                let mut prev = rx.last().cloned().expect("ambiguity_pilots >= 1");
                let mut symbols = stream_rng(self.seed, Stream::TrainingSymbols);
                for _ in 0..cfg.observed_symbols {
                    let (_, x) = random_qpsk_block(cfg.subcarriers, &mut symbols);
                    let cur = line.propagate(&self.modem.modulate(&x)?, &mut training_noise)?;
                    estimator.observe(&stack_blocks(&prev, &cur, &cfg)?)?;
                    prev = cur;
                }
                let blind = match estimator.estimate() {
                    Ok(est) => est,
                    Err(Error::RankDeficient { .. }) => return Ok(TrialOutcome::Invalid),
                    Err(e) => return Err(e),
                };
                resolve_ambiguity_with(&blind, &frame, self.modem)?.taps
            }
        };

        let equalizer_taps: &ChannelTaps = if s.perfect_csi { &h_main } else { &estimate };
        let response = self.modem.frequency_response(equalizer_taps.as_slice())?;
        let (bits, errors) = self.payload(&mut line, &response)?;
        Ok(TrialOutcome::Counted {
            bits,
            errors,
            nmse: nmse(equalizer_taps, &h_main)?,
        })
    }

    fn payload(&self, line: &mut ChannelLine, response: &[num_complex::Complex64]) -> Result<(u64, u64)> {
        let m = self.modem.config().subcarriers;
        let blocks = self.s.payload_bits.div_ceil(2 * m);
        let mut bit_rng = stream_rng(self.seed, Stream::PayloadBits);
        let mut noise_rng = stream_rng(self.seed, Stream::PayloadNoise);
        let mut errors = 0u64;
        for _ in 0..blocks {
            let (bits, x) = random_qpsk_block(m, &mut bit_rng);
            let y = line.propagate(&self.modem.modulate(&x)?, &mut noise_rng)?;
            let eq = zf_equalize(&self.modem.demodulate(&y)?, response)?;
            errors += qpsk_demodulate(eq.symbols.as_slice()).hamming_distance(&bits) as u64;
        }
        Ok(((blocks * 2 * m) as u64, errors))
    }
}

pub fn run_scenario(s: &Scenario) -> Result<Vec<BerPoint>> {
    s.validate()?;
    let modem = Modem::new(s.cfg)?;
    s.snr_grid_db
        .iter()
        .map(|&snr_db| run_point(s, &modem, snr_db))
        .collect()
}

fn run_point(s: &Scenario, modem: &Modem, snr_db: f64) -> Result<BerPoint> {
    let noise_var = snr_to_noise_var(snr_db, 1.0)?;
    let nearby_noise_var = match s.nearby_pilot_snr_db {
        Some(db) if db.is_infinite() && db > 0.0 => 0.0,
        Some(db) => snr_to_noise_var(db, 1.0)?,
        None => noise_var,
    };
    let outcomes: Vec<TrialOutcome> = (0..s.trials as u64)
        .into_par_iter()
        .map(|t| {
            Trial {
                s,
                modem,
                noise_var,
                nearby_noise_var,
                seed: trial_seed(s.seed, t),
            }
            .run()
        })
        .collect::<Result<_>>()?;

    let (mut bits, mut bit_errors, mut nmse_sum, mut counted, mut invalid_trials) = (0, 0, 0.0, 0, 0);
    for o in outcomes {
        match o {
            TrialOutcome::Counted { bits: b, errors, nmse } => {
                bits += b;
                bit_errors += errors;
                nmse_sum += nmse;
                counted += 1;
            }
            TrialOutcome::Invalid => invalid_trials += 1,
        }
    }
    let (ber, mean_nmse) = if counted > 0 {
        (bit_errors as f64 / bits as f64, nmse_sum / counted as f64)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(BerPoint {
        snr_db,
        bits,
        bit_errors,
        ber,
        mean_nmse,
        invalid_trials,
    })
}

/// Runs every curve of a preset.
pub fn run_all(curves: &[Scenario]) -> Result<Vec<CurveResult>> {
    curves
        .iter()
        .map(|s| {
            Ok(CurveResult {
                scenario: s.clone(),
                points: run_scenario(s)?,
            })
        })
        .collect()
}
