//! Shared fixtures for the criterion benches.

use blindchan::channel::{draw_channel, snr_to_noise_var};
use blindchan::ofdm::{qpsk_modulate, Modem};
use blindchan::subspace::{stack_blocks, BlockPair};
use blindchan::{BitStream, ChannelLine, ChannelTaps, FreqSymbolBlock, OfdmConfig, PowerDelayProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Fixture {
    pub cfg: OfdmConfig,
    pub taps: ChannelTaps,
    pub noise_var: f64,
    pub pairs: Vec<BlockPair>,
}

/// A random five-path channel and `observed_symbols` stacked pairs received over it.
pub fn fixture(seed: u64, snr_db: f64) -> Fixture {
    let cfg = OfdmConfig::default();
    let modem = Modem::new(cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pdp = PowerDelayProfile::uniform(cfg.paths()).unwrap();
    let taps = draw_channel(&pdp, cfg.cp_len, &mut rng).unwrap();
    let noise_var = snr_to_noise_var(snr_db, 1.0).unwrap();
    let mut line = ChannelLine::new(taps.clone(), noise_var).unwrap();
    let mut block = |rng: &mut ChaCha8Rng| {
        let bits = BitStream((0..2 * cfg.subcarriers).map(|_| rng.random_range(0..2u8)).collect());
        let x = FreqSymbolBlock(qpsk_modulate(&bits).unwrap());
        line.propagate(&modem.modulate(&x).unwrap(), rng).unwrap()
    };
    let mut prev = block(&mut rng);
    let pairs = (0..cfg.observed_symbols)
        .map(|_| {
            let cur = block(&mut rng);
            let pair = stack_blocks(&prev, &cur, &cfg).unwrap();
            prev = cur;
            pair
        })
        .collect();
    Fixture {
        cfg,
        taps,
        noise_var,
        pairs,
    }
}
