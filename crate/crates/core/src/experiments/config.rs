//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every key is
//! optional; unknown keys and repeated keys are rejected. Values override the
//! selected preset for every curve it contains.
//!
//! ```text
//! scenario = fig13
//! ff = 0.9
//! snr = 0:2:20
//! trials = 100
//! tap_powers = 0.4, 0.3, 0.15, 0.1, 0.05
//! ```

use std::path::Path;

use crate::channel::PowerDelayProfile;
use crate::error::{Error, Result};

use super::scenario::{preset, EstimatorKind, Scenario};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    /// Preset name: fig12, fig13, fig14 or custom.
    pub scenario: Option<String>,
    pub estimator: Option<EstimatorKind>,
    pub rho: Option<f64>,
    pub ff: Option<f64>,
    pub snr_grid_db: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub subcarriers: Option<usize>,
    pub cp_len: Option<usize>,
    pub max_delay: Option<usize>,
    pub pilot_symbols: Option<usize>,
    pub observed_symbols: Option<usize>,
    pub payload_bits: Option<usize>,
    pub ambiguity_pilots: Option<usize>,
    pub perfect_csi: Option<bool>,
    pub tap_powers: Option<Vec<f64>>,
    pub nearby_pilot_snr_db: Option<f64>,
}

/// Parses `LO:STEP:HI` into an inclusive grid.
pub fn parse_snr_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("SNR range '{s}' is not LO:STEP:HI"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [lo, step, hi] = parts[..] else {
        return Err(bad());
    };
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 || hi < lo {
        return Err(Error::Config(format!(
            "SNR range '{s}' needs finite LO <= HI and STEP > 0"
        )));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > 10_000 {
        return Err(Error::Config(format!("SNR range '{s}' has {count} points")));
    }
    Ok((0..count).map(|i| lo + step * i as f64).collect())
}

fn value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Config(format!("bad value '{raw}' for key '{key}'")))
}

fn set<T>(slot: &mut Option<T>, key: &str, v: T) -> Result<()> {
    if slot.is_some() {
        return Err(Error::Config(format!("key '{key}' given twice")));
    }
    *slot = Some(v);
    Ok(())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut c = RunConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            let (key, raw) = (key.trim(), raw.trim());
            match key {
                "scenario" => set(&mut c.scenario, key, raw.to_string())?,
                "estimator" => set(&mut c.estimator, key, raw.parse()?)?,
                "rho" => set(&mut c.rho, key, value(key, raw)?)?,
                "ff" => set(&mut c.ff, key, value(key, raw)?)?,
                "snr" => set(&mut c.snr_grid_db, key, parse_snr_grid(raw)?)?,
                "trials" => set(&mut c.trials, key, value(key, raw)?)?,
                "seed" => set(&mut c.seed, key, value(key, raw)?)?,
                "subcarriers" => set(&mut c.subcarriers, key, value(key, raw)?)?,
                "cp_len" => set(&mut c.cp_len, key, value(key, raw)?)?,
                "max_delay" => set(&mut c.max_delay, key, value(key, raw)?)?,
                "pilot_symbols" => set(&mut c.pilot_symbols, key, value(key, raw)?)?,
                "observed_symbols" => set(&mut c.observed_symbols, key, value(key, raw)?)?,
                "payload_bits" => set(&mut c.payload_bits, key, value(key, raw)?)?,
                "ambiguity_pilots" => set(&mut c.ambiguity_pilots, key, value(key, raw)?)?,
                "perfect_csi" => set(&mut c.perfect_csi, key, value(key, raw)?)?,
                "tap_powers" => {
                    let powers = raw
                        .split(',')
                        .map(|p| value(key, p.trim()))
                        .collect::<Result<Vec<f64>>>()?;
                    set(&mut c.tap_powers, key, powers)?
                }
                "nearby_pilot_snr_db" => set(&mut c.nearby_pilot_snr_db, key, value(key, raw)?)?,
                _ => return Err(Error::Config(format!("line {}: unknown key '{key}'", n + 1))),
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        RunConfig::parse(&text).map_err(|e| match e {
            Error::Config(message) => Error::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    /// Field-wise merge; values set in `other` win.
    pub fn overridden_by(self, other: RunConfig) -> RunConfig {
        RunConfig {
            scenario: other.scenario.or(self.scenario),
            estimator: other.estimator.or(self.estimator),
            rho: other.rho.or(self.rho),
            ff: other.ff.or(self.ff),
            snr_grid_db: other.snr_grid_db.or(self.snr_grid_db),
            trials: other.trials.or(self.trials),
            seed: other.seed.or(self.seed),
            subcarriers: other.subcarriers.or(self.subcarriers),
            cp_len: other.cp_len.or(self.cp_len),
            max_delay: other.max_delay.or(self.max_delay),
            pilot_symbols: other.pilot_symbols.or(self.pilot_symbols),
            observed_symbols: other.observed_symbols.or(self.observed_symbols),
            payload_bits: other.payload_bits.or(self.payload_bits),
            ambiguity_pilots: other.ambiguity_pilots.or(self.ambiguity_pilots),
            perfect_csi: other.perfect_csi.or(self.perfect_csi),
            tap_powers: other.tap_powers.or(self.tap_powers),
            nearby_pilot_snr_db: other.nearby_pilot_snr_db.or(self.nearby_pilot_snr_db),
        }
    }

    fn apply(&self, s: &mut Scenario) -> Result<()> {
        macro_rules! copy {
            ($($src:ident => $($dst:ident).+),* $(,)?) => {
                $(if let Some(v) = &self.$src { s.$($dst).+ = v.clone(); })*
            };
        }
        copy!(
            estimator => estimator,
            rho => rho,
            ff => ff,
            snr_grid_db => snr_grid_db,
            trials => trials,
            seed => seed,
            subcarriers => cfg.subcarriers,
            cp_len => cfg.cp_len,
            max_delay => cfg.max_delay,
            pilot_symbols => cfg.pilot_symbols,
            observed_symbols => cfg.observed_symbols,
            payload_bits => payload_bits,
            ambiguity_pilots => ambiguity_pilots,
            perfect_csi => perfect_csi,
        );
        if self.nearby_pilot_snr_db.is_some() {
            s.nearby_pilot_snr_db = self.nearby_pilot_snr_db;
        }
        s.pdp = match &self.tap_powers {
            Some(p) => PowerDelayProfile::new(p.clone())?,
            None if s.pdp.paths() != s.cfg.paths() => PowerDelayProfile::uniform(s.cfg.paths())?,
            None => s.pdp.clone(),
        };
        s.validate()
    }

    /// Resolves the preset (default `custom`) and applies every set field.
    pub fn scenarios(&self) -> Result<Vec<Scenario>> {
        let mut curves = preset(self.scenario.as_deref().unwrap_or("custom"))?;
        for s in &mut curves {
            self.apply(s)?;
        }
        Ok(curves)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::scenario::ScenarioName;

    #[test]
    fn snr_grid_parsing() {
        assert_eq!(parse_snr_grid("0:4:20").unwrap(), vec![0.0, 4.0, 8.0, 12.0, 16.0, 20.0]);
        assert_eq!(parse_snr_grid("5:1:5").unwrap(), vec![5.0]);
        assert_eq!(parse_snr_grid("0:0.1:0.3").unwrap().len(), 4);
        assert_eq!(parse_snr_grid("0:3:10").unwrap(), vec![0.0, 3.0, 6.0, 9.0]);
        for bad in ["0:4", "0:0:20", "20:4:0", "a:1:2", "0:-1:5"] {
            assert!(parse_snr_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn parses_and_applies() {
        let text = "# comment\n\nscenario = fig14\nrho=0.3\nsnr = 0:10:20\ntrials = 5\n\
                    tap_powers = 4, 3, 2, 1, 0\nperfect_csi = true\n";
        let c = RunConfig::parse(text).unwrap();
        let curves = c.scenarios().unwrap();
        assert_eq!(curves.len(), 2);
        for s in &curves {
            assert_eq!(s.name, ScenarioName::ForgettingSweep);
            assert_eq!(s.rho, 0.3);
            assert_eq!(s.ff, 0.7);
            assert_eq!(s.snr_grid_db, vec![0.0, 10.0, 20.0]);
            assert_eq!(s.trials, 5);
            assert!(s.perfect_csi);
            assert_eq!(s.pdp.tap_powers(), &[0.4, 0.3, 0.2, 0.1, 0.0]);
        }
    }

    #[test]
    fn later_layer_wins() {
        let file = RunConfig::parse("ff = 0.5\ntrials = 9").unwrap();
        let cli = RunConfig {
            ff: Some(0.8),
            ..RunConfig::default()
        };
        let merged = file.overridden_by(cli);
        assert_eq!((merged.ff, merged.trials), (Some(0.8), Some(9)));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse("nonsense").is_err());
        assert!(RunConfig::parse("colour = red").is_err());
        assert!(RunConfig::parse("ff = 0.5\nff = 0.6").is_err());
        assert!(RunConfig::parse("trials = -3").is_err());
        assert!(RunConfig::parse("estimator = oracle").is_err());
        let c = RunConfig::parse("ff = 1.5").unwrap();
        assert!(matches!(c.scenarios(), Err(Error::Config(_))));
        let c = RunConfig::parse("scenario = fig99").unwrap();
        assert!(c.scenarios().is_err());
        let c = RunConfig::parse("max_delay = 2\ntap_powers = 1, 1").unwrap();
        assert!(c.scenarios().is_err());
    }

    #[test]
    fn max_delay_change_resizes_default_profile() {
        let c = RunConfig::parse("max_delay = 2").unwrap();
        let s = &c.scenarios().unwrap()[0];
        assert_eq!(s.pdp.paths(), 3);
    }

    #[test]
    fn load_maps_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(RunConfig::load(&dir.path().join("x.cfg")), Err(Error::Io { .. })));
        let p = dir.path().join("bad.cfg");
        std::fs::write(&p, "what").unwrap();
        assert!(matches!(RunConfig::load(&p), Err(Error::Parse { .. })));
    }
}
