use std::fmt;
use std::str::FromStr;

use crate::channel::PowerDelayProfile;
use crate::error::{Error, Result};
use crate::ofdm::OfdmConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioName {
    MainChannel,
    NearbyAssisted,
    ForgettingSweep,
    Custom,
}

impl ScenarioName {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioName::MainChannel => "main_channel",
            ScenarioName::NearbyAssisted => "nearby_assisted",
            ScenarioName::ForgettingSweep => "forgetting_sweep",
            ScenarioName::Custom => "custom",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "main_channel" => ScenarioName::MainChannel,
            "nearby_assisted" => ScenarioName::NearbyAssisted,
            "forgetting_sweep" => ScenarioName::ForgettingSweep,
            "custom" => ScenarioName::Custom,
            _ => return Err(Error::Config(format!("unknown scenario name '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    /// Subspace estimation from an empty autocorrelation.
    Blind,
    /// Least-squares estimation from `pilot_symbols` pilot blocks on the main channel.
    Pilot,
    /// Subspace estimation seeded from a pilot estimate of the nearby channel.
    BlindNearbyInit,
}

impl EstimatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::Blind => "blind",
            EstimatorKind::Pilot => "pilot",
            EstimatorKind::BlindNearbyInit => "blind_nearby_init",
        }
    }

    pub fn is_subspace(&self) -> bool {
        !matches!(self, EstimatorKind::Pilot)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "blind" => EstimatorKind::Blind,
            "pilot" => EstimatorKind::Pilot,
            "blind_nearby_init" => EstimatorKind::BlindNearbyInit,
            _ => return Err(Error::Config(format!("unknown estimator '{s}'"))),
        })
    }
}

/// One BER curve: every parameter of a Monte Carlo sweep over SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: ScenarioName,
    pub cfg: OfdmConfig,
    /// Correlation between the main and nearby channel taps.
    pub rho: f64,
    pub ff: f64,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub estimator: EstimatorKind,
    pub pdp: PowerDelayProfile,
    /// Payload bits per trial used for BER counting (rounded up to whole blocks).
    pub payload_bits: usize,
    /// Pilot blocks on the main channel used to resolve the blind scale.
    pub ambiguity_pilots: usize,
    /// Equalize with the true channel instead of the estimate.
    pub perfect_csi: bool,
    /// SNR of the nearby channel's pilots; `None` uses the main-channel SNR.
    pub nearby_pilot_snr_db: Option<f64>,
}

pub const DEFAULT_SEED: u64 = 20_190_611;
pub const DEFAULT_TRIALS: usize = 48;
pub const DEFAULT_PAYLOAD_BITS: usize = 10_240;
pub const DEFAULT_AMBIGUITY_PILOTS: usize = 4;

/// 0 to 20 dB in 4 dB steps.
pub fn default_snr_grid() -> Vec<f64> {
    (0..=5).map(|i| 4.0 * i as f64).collect()
}

impl Scenario {
    /// Baseline curve: default dimensions, uniform five-path profile.
    pub fn base(name: ScenarioName, estimator: EstimatorKind, rho: f64, ff: f64) -> Scenario {
        let cfg = OfdmConfig::default();
        Scenario {
            name,
            cfg,
            rho,
            ff,
            snr_grid_db: default_snr_grid(),
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            estimator,
            pdp: PowerDelayProfile::uniform(cfg.paths()).expect("nonempty profile"),
            payload_bits: DEFAULT_PAYLOAD_BITS,
            ambiguity_pilots: DEFAULT_AMBIGUITY_PILOTS,
            perfect_csi: false,
            nearby_pilot_snr_db: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.snr_grid_db.is_empty() || self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("SNR grid must be nonempty and finite".into()));
        }
        if !(self.ff > 0.0 && self.ff <= 1.0) {
            return Err(Error::Config(format!("forgetting factor {} outside (0, 1]", self.ff)));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::Config(format!("rho {} outside [0, 1]", self.rho)));
        }
        if self.pdp.paths() != self.cfg.paths() {
            return Err(Error::Config(format!(
                "power delay profile has {} paths but max_delay implies {}",
                self.pdp.paths(),
                self.cfg.paths()
            )));
        }
        if self.payload_bits == 0 {
            return Err(Error::Config("payload_bits must be positive".into()));
        }
        if self.cfg.pilot_symbols == 0 && !self.estimator.is_subspace() {
            return Err(Error::Config("pilot estimator needs pilot_symbols >= 1".into()));
        }
        if self.cfg.pilot_symbols == 0 && self.estimator == EstimatorKind::BlindNearbyInit {
            return Err(Error::Config("nearby initialization needs pilot_symbols >= 1".into()));
        }
        if self.estimator.is_subspace() && self.ambiguity_pilots == 0 {
            return Err(Error::Config("subspace estimators need ambiguity_pilots >= 1".into()));
        }
        if self.estimator.is_subspace() && self.cfg.observed_symbols == 0 {
            return Err(Error::Config("subspace estimators need observed_symbols >= 1".into()));
        }
        Ok(())
    }

    /// Short label identifying the curve within a preset.
    pub fn label(&self) -> String {
        format!("{} rho={} ff={}", self.estimator, self.rho, self.ff)
    }
}

/// Blind versus pilot-assisted estimation on the main channel alone.
pub fn scenario_fig12() -> Vec<Scenario> {
    [EstimatorKind::Blind, EstimatorKind::Pilot]
        .into_iter()
        .map(|e| Scenario::base(ScenarioName::MainChannel, e, 0.0, 0.98))
        .collect()
}

/// Nearby-initialized blind estimation at ff = 0.98 for the three measured correlations.
pub fn scenario_fig13() -> Vec<Scenario> {
    [0.98, 0.68, 0.11]
        .into_iter()
        .map(|rho| {
            Scenario::base(ScenarioName::NearbyAssisted, EstimatorKind::BlindNearbyInit, rho, 0.98)
        })
        .collect()
}

/// The two weakly correlated cases again with the forgetting factor lowered to 0.7.
pub fn scenario_fig14() -> Vec<Scenario> {
    [0.68, 0.11]
        .into_iter()
        .map(|rho| {
            Scenario::base(ScenarioName::ForgettingSweep, EstimatorKind::BlindNearbyInit, rho, 0.7)
        })
        .collect()
}

/// A single nearby-initialized curve, the starting point for `custom` runs.
pub fn scenario_custom() -> Vec<Scenario> {
    vec![Scenario::base(
        ScenarioName::Custom,
        EstimatorKind::BlindNearbyInit,
        0.98,
        0.98,
    )]
}

pub fn preset(name: &str) -> Result<Vec<Scenario>> {
    match name {
        "fig12" => Ok(scenario_fig12()),
        "fig13" => Ok(scenario_fig13()),
        "fig14" => Ok(scenario_fig14()),
        "custom" => Ok(scenario_custom()),
        _ => Err(Error::Config(format!(
            "unknown preset '{name}' (expected fig12, fig13, fig14 or custom)"
        ))),
    }
}
