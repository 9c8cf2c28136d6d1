//! Scenario presets, the Monte Carlo BER runner, and CSV/config I/O.

pub mod config;
pub mod results;
pub mod runner;
pub mod scenario;

pub use config::{parse_snr_grid, RunConfig};
pub use results::{format_sig10, read_csv, write_csv, write_rows, CsvRow, CSV_HEADER};
pub use runner::{run_all, run_scenario, trial_seed, BerPoint, CurveResult};
pub use scenario::{
    preset, scenario_custom, scenario_fig12, scenario_fig13, scenario_fig14, EstimatorKind, Scenario,
    ScenarioName,
};
