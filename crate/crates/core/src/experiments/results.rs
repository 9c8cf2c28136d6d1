//! Results CSV: one row per (curve, SNR) point.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::runner::{BerPoint, CurveResult};
use super::scenario::{EstimatorKind, Scenario, ScenarioName};

pub const CSV_HEADER: [&str; 11] = [
    "scenario",
    "estimator",
    "rho",
    "ff",
    "seed",
    "snr_db",
    "bits",
    "bit_errors",
    "ber",
    "mean_nmse",
    "invalid_trials",
];

/// One parsed data row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub scenario: ScenarioName,
    pub estimator: EstimatorKind,
    pub rho: f64,
    pub ff: f64,
    pub seed: u64,
    pub snr_db: f64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub mean_nmse: f64,
    pub invalid_trials: usize,
}

impl CsvRow {
    pub fn new(meta: &Scenario, p: &BerPoint) -> CsvRow {
        CsvRow {
            scenario: meta.name,
            estimator: meta.estimator,
            rho: meta.rho,
            ff: meta.ff,
            seed: meta.seed,
            snr_db: p.snr_db,
            bits: p.bits,
            bit_errors: p.bit_errors,
            ber: p.ber,
            mean_nmse: p.mean_nmse,
            invalid_trials: p.invalid_trials,
        }
    }

    fn record(&self) -> [String; 11] {
        [
            self.scenario.to_string(),
            self.estimator.to_string(),
            format_sig10(self.rho),
            format_sig10(self.ff),
            self.seed.to_string(),
            format_sig10(self.snr_db),
            self.bits.to_string(),
            self.bit_errors.to_string(),
            format_sig10(self.ber),
            format_sig10(self.mean_nmse),
            self.invalid_trials.to_string(),
        ]
    }
}

/// Formats like C's `%.10g`: ten significant digits, trailing zeros removed,
/// exponent notation outside `1e-4 <= |x| < 1e10`.
pub fn format_sig10(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..10).contains(&exp) {
        let decimals = (9 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv_to<W: Write>(out: W, rows: &[CsvRow]) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every point of every curve, curves in order.
pub fn write_csv(curves: &[CurveResult], path: &Path) -> Result<()> {
    let rows: Vec<CsvRow> = curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| CsvRow::new(&c.scenario, p)))
        .collect();
    write_rows(&rows, path)
}

pub fn write_rows(rows: &[CsvRow], path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_csv_to(file, rows).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => io_err(source),
        other => Error::Parse {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    })
}

fn parse_field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, line: u64) -> std::result::Result<T, String> {
    let raw = rec.get(idx).ok_or_else(|| format!("line {line}: missing column {}", CSV_HEADER[idx]))?;
    raw.parse()
        .map_err(|_| format!("line {line}: bad {} value '{raw}'", CSV_HEADER[idx]))
}

fn parse_row(rec: &csv::StringRecord, line: u64) -> std::result::Result<CsvRow, String> {
    if rec.len() != CSV_HEADER.len() {
        return Err(format!("line {line}: expected {} columns, got {}", CSV_HEADER.len(), rec.len()));
    }
    let name = |idx: usize| rec.get(idx).unwrap_or_default();
    Ok(CsvRow {
        scenario: name(0).parse().map_err(|e: Error| format!("line {line}: {e}"))?,
        estimator: name(1).parse().map_err(|e: Error| format!("line {line}: {e}"))?,
        rho: parse_field(rec, 2, line)?,
        ff: parse_field(rec, 3, line)?,
        seed: parse_field(rec, 4, line)?,
        snr_db: parse_field(rec, 5, line)?,
        bits: parse_field(rec, 6, line)?,
        bit_errors: parse_field(rec, 7, line)?,
        ber: parse_field(rec, 8, line)?,
        mean_nmse: parse_field(rec, 9, line)?,
        invalid_trials: parse_field(rec, 10, line)?,
    })
}

/// Parses a results CSV, rejecting any header other than [`CSV_HEADER`].
pub fn read_csv_from<R: Read>(input: R) -> std::result::Result<Vec<CsvRow>, String> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut records = r.records();
    let header = records
        .next()
        .ok_or("empty file")?
        .map_err(|e| e.to_string())?;
    if header.iter().ne(CSV_HEADER) {
        return Err(format!("unexpected header '{}'", header.iter().collect::<Vec<_>>().join(",")));
    }
    records
        .enumerate()
        .map(|(i, rec)| parse_row(&rec.map_err(|e| e.to_string())?, i as u64 + 2))
        .collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv_from(file).map_err(|message| Error::Parse {
        path: path.to_path_buf(),
        message,
    })
}
