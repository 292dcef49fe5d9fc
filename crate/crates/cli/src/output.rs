//! CSV and JSON artifacts.
//!
//! Every CSV uses `.` decimals, LF terminators and a fixed column order.
//! Floats are written with Rust's shortest round-trip formatting, so the
//! bytes depend only on the values.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use pdilab_core::montecarlo::{PdSweepPoint, PhaseMsePoint, RocCurve, ThresholdTable};
use serde::{Deserialize, Serialize};

use crate::error::{io_error, CliError};

pub const ROC_HEADER: [&str; 5] = [
    "pfa_target",
    "pfa_achieved",
    "pd",
    "pd_ci_low",
    "pd_ci_high",
];
pub const PD_SWEEP_HEADER: [&str; 5] = ["snr_db", "detector", "pd", "ci_low", "ci_high"];
pub const PHASE_MSE_HEADER: [&str; 4] = ["snr_db", "estimator", "mse_rad2", "crb_rad2"];
pub const THRESHOLD_HEADER: [&str; 3] = ["detector", "pfa", "threshold"];

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let file = File::create(path).map_err(|e| io_error(&path.display().to_string(), e))?;
    let mut w = csv_writer(file);
    let err = |e: csv::Error| io_error(&path.display().to_string(), e);
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.flush()
        .map_err(|e| io_error(&path.display().to_string(), e))
}

pub fn roc_rows(curve: &RocCurve) -> Vec<Vec<String>> {
    curve
        .points
        .iter()
        .map(|p| {
            vec![
                fmt_f64(p.pfa_target),
                fmt_f64(p.pfa_achieved),
                fmt_f64(p.pd),
                fmt_f64(p.pd_ci_low),
                fmt_f64(p.pd_ci_high),
            ]
        })
        .collect()
}

pub fn pd_sweep_rows(points: &[PdSweepPoint]) -> Vec<Vec<String>> {
    points
        .iter()
        .map(|p| {
            vec![
                fmt_f64(p.snr_db),
                p.detector.to_string(),
                fmt_f64(p.pd),
                fmt_f64(p.ci_low),
                fmt_f64(p.ci_high),
            ]
        })
        .collect()
}

pub fn phase_mse_rows(points: &[PhaseMsePoint]) -> Vec<Vec<String>> {
    points
        .iter()
        .map(|p| {
            vec![
                fmt_f64(p.snr_db),
                p.estimator.as_str().to_string(),
                fmt_f64(p.mse_rad2),
                fmt_f64(p.crb_rad2),
            ]
        })
        .collect()
}

pub fn threshold_rows(table: &ThresholdTable) -> Vec<Vec<String>> {
    table
        .detectors
        .iter()
        .flat_map(|d| {
            table
                .pfa_grid
                .iter()
                .zip(&d.thresholds)
                .map(|(&pfa, &g)| vec![d.detector.to_string(), fmt_f64(pfa), fmt_f64(g)])
        })
        .collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| io_error(&path.display().to_string(), e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_error(&path.display().to_string(), e))
}

/// Written next to the data files of every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_path: PathBuf,
    pub output_dir: PathBuf,
    /// The experiment settings actually run, after command-line overrides.
    pub spec: serde_json::Value,
    pub wall_clock_seconds: f64,
    pub tool_version: String,
    pub threads: usize,
    pub files: Vec<String>,
}

/// Deterministic results envelope.
#[derive(Debug, Clone, Serialize)]
pub struct ResultsEnvelope<'a, T: Serialize> {
    pub tool_version: &'static str,
    pub subcommand: &'a str,
    pub seed: u64,
    pub results: &'a T,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lf_terminated_fixed_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(
            &path,
            &ROC_HEADER,
            vec![vec![
                "0.1".into(),
                "0.09".into(),
                "1".into(),
                "0.99".into(),
                "1".into(),
            ]],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "pfa_target,pfa_achieved,pd,pd_ci_low,pd_ci_high\n0.1,0.09,1,0.99,1\n"
        );
    }

    #[test]
    fn float_formatting() {
        assert_eq!(fmt_f64(0.001), "0.001");
        assert_eq!(fmt_f64(1.0), "1");
        assert_eq!(fmt_f64(-2.5), "-2.5");
        assert!(!fmt_f64(1e-7).contains(','));
    }
}
