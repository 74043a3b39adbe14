//! Output files: `curves.csv`, `ratios.csv`, `config.echo` and plots.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::plot::delay_vs_arl_svg;

pub const CURVES_FILE: &str = "curves.csv";
pub const RATIOS_FILE: &str = "ratios.csv";
pub const ECHO_FILE: &str = "config.echo";
pub const PLOT_FILE: &str = "delay_vs_arl.svg";

/// One threshold of one scheme. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub scheme: String,
    pub model: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub threshold: f64,
    pub arl_mean: f64,
    pub arl_se: f64,
    pub delay_mean: f64,
    pub delay_se: f64,
    pub bound_delay: Option<f64>,
    pub censored_arl: u64,
    pub censored_delay: u64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub scheme: String,
    pub model: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub threshold: f64,
    pub arl_mean: f64,
    pub delay_mean: f64,
    pub baseline_threshold: f64,
    pub baseline_delay_mean: f64,
    pub baseline_delay_se: f64,
    pub baseline_delay_analytic: f64,
    pub ratio: f64,
    pub ratio_limit: Option<f64>,
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_curves(path: &Path, rows: &[CurveRow]) -> Result<()> {
    write_csv(path, rows)
}

pub fn read_curves(path: &Path) -> Result<Vec<CurveRow>> {
    read_csv(path)
}

pub fn write_ratios(path: &Path, rows: &[RatioRow]) -> Result<()> {
    write_csv(path, rows)
}

pub fn read_ratios(path: &Path) -> Result<Vec<RatioRow>> {
    read_csv(path)
}

/// Writes the curve table, the resolved config, a delay-versus-ARL plot and,
/// if given, the ratio table into `dir`. Returns the paths written.
pub fn emit_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    curves: &[CurveRow],
    ratios: Option<&[RatioRow]>,
) -> Result<Vec<PathBuf>> {
    if curves.is_empty() {
        return Err(Error::config("nothing to write: the curve table is empty"));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let path = dir.join(CURVES_FILE);
    write_curves(&path, curves)?;
    written.push(path);

    let path = dir.join(ECHO_FILE);
    fs::write(&path, cfg.echo()).map_err(|e| Error::io(&path, e))?;
    written.push(path);

    let path = dir.join(PLOT_FILE);
    fs::write(&path, delay_vs_arl_svg(curves)).map_err(|e| Error::io(&path, e))?;
    written.push(path);

    if let Some(rows) = ratios {
        let path = dir.join(RATIOS_FILE);
        write_ratios(&path, rows)?;
        written.push(path);
    }
    Ok(written)
}
