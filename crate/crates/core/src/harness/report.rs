//! Report records and the output sink that keeps the file manifest honest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{Experiment, ExperimentConfig};
use super::plot::LinePlot;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandRecord {
    pub t: f64,
    pub lo: f64,
    /// `None` for an unbounded band.
    pub hi: Option<f64>,
    pub energy: f64,
    /// Energy relative to the same band at `t = 0`.
    pub fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyPoint {
    pub t: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfLifePoint {
    pub t: f64,
    /// Largest `ξ_h` such that the local error amplitude has at least halved on `[-ξ_h, ξ_h]`.
    pub xi_half: f64,
}

/// One diffusion-model solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub scales: usize,
    pub lambda: f64,
    pub p: usize,
    pub projection_tail: f64,
    pub bands: Vec<BandRecord>,
    pub energy: Vec<EnergyPoint>,
    pub half_life: Vec<HalfLifePoint>,
}

/// Model-versus-training comparison at one snapshot epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyRecord {
    pub epoch: usize,
    pub t: f64,
    /// `‖η̂_model − η̂_train‖ / ‖η̂_train(0)‖` over the frequency grid.
    pub freq_relative: f64,
    /// Same on the physical grid in `[-β, β]`.
    pub phys_relative: f64,
    pub model_freq_norm: f64,
    pub train_freq_norm: f64,
    /// `(∫|η̃|²dξ)^{1/2}` of the model over the whole line.
    pub model_total_norm: f64,
    /// `(2L)^{1/2}`, the sampled `L²(-β, β)` norm of the training error.
    pub train_total_norm: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftRecord {
    pub width: usize,
    pub epoch: usize,
    pub drift: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NtkSummary {
    pub widths: Vec<usize>,
    /// `sup_errors[w][k]`: seed `seed + k` at `widths[w]`.
    pub sup_errors: Vec<Vec<f64>>,
    pub median_errors: Vec<f64>,
    pub drift: Vec<DriftRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    pub runs: Vec<RunSummary>,
    pub discrepancies: Vec<DiscrepancyRecord>,
    pub ntk: Option<NtkSummary>,
    pub warnings: Vec<String>,
    /// Output files relative to the output directory (`report.json` itself excluded).
    pub files: Vec<String>,
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            experiment: config.experiment,
            config: config.clone(),
            runs: Vec::new(),
            discrepancies: Vec::new(),
            ntk: None,
            warnings: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Writes into the output directory and records each file.
pub struct Sink {
    root: PathBuf,
    files: Vec<String>,
}

impl Sink {
    pub fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn register(&mut self, name: &str) {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        fs::write(self.path(name), body)?;
        self.register(name);
        Ok(())
    }

    pub fn svg(&mut self, name: &str, plot: &LinePlot) -> Result<()> {
        self.text(name, &plot.render())
    }

    /// CSV with a header row; `None` cells are left empty.
    pub fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<Option<f64>>]) -> Result<()> {
        let mut w = csv::Writer::from_path(self.path(name))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()))?;
        }
        w.flush()?;
        self.register(name);
        Ok(())
    }

    pub fn into_files(self) -> Vec<String> {
        self.files
    }
}

/// Writes `report.json` into `root`.
pub fn write_report(root: &Path, report: &ExperimentReport) -> Result<PathBuf> {
    let path = root.join("report.json");
    fs::write(&path, serde_json::to_string_pretty(report)? + "\n")?;
    Ok(path)
}
