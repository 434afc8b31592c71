//! Experiment configuration.
//!
//! A config file is a flat list of `key = value` lines (TOML syntax, no
//! tables). Resolution order: profile preset, then file keys, then CLI
//! overrides. Unknown keys are rejected so typos never pass silently.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hermite::HermiteBasis;
use crate::spectral::ScaleSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Simulate,
    TrainCompare,
    BiasCompare,
    NtkStudy,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::TrainCompare => "train_compare",
            Experiment::BiasCompare => "bias_compare",
            Experiment::NtkStudy => "ntk_study",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Ci,
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaRule {
    /// `α_j = 2^j`.
    Pow2,
}

/// Hermite scaling: a fixed value or `"auto"` (`λ = √(2p+1)/xi_cover`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSetting {
    Value(f64),
    Keyword(String),
}

/// Every tunable of the four experiments. Fields an experiment does not use are ignored by it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub profile: Profile,
    pub output_dir: String,
    pub seed: u64,
    pub exec: Exec,

    /// Highest scale index `s` of the network in `train_compare` and `ntk_study`.
    pub scales: usize,
    /// Scale counts compared by `simulate` and `bias_compare`.
    pub scale_list: Vec<usize>,
    pub alpha_rule: AlphaRule,
    pub dim: usize,

    pub p: usize,
    pub lambda: LambdaSetting,
    pub xi_cover: f64,

    pub dt: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    /// Energy is recorded every this many steps.
    pub energy_stride: usize,
    /// Half-width of the indicator initial spectrum in `simulate`.
    pub indicator_half_width: f64,
    pub indicator_value: f64,
    /// Band edges `e_0 < e_1 < …`; bands are `[e_i, e_{i+1}]` plus `[e_last, ∞)`.
    pub band_edges: Vec<f64>,

    pub width: usize,
    pub samples: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub snapshot_epochs: Vec<usize>,
    pub random_sampling: bool,

    pub a: f64,
    pub b: f64,
    pub beta: f64,

    pub xi_max: f64,
    pub xi_points: usize,
    pub x_points: usize,

    pub ntk_widths: Vec<usize>,
    pub ntk_seeds: usize,
    pub angle_points: usize,
    pub ntk_train: bool,
    pub ntk_train_widths: Vec<usize>,
    pub ntk_epochs: Vec<usize>,
    pub ntk_learning_rate: f64,
    pub ntk_samples: usize,
}

impl ExperimentConfig {
    /// Defaults for an experiment under a profile.
    pub fn preset(experiment: Experiment, profile: Profile) -> Self {
        let paper = profile == Profile::Paper;
        let mut c = ExperimentConfig {
            experiment,
            profile,
            output_dir: format!("out/{}", experiment.name()),
            seed: 2024,
            exec: Exec::default(),
            scales: 3,
            scale_list: vec![0, 3, 5],
            alpha_rule: AlphaRule::Pow2,
            dim: 1,
            p: 100,
            lambda: LambdaSetting::Keyword("auto".into()),
            xi_cover: 10.0,
            dt: 1e-3,
            t_end: 5.0,
            snapshot_times: vec![0.1, 0.5, 1.0, 5.0],
            energy_stride: 10,
            indicator_half_width: 5.0,
            indicator_value: 1.0,
            band_edges: vec![0.0, 2.0, 5.0],
            width: if paper { 12000 } else { 2000 },
            samples: 2000,
            learning_rate: 1e-3,
            epochs: if paper { 10000 } else { 500 },
            snapshot_epochs: if paper {
                vec![0, 100, 500, 1000, 2000, 5000, 10000]
            } else {
                vec![0, 50, 100, 250, 500]
            },
            random_sampling: false,
            a: 4.2,
            b: 5.8,
            beta: 1.0,
            xi_max: 10.0,
            xi_points: 801,
            x_points: 401,
            ntk_widths: vec![120, 1200, 12000],
            ntk_seeds: 5,
            angle_points: 181,
            ntk_train: true,
            ntk_train_widths: if paper { vec![120, 12000] } else { vec![120, 2000] },
            ntk_epochs: if paper { vec![1000, 2000, 5000] } else { vec![250, 500, 1000] },
            ntk_learning_rate: 1e-5,
            ntk_samples: 2000,
        };
        match experiment {
            Experiment::Simulate => {}
            Experiment::TrainCompare => {
                c.p = if paper { 300 } else { 80 };
                c.xi_cover = 20.0;
            }
            Experiment::BiasCompare => {
                c.scale_list = vec![0, 3];
                c.p = if paper { 300 } else { 80 };
                c.xi_cover = 20.0;
                c.t_end = 1.0;
                c.snapshot_times = vec![0.1, 0.5, 1.0];
            }
            Experiment::NtkStudy => {
                c.dim = 3;
            }
        }
        c
    }

    /// Preset overlaid with the flat key-value text `text`.
    pub fn from_toml_str(text: &str, experiment: Experiment, profile: Profile) -> Result<Self> {
        let overlay: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        if let Some((k, _)) = overlay.iter().find(|(_, v)| v.is_table()) {
            return Err(Error::Config(format!("nested table `{k}` not allowed; use flat keys")));
        }
        let profile = match overlay.get("profile") {
            Some(v) => Profile::deserialize(v.clone()).map_err(|e| Error::Config(e.to_string()))?,
            None => profile,
        };
        if let Some(v) = overlay.get("experiment") {
            let named = Experiment::deserialize(v.clone()).map_err(|e| Error::Config(e.to_string()))?;
            if named != experiment {
                return Err(Error::Config(format!(
                    "config is for `{}` but `{}` was requested",
                    named.name(),
                    experiment.name()
                )));
            }
        }
        let preset = Self::preset(experiment, profile);
        let mut table = match toml::Value::try_from(&preset).map_err(|e| Error::Config(e.to_string()))? {
            toml::Value::Table(t) => t,
            _ => unreachable!("config serializes to a table"),
        };
        for (k, v) in overlay {
            table.insert(k, v);
        }
        let config: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path, experiment: Experiment, profile: Profile) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text, experiment, profile)
    }

    /// Flat key-value rendering; feeding it back reproduces `self`.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return fail(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return fail("t_end must be non-negative".into());
        }
        if !self.snapshot_times.windows(2).all(|w| w[0] < w[1]) {
            return fail("snapshot_times must be strictly increasing".into());
        }
        if self.snapshot_times.iter().any(|&t| t < 0.0 || t > self.t_end + 1e-12) {
            return fail("snapshot_times must lie in [0, t_end]".into());
        }
        if !self.snapshot_epochs.windows(2).all(|w| w[0] < w[1]) {
            return fail("snapshot_epochs must be strictly increasing".into());
        }
        if self.snapshot_epochs.iter().any(|&m| m > self.epochs) {
            return fail("snapshot_epochs must not exceed epochs".into());
        }
        if !self.ntk_epochs.windows(2).all(|w| w[0] < w[1]) {
            return fail("ntk_epochs must be strictly increasing".into());
        }
        if self.energy_stride == 0 {
            return fail("energy_stride must be at least 1".into());
        }
        if self.dim == 0 {
            return fail("dim must be at least 1".into());
        }
        if self.scale_list.is_empty() {
            return fail("scale_list must not be empty".into());
        }
        if !(self.beta > 0.0 && self.learning_rate > 0.0 && self.ntk_learning_rate > 0.0) {
            return fail("beta and learning rates must be positive".into());
        }
        if !(self.xi_cover > 0.0 && self.xi_max > 0.0) || self.xi_points < 2 || self.x_points < 2 {
            return fail("frequency and physical grids need positive extent and >= 2 points".into());
        }
        if self.band_edges.is_empty()
            || self.band_edges[0] < 0.0
            || !self.band_edges.windows(2).all(|w| w[0] < w[1])
        {
            return fail("band_edges must be non-negative and strictly increasing".into());
        }
        match &self.lambda {
            LambdaSetting::Value(v) if !(*v > 0.0 && v.is_finite()) => {
                return fail(format!("lambda must be positive, got {v}"));
            }
            LambdaSetting::Keyword(k) if k != "auto" => {
                return fail(format!("lambda must be a number or \"auto\", got {k:?}"));
            }
            _ => {}
        }
        if self.ntk_seeds == 0 || self.angle_points < 2 {
            return fail("ntk_seeds >= 1 and angle_points >= 2 required".into());
        }
        Ok(())
    }

    pub fn scale_spec(&self, s: usize, dim: usize) -> Result<ScaleSpec> {
        match self.alpha_rule {
            AlphaRule::Pow2 => ScaleSpec::pow2(s, dim),
        }
    }

    pub fn basis(&self) -> Result<HermiteBasis> {
        match &self.lambda {
            LambdaSetting::Value(v) => HermiteBasis::new(self.p, *v),
            LambdaSetting::Keyword(_) => HermiteBasis::covering(self.p, self.xi_cover),
        }
    }

    /// Neurons per scale for a total width `width` shared by `s + 1` scales.
    pub fn per_scale(width: usize, s: usize) -> Result<usize> {
        let count = s + 1;
        if width == 0 || !width.is_multiple_of(count) {
            return Err(Error::Config(format!(
                "width {width} is not a positive multiple of the {count} scales"
            )));
        }
        Ok(width / count)
    }

    /// Symmetric frequency grid `[-xi_max, xi_max]`.
    pub fn xi_grid(&self) -> Vec<f64> {
        uniform(-self.xi_max, self.xi_max, self.xi_points)
    }

    /// Physical grid on `[-β, β]`.
    pub fn x_grid(&self) -> Vec<f64> {
        uniform(-self.beta, self.beta, self.x_points)
    }
}

/// `n` equispaced points from `lo` to `hi` inclusive, exactly symmetric when `lo = -hi`.
pub fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let j = n - 1 - i;
            if i <= j {
                lo + h * i as f64
            } else {
                hi - h * j as f64
            }
        })
        .collect()
}

/// Command-line overrides, applied last.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<String>,
    pub seed: Option<u64>,
    pub scales: Option<usize>,
    pub p: Option<usize>,
    pub dt: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ExperimentConfig) -> Result<()> {
        if let Some(o) = &self.output_dir {
            config.output_dir = o.clone();
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(s) = self.scales {
            config.scales = s;
            if matches!(config.experiment, Experiment::Simulate | Experiment::BiasCompare) {
                config.scale_list = vec![s];
            }
        }
        if let Some(p) = self.p {
            config.p = p;
        }
        if let Some(dt) = self.dt {
            config.dt = dt;
        }
        config.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for e in [
            Experiment::Simulate,
            Experiment::TrainCompare,
            Experiment::BiasCompare,
            Experiment::NtkStudy,
        ] {
            for p in [Profile::Ci, Profile::Paper] {
                ExperimentConfig::preset(e, p).validate().unwrap();
            }
        }
        let c = ExperimentConfig::preset(Experiment::TrainCompare, Profile::Paper);
        assert_eq!((c.width, c.epochs, c.p), (12000, 10000, 300));
        let c = ExperimentConfig::preset(Experiment::TrainCompare, Profile::Ci);
        assert_eq!((c.width, c.epochs, c.p), (2000, 500, 80));
    }

    #[test]
    fn overlay_and_round_trip() {
        let c = ExperimentConfig::from_toml_str(
            "p = 40\ndt = 0.01\nlambda = 1.5\nscale_list = [0, 6]\n",
            Experiment::Simulate,
            Profile::Ci,
        )
        .unwrap();
        assert_eq!(c.p, 40);
        assert_eq!(c.lambda, LambdaSetting::Value(1.5));
        assert_eq!(c.scale_list, vec![0, 6]);
        let text = c.to_toml_string().unwrap();
        let back = ExperimentConfig::from_toml_str(&text, Experiment::Simulate, Profile::Paper).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn bad_configs_rejected() {
        let bad = [
            "dt = -1.0",
            "typo_key = 3",
            "snapshot_times = [1.0, 0.5]",
            "lambda = \"big\"",
            "[section]\np = 3",
            "experiment = \"ntk_study\"",
            "p = ",
        ];
        for text in bad {
            assert!(
                matches!(
                    ExperimentConfig::from_toml_str(text, Experiment::Simulate, Profile::Ci),
                    Err(Error::Config(_))
                ),
                "{text}"
            );
        }
    }

    #[test]
    fn width_split() {
        assert_eq!(ExperimentConfig::per_scale(12000, 3).unwrap(), 3000);
        assert!(ExperimentConfig::per_scale(10, 3).is_err());
    }

    #[test]
    fn symmetric_grid() {
        let g = uniform(-10.0, 10.0, 801);
        assert_eq!(g[400], 0.0);
        for i in 0..801 {
            assert_eq!(g[i], -g[800 - i]);
        }
    }
}
