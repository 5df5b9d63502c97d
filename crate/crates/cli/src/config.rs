//! Run configuration, stored as a flat TOML document.
//!
//! Keys (all optional in a file; missing keys take the defaults below):
//!
//! | key                    | default      | range / values                                   |
//! |------------------------|--------------|--------------------------------------------------|
//! | `k`                    | 64           | 1 ..= 4096                                       |
//! | `seed`                 | 0            | any u64                                          |
//! | `reference_strategy`   | `barycenter` | `barycenter`, `uniform_centers`, `random_sample`, `pair` |
//! | `embedding_method`     | `lot`        | `lot`, `comp`, `kme`                             |
//! | `feature_scaling`      | `weighted`   | `weighted`, `plain`                              |
//! | `barycenter_weights`   | `uniform`    | `uniform`, `refit`                               |
//! | `barycenter_max_iters` | 100          | 1 ..= 100000                                     |
//! | `pca_components`       | 3            | 1 ..= 1000                                       |
//! | `plot_components`      | 2            | 2 ..= 1000                                       |
//! | `kme_s`                | `k * d`      | even, 2 ..= 1000000; omit for the default        |
//! | `kme_sigma`            | 5.0          | finite, > 0                                      |
//! | `pseudo_count`         | 1e-6         | finite, > 0                                      |
//! | `label_key`            | `patient`    | `patient`, `replicate`, `laboratory`, `kind`     |
//! | `mrd_threshold`        | 0.02         | finite, >= 0 (percent)                           |
//! | `write_mst`            | true         | bool                                             |
//! | `output_dir`           | `out`        | path                                             |

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cytolot::barycenter::BarycenterWeights;
use cytolot::lot::FeatureScaling;
use cytolot::ReferenceStrategy;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingMethod {
    Lot,
    Comp,
    Kme,
}

impl EmbeddingMethod {
    pub fn uses_quantization(self) -> bool {
        !matches!(self, EmbeddingMethod::Kme)
    }
}

impl fmt::Display for EmbeddingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmbeddingMethod::Lot => "lot",
            EmbeddingMethod::Comp => "comp",
            EmbeddingMethod::Kme => "kme",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Barycenter,
    UniformCenters,
    RandomSample,
    Pair,
}

impl From<Strategy> for ReferenceStrategy {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Barycenter => ReferenceStrategy::Barycenter,
            Strategy::UniformCenters => ReferenceStrategy::UniformCenters,
            Strategy::RandomSample => ReferenceStrategy::RandomSample,
            Strategy::Pair => ReferenceStrategy::Pair,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    Weighted,
    Plain,
}

impl From<Scaling> for FeatureScaling {
    fn from(s: Scaling) -> Self {
        match s {
            Scaling::Weighted => FeatureScaling::Weighted,
            Scaling::Plain => FeatureScaling::Plain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    Uniform,
    Refit,
}

impl From<WeightMode> for BarycenterWeights {
    fn from(w: WeightMode) -> Self {
        match w {
            WeightMode::Uniform => BarycenterWeights::Uniform,
            WeightMode::Refit => BarycenterWeights::Refit,
        }
    }
}

/// Manifest column used as the cluster label for silhouettes and plots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum LabelKey {
    Patient,
    Replicate,
    Laboratory,
    Kind,
}

impl fmt::Display for LabelKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelKey::Patient => "patient",
            LabelKey::Replicate => "replicate",
            LabelKey::Laboratory => "laboratory",
            LabelKey::Kind => "kind",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub k: usize,
    pub seed: u64,
    pub reference_strategy: Strategy,
    pub embedding_method: EmbeddingMethod,
    pub feature_scaling: Scaling,
    pub barycenter_weights: WeightMode,
    pub barycenter_max_iters: usize,
    pub pca_components: usize,
    pub plot_components: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kme_s: Option<usize>,
    pub kme_sigma: f64,
    pub pseudo_count: f64,
    pub label_key: LabelKey,
    pub mrd_threshold: f64,
    pub write_mst: bool,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            k: cytolot::quantize::DEFAULT_K,
            seed: 0,
            reference_strategy: Strategy::Barycenter,
            embedding_method: EmbeddingMethod::Lot,
            feature_scaling: Scaling::Weighted,
            barycenter_weights: WeightMode::Uniform,
            barycenter_max_iters: 100,
            pca_components: 3,
            plot_components: 2,
            kme_s: None,
            kme_sigma: cytolot::baseline::DEFAULT_SIGMA,
            pseudo_count: cytolot::baseline::DEFAULT_PSEUDO_COUNT,
            label_key: LabelKey::Patient,
            mrd_threshold: 0.02,
            write_mst: true,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=4096).contains(&self.k) {
            bail!("k = {} is outside 1..=4096", self.k);
        }
        if !(1..=100_000).contains(&self.barycenter_max_iters) {
            bail!(
                "barycenter_max_iters = {} is outside 1..=100000",
                self.barycenter_max_iters
            );
        }
        if !(1..=1000).contains(&self.pca_components) {
            bail!(
                "pca_components = {} is outside 1..=1000",
                self.pca_components
            );
        }
        if !(2..=1000).contains(&self.plot_components) {
            bail!(
                "plot_components = {} is outside 2..=1000",
                self.plot_components
            );
        }
        if let Some(s) = self.kme_s {
            if !(2..=1_000_000).contains(&s) || s % 2 != 0 {
                bail!("kme_s = {s} must be even and within 2..=1000000");
            }
        }
        if !(self.kme_sigma.is_finite() && self.kme_sigma > 0.0) {
            bail!("kme_sigma = {} must be finite and positive", self.kme_sigma);
        }
        if !(self.pseudo_count.is_finite() && self.pseudo_count > 0.0) {
            bail!(
                "pseudo_count = {} must be finite and positive",
                self.pseudo_count
            );
        }
        if !(self.mrd_threshold.is_finite() && self.mrd_threshold >= 0.0) {
            bail!(
                "mrd_threshold = {} must be finite and nonnegative",
                self.mrd_threshold
            );
        }
        Ok(())
    }

    /// Number of random features for data of dimension `dim`.
    pub fn kme_features(&self, dim: usize) -> usize {
        self.kme_s.unwrap_or_else(|| {
            let s = self.k * dim;
            s + s % 2
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).context("serializing config")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).context("parsing config")?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)
            .with_context(|| format!("writing config {}", path.display()))
    }
}
