use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use cytolot::QuantizedEnsemble;
use cytolot_cli::config::{EmbeddingMethod, LabelKey, RunConfig, Scaling, Strategy, WeightMode};
use cytolot_cli::manifest::{load_samples, LoadedSamples, SampleManifest};
use cytolot_cli::matrix_io::{read_matrix_csv, write_json, LabeledMatrix};
use cytolot_cli::pipeline::{self, Stages};

#[derive(Parser)]
#[command(
    name = "cytolot",
    version,
    about = "Quantize, embed and compare collections of cytometry samples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Run settings; flags override values from `--config`.
#[derive(Args, Clone)]
struct ConfigArgs {
    /// TOML file with run settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, required = true)]
    seed: u64,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum)]
    reference_strategy: Option<Strategy>,
    #[arg(long, value_enum)]
    embedding_method: Option<EmbeddingMethod>,
    #[arg(long, value_enum)]
    feature_scaling: Option<Scaling>,
    #[arg(long, value_enum)]
    barycenter_weights: Option<WeightMode>,
    #[arg(long)]
    barycenter_max_iters: Option<usize>,
    #[arg(long)]
    pca_components: Option<usize>,
    #[arg(long)]
    plot_components: Option<usize>,
    /// Number of random Fourier features (default k * d).
    #[arg(long)]
    kme_s: Option<usize>,
    #[arg(long)]
    kme_sigma: Option<f64>,
    #[arg(long)]
    pseudo_count: Option<f64>,
    #[arg(long, value_enum)]
    label_key: Option<LabelKey>,
    /// MRD-BioM percentage above which a follow-up is positive.
    #[arg(long)]
    mrd_threshold: Option<f64>,
    /// Skip the per-sample MST DOT files.
    #[arg(long)]
    no_mst: bool,
    #[arg(long, short)]
    output_dir: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        c.seed = self.seed;
        macro_rules! set {
            ($($field:ident),*) => {$(if let Some(v) = self.$field.clone() { c.$field = v; })*};
        }
        set!(
            k,
            reference_strategy,
            embedding_method,
            feature_scaling,
            barycenter_weights,
            barycenter_max_iters
        );
        set!(
            pca_components,
            plot_components,
            kme_sigma,
            pseudo_count,
            label_key,
            mrd_threshold,
            output_dir
        );
        if self.kme_s.is_some() {
            c.kme_s = self.kme_s;
        }
        if self.no_mst {
            c.write_mst = false;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// K-means quantization of the pooled samples.
    Quantize {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Quantization plus the reference measure.
    Reference {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Feature matrix of the chosen embedding.
    Embed {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// PCA scores of a feature matrix CSV.
    Pca {
        #[arg(long)]
        features: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Silhouettes of a feature matrix under the manifest labels.
    Silhouette {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Minimum spanning tree of quantization centers, one DOT file per sample.
    Mst {
        #[arg(long)]
        centers: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Leave-one-out classification of follow-up MRD status on PCA scores.
    Classify {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Full pipeline.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Silhouettes and run time as a function of k.
    SweepK {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        k_values: Vec<usize>,
        /// Output CSV.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Silhouette table of KME, K-means + CLR and K-means + LOT.
    Compare {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        k_values: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

fn prepare(config: &RunConfig) -> Result<&Path> {
    fs::create_dir_all(&config.output_dir)
        .with_context(|| format!("creating {}", config.output_dir.display()))?;
    Ok(&config.output_dir)
}

/// Feature rows reordered to follow the manifest's sample order.
fn aligned_features(path: &Path, manifest: &SampleManifest) -> Result<LabeledMatrix> {
    let m = read_matrix_csv(path, true)?;
    let order = manifest
        .entries
        .iter()
        .map(|e| {
            m.row_labels
                .iter()
                .position(|id| id == &e.sample_id)
                .with_context(|| format!("{}: no row for sample `{}`", path.display(), e.sample_id))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LabeledMatrix {
        row_labels: order.iter().map(|&i| m.row_labels[i].clone()).collect(),
        values: m.values.select(ndarray::Axis(0), &order),
        ..m
    })
}

/// A manifest-only sample set for commands that work from a feature file.
fn labels_only(manifest: &Path) -> Result<LoadedSamples> {
    let manifest = SampleManifest::load(manifest)?;
    Ok(LoadedSamples {
        manifest,
        markers: Vec::new(),
        measures: Vec::new(),
    })
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let mut stages = Stages::default();
    match cli.command {
        Command::Quantize { manifest, cfg } => {
            let config = cfg.resolve()?;
            let samples = stages.run("load", || load_samples(&manifest))?;
            let ensemble = stages.run("quantize", || pipeline::quantize(&config, &samples))?;
            let dir = prepare(&config)?;
            stages.run("write", || {
                pipeline::write_quantization(dir, &samples, &ensemble)
            })?;
        }
        Command::Reference { manifest, cfg } => {
            let config = cfg.resolve()?;
            let samples = stages.run("load", || load_samples(&manifest))?;
            let ensemble = stages.run("quantize", || pipeline::quantize(&config, &samples))?;
            let reference = stages.run("reference", || pipeline::reference(&config, &ensemble))?;
            let dir = prepare(&config)?;
            stages.run("write", || {
                pipeline::write_quantization(dir, &samples, &ensemble)?;
                pipeline::write_reference(dir, &samples, &reference)
            })?;
        }
        Command::Embed { manifest, cfg } => {
            let config = cfg.resolve()?;
            let samples = stages.run("load", || load_samples(&manifest))?;
            let embedding = pipeline::embed(&config, &samples, &mut stages)?;
            let dir = prepare(&config)?;
            stages.run("write", || {
                if let Some(ensemble) = &embedding.ensemble {
                    pipeline::write_quantization(dir, &samples, ensemble)?;
                }
                if let Some(reference) = &embedding.reference {
                    pipeline::write_reference(dir, &samples, reference)?;
                }
                pipeline::write_features(dir, &samples, &embedding)
            })?;
        }
        Command::Pca { features, cfg } => {
            let config = cfg.resolve()?;
            let m = stages.run("load", || read_matrix_csv(&features, true))?;
            let projected = stages.run("pca", || pipeline::project(&config, m.values.view()))?;
            let dir = prepare(&config)?;
            stages.run("write", || {
                pipeline::write_pca(dir, &m.row_labels, &projected)
            })?;
        }
        Command::Silhouette {
            features,
            manifest,
            cfg,
        } => {
            let config = cfg.resolve()?;
            let samples = stages.run("load", || labels_only(&manifest))?;
            let m = stages.run("load", || aligned_features(&features, &samples.manifest))?;
            let projected = stages.run("pca", || pipeline::project(&config, m.values.view()))?;
            let report = stages.run("silhouette", || {
                pipeline::silhouettes(&config, &samples, m.values.view(), &projected)
            })?;
            let Some(report) = report else {
                bail!(
                    "stage `silhouette` failed: manifest has no usable `{}` labels",
                    config.label_key
                );
            };
            let dir = prepare(&config)?;
            stages.run("write", || {
                write_json(&dir.join("silhouette.json"), &report)
            })?;
        }
        Command::Mst {
            centers,
            weights,
            cfg,
        } => {
            let config = cfg.resolve()?;
            let c = stages.run("load", || read_matrix_csv(&centers, true))?;
            let w = stages.run("load", || read_matrix_csv(&weights, true))?;
            if w.values.ncols() != c.values.nrows() {
                bail!(
                    "stage `load` failed: {} weight columns for {} centers",
                    w.values.ncols(),
                    c.values.nrows()
                );
            }
            let ensemble = QuantizedEnsemble {
                support: c.values,
                weights: w.values,
                sample_ids: w.row_labels,
                kmeans_inertia: f64::NAN,
                inertia_trace: Vec::new(),
                iterations: 0,
            };
            let dir = prepare(&config)?;
            stages.run("mst", || pipeline::write_msts(dir, &ensemble))?;
        }
        Command::Classify {
            features,
            manifest,
            cfg,
        } => {
            let config = cfg.resolve()?;
            let samples = stages.run("load", || labels_only(&manifest))?;
            let m = stages.run("load", || aligned_features(&features, &samples.manifest))?;
            let projected = stages.run("pca", || pipeline::project(&config, m.values.view()))?;
            let report = stages.run("classify", || {
                pipeline::classify(&config, &samples, &projected)
            })?;
            let Some(report) = report else {
                bail!("stage `classify` failed: need follow-ups with MRD-BioM values on both sides of the threshold");
            };
            let dir = prepare(&config)?;
            stages.run("write", || {
                write_json(&dir.join("classification.json"), &report)
            })?;
        }
        Command::Run { manifest, cfg } => {
            let config = cfg.resolve()?;
            let dir = pipeline::run_pipeline(&config, &manifest)?;
            println!("{}", dir.display());
        }
        Command::SweepK {
            manifest,
            k_values,
            out,
            cfg,
        } => {
            let config = cfg.resolve()?;
            let samples = stages.run("load", || load_samples(&manifest))?;
            let rows = stages.run("sweep", || pipeline::sweep_k(&config, &samples, &k_values))?;
            stages.run("write", || pipeline::write_sweep_csv(&out, &rows))?;
        }
        Command::Compare {
            manifest,
            k_values,
            out,
            cfg,
        } => {
            let config = cfg.resolve()?;
            let samples = stages.run("load", || load_samples(&manifest))?;
            let rows = stages.run("compare", || {
                pipeline::compare_methods(&config, &samples, &k_values)
            })?;
            stages.run("write", || pipeline::write_compare_csv(&out, &rows))?;
        }
    }
    Ok(())
}
