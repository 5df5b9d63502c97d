//! End-to-end runs and the experiment drivers built on them.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use cytolot::analysis::{
    encode_labels, logicle_scale, loo_logistic, mst, pca, silhouette, ClassificationReport,
    PcaResult,
};
use cytolot::barycenter::{make_reference_with, BarycenterOptions};
use cytolot::baseline::{clr_transform, kme_embed};
use cytolot::{embed_ensemble, quantize_ensemble, QuantizedEnsemble, ReferenceMeasure};
use ndarray::{s, Array2, ArrayView2};
use serde::Serialize;

use crate::config::{EmbeddingMethod, RunConfig};
use crate::manifest::{load_samples, LoadedSamples, SampleKind};
use crate::matrix_io::{write_json, write_matrix_csv};
use crate::plot::Scatter;

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub seconds: f64,
}

/// Runs named stages, recording their wall-clock time and tagging errors
/// with the stage name.
#[derive(Debug, Clone, Default)]
pub struct Stages {
    pub timings: Vec<StageTiming>,
}

impl Stages {
    pub fn run<T>(&mut self, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f().with_context(|| format!("stage `{stage}` failed"))?;
        self.timings.push(StageTiming {
            stage,
            seconds: start.elapsed().as_secs_f64(),
        });
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct Embedding {
    pub method: EmbeddingMethod,
    pub ensemble: Option<QuantizedEnsemble>,
    pub reference: Option<ReferenceMeasure>,
    pub features: Array2<f64>,
    pub feature_names: Vec<String>,
}

pub fn quantize(config: &RunConfig, samples: &LoadedSamples) -> Result<QuantizedEnsemble> {
    Ok(quantize_ensemble(&samples.measures, config.k, config.seed)?)
}

pub fn reference(config: &RunConfig, ensemble: &QuantizedEnsemble) -> Result<ReferenceMeasure> {
    let options = BarycenterOptions {
        max_iters: config.barycenter_max_iters,
        weights: config.barycenter_weights.into(),
        ..BarycenterOptions::default()
    };
    Ok(make_reference_with(
        ensemble,
        config.reference_strategy.into(),
        config.seed,
        &options,
    )?)
}

fn lot_features(
    config: &RunConfig,
    samples: &LoadedSamples,
    ensemble: &QuantizedEnsemble,
    reference: &ReferenceMeasure,
) -> Result<(Array2<f64>, Vec<String>)> {
    let lot = embed_ensemble(ensemble, reference)?;
    let names = (0..reference.total_atoms())
        .flat_map(|k| samples.markers.iter().map(move |m| format!("v{k}_{m}")))
        .collect();
    Ok((lot.as_feature_matrix(config.feature_scaling.into()), names))
}

fn comp_features(
    config: &RunConfig,
    ensemble: &QuantizedEnsemble,
) -> Result<(Array2<f64>, Vec<String>)> {
    let comp = clr_transform(ensemble, config.pseudo_count)?;
    let names = (0..ensemble.k()).map(|k| format!("clr{k}")).collect();
    Ok((comp.clr_matrix, names))
}

fn kme_features(config: &RunConfig, samples: &LoadedSamples) -> Result<(Array2<f64>, Vec<String>)> {
    let s = config.kme_features(samples.dim());
    let kme = kme_embed(&samples.measures, s, config.kme_sigma, config.seed)?;
    let names = (0..s).map(|j| format!("rff{j}")).collect();
    Ok((kme.features, names))
}

/// Computes the embedding selected by `config.embedding_method`.
pub fn embed(
    config: &RunConfig,
    samples: &LoadedSamples,
    stages: &mut Stages,
) -> Result<Embedding> {
    let method = config.embedding_method;
    if method == EmbeddingMethod::Kme {
        let (features, feature_names) = stages.run("embed", || kme_features(config, samples))?;
        return Ok(Embedding {
            method,
            ensemble: None,
            reference: None,
            features,
            feature_names,
        });
    }
    let ensemble = stages.run("quantize", || quantize(config, samples))?;
    let (reference, (features, feature_names)) = match method {
        EmbeddingMethod::Lot => {
            let reference = stages.run("reference", || reference(config, &ensemble))?;
            let f = stages.run("embed", || {
                lot_features(config, samples, &ensemble, &reference)
            })?;
            (Some(reference), f)
        }
        _ => (
            None,
            stages.run("embed", || comp_features(config, &ensemble))?,
        ),
    };
    Ok(Embedding {
        method,
        ensemble: Some(ensemble),
        reference,
        features,
        feature_names,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SilhouetteScores {
    pub score: f64,
    pub per_sample: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SilhouetteReport {
    pub label_key: String,
    pub sample_ids: Vec<String>,
    pub labels: Vec<String>,
    pub raw: SilhouetteScores,
    pub pca: SilhouetteScores,
    pub pca_components: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationSummary {
    /// Follow-ups are positive when MRD-BioM exceeds this percentage.
    pub mrd_threshold: f64,
    pub features: String,
    pub sample_ids: Vec<String>,
    pub truth: Vec<bool>,
    pub predictions: Vec<bool>,
    pub probabilities: Vec<f64>,
    pub true_positive: usize,
    pub false_negative: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    pub sensitivity: f64,
    pub specificity: f64,
    pub balanced_accuracy: f64,
}

impl ClassificationSummary {
    fn new(
        mrd_threshold: f64,
        features: String,
        sample_ids: Vec<String>,
        truth: Vec<bool>,
        r: ClassificationReport,
    ) -> Self {
        Self {
            mrd_threshold,
            features,
            sample_ids,
            truth,
            sensitivity: r.sensitivity(),
            specificity: r.specificity(),
            predictions: r.predictions,
            probabilities: r.probabilities,
            true_positive: r.true_positive,
            false_negative: r.false_negative,
            false_positive: r.false_positive,
            true_negative: r.true_negative,
            balanced_accuracy: r.balanced_accuracy,
        }
    }
}

/// PCA with enough components for both the silhouette and the plot,
/// clipped to the data rank bound.
pub fn project(config: &RunConfig, features: ArrayView2<f64>) -> Result<PcaResult> {
    let (n, p) = features.dim();
    let c = config
        .pca_components
        .max(config.plot_components)
        .min(n.min(p));
    Ok(pca(features, c)?)
}

fn silhouette_scores(features: ArrayView2<f64>, labels: &[usize]) -> Result<SilhouetteScores> {
    let s = silhouette(features, labels)?;
    Ok(SilhouetteScores {
        score: s.score,
        per_sample: s.per_point.to_vec(),
    })
}

/// Silhouettes on the raw embedding and on the first PCA scores, or `None`
/// when the manifest lacks usable labels.
pub fn silhouettes(
    config: &RunConfig,
    samples: &LoadedSamples,
    features: ArrayView2<f64>,
    projected: &PcaResult,
) -> Result<Option<SilhouetteReport>> {
    let Some(labels) = samples.manifest.labels(config.label_key) else {
        return Ok(None);
    };
    let codes = encode_labels(&labels);
    let distinct = codes.iter().max().map_or(0, |m| m + 1);
    if distinct < 2 {
        return Ok(None);
    }
    let c = config.pca_components.min(projected.coordinates.ncols());
    Ok(Some(SilhouetteReport {
        label_key: config.label_key.to_string(),
        sample_ids: samples.sample_ids(),
        labels,
        raw: silhouette_scores(features, &codes)?,
        pca: silhouette_scores(projected.coordinates.slice(s![.., ..c]), &codes)?,
        pca_components: c,
    }))
}

/// Leave-one-out logistic regression of follow-up MRD-BioM status on the
/// PCA scores, when both classes are present.
pub fn classify(
    config: &RunConfig,
    samples: &LoadedSamples,
    projected: &PcaResult,
) -> Result<Option<ClassificationSummary>> {
    let rows: Vec<usize> = samples
        .manifest
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.kind == SampleKind::Followup && e.mrd_biom.is_some())
        .map(|(i, _)| i)
        .collect();
    let truth: Vec<bool> = rows
        .iter()
        .map(|&i| samples.manifest.entries[i].mrd_biom.unwrap() > config.mrd_threshold)
        .collect();
    let positives = truth.iter().filter(|&&t| t).count();
    if rows.len() < 3 || positives == 0 || positives == rows.len() {
        return Ok(None);
    }
    let c = config.pca_components.min(projected.coordinates.ncols());
    let x = projected
        .coordinates
        .select(ndarray::Axis(0), &rows)
        .slice(s![.., ..c])
        .to_owned();
    let report = loo_logistic(x.view(), &truth)?;
    let ids = rows
        .iter()
        .map(|&i| samples.manifest.entries[i].sample_id.clone())
        .collect();
    Ok(Some(ClassificationSummary::new(
        config.mrd_threshold,
        format!("pca{c}"),
        ids,
        truth,
        report,
    )))
}

#[derive(Debug, Clone)]
pub struct RunResults {
    pub embedding: Embedding,
    pub pca: PcaResult,
    pub silhouette: Option<SilhouetteReport>,
    pub classification: Option<ClassificationSummary>,
    pub stages: Stages,
}

/// All in-memory stages after loading.
pub fn compute(
    config: &RunConfig,
    samples: &LoadedSamples,
    mut stages: Stages,
) -> Result<RunResults> {
    config.validate().context("stage `config` failed")?;
    let embedding = embed(config, samples, &mut stages)?;
    let projected = stages.run("pca", || project(config, embedding.features.view()))?;
    let silhouette = stages.run("silhouette", || {
        silhouettes(config, samples, embedding.features.view(), &projected)
    })?;
    let classification = stages.run("classify", || classify(config, samples, &projected))?;
    Ok(RunResults {
        embedding,
        pca: projected,
        silhouette,
        classification,
        stages,
    })
}

fn center_names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("c{i}")).collect()
}

fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn write_quantization(
    dir: &Path,
    samples: &LoadedSamples,
    ensemble: &QuantizedEnsemble,
) -> Result<Vec<String>> {
    write_matrix_csv(
        &dir.join("quantization_centers.csv"),
        Some(("center", &center_names(ensemble.k()))),
        &samples.markers,
        ensemble.support.view(),
    )?;
    write_matrix_csv(
        &dir.join("quantization_weights.csv"),
        Some(("sample_id", &ensemble.sample_ids)),
        &center_names(ensemble.k()),
        ensemble.weights.view(),
    )?;
    Ok(vec![
        "quantization_centers.csv".into(),
        "quantization_weights.csv".into(),
    ])
}

pub fn write_reference(
    dir: &Path,
    samples: &LoadedSamples,
    reference: &ReferenceMeasure,
) -> Result<Vec<String>> {
    let d = samples.dim();
    let total = reference.total_atoms();
    let mut values = Array2::zeros((total, d + 1));
    let mut labels = Vec::with_capacity(total);
    let mut row = 0;
    for (m, measure) in reference.measures.iter().enumerate() {
        for (k, (x, w)) in measure
            .support()
            .rows()
            .into_iter()
            .zip(measure.weights())
            .enumerate()
        {
            labels.push(format!("m{m}_a{k}"));
            values[[row, 0]] = *w;
            values.slice_mut(s![row, 1..]).assign(&x);
            row += 1;
        }
    }
    let mut columns = vec!["weight".to_string()];
    columns.extend(samples.markers.iter().cloned());
    write_matrix_csv(
        &dir.join("reference.csv"),
        Some(("atom", &labels)),
        &columns,
        values.view(),
    )?;
    Ok(vec!["reference.csv".into()])
}

pub fn write_features(
    dir: &Path,
    samples: &LoadedSamples,
    embedding: &Embedding,
) -> Result<Vec<String>> {
    write_matrix_csv(
        &dir.join("features.csv"),
        Some(("sample_id", &samples.sample_ids())),
        &embedding.feature_names,
        embedding.features.view(),
    )?;
    Ok(vec!["features.csv".into()])
}

pub fn write_pca(dir: &Path, sample_ids: &[String], projected: &PcaResult) -> Result<Vec<String>> {
    let names: Vec<String> = (1..=projected.coordinates.ncols())
        .map(|i| format!("PC{i}"))
        .collect();
    write_matrix_csv(
        &dir.join("pca.csv"),
        Some(("sample_id", sample_ids)),
        &names,
        projected.coordinates.view(),
    )?;
    Ok(vec!["pca.csv".into()])
}

/// The common tree sized by the mean weights, then one per sample.
pub fn write_msts(dir: &Path, ensemble: &QuantizedEnsemble) -> Result<Vec<String>> {
    let tree = mst(ensemble.support.view())?;
    let mst_dir = dir.join("mst");
    fs::create_dir_all(&mst_dir)?;
    let mut files = Vec::new();
    let mean = ensemble.mean_weights();
    fs::write(
        mst_dir.join("common.dot"),
        tree.to_dot("common", Some(mean.as_slice().expect("contiguous"))),
    )?;
    files.push("mst/common.dot".to_string());
    for (i, id) in ensemble.sample_ids.iter().enumerate() {
        let masses = cytolot::analysis::mst_node_sizes(ensemble, i)?;
        let name = format!("mst/{}.dot", file_stem(id));
        fs::write(
            dir.join(&name),
            tree.to_dot(id, Some(masses.as_slice().expect("contiguous"))),
        )?;
        files.push(name);
    }
    Ok(files)
}

pub fn write_scatter(
    dir: &Path,
    config: &RunConfig,
    samples: &LoadedSamples,
    projected: &PcaResult,
) -> Result<Vec<String>> {
    let coords = &projected.coordinates;
    let points: Vec<(f64, f64)> = coords
        .rows()
        .into_iter()
        .map(|r| (r[0], if r.len() > 1 { r[1] } else { 0.0 }))
        .collect();
    let groups = samples.manifest.labels(config.label_key);
    let sizes = samples
        .manifest
        .entries
        .iter()
        .map(|e| e.mrd_biom.map(logicle_scale).transpose())
        .collect::<cytolot::Result<Vec<_>>>()?;
    let tooltips: Vec<String> = samples
        .manifest
        .entries
        .iter()
        .map(|e| format!("{} ({})", e.sample_id, e.kind))
        .collect();
    let ratio = |i: usize| {
        projected
            .explained_variance_ratio
            .get(i)
            .map_or(0.0, |r| 100.0 * r)
    };
    let title = format!("{} embedding, PCA", config.embedding_method);
    let x_label = format!("PC1 ({:.1}%)", ratio(0));
    let y_label = format!("PC2 ({:.1}%)", ratio(1));
    let svg = Scatter {
        title: &title,
        x_label: &x_label,
        y_label: &y_label,
        points: &points,
        groups: groups.as_deref(),
        sizes: Some(&sizes),
        tooltips: &tooltips,
    }
    .to_svg();
    fs::write(dir.join("scatter.svg"), svg)?;
    Ok(vec!["scatter.svg".into()])
}

#[derive(Debug, Serialize)]
struct RunMetadata<'a> {
    tool: &'static str,
    version: &'static str,
    manifest: String,
    seed: u64,
    config: &'a RunConfig,
    n_samples: usize,
    markers: &'a [String],
    feature_count: usize,
    quantization: Option<QuantizationMeta>,
    reference: Option<ReferenceMeta>,
    pca_explained_variance_ratio: Vec<f64>,
    silhouette_raw: Option<f64>,
    silhouette_pca: Option<f64>,
    balanced_accuracy: Option<f64>,
    stages: &'a [StageTiming],
    outputs: &'a [String],
}

#[derive(Debug, Serialize)]
struct QuantizationMeta {
    k: usize,
    inertia: f64,
    iterations: usize,
}

#[derive(Debug, Serialize)]
struct ReferenceMeta {
    strategy: String,
    atoms: usize,
    sample_indices: Vec<usize>,
    objective: Option<f64>,
    iterations: usize,
    stalled: bool,
}

/// Moves a finished staging directory into place, replacing a previous
/// run's output but never an unrelated directory.
fn publish(staging: tempfile::TempDir, output_dir: &Path) -> Result<()> {
    if output_dir.exists() {
        let previous_run = output_dir.join("run.json").is_file();
        let empty = fs::read_dir(output_dir)?.next().is_none();
        if !(previous_run || empty) {
            bail!(
                "{} exists and does not hold a previous run; refusing to replace it",
                output_dir.display()
            );
        }
        fs::remove_dir_all(output_dir)
            .with_context(|| format!("removing previous {}", output_dir.display()))?;
    }
    let path = staging.keep();
    fs::rename(&path, output_dir)
        .with_context(|| format!("moving results to {}", output_dir.display()))?;
    Ok(())
}

/// Loads the manifest, runs every stage and writes the artifacts to
/// `config.output_dir`. Outputs are staged next to the destination and only
/// moved into place once every stage succeeded.
pub fn run_pipeline(config: &RunConfig, manifest_path: &Path) -> Result<PathBuf> {
    config.validate().context("stage `config` failed")?;
    let output_dir = config.output_dir.clone();
    let parent = match output_dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).with_context(|| format!("creating {}", parent.display()))?;
    let staging = tempfile::Builder::new()
        .prefix(".cytolot-staging-")
        .tempdir_in(&parent)
        .context("creating staging directory")?;

    let mut stages = Stages::default();
    let samples = stages.run("load", || load_samples(manifest_path))?;
    let results = compute(config, &samples, stages)?;
    let RunResults {
        embedding,
        pca: projected,
        silhouette,
        classification,
        mut stages,
    } = results;

    let dir = staging.path();
    let outputs = stages.run("write", || {
        let mut files = Vec::new();
        if let Some(ensemble) = &embedding.ensemble {
            files.extend(write_quantization(dir, &samples, ensemble)?);
        }
        if let Some(reference) = &embedding.reference {
            files.extend(write_reference(dir, &samples, reference)?);
        }
        files.extend(write_features(dir, &samples, &embedding)?);
        files.extend(write_pca(dir, &samples.sample_ids(), &projected)?);
        if let Some(report) = &silhouette {
            write_json(&dir.join("silhouette.json"), report)?;
            files.push("silhouette.json".into());
        }
        if let Some(report) = &classification {
            write_json(&dir.join("classification.json"), report)?;
            files.push("classification.json".into());
        }
        Ok(files)
    })?;
    let mut outputs = outputs;
    if config.write_mst {
        if let Some(ensemble) = &embedding.ensemble {
            outputs.extend(stages.run("mst", || write_msts(dir, ensemble))?);
        }
    }
    outputs.extend(stages.run("plot", || write_scatter(dir, config, &samples, &projected))?);
    outputs.push("run.json".into());

    let metadata = RunMetadata {
        tool: "cytolot",
        version: env!("CARGO_PKG_VERSION"),
        manifest: manifest_path.display().to_string(),
        seed: config.seed,
        config,
        n_samples: samples.measures.len(),
        markers: &samples.markers,
        feature_count: embedding.features.ncols(),
        quantization: embedding.ensemble.as_ref().map(|e| QuantizationMeta {
            k: e.k(),
            inertia: e.kmeans_inertia,
            iterations: e.iterations,
        }),
        reference: embedding.reference.as_ref().map(|r| ReferenceMeta {
            strategy: r.strategy.to_string(),
            atoms: r.total_atoms(),
            sample_indices: r.sample_indices.clone(),
            objective: r.objective(),
            iterations: r.objective_trace.len(),
            stalled: r.stalled,
        }),
        pca_explained_variance_ratio: projected.explained_variance_ratio.to_vec(),
        silhouette_raw: silhouette.as_ref().map(|s| s.raw.score),
        silhouette_pca: silhouette.as_ref().map(|s| s.pca.score),
        balanced_accuracy: classification.as_ref().map(|c| c.balanced_accuracy),
        stages: &stages.timings,
        outputs: &outputs,
    };
    write_json(&dir.join("run.json"), &metadata).context("stage `write` failed")?;
    publish(staging, &output_dir).context("stage `publish` failed")?;
    Ok(output_dir)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub silhouette_raw: Option<f64>,
    pub silhouette_pca: Option<f64>,
    pub wall_clock_seconds: Option<f64>,
    pub error: Option<String>,
}

/// One full in-memory run per `k`; failures leave the row's values empty.
pub fn sweep_k(
    config: &RunConfig,
    samples: &LoadedSamples,
    k_values: &[usize],
) -> Result<Vec<SweepRow>> {
    if k_values.is_empty() {
        bail!("no k values to sweep");
    }
    Ok(k_values
        .iter()
        .map(|&k| {
            let cfg = RunConfig {
                k,
                ..config.clone()
            };
            let start = Instant::now();
            match compute(&cfg, samples, Stages::default()) {
                Ok(r) => SweepRow {
                    k,
                    silhouette_raw: r.silhouette.as_ref().map(|s| s.raw.score),
                    silhouette_pca: r.silhouette.as_ref().map(|s| s.pca.score),
                    wall_clock_seconds: Some(start.elapsed().as_secs_f64()),
                    error: None,
                },
                Err(e) => SweepRow {
                    k,
                    silhouette_raw: None,
                    silhouette_pca: None,
                    wall_clock_seconds: None,
                    error: Some(format!("{e:#}")),
                },
            }
        })
        .collect())
}

/// One row of the method comparison table; `k = None` is the KME row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompareRow {
    pub k: Option<usize>,
    pub kme: Option<(f64, f64)>,
    pub comp: Option<(f64, f64)>,
    pub lot: Option<(f64, f64)>,
    pub error: Option<String>,
}

fn raw_and_pca(
    config: &RunConfig,
    samples: &LoadedSamples,
    features: ArrayView2<f64>,
) -> Result<(f64, f64)> {
    let projected = project(config, features)?;
    let report =
        silhouettes(config, samples, features, &projected)?.expect("labels checked by caller");
    Ok((report.raw.score, report.pca.score))
}

/// Silhouettes of KME, K-means + CLR and K-means + LOT on the raw
/// embeddings and on their PCA scores.
pub fn compare_methods(
    config: &RunConfig,
    samples: &LoadedSamples,
    k_values: &[usize],
) -> Result<Vec<CompareRow>> {
    config.validate()?;
    let usable = samples
        .manifest
        .labels(config.label_key)
        .is_some_and(|l| encode_labels(&l).into_iter().max().unwrap_or(0) >= 1);
    if !usable {
        bail!("the manifest has no usable `{}` labels", config.label_key);
    }
    let mut rows = Vec::with_capacity(k_values.len() + 1);
    let kme_row =
        kme_features(config, samples).and_then(|(f, _)| raw_and_pca(config, samples, f.view()));
    rows.push(match kme_row {
        Ok(scores) => CompareRow {
            kme: Some(scores),
            ..CompareRow::default()
        },
        Err(e) => CompareRow {
            error: Some(format!("{e:#}")),
            ..CompareRow::default()
        },
    });
    for &k in k_values {
        let cfg = RunConfig {
            k,
            ..config.clone()
        };
        let row = (|| -> Result<CompareRow> {
            cfg.validate()?;
            let ensemble = quantize(&cfg, samples)?;
            let (comp, _) = comp_features(&cfg, &ensemble)?;
            let reference = reference(&cfg, &ensemble)?;
            let (lot, _) = lot_features(&cfg, samples, &ensemble, &reference)?;
            Ok(CompareRow {
                k: Some(k),
                comp: Some(raw_and_pca(&cfg, samples, comp.view())?),
                lot: Some(raw_and_pca(&cfg, samples, lot.view())?),
                ..CompareRow::default()
            })
        })();
        rows.push(row.unwrap_or_else(|e| CompareRow {
            k: Some(k),
            error: Some(format!("{e:#}")),
            ..CompareRow::default()
        }));
    }
    Ok(rows)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record([
        "k",
        "silhouette_raw",
        "silhouette_pca",
        "wall_clock_seconds",
        "error",
    ])?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            cell(r.silhouette_raw),
            cell(r.silhouette_pca),
            cell(r.wall_clock_seconds),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_compare_csv(path: &Path, rows: &[CompareRow]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record([
        "K",
        "KME_raw",
        "KME_pca",
        "Comp_raw",
        "Comp_pca",
        "LinW2_raw",
        "LinW2_pca",
        "error",
    ])?;
    for r in rows {
        let split = |p: Option<(f64, f64)>| (cell(p.map(|x| x.0)), cell(p.map(|x| x.1)));
        let (kr, kp) = split(r.kme);
        let (cr, cp) = split(r.comp);
        let (lr, lp) = split(r.lot);
        let k = r.k.map_or_else(|| "None".to_string(), |k| k.to_string());
        w.write_record([
            k,
            kr,
            kp,
            cr,
            cp,
            lr,
            lp,
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
