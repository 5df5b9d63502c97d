//! Sample manifests and per-sample cell CSV files.
//!
//! A manifest is a CSV file with the header
//! `file_path,sample_id,patient,replicate,laboratory,kind,mrd_biom,mrd_flows`.
//! `patient`, `replicate`, `laboratory`, `mrd_biom` and `mrd_flows` may be
//! blank; `kind` is one of `diagnosis`, `followup`, `nbm`. Relative file
//! paths are resolved against the manifest's directory.
//!
//! Lines starting with `#` are comments, except `# map: SOURCE=MARKER`
//! directives. When at least one directive is present, only the mapped
//! columns are read from every cell file, renamed and ordered as the
//! directives list them; otherwise every column is a marker and all files
//! must share the same header.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use cytolot::DiscreteMeasure;
use ndarray::Array2;
use rayon::prelude::*;
use serde::Deserialize;

use crate::config::LabelKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    Diagnosis,
    Followup,
    Nbm,
}

impl fmt::Display for SampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleKind::Diagnosis => "diagnosis",
            SampleKind::Followup => "followup",
            SampleKind::Nbm => "nbm",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub file_path: PathBuf,
    pub sample_id: String,
    pub patient: Option<String>,
    pub replicate: Option<String>,
    pub laboratory: Option<String>,
    pub kind: SampleKind,
    pub mrd_biom: Option<f64>,
    pub mrd_flows: Option<f64>,
}

impl ManifestEntry {
    pub fn label(&self, key: LabelKey) -> Option<String> {
        match key {
            LabelKey::Patient => self.patient.clone(),
            LabelKey::Replicate => self.replicate.clone(),
            LabelKey::Laboratory => self.laboratory.clone(),
            LabelKey::Kind => Some(self.kind.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleManifest {
    pub entries: Vec<ManifestEntry>,
    /// `(source column, marker name)` pairs from `# map:` directives.
    pub column_map: Vec<(String, String)>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    file_path: String,
    sample_id: String,
    #[serde(default)]
    patient: Option<String>,
    #[serde(default)]
    replicate: Option<String>,
    #[serde(default)]
    laboratory: Option<String>,
    kind: SampleKind,
    #[serde(default)]
    mrd_biom: Option<f64>,
    #[serde(default)]
    mrd_flows: Option<f64>,
}

fn nonblank(s: Option<String>) -> Option<String> {
    s.map(|s| s.trim().to_string()).filter(|s| !s.is_empty())
}

impl SampleManifest {
    pub fn parse(text: &str, base_dir: &Path, origin: &str) -> Result<Self> {
        let mut column_map = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let Some(rest) = line.trim_start().strip_prefix('#') else {
                continue;
            };
            let Some(directive) = rest.trim_start().strip_prefix("map:") else {
                continue;
            };
            let (source, marker) = directive
                .split_once('=')
                .map(|(s, m)| (s.trim().to_string(), m.trim().to_string()))
                .filter(|(s, m)| !s.is_empty() && !m.is_empty())
                .ok_or_else(|| {
                    anyhow!("{origin}:{}: expected `# map: SOURCE=MARKER`", lineno + 1)
                })?;
            if column_map.iter().any(|(_, m)| m == &marker) {
                bail!("{origin}:{}: marker `{marker}` mapped twice", lineno + 1);
            }
            column_map.push((source, marker));
        }

        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut entries = Vec::new();
        let mut ids = HashSet::new();
        for record in reader.deserialize::<RawEntry>() {
            let raw = record.map_err(|e| anyhow!("{origin}: {e}"))?;
            if raw.sample_id.is_empty() {
                bail!("{origin}: empty sample_id");
            }
            if !ids.insert(raw.sample_id.clone()) {
                bail!("{origin}: duplicate sample_id `{}`", raw.sample_id);
            }
            for (name, v) in [("mrd_biom", raw.mrd_biom), ("mrd_flows", raw.mrd_flows)] {
                if let Some(v) = v {
                    if !(v.is_finite() && v >= 0.0) {
                        bail!(
                            "{origin}: sample `{}` has {name} = {v}; must be >= 0",
                            raw.sample_id
                        );
                    }
                }
            }
            let path = PathBuf::from(&raw.file_path);
            let file_path = if path.is_absolute() {
                path
            } else {
                base_dir.join(path)
            };
            entries.push(ManifestEntry {
                file_path,
                sample_id: raw.sample_id,
                patient: nonblank(raw.patient),
                replicate: nonblank(raw.replicate),
                laboratory: nonblank(raw.laboratory),
                kind: raw.kind,
                mrd_biom: raw.mrd_biom,
                mrd_flows: raw.mrd_flows,
            });
        }
        if entries.is_empty() {
            bail!("{origin}: manifest lists no samples");
        }
        Ok(Self {
            entries,
            column_map,
        })
    }

    /// Reads a manifest and checks that every referenced file exists.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let manifest = Self::parse(&text, base, &path.display().to_string())?;
        for e in &manifest.entries {
            if !e.file_path.is_file() {
                bail!(
                    "sample `{}`: file {} does not exist",
                    e.sample_id,
                    e.file_path.display()
                );
            }
        }
        Ok(manifest)
    }

    /// Labels for `key`, or `None` when some sample lacks one.
    pub fn labels(&self, key: LabelKey) -> Option<Vec<String>> {
        self.entries.iter().map(|e| e.label(key)).collect()
    }
}

/// Cells of one file: marker names and an `m x d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTable {
    pub markers: Vec<String>,
    pub cells: Array2<f64>,
}

/// Reads a cell CSV, keeping either every column or the mapped ones.
pub fn read_cell_csv(path: &Path, column_map: &[(String, String)]) -> Result<CellTable> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .with_context(|| format!("{}:1: reading header", path.display()))?
        .iter()
        .map(str::to_string)
        .collect();
    let (markers, columns): (Vec<String>, Vec<usize>) = if column_map.is_empty() {
        (header.clone(), (0..header.len()).collect())
    } else {
        column_map
            .iter()
            .map(|(source, marker)| {
                header
                    .iter()
                    .position(|h| h == source)
                    .map(|c| (marker.clone(), c))
                    .ok_or_else(|| {
                        anyhow!("{}:1: mapped column `{source}` not found", path.display())
                    })
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip()
    };
    if markers.is_empty() {
        bail!("{}:1: no marker columns", path.display());
    }

    let mut values = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            anyhow!("{}:{line}: {e}", path.display())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        for &c in &columns {
            let field = &record[c];
            let v: f64 = field.parse().map_err(|_| {
                anyhow!(
                    "{}:{line}: column `{}` is not a number: `{field}`",
                    path.display(),
                    header[c]
                )
            })?;
            if !v.is_finite() {
                bail!(
                    "{}:{line}: column `{}` is not finite",
                    path.display(),
                    header[c]
                );
            }
            values.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        bail!("{}: no cells", path.display());
    }
    let cells = Array2::from_shape_vec((rows, markers.len()), values).expect("row-major fill");
    Ok(CellTable { markers, cells })
}

/// Measures loaded from a manifest, in manifest order.
#[derive(Debug, Clone)]
pub struct LoadedSamples {
    pub manifest: SampleManifest,
    pub markers: Vec<String>,
    pub measures: Vec<DiscreteMeasure>,
}

impl LoadedSamples {
    pub fn sample_ids(&self) -> Vec<String> {
        self.manifest
            .entries
            .iter()
            .map(|e| e.sample_id.clone())
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.markers.len()
    }
}

/// Loads every sample of a manifest as a uniform measure over its cells.
pub fn load_samples(manifest_path: &Path) -> Result<LoadedSamples> {
    let manifest = SampleManifest::load(manifest_path)?;
    load_manifest_samples(manifest)
}

pub fn load_manifest_samples(manifest: SampleManifest) -> Result<LoadedSamples> {
    let tables: Vec<CellTable> = manifest
        .entries
        .par_iter()
        .map(|e| read_cell_csv(&e.file_path, &manifest.column_map))
        .collect::<Result<_>>()?;
    let markers = tables[0].markers.clone();
    for (e, t) in manifest.entries.iter().zip(&tables).skip(1) {
        if t.markers != markers {
            bail!(
                "{}: markers [{}] differ from [{}] in {}",
                e.file_path.display(),
                t.markers.join(", "),
                markers.join(", "),
                manifest.entries[0].file_path.display()
            );
        }
    }
    let measures = manifest
        .entries
        .iter()
        .zip(tables)
        .map(|(e, t)| {
            DiscreteMeasure::uniform(e.sample_id.clone(), t.cells).map_err(anyhow::Error::from)
        })
        .collect::<Result<_>>()?;
    Ok(LoadedSamples {
        manifest,
        markers,
        measures,
    })
}
