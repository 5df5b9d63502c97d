#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cytolot::synthetic::SyntheticDesign;

pub const MANIFEST_HEADER: &str =
    "file_path,sample_id,patient,replicate,laboratory,kind,mrd_biom,mrd_flows";

/// Writes one cell CSV per synthetic sample plus a manifest; returns the
/// manifest path.
pub fn write_dataset(dir: &Path, design: &SyntheticDesign) -> PathBuf {
    let samples = design.generate().unwrap();
    let markers: Vec<String> = (0..design.dim).map(|j| format!("m{j}")).collect();
    fs::create_dir_all(dir.join("cells")).unwrap();
    let mut manifest = format!("{MANIFEST_HEADER}\n");
    for (n, s) in samples.iter().enumerate() {
        let id = s.measure.id();
        let mut text = markers.join(",");
        text.push('\n');
        for row in s.measure.support().rows() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        fs::write(dir.join(format!("cells/{id}.csv")), text).unwrap();
        // Alternate kinds and MRD values so classification has both classes.
        let (kind, mrd) = if s.replicate == 0 {
            ("diagnosis", String::new())
        } else {
            ("followup", format!("{}", 0.01 * (n % 5) as f64))
        };
        writeln!(
            manifest,
            "cells/{id}.csv,{id},P{},R{},L{},{kind},{mrd},",
            s.patient + 1,
            s.replicate + 1,
            s.lab + 1
        )
        .unwrap();
    }
    let path = dir.join("manifest.csv");
    fs::write(&path, manifest).unwrap();
    path
}

/// A small, fast dataset: 2 patients x 2 replicates x 2 labs of 60 cells in
/// three dimensions.
pub fn toy_design() -> SyntheticDesign {
    SyntheticDesign {
        patients: 2,
        replicates: 2,
        labs: 2,
        cells: 60,
        dim: 3,
        seed: 5,
        ..SyntheticDesign::default()
    }
}

pub fn files_under(dir: &Path) -> Vec<String> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(dir).unwrap().to_string_lossy().into_owned());
            }
        }
    }
    out.sort();
    out
}
