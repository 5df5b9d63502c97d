//! Silhouette of each embedding on the synthetic multi-lab benchmark.

use std::time::Instant;

use cytolot::analysis::{pca, silhouette};
use cytolot::baseline::{clr_transform, kme_embed, DEFAULT_PSEUDO_COUNT, DEFAULT_SIGMA};
use cytolot::lot::FeatureScaling;
use cytolot::synthetic::SyntheticDesign;
use cytolot::{embed_ensemble, make_reference, quantize_ensemble, ReferenceStrategy};
use ndarray::Array2;

fn scores(name: &str, features: &Array2<f64>, labels: &[usize]) -> cytolot::Result<()> {
    let raw = silhouette(features.view(), labels)?.score;
    let projected = pca(features.view(), 3)?;
    let reduced = silhouette(projected.coordinates.view(), labels)?.score;
    println!("{name:<8} raw {raw:>7.3}  pca {reduced:>7.3}");
    Ok(())
}

fn main() -> cytolot::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let start = Instant::now();
    let samples = SyntheticDesign {
        seed,
        ..SyntheticDesign::default()
    }
    .generate()?;
    let labels: Vec<usize> = samples.iter().map(|s| s.patient).collect();
    let measures: Vec<_> = samples.into_iter().map(|s| s.measure).collect();

    let ensemble = quantize_ensemble(&measures, 64, seed)?;
    let reference = make_reference(&ensemble, ReferenceStrategy::Barycenter, seed)?;
    let lot = embed_ensemble(&ensemble, &reference)?;
    scores(
        "LinW2",
        &lot.as_feature_matrix(FeatureScaling::Weighted),
        &labels,
    )?;
    scores(
        "Comp",
        &clr_transform(&ensemble, DEFAULT_PSEUDO_COUNT)?.clr_matrix,
        &labels,
    )?;
    scores(
        "KME",
        &kme_embed(&measures, 64 * 7, DEFAULT_SIGMA, seed)?.features,
        &labels,
    )?;
    println!("elapsed {:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}
