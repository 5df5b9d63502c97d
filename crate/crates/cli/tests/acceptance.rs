//! Acceptance checks. Each criterion prints one PASS/FAIL/SKIP line; the
//! process exits nonzero if any criterion fails.

mod common;
#[path = "../../core/tests/common/mod.rs"]
mod oracle;

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use cytolot::analysis::{loo_logistic, mst, pca, silhouette};
use cytolot::baseline::KmeEmbedding;
use cytolot::lot::embed_measures;
use cytolot::measures::squared_cost_matrix;
use cytolot::quantize::check_quantization_identity;
use cytolot::synthetic::SyntheticDesign;
use cytolot::{
    embed_ensemble, quantize_ensemble, solve_ot, wasserstein2, wasserstein_barycenter,
    DiscreteMeasure, ReferenceMeasure, ReferenceStrategy,
};
use cytolot_cli::config::{LabelKey, RunConfig};
use cytolot_cli::pipeline::{compare_methods, CompareRow};
use cytolot_cli::{load_samples, SampleManifest};
use ndarray::{Array2, Axis};
use oracle::{mst_brute_force, ot_vertex_oracle, random_measure, random_uniform_measure, rng};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

type Scores = (f64, f64);

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn within_budget(ok: bool, detail: String, elapsed: Duration, budget: Duration) -> Outcome {
    let detail = format!(
        "{detail}, {:.2}s of {:.0}s",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    verdict(ok && elapsed <= budget, detail)
}

fn ot_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let (n, m, d) = (
            r.random_range(1..=6),
            r.random_range(1..=6),
            r.random_range(1..=3),
        );
        let a = random_measure(&mut r, &format!("a{i}"), n, d, 3.0);
        let b = random_measure(&mut r, &format!("b{i}"), m, d, 3.0);
        let cost = squared_cost_matrix(a.support(), b.support());
        let plan = match solve_ot(&a, &b) {
            Ok(p) => p,
            Err(e) => return Outcome::Fail(format!("pair {i}: {e}")),
        };
        let brute = ot_vertex_oracle(
            a.weights().as_slice().unwrap(),
            b.weights().as_slice().unwrap(),
            &cost,
        );
        worst = worst.max((plan.cost - brute).abs());
    }
    within_budget(
        worst <= 1e-8,
        format!("200 pairs, max |cost - brute force| = {worst:.2e} (tol 1e-8)"),
        start.elapsed(),
        Duration::from_secs(10),
    )
}

fn quantization_identity() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for e in 0..50 {
        let k = [2, 4, 8][e % 3];
        let n = r.random_range(1..=5);
        let measures: Vec<DiscreteMeasure> = (0..n)
            .map(|i| {
                let atoms = r.random_range(8..=50);
                random_uniform_measure(&mut r, &format!("s{i}"), atoms, 2, 4.0)
            })
            .collect();
        let gap = quantize_ensemble(&measures, k, e as u64)
            .and_then(|ensemble| check_quantization_identity(&measures, &ensemble));
        match gap {
            Ok(id) => worst = worst.max(id.gap),
            Err(err) => return Outcome::Fail(format!("ensemble {e}: {err}")),
        }
    }
    within_budget(
        worst <= 1e-7,
        format!("50 ensembles, max gap = {worst:.2e} (tol 1e-7)"),
        start.elapsed(),
        Duration::from_secs(60),
    )
}

fn lot_isometry() -> Outcome {
    let mut r = rng(3);
    let mut exact = 0.0f64;
    let mut excess = f64::NEG_INFINITY;
    for trial in 0..50u64 {
        // Equal-size uniform measures: optimal plans are permutations.
        let k = r.random_range(1..=8);
        let targets: Vec<_> = (0..4)
            .map(|i| random_uniform_measure(&mut r, &format!("t{i}"), k, 2, 3.0))
            .collect();
        let reference = ReferenceMeasure {
            measures: vec![random_uniform_measure(&mut r, "ref", k, 2, 3.0)],
            strategy: ReferenceStrategy::Barycenter,
            seed: trial,
            sample_indices: vec![],
            objective_trace: vec![],
            stalled: false,
        };
        let lot = embed_measures(&targets, &reference).unwrap();
        for (i, t) in targets.iter().enumerate() {
            let w2 = wasserstein2(reference.primary(), t).unwrap();
            exact = exact.max((lot.displacement_norm(i) - w2).abs());
        }

        // General weighted case.
        let clouds: Vec<_> = (0..4)
            .map(|i| {
                let atoms = r.random_range(5..=25);
                random_measure(&mut r, &format!("g{i}"), atoms, 3, 3.0)
            })
            .collect();
        let ensemble = quantize_ensemble(&clouds, 6, trial).unwrap();
        let reference = wasserstein_barycenter(&ensemble, 4, trial, 30).unwrap();
        let lot = embed_ensemble(&ensemble, &reference).unwrap();
        for i in 0..clouds.len() {
            let w2 = wasserstein2(reference.primary(), &ensemble.measure(i).unwrap()).unwrap();
            excess = excess.max(lot.displacement_norm(i) - w2);
        }
    }
    verdict(
        exact <= 1e-8 && excess <= 1e-8,
        format!("deterministic plans |norm - W2| <= {exact:.2e}; general max(norm - W2) = {excess:.2e} (tol 1e-8)"),
    )
}

fn barycenter_descent() -> Outcome {
    let mut r = rng(4);
    let mut worst_rise = 0.0f64;
    for seed in 0..30u64 {
        let n = r.random_range(1..=5);
        let clouds: Vec<_> = (0..n)
            .map(|i| {
                let atoms = r.random_range(5..=30);
                random_measure(&mut r, &format!("c{i}"), atoms, 2, 3.0)
            })
            .collect();
        let k = r.random_range(1..=6);
        let ensemble = quantize_ensemble(&clouds, 6, seed).unwrap();
        let reference = wasserstein_barycenter(&ensemble, k, seed, 50).unwrap();
        for pair in reference.objective_trace.windows(2) {
            worst_rise = worst_rise.max(pair[1] - pair[0]);
        }
    }
    let diracs = vec![
        DiscreteMeasure::dirac("a", &[0.0, 0.0]).unwrap(),
        DiscreteMeasure::dirac("b", &[2.0, 4.0]).unwrap(),
    ];
    let ensemble = quantize_ensemble(&diracs, 2, 0).unwrap();
    let mid = wasserstein_barycenter(&ensemble, 1, 0, 100).unwrap();
    let x = mid.primary().support().row(0).to_owned();
    let off = (x[0] - 1.0).abs().max((x[1] - 2.0).abs());
    verdict(
        worst_rise <= 1e-12 && off <= 1e-6,
        format!("max objective rise {worst_rise:.2e} over 30 runs; two-Dirac midpoint error {off:.2e} (tol 1e-6)"),
    )
}

fn kme_kernel() -> Outcome {
    let kme = KmeEmbedding::sampler(3, 4096, 5.0, 5).unwrap();
    let mut r = rng(5);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
        let exact = (-oracle::sq_dist(&x, &y) / 50.0).exp();
        worst = worst.max((kme.kernel_estimate(&x, &y).unwrap() - exact).abs());
    }
    verdict(
        worst <= 0.02,
        format!("s=4096, sigma=5, 1000 pairs in [-1,1]^3, max error {worst:.4} (tol 0.02)"),
    )
}

fn silhouette_checks() -> Outcome {
    let x = ndarray::array![[0.0], [0.1], [10.0], [10.1]];
    let s = silhouette(x.view(), &[0, 0, 1, 1]).unwrap();
    // a = 0.1 for every point; b = 10.05 outside, 9.95 inside.
    let hand = ((10.05 - 0.1) / 10.05 + (9.95 - 0.1) / 9.95) / 2.0;
    let err = (s.score - hand).abs();
    let mut r = rng(6);
    let mut in_range = true;
    for _ in 0..200 {
        let n = r.random_range(3..=30);
        let pts = Array2::from_shape_fn((n, 3), |_| r.random_range(-5.0..5.0));
        let mut labels: Vec<usize> = (0..n).map(|i| i % r.random_range(2..=3)).collect();
        labels.shuffle(&mut r);
        if let Ok(s) = silhouette(pts.view(), &labels) {
            in_range &= s.per_point.iter().all(|v| (-1.0..=1.0).contains(v));
        }
    }
    verdict(err <= 1e-6 && in_range, format!("4-point example error {err:.2e} (tol 1e-6); 200 random labellings within [-1, 1]: {in_range}"))
}

fn mst_optimality() -> Outcome {
    let mut r = rng(7);
    let mut mismatches = 0;
    let mut count = 0;
    for k in 1..=6 {
        for _ in 0..20 {
            let pts = Array2::from_shape_fn((k, 2), |_| r.random_range(-4.0..4.0));
            let tree = mst(pts.view()).unwrap();
            if (tree.total_weight - mst_brute_force(&pts)).abs() > 1e-9 {
                mismatches += 1;
            }
            count += 1;
        }
    }
    verdict(
        mismatches == 0,
        format!("{count} instances with K <= 6, {mismatches} differ from brute force"),
    )
}

fn method_scores(rows: &[CompareRow], k: usize) -> Option<(Scores, Scores, Scores)> {
    let kme = rows.iter().find_map(|r| r.kme)?;
    let row = rows.iter().find(|r| r.k == Some(k))?;
    Some((kme, row.comp?, row.lot?))
}

fn synthetic_benchmark() -> Outcome {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let design = SyntheticDesign::default();
    let manifest = common::write_dataset(tmp.path(), &design);
    let samples = load_samples(&manifest).unwrap();
    let config = RunConfig {
        k: 64,
        seed: design.seed,
        label_key: LabelKey::Patient,
        output_dir: tmp.path().join("unused"),
        ..RunConfig::default()
    };
    let rows = compare_methods(&config, &samples, &[64]).unwrap();
    let Some((kme, comp, lot)) = method_scores(&rows, 64) else {
        return Outcome::Fail(format!(
            "incomplete comparison table: {:?}",
            rows.iter().map(|r| &r.error).collect::<Vec<_>>()
        ));
    };
    let ok = lot.1 >= 0.5 && lot.1 > comp.1 && lot.1 > kme.1;
    within_budget(
        ok,
        format!(
            "{} clouds, K=64, PCA silhouettes LinW2 {:.3} / Comp {:.3} / KME {:.3} (need LinW2 >= 0.5 and best)",
            samples.measures.len(),
            lot.1,
            comp.1,
            kme.1
        ),
        start.elapsed(),
        Duration::from_secs(300),
    )
}

fn hipc_reproduction() -> Outcome {
    let Some(path) = std::env::var_os("HIPC_MANIFEST") else {
        return Outcome::Skip("set HIPC_MANIFEST to a manifest of the public HIPC files".into());
    };
    let start = Instant::now();
    let manifest = match SampleManifest::load(Path::new(&path)) {
        Ok(m) => m,
        Err(e) => return Outcome::Fail(format!("{e:#}")),
    };
    let samples = match cytolot_cli::manifest::load_manifest_samples(manifest) {
        Ok(s) => s,
        Err(e) => return Outcome::Fail(format!("{e:#}")),
    };
    let config = RunConfig {
        k: 64,
        seed: 0,
        label_key: LabelKey::Patient,
        ..RunConfig::default()
    };
    let rows = match compare_methods(&config, &samples, &[64]) {
        Ok(rows) => rows,
        Err(e) => return Outcome::Fail(format!("{e:#}")),
    };
    let Some((kme, _, lot)) = method_scores(&rows, 64) else {
        return Outcome::Fail("incomplete comparison table".into());
    };
    let ok = (lot.1 - 0.65).abs() <= 0.05 && (kme.0 - -0.02).abs() <= 0.05;
    within_budget(
        ok,
        format!(
            "LinW2 PCA {:.3} (0.65 +- 0.05), KME raw {:.3} (-0.02 +- 0.05)",
            lot.1, kme.0
        ),
        start.elapsed(),
        Duration::from_secs(1800),
    )
}

fn classification_sanity() -> Outcome {
    let mut r = rng(10);
    let gaussian = |r: &mut rand_chacha::ChaCha8Rng, n: usize, d: usize| {
        Array2::from_shape_fn((n, d), |_| r.sample::<f64, _>(StandardNormal))
    };
    // Two classes 12 standard deviations apart in 5 dimensions.
    let mut x = gaussian(&mut r, 40, 5);
    let labels: Vec<bool> = (0..40).map(|i| i < 15).collect();
    for (mut row, &positive) in x.axis_iter_mut(Axis(0)).zip(&labels) {
        row[0] += if positive { 6.0 } else { -6.0 };
    }
    let scores = pca(x.view(), 3).unwrap().coordinates;
    let separable = loo_logistic(scores.view(), &labels)
        .unwrap()
        .balanced_accuracy;

    let noise = pca(gaussian(&mut r, 40, 5).view(), 3).unwrap().coordinates;
    let mut total = 0.0;
    for seed in 0..20 {
        let mut shuffled: Vec<bool> = (0..40).map(|i| i < 20).collect();
        shuffled.shuffle(&mut rng(100 + seed));
        total += loo_logistic(noise.view(), &shuffled)
            .unwrap()
            .balanced_accuracy;
    }
    let mean = total / 20.0;
    verdict(
        separable == 1.0 && (mean - 0.5).abs() <= 0.1,
        format!("separable balanced accuracy {separable}; permuted mean over 20 seeds {mean:.3} (0.5 +- 0.1)"),
    )
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = common::write_dataset(&tmp.path().join("data"), &common::toy_design());
    let mut outputs = Vec::new();
    for run in ["first", "second"] {
        let out = tmp.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_cytolot"))
            .args(["run", "--seed", "11", "--k", "6", "--manifest"])
            .arg(&manifest)
            .arg("--output-dir")
            .arg(&out)
            .output()
            .unwrap();
        if !status.status.success() {
            return Outcome::Fail(String::from_utf8_lossy(&status.stderr).into_owned());
        }
        let csvs: Vec<(String, Vec<u8>)> = common::files_under(&out)
            .into_iter()
            .filter(|f| f.ends_with(".csv"))
            .map(|f| {
                let bytes = fs::read(out.join(&f)).unwrap();
                (f, bytes)
            })
            .collect();
        outputs.push(csvs);
    }
    let same = outputs[0] == outputs[1];
    verdict(
        same && !outputs[0].is_empty(),
        format!(
            "{} CSV files byte-identical across two runs: {same}",
            outputs[0].len()
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 11] = [
        ("1 OT oracle equivalence", ot_oracle),
        ("2 quantization identity", quantization_identity),
        ("3 LOT reference isometry", lot_isometry),
        ("4 barycenter descent and symmetry", barycenter_descent),
        ("5 KME kernel approximation", kme_kernel),
        ("6 silhouette correctness", silhouette_checks),
        ("7 MST optimality", mst_optimality),
        ("8 synthetic multi-lab benchmark", synthetic_benchmark),
        ("9 HIPC reproduction", hipc_reproduction),
        ("10 classification sanity", classification_sanity),
        ("11 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Outcome::Pass(d) => println!("PASS  {name}: {d}"),
            Outcome::Skip(d) => println!("SKIP  {name}: {d}"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
