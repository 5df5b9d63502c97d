use std::fmt::Write;

use ndarray::{Array1, ArrayView2};

use crate::error::{Error, Result};
use crate::measures::squared_distance;
use crate::quantize::QuantizedEnsemble;

/// Minimum spanning tree of the complete graph on the centers, with edge
/// weights `|x_i - x_j|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mst {
    pub nodes: usize,
    /// `(i, j, weight)` with `i < j`, in the order Kruskal accepted them.
    pub edges: Vec<(usize, usize, f64)>,
    pub total_weight: f64,
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Kruskal on the complete squared-distance graph. Ties are broken by the
/// lexicographic order of `(i, j)`.
pub fn mst(support: ArrayView2<f64>) -> Result<Mst> {
    let k = support.nrows();
    if k == 0 {
        return Err(Error::InvalidParameter("no centers".into()));
    }
    let rows: Vec<Vec<f64>> = support.rows().into_iter().map(|r| r.to_vec()).collect();
    let mut edges = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in (i + 1)..k {
            let w = squared_distance(&rows[i], &rows[j]);
            if w.sqrt() <= 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "centers {i} and {j} coincide"
                )));
            }
            edges.push((i, j, w));
        }
    }
    edges.sort_by(|a, b| a.2.total_cmp(&b.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    let mut sets = DisjointSet::new(k);
    let mut tree = Vec::with_capacity(k.saturating_sub(1));
    for (i, j, w) in edges {
        if sets.union(i, j) {
            tree.push((i, j, w));
            if tree.len() + 1 == k {
                break;
            }
        }
    }
    let total_weight = tree.iter().map(|e| e.2).sum();
    Ok(Mst {
        nodes: k,
        edges: tree,
        total_weight,
    })
}

/// Per-sample node masses for drawing the tree: row `i` of the weights.
pub fn mst_node_sizes(ensemble: &QuantizedEnsemble, sample: usize) -> Result<Array1<f64>> {
    if sample >= ensemble.n_samples() {
        return Err(Error::InvalidParameter(format!(
            "sample index {sample} out of range ({} samples)",
            ensemble.n_samples()
        )));
    }
    Ok(ensemble.weights.row(sample).to_owned())
}

impl Mst {
    /// Graphviz rendering. Node labels carry the given masses, and node
    /// widths scale with the square root of the mass.
    pub fn to_dot(&self, name: &str, masses: Option<&[f64]>) -> String {
        let mut out = String::new();
        let graph_name: String = name
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        writeln!(out, "graph {graph_name} {{").unwrap();
        writeln!(out, "  node [shape=circle, fixedsize=true];").unwrap();
        for k in 0..self.nodes {
            match masses {
                Some(m) => writeln!(
                    out,
                    "  n{k} [label=\"{k}\\n{:.4}\", width={:.4}];",
                    m[k],
                    0.2 + 2.0 * m[k].max(0.0).sqrt()
                )
                .unwrap(),
                None => writeln!(out, "  n{k} [label=\"{k}\"];").unwrap(),
            }
        }
        for &(i, j, w) in &self.edges {
            writeln!(out, "  n{i} -- n{j} [weight=\"{w}\"];").unwrap();
        }
        out.push_str("}\n");
        out
    }
}
