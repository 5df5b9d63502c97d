#![allow(dead_code)]

use cytolot::DiscreteMeasure;
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_weights(rng: &mut impl Rng, n: usize) -> Array1<f64> {
    let raw: Array1<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total = raw.sum();
    raw / total
}

pub fn random_measure(
    rng: &mut impl Rng,
    id: &str,
    n: usize,
    d: usize,
    scale: f64,
) -> DiscreteMeasure {
    let support = Array2::from_shape_fn((n, d), |_| rng.random_range(-scale..scale));
    DiscreteMeasure::new(id, support, random_weights(rng, n)).unwrap()
}

pub fn random_uniform_measure(
    rng: &mut impl Rng,
    id: &str,
    n: usize,
    d: usize,
    scale: f64,
) -> DiscreteMeasure {
    let support = Array2::from_shape_fn((n, d), |_| rng.random_range(-scale..scale));
    DiscreteMeasure::uniform(id, support).unwrap()
}

pub fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Minimum transport cost over every vertex of the transportation polytope.
///
/// Vertices are the feasible spanning trees of the bipartite row/column
/// graph. Rooting a tree at row 0, the flow on each edge is the mass
/// imbalance of the subtree below it, so feasibility and cost decompose over
/// subtrees. The minimum over all trees is taken by exhausting every way to
/// split each node set into a child subtree and the rest.
pub fn ot_vertex_oracle(a: &[f64], b: &[f64], cost: &Array2<f64>) -> f64 {
    let n = a.len();
    let nodes = n + b.len();
    assert!(nodes <= 16);
    let mass: Vec<f64> = a.iter().copied().chain(b.iter().map(|x| -x)).collect();
    let full = (1usize << nodes) - 1;
    let mut imbalance = vec![0.0; full + 1];
    for set in 1..=full {
        let low = set.trailing_zeros() as usize;
        imbalance[set] = imbalance[set & (set - 1)] + mass[low];
    }
    let mut tree = TreeDp {
        n,
        nodes,
        cost,
        imbalance,
        memo: vec![f64::NAN; nodes << nodes],
    };
    tree.best(0, full)
}

struct TreeDp<'a> {
    n: usize,
    nodes: usize,
    cost: &'a Array2<f64>,
    /// Row supply minus column demand of each node set.
    imbalance: Vec<f64>,
    memo: Vec<f64>,
}

impl TreeDp<'_> {
    fn edge_cost(&self, u: usize, v: usize) -> f64 {
        if u < self.n {
            self.cost[[u, v - self.n]]
        } else {
            self.cost[[v, u - self.n]]
        }
    }

    /// Cheapest feasible tree spanning `set` and rooted at `root`.
    fn best(&mut self, root: usize, set: usize) -> f64 {
        let rest = set & !(1 << root);
        if rest == 0 {
            return 0.0;
        }
        let slot = (root << self.nodes) | set;
        if !self.memo[slot].is_nan() {
            return self.memo[slot];
        }
        let anchor = rest & rest.wrapping_neg();
        let root_is_row = root < self.n;
        let mut best = f64::INFINITY;
        // The child subtree holding the lowest remaining node.
        let mut sub = rest;
        while sub > 0 {
            if sub & anchor != 0 {
                // Flow runs from the row side of the edge to the column side.
                let flow = if root_is_row {
                    -self.imbalance[sub]
                } else {
                    self.imbalance[sub]
                };
                if flow >= -1e-12 {
                    let others = self.best(root, set & !sub);
                    if others < best {
                        let mut children = sub;
                        while children > 0 {
                            let child = children.trailing_zeros() as usize;
                            children &= children - 1;
                            if (child < self.n) == root_is_row {
                                continue;
                            }
                            let total = others
                                + self.edge_cost(root, child) * flow.max(0.0)
                                + self.best(child, sub);
                            best = best.min(total);
                        }
                    }
                }
            }
            sub = (sub - 1) & rest;
        }
        self.memo[slot] = best;
        best
    }
}

/// Minimum over every spanning tree of the bipartite graph, with no
/// structure beyond flow feasibility; only practical for tiny instances.
pub fn ot_all_trees(a: &[f64], b: &[f64], cost: &Array2<f64>) -> f64 {
    let (n, m) = (a.len(), b.len());
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    let need = n + m - 1;
    let mut best = f64::INFINITY;
    let mut chosen = Vec::with_capacity(need);
    subsets(&cells, 0, need, &mut chosen, &mut |tree| {
        if let Some(c) = tree_flow_cost(a, b, cost, tree) {
            best = best.min(c);
        }
    });
    best
}

type Visit<'a> = dyn FnMut(&[(usize, usize)]) + 'a;

fn subsets(
    cells: &[(usize, usize)],
    from: usize,
    need: usize,
    chosen: &mut Vec<(usize, usize)>,
    f: &mut Visit,
) {
    if chosen.len() == need {
        f(chosen);
        return;
    }
    for k in from..cells.len() {
        if cells.len() - k < need - chosen.len() {
            break;
        }
        chosen.push(cells[k]);
        subsets(cells, k + 1, need, chosen, f);
        chosen.pop();
    }
}

/// Flows of a spanning tree obtained by peeling leaves, or `None` when the
/// edge set is not a spanning tree or some flow is negative.
fn tree_flow_cost(
    a: &[f64],
    b: &[f64],
    cost: &Array2<f64>,
    tree: &[(usize, usize)],
) -> Option<f64> {
    let n = a.len();
    let mut residual: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut edges: Vec<(usize, usize)> = tree.iter().map(|&(i, j)| (i, n + j)).collect();
    let mut degree = vec![0usize; residual.len()];
    for &(u, v) in &edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    if edges.len() + 1 != residual.len() || degree.contains(&0) && residual.len() > 1 {
        return None;
    }
    let mut total = 0.0;
    while !edges.is_empty() {
        let pos = edges
            .iter()
            .position(|&(u, v)| degree[u] == 1 || degree[v] == 1)?;
        let (u, v) = edges.swap_remove(pos);
        let (leaf, other) = if degree[u] == 1 { (u, v) } else { (v, u) };
        let flow = residual[leaf];
        if flow < -1e-12 {
            return None;
        }
        residual[other] -= flow;
        residual[leaf] = 0.0;
        degree[u] -= 1;
        degree[v] -= 1;
        let (i, j) = if u < n { (u, v - n) } else { (v, u - n) };
        total += cost[[i, j]] * flow;
    }
    residual.iter().all(|r| r.abs() < 1e-9).then_some(total)
}

/// Minimum spanning tree weight (squared Euclidean edges) by enumerating every labelled tree through
/// its Prüfer sequence.
pub fn mst_brute_force(points: &Array2<f64>) -> f64 {
    let n = points.nrows();
    if n <= 1 {
        return 0.0;
    }
    let w = |i: usize, j: usize| {
        sq_dist(
            points.row(i).as_slice().unwrap(),
            points.row(j).as_slice().unwrap(),
        )
    };
    if n == 2 {
        return w(0, 1);
    }
    let len = n - 2;
    let total = n.pow(len as u32);
    let mut best = f64::INFINITY;
    let mut seq = vec![0usize; len];
    for code in 0..total {
        let mut c = code;
        for s in seq.iter_mut() {
            *s = c % n;
            c /= n;
        }
        let mut degree = vec![1usize; n];
        for &s in &seq {
            degree[s] += 1;
        }
        let mut weight = 0.0;
        for &s in &seq {
            let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
            weight += w(leaf, s);
            degree[leaf] -= 1;
            degree[s] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
        weight += w(rest[0], rest[1]);
        best = best.min(weight);
    }
    best
}
