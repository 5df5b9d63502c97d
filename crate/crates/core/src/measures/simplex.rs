//! Primal network simplex for the transportation problem.
//!
//! The basis is a spanning tree of the complete bipartite graph between
//! source atoms (rows) and target atoms (columns), stored as `n + m - 1`
//! basic cells. Each pivot recomputes node potentials along the tree,
//! prices non-basic cells with a rotating block search, and pushes flow
//! around the unique cycle closed by the entering cell.

use ndarray::Array2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverOptions {
    /// Pivot budget. `None` scales the budget with the problem size.
    pub max_pivots: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    row: usize,
    col: usize,
    flow: f64,
}

struct Tree {
    n: usize,
    cells: Vec<Cell>,
    adj: Vec<Vec<usize>>,
    parent: Vec<usize>,
    parent_edge: Vec<usize>,
    depth: Vec<usize>,
    potential: Vec<f64>,
    queue: Vec<usize>,
}

impl Tree {
    fn other(&self, node: usize, edge: usize) -> usize {
        let c = self.cells[edge];
        if node < self.n {
            self.n + c.col
        } else {
            c.row
        }
    }

    /// Recomputes parent pointers, depths and potentials (`u_i + v_j = c_ij`
    /// on every basic cell) by a traversal rooted at row 0.
    fn refresh(&mut self, cost: &[f64], m: usize) {
        let nodes = self.adj.len();
        self.depth.iter_mut().for_each(|d| *d = usize::MAX);
        self.queue.clear();
        self.queue.push(0);
        self.depth[0] = 0;
        self.potential[0] = 0.0;
        self.parent[0] = usize::MAX;
        let mut head = 0;
        while head < self.queue.len() {
            let u = self.queue[head];
            head += 1;
            for k in 0..self.adj[u].len() {
                let e = self.adj[u][k];
                let v = self.other(u, e);
                if self.depth[v] != usize::MAX {
                    continue;
                }
                let c = self.cells[e];
                let ce = cost[c.row * m + c.col];
                self.potential[v] = ce - self.potential[u];
                self.depth[v] = self.depth[u] + 1;
                self.parent[v] = u;
                self.parent_edge[v] = e;
                self.queue.push(v);
            }
        }
        debug_assert_eq!(self.queue.len(), nodes, "basis must span all nodes");
    }

    /// Basic cells on the tree path from row node `i` to column node `n + j`,
    /// in path order starting at `i`.
    fn path(&self, i: usize, j: usize, out: &mut Vec<usize>) {
        out.clear();
        let mut tail = Vec::new();
        let (mut x, mut y) = (i, self.n + j);
        while self.depth[x] > self.depth[y] {
            out.push(self.parent_edge[x]);
            x = self.parent[x];
        }
        while self.depth[y] > self.depth[x] {
            tail.push(self.parent_edge[y]);
            y = self.parent[y];
        }
        while x != y {
            out.push(self.parent_edge[x]);
            x = self.parent[x];
            tail.push(self.parent_edge[y]);
            y = self.parent[y];
        }
        out.extend(tail.into_iter().rev());
    }
}

/// Solves `min <C, P>` over couplings with marginals `a` (rows) and `b`
/// (columns). `a` and `b` must be positive and carry the same mass.
pub(crate) fn solve(
    a: &[f64],
    b: &[f64],
    cost: &Array2<f64>,
    options: &SolverOptions,
) -> Result<Array2<f64>> {
    let (n, m) = (a.len(), b.len());
    debug_assert_eq!(cost.dim(), (n, m));
    if n == 1 || m == 1 {
        let mut plan = Array2::zeros((n, m));
        for i in 0..n {
            for j in 0..m {
                plan[[i, j]] = if n == 1 { b[j] } else { a[i] };
            }
        }
        return Ok(plan);
    }

    let cost_std = cost.as_standard_layout();
    let c = cost_std.as_slice().expect("standard layout");
    let max_cost = c.iter().fold(1.0f64, |acc, &x| acc.max(x.abs()));
    let tol = 1e-11 * max_cost;
    let budget = options.max_pivots.unwrap_or(100_000 + 50 * n * m);

    let mut tree = Tree {
        n,
        cells: northwest_corner(a, b),
        adj: vec![Vec::new(); n + m],
        parent: vec![usize::MAX; n + m],
        parent_edge: vec![usize::MAX; n + m],
        depth: vec![usize::MAX; n + m],
        potential: vec![0.0; n + m],
        queue: Vec::with_capacity(n + m),
    };
    for (e, cell) in tree.cells.iter().enumerate() {
        tree.adj[cell.row].push(e);
        tree.adj[n + cell.col].push(e);
    }

    let total = n * m;
    let block = ((total as f64).sqrt().ceil() as usize).max(32).min(total);
    let mut cursor = 0usize;
    let mut degenerate_streak = 0usize;
    let mut path = Vec::with_capacity(n + m);
    let mut pivots = 0usize;

    loop {
        tree.refresh(c, m);
        let (u, v) = tree.potential.split_at(n);

        // Pricing. After a long run of degenerate pivots fall back to
        // Bland's rule (first eligible cell), which cannot cycle together
        // with the smallest-index leaving rule below.
        let entering = if degenerate_streak > n + m {
            (0..total).find(|&idx| c[idx] - u[idx / m] - v[idx % m] < -tol)
        } else {
            let mut best = -tol;
            let mut best_idx = None;
            let mut seen = 0;
            let mut idx = cursor;
            for _ in 0..total {
                let rc = c[idx] - u[idx / m] - v[idx % m];
                if rc < best {
                    best = rc;
                    best_idx = Some(idx);
                }
                idx += 1;
                if idx == total {
                    idx = 0;
                }
                seen += 1;
                if seen == block {
                    if best_idx.is_some() {
                        break;
                    }
                    seen = 0;
                }
            }
            cursor = idx;
            best_idx
        };
        let Some(entering) = entering else {
            break;
        };

        pivots += 1;
        if pivots > budget {
            let objective = tree
                .cells
                .iter()
                .map(|cell| cell.flow.max(0.0) * c[cell.row * m + cell.col])
                .sum();
            return Err(Error::NotConverged {
                iterations: budget,
                objective,
            });
        }

        let (ei, ej) = (entering / m, entering % m);
        tree.path(ei, ej, &mut path);
        debug_assert!(path.len() % 2 == 1);

        // Cells at even positions of the path lose flow.
        let mut leaving = path[0];
        let mut theta = f64::INFINITY;
        for &e in path.iter().step_by(2) {
            let cell = tree.cells[e];
            let key = (cell.row, cell.col);
            let lkey = (tree.cells[leaving].row, tree.cells[leaving].col);
            if cell.flow < theta || (cell.flow == theta && key < lkey) {
                theta = cell.flow;
                leaving = e;
            }
        }
        let theta = theta.max(0.0);
        if theta > 0.0 {
            degenerate_streak = 0;
        } else {
            degenerate_streak += 1;
        }
        for (pos, &e) in path.iter().enumerate() {
            if pos % 2 == 0 {
                tree.cells[e].flow -= theta;
            } else {
                tree.cells[e].flow += theta;
            }
        }

        let old = tree.cells[leaving];
        tree.adj[old.row].retain(|&x| x != leaving);
        tree.adj[n + old.col].retain(|&x| x != leaving);
        tree.cells[leaving] = Cell {
            row: ei,
            col: ej,
            flow: theta,
        };
        tree.adj[ei].push(leaving);
        tree.adj[n + ej].push(leaving);
    }

    let mut plan = Array2::zeros((n, m));
    for cell in &tree.cells {
        plan[[cell.row, cell.col]] += cell.flow.max(0.0);
    }
    Ok(plan)
}

/// Initial basic feasible solution with exactly `n + m - 1` cells forming a
/// spanning tree (degenerate zero cells included).
fn northwest_corner(a: &[f64], b: &[f64]) -> Vec<Cell> {
    let (n, m) = (a.len(), b.len());
    let mut ra = a.to_vec();
    let mut rb = b.to_vec();
    let mut cells = Vec::with_capacity(n + m - 1);
    let (mut i, mut j) = (0, 0);
    loop {
        let flow = ra[i].min(rb[j]).max(0.0);
        cells.push(Cell {
            row: i,
            col: j,
            flow,
        });
        ra[i] -= flow;
        rb[j] -= flow;
        if i == n - 1 && j == m - 1 {
            break;
        }
        if i == n - 1 {
            j += 1;
        } else if j == m - 1 || ra[i] <= rb[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    debug_assert_eq!(cells.len(), n + m - 1);
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn northwest_corner_spans() {
        let cells = northwest_corner(&[0.5, 0.5], &[0.5, 0.5]);
        assert_eq!(cells.len(), 3);
        assert_eq!(cells[1].flow, 0.0);
    }

    #[test]
    fn small_assignment() {
        let cost = array![[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, 2.0]];
        let w = [1.0 / 3.0; 3];
        let plan = solve(&w, &w, &cost, &SolverOptions::default()).unwrap();
        let value = (&plan * &cost).sum();
        // Optimal permutation (0->1, 1->0, 2->2) costs 1 + 2 + 2.
        assert!((value - 5.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_reports_objective() {
        let cost = array![[0.0, 1.0], [1.0, 0.0]];
        // NW corner starts at the identity coupling, which is optimal, so
        // force a suboptimal start by reversing the columns.
        let rev = array![[1.0, 0.0], [0.0, 1.0]];
        let opts = SolverOptions {
            max_pivots: Some(0),
        };
        match solve(&[0.5, 0.5], &[0.5, 0.5], &rev, &opts) {
            Err(Error::NotConverged { objective, .. }) => assert!((objective - 1.0).abs() < 1e-12),
            other => panic!("expected budget failure, got {other:?}"),
        }
        assert!(solve(&[0.5, 0.5], &[0.5, 0.5], &cost, &opts).is_ok());
    }
}
