//! Weight-balanced digraphs and their consensus Laplacians.
//!
//! The consensus generator is `L` with `L[i][j] = −w(j→i)` for every
//! in-neighbor `j` of `i` and `L[i][i]` equal to the total in-weight of `i`.
//! A graph is weight-balanced when every node's in-weight equals its
//! out-weight, which makes both the row sums and the column sums of `L`
//! vanish and keeps the state average `1ᵀx/n` constant along `ẋ = −Lx`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance used for weight balance and Laplacian row/column sums.
pub const BALANCE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("node index {node} out of range for {n} nodes")]
    InvalidNode { node: usize, n: usize },
    #[error("edge {src}->{dst} has non-positive weight {weight}")]
    NonPositiveWeight { src: usize, dst: usize, weight: f64 },
    #[error("self-loop at node {node}")]
    SelfLoop { node: usize },
    #[error("graph is not weight-balanced: worst node {node} has |in - out| = {imbalance:.3e}")]
    UnbalancedGraph { node: usize, imbalance: f64 },
    #[error("balanced digraph generator needs n >= 3, got {n}")]
    InvalidSize { n: usize },
    #[error("matrix is not a balanced Laplacian: {reason}")]
    NotALaplacian { reason: String },
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

/// Directed graph with strictly positive edge weights and no self-loops.
///
/// Parallel edges are merged (weights summed) on construction and the edge
/// list is kept sorted by `(src, dst)`, so serialization order is
/// deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct WeightedDigraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl TryFrom<RawGraph> for WeightedDigraph {
    type Error = GraphError;
    fn try_from(raw: RawGraph) -> Result<Self, GraphError> {
        WeightedDigraph::new(raw.n, raw.edges)
    }
}

impl From<WeightedDigraph> for RawGraph {
    fn from(g: WeightedDigraph) -> RawGraph {
        RawGraph {
            n: g.n,
            edges: g.edges,
        }
    }
}

impl WeightedDigraph {
    /// Validate and canonicalize an edge list over `n` nodes.
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (src, dst, weight) in edges {
            if src >= n {
                return Err(GraphError::InvalidNode { node: src, n });
            }
            if dst >= n {
                return Err(GraphError::InvalidNode { node: dst, n });
            }
            if src == dst {
                return Err(GraphError::SelfLoop { node: src });
            }
            if !(weight > 0.0) {
                return Err(GraphError::NonPositiveWeight { src, dst, weight });
            }
            *merged.entry((src, dst)).or_insert(0.0) += weight;
        }
        let edges = merged.into_iter().map(|((s, d), w)| (s, d, w)).collect();
        Ok(Self { n, edges })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Edges sorted by `(src, dst)`, parallel edges already merged.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// In-neighborhood of `node`: every `j` with an edge `j -> node`.
    pub fn in_neighbors(&self, node: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|&&(_, dst, _)| dst == node)
            .map(|&(src, _, _)| src)
            .collect()
    }

    /// Worst in/out weight imbalance over all nodes, as `(node, |in - out|)`.
    pub fn worst_imbalance(&self) -> (usize, f64) {
        let mut in_w = vec![0.0_f64; self.n];
        let mut out_w = vec![0.0_f64; self.n];
        for &(src, dst, w) in &self.edges {
            out_w[src] += w;
            in_w[dst] += w;
        }
        let mut worst = (0, 0.0);
        for i in 0..self.n {
            let imbalance = (in_w[i] - out_w[i]).abs();
            if imbalance > worst.1 {
                worst = (i, imbalance);
            }
        }
        worst
    }

    /// Build the consensus Laplacian. Requires weight balance.
    pub fn laplacian(&self) -> Result<BalancedLaplacian, GraphError> {
        if self.n == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let (node, imbalance) = self.worst_imbalance();
        if imbalance > BALANCE_TOL {
            return Err(GraphError::UnbalancedGraph { node, imbalance });
        }
        let mut entries = DMatrix::<f64>::zeros(self.n, self.n);
        for &(src, dst, w) in &self.edges {
            entries[(dst, src)] -= w;
            entries[(dst, dst)] += w;
        }
        Ok(BalancedLaplacian { entries })
    }

    /// True when every node can reach every other node.
    pub fn is_strongly_connected(&self) -> bool {
        let mut pg = petgraph::graph::DiGraph::<(), ()>::new();
        let nodes: Vec<_> = (0..self.n).map(|_| pg.add_node(())).collect();
        for &(src, dst, _) in &self.edges {
            pg.add_edge(nodes[src], nodes[dst], ());
        }
        petgraph::algo::tarjan_scc(&pg).len() == 1
    }

    /// Ordered pairs `(i, j)` whose closed in-neighborhoods nest:
    /// `N_i ∪ {i} ⊆ N_j ∪ {j}`. An empty list means no node's inputs are
    /// fully visible to another node, which is the topology condition that
    /// blocks the flow-integral attack.
    pub fn assumption1_violations(&self) -> Vec<(usize, usize)> {
        let mut closed = vec![vec![false; self.n]; self.n];
        for i in 0..self.n {
            closed[i][i] = true;
        }
        for &(src, dst, _) in &self.edges {
            closed[dst][src] = true;
        }
        let mut violations = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if i == j {
                    continue;
                }
                let contained = (0..self.n).all(|k| !closed[i][k] || closed[j][k]);
                if contained {
                    violations.push((i, j));
                }
            }
        }
        violations
    }

    /// Random strongly connected, weight-balanced digraph: a Hamiltonian
    /// cycle with unit weights plus `extra_cycles` directed cycles over
    /// random node subsets, each with one random positive weight.
    /// Superposing directed cycles preserves weight balance exactly.
    pub fn random_balanced(n: usize, extra_cycles: usize, seed: u64) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::InvalidSize { n });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        for i in 0..n {
            edges.push((i, (i + 1) % n, 1.0));
        }
        let mut nodes: Vec<usize> = (0..n).collect();
        for _ in 0..extra_cycles {
            let len = rng.gen_range(2..=n);
            nodes.shuffle(&mut rng);
            let weight = rng.gen_range(0.5..2.0);
            for m in 0..len {
                edges.push((nodes[m], nodes[(m + 1) % len], weight));
            }
        }
        Self::new(n, edges)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("graph serialization cannot fail")
    }

    pub fn from_json_str(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Laplacian of a weight-balanced digraph: `L·1 = Lᵀ·1 = 0`, nonpositive
/// off-diagonal entries, nonnegative diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedLaplacian {
    entries: DMatrix<f64>,
}

impl BalancedLaplacian {
    /// Validate an arbitrary square matrix against the balanced-Laplacian
    /// invariants.
    pub fn try_from_matrix(entries: DMatrix<f64>) -> Result<Self, GraphError> {
        if entries.nrows() == 0 {
            return Err(GraphError::EmptyGraph);
        }
        if entries.nrows() != entries.ncols() {
            return Err(GraphError::NotALaplacian {
                reason: format!("matrix is {}x{}", entries.nrows(), entries.ncols()),
            });
        }
        let n = entries.nrows();
        for i in 0..n {
            let row_sum: f64 = entries.row(i).sum();
            if row_sum.abs() > BALANCE_TOL {
                return Err(GraphError::NotALaplacian {
                    reason: format!("row {i} sums to {row_sum:.3e}"),
                });
            }
            let col_sum: f64 = entries.column(i).sum();
            if col_sum.abs() > BALANCE_TOL {
                return Err(GraphError::NotALaplacian {
                    reason: format!("column {i} sums to {col_sum:.3e}"),
                });
            }
            for j in 0..n {
                if i == j && entries[(i, i)] < 0.0 {
                    return Err(GraphError::NotALaplacian {
                        reason: format!("negative diagonal at {i}"),
                    });
                }
                if i != j && entries[(i, j)] > 0.0 {
                    return Err(GraphError::NotALaplacian {
                        reason: format!("positive off-diagonal at ({i},{j})"),
                    });
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// True when the digraph induced by the nonzero off-diagonal entries is
    /// strongly connected.
    pub fn is_irreducible(&self) -> bool {
        let n = self.dim();
        let mut pg = petgraph::graph::DiGraph::<(), ()>::new();
        let nodes: Vec<_> = (0..n).map(|_| pg.add_node(())).collect();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.entries[(i, j)] != 0.0 {
                    // entry (i, j) encodes the edge j -> i
                    pg.add_edge(nodes[j], nodes[i], ());
                }
            }
        }
        petgraph::algo::tarjan_scc(&pg).len() == 1
    }

    /// Second-smallest eigenvalue of `(L + Lᵀ)/2`; the contraction rate of
    /// the consensus flow on the subspace orthogonal to `1`.
    pub fn algebraic_connectivity(&self) -> f64 {
        let sym = (&self.entries + self.entries.transpose()) * 0.5;
        let mut eigen: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
        eigen.sort_by(|a, b| a.total_cmp(b));
        if eigen.len() > 1 {
            eigen[1]
        } else {
            0.0
        }
    }

    /// Max-norm of the matrix (largest absolute row sum of |entries|).
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.entries.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}
