//! Undirected graphs in compressed sparse row form, the symmetric
//! normalized adjacency used for diffusion, and local clustering
//! coefficients.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Immutable undirected graph.
///
/// Each row of the CSR is sorted and deduplicated. A self-loop is stored at
/// most once in its own row and is flagged in `self_loops`; it never counts
/// toward `degrees`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    degrees: Vec<usize>,
    self_loops: Vec<bool>,
}

/// Bookkeeping from `Graph::from_edges`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub input_edges: usize,
    pub duplicates_dropped: usize,
    pub self_loops: usize,
}

impl Graph {
    /// Builds a graph from an undirected edge list. Both orientations of an
    /// edge and repeated edges collapse into a single undirected edge.
    pub fn from_edges<I>(num_nodes: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let (graph, stats) = Self::from_edges_with_stats(num_nodes, edges)?;
        if stats.duplicates_dropped > 0 {
            log::info!(
                "dropped {} duplicate edge(s) while symmetrizing",
                stats.duplicates_dropped
            );
        }
        Ok(graph)
    }

    pub fn from_edges_with_stats<I>(num_nodes: usize, edges: I) -> Result<(Self, IngestStats)>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut canonical = Vec::new();
        for (u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::Dataset(format!(
                    "node id out of range: edge ({u}, {v}) with {num_nodes} nodes"
                )));
            }
            canonical.push(if u <= v { (u, v) } else { (v, u) });
        }
        let input_edges = canonical.len();
        canonical.sort_unstable();
        canonical.dedup();
        let duplicates_dropped = input_edges - canonical.len();

        let mut counts = vec![0usize; num_nodes];
        let mut self_loops = vec![false; num_nodes];
        for &(u, v) in &canonical {
            if u == v {
                self_loops[u] = true;
                counts[u] += 1;
            } else {
                counts[u] += 1;
                counts[v] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(num_nodes + 1);
        offsets.push(0);
        for c in &counts {
            offsets.push(offsets.last().unwrap() + c);
        }
        let mut cursor = offsets[..num_nodes].to_vec();
        let mut neighbors = vec![0usize; offsets[num_nodes]];
        for &(u, v) in &canonical {
            neighbors[cursor[u]] = v;
            cursor[u] += 1;
            if u != v {
                neighbors[cursor[v]] = u;
                cursor[v] += 1;
            }
        }
        for i in 0..num_nodes {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        let degrees = (0..num_nodes)
            .map(|i| counts[i] - usize::from(self_loops[i]))
            .collect();
        let stats = IngestStats {
            input_edges,
            duplicates_dropped,
            self_loops: self_loops.iter().filter(|&&s| s).count(),
        };
        Ok((
            Graph {
                offsets,
                neighbors,
                degrees,
                self_loops,
            },
            stats,
        ))
    }

    pub fn num_nodes(&self) -> usize {
        self.degrees.len()
    }

    /// Number of undirected edges, self-loops excluded.
    pub fn num_edges(&self) -> usize {
        self.degrees.iter().sum::<usize>() / 2
    }

    /// Row `i` of the CSR, including `i` itself when it has a self-loop.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Neighbors of `i` other than `i`.
    pub fn proper_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbors(i).iter().copied().filter(move |&j| j != i)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn has_self_loop(&self, i: usize) -> bool {
        self.self_loops[i]
    }

    pub fn csr_offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn csr_neighbors(&self) -> &[usize] {
        &self.neighbors
    }

    /// Each undirected edge once as `(u, v)` with `u <= v`, self-loops included.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes())
            .flat_map(move |u| self.neighbors(u).iter().map(move |&v| (u, v)))
            .filter(|&(u, v)| u <= v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationKind {
    SymmetricWithSelfLoops,
}

/// `D^-1/2 (A + I) D^-1/2` in CSR form, where `D` is the degree matrix of
/// `A + I`. Each row holds the node itself plus its proper neighbors, sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
    kind: NormalizationKind,
}

impl NormalizedAdjacency {
    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn kind(&self) -> NormalizationKind {
        self.kind
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.offsets[i]..self.offsets[i + 1];
        (&self.cols[range.clone()], &self.weights[range])
    }

    /// Weight of entry `(i, j)`, or 0 when absent.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (cols, weights) = self.row(i);
        match cols.binary_search(&j) {
            Ok(pos) => weights[pos],
            Err(_) => 0.0,
        }
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }
}

/// Symmetric normalization with one self-loop per node. A self-loop already
/// present in the graph is not added a second time.
pub fn normalize_adjacency(g: &Graph) -> NormalizedAdjacency {
    let n = g.num_nodes();
    let inv_sqrt: Vec<f64> = g
        .degrees()
        .iter()
        .map(|&d| 1.0 / ((d + 1) as f64).sqrt())
        .collect();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(g.csr_neighbors().len() + n);
    let mut weights = Vec::with_capacity(g.csr_neighbors().len() + n);
    offsets.push(0);
    for i in 0..n {
        let row = g.neighbors(i);
        let split = row.partition_point(|&j| j < i);
        let mut push = |j: usize| {
            cols.push(j);
            weights.push(inv_sqrt[i] * inv_sqrt[j]);
        };
        row[..split].iter().for_each(|&j| push(j));
        push(i);
        row[split..].iter().filter(|&&j| j != i).for_each(|&j| push(j));
        offsets.push(cols.len());
    }
    NormalizedAdjacency {
        offsets,
        cols,
        weights,
        kind: NormalizationKind::SymmetricWithSelfLoops,
    }
}

/// Local clustering coefficient per node: `2 e_i / (d_i (d_i - 1))`, where
/// `e_i` counts edges among the proper neighbors of `i`. Nodes with fewer
/// than two neighbors get 0.
pub fn compute_lcc(g: &Graph) -> Vec<f64> {
    (0..g.num_nodes())
        .into_par_iter()
        .map(|i| {
            let d = g.degree(i);
            if d < 2 {
                return 0.0;
            }
            let closed = closed_pairs(g, i);
            2.0 * closed as f64 / (d * (d - 1)) as f64
        })
        .collect()
}

/// Number of edges `(u, v)`, `u < v`, with both endpoints adjacent to `i`.
fn closed_pairs(g: &Graph, i: usize) -> usize {
    let around = g.neighbors(i);
    let mut count = 0;
    for &u in around {
        if u == i {
            continue;
        }
        // sorted merge of N(i) and N(u), counting only v > u
        let theirs = g.neighbors(u);
        let (mut a, mut b) = (around.partition_point(|&x| x <= u), theirs.partition_point(|&x| x <= u));
        while a < around.len() && b < theirs.len() {
            match around[a].cmp(&theirs[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    if around[a] != i {
                        count += 1;
                    }
                    a += 1;
                    b += 1;
                }
            }
        }
    }
    count
}
