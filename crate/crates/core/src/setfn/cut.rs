use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{ItemSubset, SetFunction, MAX_ITEMS};
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

/// Simple undirected graph. As a set function it evaluates the modified cut
/// `|cut(X)| + sum of deg(a) over a in X`, which is monotone submodular.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct GraphSpec {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
    degree: Vec<usize>,
    adjacency: Vec<u64>,
}

#[derive(Clone, Serialize, Deserialize)]
struct RawGraph {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<RawGraph> for GraphSpec {
    type Error = Error;
    fn try_from(r: RawGraph) -> Result<Self> {
        GraphSpec::new(r.n, r.edges.into_iter().map(|[u, v]| (u, v)).collect())
    }
}

impl From<GraphSpec> for RawGraph {
    fn from(g: GraphSpec) -> Self {
        RawGraph {
            n: g.n_vertices,
            edges: g.edges.into_iter().map(|(u, v)| [u, v]).collect(),
        }
    }
}

impl GraphSpec {
    /// Edges are stored with `u < v`; self-loops and duplicates are rejected.
    pub fn new(n_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n_vertices == 0 || n_vertices > MAX_ITEMS {
            return Err(Error::InvalidParameter(format!(
                "graph needs 1..={MAX_ITEMS} vertices, got {n_vertices}"
            )));
        }
        let mut adjacency = vec![0u64; n_vertices];
        let mut degree = vec![0usize; n_vertices];
        let mut normalized = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u >= n_vertices || v >= n_vertices {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) outside graph of {n_vertices} vertices"
                )));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop at {u}")));
            }
            if adjacency[u] >> v & 1 == 1 {
                return Err(Error::InvalidParameter(format!(
                    "duplicate edge ({u}, {v})"
                )));
            }
            adjacency[u] |= 1 << v;
            adjacency[v] |= 1 << u;
            degree[u] += 1;
            degree[v] += 1;
            normalized.push((u.min(v), u.max(v)));
        }
        Ok(Self {
            n_vertices,
            edges: normalized,
            degree,
            adjacency,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self) -> &[usize] {
        &self.degree
    }

    /// Number of edges with exactly one endpoint in `set`.
    pub fn cut_size(&self, set: ItemSubset) -> usize {
        set.iter()
            .map(|v| (self.adjacency[v] & !set.bits()).count_ones() as usize)
            .sum()
    }

    pub fn cut_value(&self, set: ItemSubset) -> usize {
        self.cut_size(set) + set.iter().map(|v| self.degree[v]).sum::<usize>()
    }
}

impl<T: Scalar> SetFunction<T> for GraphSpec {
    fn ground_size(&self) -> usize {
        self.n_vertices
    }

    fn value(&self, set: ItemSubset) -> T {
        T::of_usize(self.cut_value(set))
    }
}

/// G(n, p): every unordered pair `u < v` (lexicographic order) is an edge
/// independently with probability `p`.
pub fn gen_erdos_renyi(n_vertices: usize, p: f64, seed: u64) -> Result<GraphSpec> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "edge probability must lie in [0, 1], got {p}"
        )));
    }
    let mut rng = rng::seeded(seed);
    let mut edges = Vec::new();
    for u in 0..n_vertices {
        for v in u + 1..n_vertices {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    GraphSpec::new(n_vertices, edges)
}
