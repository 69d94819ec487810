//! The assignment graph: who exchanges keys and shares with whom, plus the
//! survivor-induced evolution used by the reliability and privacy tests.

mod evolution;
mod vertex_set;

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use evolution::{
    is_informative, privacy_predicate, privacy_report, reliability_predicate, reliability_report,
    v3_plus, ComponentExposure, GraphEvolution, PrivacyReport, ReliabilityReport, Thresholds,
};
pub use vertex_set::VertexSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("survivor sets not nested: V{0} is not a subset of V{prev}", prev = .0 - 1)]
    NotNested(usize),
    #[error("vertex set is over {found} vertices, graph has {expected}")]
    UniverseMismatch { expected: usize, found: usize },
    #[error("threshold list has {found} entries, graph has {expected} vertices")]
    ThresholdCount { expected: usize, found: usize },
    #[error("edge list line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// An undirected simple graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EdgeListRepr", into = "EdgeListRepr")]
pub struct AssignmentGraph {
    n: usize,
    adj: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct EdgeListRepr {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<EdgeListRepr> for AssignmentGraph {
    type Error = GraphError;
    fn try_from(r: EdgeListRepr) -> Result<Self, GraphError> {
        AssignmentGraph::from_edges(r.n, r.edges)
    }
}

impl From<AssignmentGraph> for EdgeListRepr {
    fn from(g: AssignmentGraph) -> Self {
        EdgeListRepr {
            n: g.n,
            edges: g.edges().collect(),
        }
    }
}

impl AssignmentGraph {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            adj: vec![Vec::new(); n],
        }
    }

    /// Duplicate edges are merged.
    pub fn from_edges<I: IntoIterator<Item = (usize, usize)>>(
        n: usize,
        edges: I,
    ) -> Result<Self, GraphError> {
        let mut g = Self::empty(n);
        for (a, b) in edges {
            for v in [a, b] {
                if v >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: v, n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            g.adj[a].push(b);
            g.adj[b].push(a);
        }
        for list in &mut g.adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `Adj(i)`, sorted ascending.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n && self.adj[a].binary_search(&b).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Each edge once, as `(low, high)`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
    }

    pub fn mean_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            2.0 * self.edge_count() as f64 / self.n as f64
        }
    }

    /// The whole graph as a subgraph on all of its vertices.
    pub fn as_subgraph(&self) -> InducedSubgraph {
        InducedSubgraph {
            vertices: VertexSet::full(self.n),
            adj: self.adj.clone(),
        }
    }

    /// Parses the edge-list text format: a header line holding `n`, then one
    /// `i j` pair per line. Blank lines and `#` comments are ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (header_line, header) = lines.next().ok_or(GraphError::Parse {
            line: 0,
            message: "missing vertex-count header".into(),
        })?;
        let n = header.parse::<usize>().map_err(|e| GraphError::Parse {
            line: header_line,
            message: format!("bad vertex count {header:?}: {e}"),
        })?;
        let mut edges = Vec::new();
        for (line, body) in lines {
            let mut fields = body.split_whitespace();
            let mut endpoint = || -> Result<usize, GraphError> {
                let tok = fields.next().ok_or(GraphError::Parse {
                    line,
                    message: "expected two endpoints".into(),
                })?;
                tok.parse().map_err(|e| GraphError::Parse {
                    line,
                    message: format!("bad endpoint {tok:?}: {e}"),
                })
            };
            let (a, b) = (endpoint()?, endpoint()?);
            if fields.next().is_some() {
                return Err(GraphError::Parse {
                    line,
                    message: "more than two fields".into(),
                });
            }
            edges.push((a, b));
        }
        Self::from_edges(n, edges).map_err(|e| match e {
            GraphError::Parse { .. } => e,
            other => GraphError::Parse {
                line: 0,
                message: other.to_string(),
            },
        })
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for (a, b) in self.edges() {
            writeln!(out, "{a} {b}").expect("writing to a String");
        }
        out
    }
}

/// `G(n, p)`: every one of the `n(n-1)/2` pairs is an edge independently with
/// probability `p`.
pub fn gen_erdos_renyi<G: Rng + ?Sized>(
    n: usize,
    p: f64,
    rng: &mut G,
) -> Result<AssignmentGraph, GraphError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::InvalidProbability(p));
    }
    let mut g = AssignmentGraph::empty(n);
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                g.adj[a].push(b);
                g.adj[b].push(a);
            }
        }
    }
    // pushes arrive in ascending order per vertex, so lists are sorted
    Ok(g)
}

pub fn gen_complete(n: usize) -> AssignmentGraph {
    AssignmentGraph {
        n,
        adj: (0..n)
            .map(|a| (0..n).filter(|&b| b != a).collect())
            .collect(),
    }
}

/// A graph restricted to a vertex subset. Vertices keep their original
/// labels; adjacency lists of excluded vertices are empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedSubgraph {
    vertices: VertexSet,
    adj: Vec<Vec<usize>>,
}

impl InducedSubgraph {
    pub fn vertices(&self) -> &VertexSet {
        &self.vertices
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
    }

    pub fn is_connected(&self) -> bool {
        connected_components(self).count() <= 1
    }
}

pub fn induced_subgraph(
    graph: &AssignmentGraph,
    vertices: &VertexSet,
) -> Result<InducedSubgraph, GraphError> {
    if vertices.universe() != graph.n {
        return Err(GraphError::UniverseMismatch {
            expected: graph.n,
            found: vertices.universe(),
        });
    }
    let adj = (0..graph.n)
        .map(|v| {
            if vertices.contains(v) {
                graph.adj[v]
                    .iter()
                    .copied()
                    .filter(|&u| vertices.contains(u))
                    .collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    Ok(InducedSubgraph {
        vertices: vertices.clone(),
        adj,
    })
}

/// A partition of a subgraph's vertices into maximal connected sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentDecomposition {
    components: Vec<Vec<usize>>,
}

impl ComponentDecomposition {
    /// Components ordered by smallest member; members sorted.
    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    /// The component count, κ.
    pub fn count(&self) -> usize {
        self.components.len()
    }
}

pub fn connected_components(graph: &InducedSubgraph) -> ComponentDecomposition {
    let n = graph.adj.len();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for start in graph.vertices.iter() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut members = Vec::new();
        while let Some(v) = queue.pop_front() {
            members.push(v);
            for &u in &graph.adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    ComponentDecomposition { components }
}
