use serde::{Deserialize, Serialize};

use super::{
    connected_components, induced_subgraph, AssignmentGraph, GraphError, InducedSubgraph, VertexSet,
};

/// Per-client secret-sharing thresholds `t_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Thresholds {
    Uniform(usize),
    PerNode(Vec<usize>),
}

impl Thresholds {
    pub fn of(&self, i: usize) -> usize {
        match self {
            Thresholds::Uniform(t) => *t,
            Thresholds::PerNode(ts) => ts[i],
        }
    }

    pub fn check(&self, n: usize) -> Result<(), GraphError> {
        match self {
            Thresholds::PerNode(ts) if ts.len() != n => Err(GraphError::ThresholdCount {
                expected: n,
                found: ts.len(),
            }),
            _ => Ok(()),
        }
    }
}

impl From<usize> for Thresholds {
    fn from(t: usize) -> Self {
        Thresholds::Uniform(t)
    }
}

/// A base graph with nested survivor sets `V0 ⊇ V1 ⊇ V2 ⊇ V3 ⊇ V4`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEvolution {
    base: AssignmentGraph,
    survivors: [VertexSet; 5],
}

impl GraphEvolution {
    /// `V0` is every vertex of `base`.
    pub fn new(base: AssignmentGraph, later: [VertexSet; 4]) -> Result<Self, GraphError> {
        let [v1, v2, v3, v4] = later;
        let v0 = VertexSet::full(base.n());
        Self::from_levels(base, [v0, v1, v2, v3, v4])
    }

    pub fn from_levels(
        base: AssignmentGraph,
        survivors: [VertexSet; 5],
    ) -> Result<Self, GraphError> {
        for s in &survivors {
            if s.universe() != base.n() {
                return Err(GraphError::UniverseMismatch {
                    expected: base.n(),
                    found: s.universe(),
                });
            }
        }
        for k in 1..5 {
            if !survivors[k].is_subset(&survivors[k - 1]) {
                return Err(GraphError::NotNested(k));
            }
        }
        Ok(Self { base, survivors })
    }

    /// No dropouts at any step.
    pub fn all_survive(base: AssignmentGraph) -> Self {
        let full = VertexSet::full(base.n());
        Self {
            survivors: std::array::from_fn(|_| full.clone()),
            base,
        }
    }

    pub fn base(&self) -> &AssignmentGraph {
        &self.base
    }

    /// `V_k` for `k` in `0..=4`.
    pub fn level(&self, k: usize) -> &VertexSet {
        &self.survivors[k]
    }

    /// `G_k`, the base graph induced on `V_k`.
    pub fn graph_at(&self, k: usize) -> InducedSubgraph {
        induced_subgraph(&self.base, &self.survivors[k]).expect("universe checked at construction")
    }

    pub fn reliable(&self, t: usize) -> bool {
        reliability_predicate(self, &Thresholds::Uniform(t))
    }

    pub fn private(&self, t: usize) -> bool {
        privacy_predicate(self, &Thresholds::Uniform(t))
    }
}

/// `|(Adj(i) ∪ {i}) ∩ V4| ≥ t_i`.
pub fn is_informative(i: usize, evolution: &GraphEvolution, t_i: usize) -> bool {
    surviving_holders(i, evolution) >= t_i
}

/// Holders of a share of `i`'s secrets that reach the final step.
pub(crate) fn surviving_holders(i: usize, evolution: &GraphEvolution) -> usize {
    let v4 = evolution.level(4);
    let own = usize::from(v4.contains(i));
    own + evolution
        .base
        .neighbors(i)
        .iter()
        .filter(|&&j| v4.contains(j))
        .count()
}

/// `V3 ∪ { i ∈ V2 : Adj(i) ∩ V3 ≠ ∅ }`.
pub fn v3_plus(evolution: &GraphEvolution) -> VertexSet {
    let (v2, v3) = (evolution.level(2), evolution.level(3));
    let mut out = v3.clone();
    for i in v2.difference(v3).iter() {
        if evolution.base.neighbors(i).iter().any(|&j| v3.contains(j)) {
            out.insert(i);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReliabilityReport {
    pub reliable: bool,
    /// Members of `V3+` that are not informative, ascending.
    pub non_informative: Vec<usize>,
}

pub fn reliability_report(evolution: &GraphEvolution, t: &Thresholds) -> ReliabilityReport {
    let non_informative: Vec<usize> = v3_plus(evolution)
        .iter()
        .filter(|&i| !is_informative(i, evolution, t.of(i)))
        .collect();
    ReliabilityReport {
        reliable: non_informative.is_empty(),
        non_informative,
    }
}

/// True iff every node of `V3+` is informative. Vacuously true for empty `V3`.
pub fn reliability_predicate(evolution: &GraphEvolution, t: &Thresholds) -> bool {
    v3_plus(evolution)
        .iter()
        .all(|i| is_informative(i, evolution, t.of(i)))
}

/// One component `C_l` of `G3` and whether its neighbourhood `C_l+` is fully
/// informative (which exposes the component's partial sum).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentExposure {
    pub members: Vec<usize>,
    /// `C_l+ \ C_l`: dropped-after-sharing neighbours in `V2 \ V3`.
    pub boundary: Vec<usize>,
    pub first_non_informative: Option<usize>,
}

impl ComponentExposure {
    pub fn exposed(&self) -> bool {
        self.first_non_informative.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrivacyReport {
    pub private: bool,
    pub g3_connected: bool,
    pub components: Vec<ComponentExposure>,
}

pub fn privacy_report(evolution: &GraphEvolution, t: &Thresholds) -> PrivacyReport {
    let g3 = evolution.graph_at(3);
    let decomposition = connected_components(&g3);
    let (v2, v3) = (evolution.level(2), evolution.level(3));
    let components: Vec<ComponentExposure> = decomposition
        .components()
        .iter()
        .map(|members| {
            let mut boundary = VertexSet::empty(evolution.base.n());
            for &c in members {
                for &j in evolution.base.neighbors(c) {
                    if v2.contains(j) && !v3.contains(j) {
                        boundary.insert(j);
                    }
                }
            }
            let first_non_informative = members
                .iter()
                .copied()
                .chain(boundary.iter())
                .find(|&i| !is_informative(i, evolution, t.of(i)));
            ComponentExposure {
                members: members.clone(),
                boundary: boundary.to_vec(),
                first_non_informative,
            }
        })
        .collect();
    let g3_connected = components.len() <= 1;
    PrivacyReport {
        private: g3_connected || components.iter().all(|c| !c.exposed()),
        g3_connected,
        components,
    }
}

/// True iff `G3` is connected, or every component's `C_l+` holds a
/// non-informative node. Empty and single-vertex `G3` count as connected.
pub fn privacy_predicate(evolution: &GraphEvolution, t: &Thresholds) -> bool {
    privacy_report(evolution, t).private
}
