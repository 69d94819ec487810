use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::graph::{AssignmentGraph, GraphEvolution, VertexSet};

/// When each client drops. `drop_at[i] = Some(k)` removes client `i` at the
/// transition into `V_k` (so `i ∈ V_{k-1} \ V_k`), `k` in `1..=4`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropoutSchedule {
    drop_at: Vec<Option<u8>>,
}

impl DropoutSchedule {
    pub fn none(n: usize) -> Self {
        Self {
            drop_at: vec![None; n],
        }
    }

    pub fn from_drop_steps(drop_at: Vec<Option<u8>>) -> Result<Self, ProtocolError> {
        if let Some(k) = drop_at.iter().flatten().find(|&&k| !(1..=4).contains(&k)) {
            return Err(ProtocolError::InvalidParams(format!(
                "drop step {k} outside 1..=4"
            )));
        }
        Ok(Self { drop_at })
    }

    /// Inverse of [`levels`](Self::levels).
    pub fn from_levels(levels: &[VertexSet; 5]) -> Result<Self, ProtocolError> {
        let n = levels[0].universe();
        for k in 1..5 {
            if !levels[k].is_subset(&levels[k - 1]) {
                return Err(ProtocolError::NotNested(k as u8));
            }
        }
        if levels[0].len() != n {
            return Err(ProtocolError::InvalidParams(
                "V0 must contain every client".into(),
            ));
        }
        let drop_at = (0..n)
            .map(|i| (1..5u8).find(|&k| !levels[k as usize].contains(i)))
            .collect();
        Ok(Self { drop_at })
    }

    pub fn n(&self) -> usize {
        self.drop_at.len()
    }

    pub fn drop_step(&self, i: usize) -> Option<u8> {
        self.drop_at[i]
    }

    /// Clients lost at the transition into `V_k`.
    pub fn dropped_at(&self, k: u8) -> Vec<usize> {
        (0..self.n())
            .filter(|&i| self.drop_at[i] == Some(k))
            .collect()
    }

    /// `[V0, V1, V2, V3, V4]`.
    pub fn levels(&self) -> [VertexSet; 5] {
        let n = self.n();
        std::array::from_fn(|k| {
            VertexSet::from_iter_n(
                n,
                (0..n).filter(|&i| self.drop_at[i].is_none_or(|d| d as usize > k)),
            )
        })
    }

    pub fn evolution(&self, graph: AssignmentGraph) -> Result<GraphEvolution, ProtocolError> {
        Ok(GraphEvolution::from_levels(graph, self.levels())?)
    }
}

/// Each surviving client drops independently with probability `q` at each of
/// the four transitions.
pub fn sample_dropouts<G: Rng + ?Sized>(
    n: usize,
    q: f64,
    rng: &mut G,
) -> Result<DropoutSchedule, ProtocolError> {
    if !(0.0..=1.0).contains(&q) {
        return Err(ProtocolError::InvalidParams(format!(
            "q = {q} outside [0, 1]"
        )));
    }
    let mut drop_at = vec![None; n];
    for k in 1..=4u8 {
        for slot in drop_at.iter_mut().filter(|s| s.is_none()) {
            if rng.gen_bool(q) {
                *slot = Some(k);
            }
        }
    }
    Ok(DropoutSchedule { drop_at })
}
