use std::collections::BTreeMap;

use super::{EncryptedShares, KeyAdvert, ProtocolError, ProtocolParams, ShareResponse};
use crate::crypto::{
    prg_expand, ChunkedShare, DhGroup, PrgSeed, PublicKey, ResidueVector, SecretKey, ShamirScheme,
    ShareKind,
};
use crate::graph::{AssignmentGraph, VertexSet};

/// The server's view of one round. It knows the assignment graph.
#[derive(Debug, Clone)]
pub struct ServerState {
    graph: AssignmentGraph,
    adverts: BTreeMap<usize, KeyAdvert>,
    /// `V1..V4` as observed from arrivals; index 0 is `V1`.
    survivors: Vec<VertexSet>,
    masked: BTreeMap<usize, ResidueVector>,
    recovered_seeds: BTreeMap<usize, PrgSeed>,
    recovered_keys: BTreeMap<usize, SecretKey>,
}

impl ServerState {
    pub fn new(graph: AssignmentGraph) -> Self {
        Self {
            graph,
            adverts: BTreeMap::new(),
            survivors: Vec::new(),
            masked: BTreeMap::new(),
            recovered_seeds: BTreeMap::new(),
            recovered_keys: BTreeMap::new(),
        }
    }

    /// `V_k` for `k` in `1..=4`, once that step has completed.
    pub fn survivors(&self, k: usize) -> Option<&VertexSet> {
        self.survivors.get(k.checked_sub(1)?)
    }

    pub fn recovered_seeds(&self) -> &BTreeMap<usize, PrgSeed> {
        &self.recovered_seeds
    }

    pub fn recovered_keys(&self) -> &BTreeMap<usize, SecretKey> {
        &self.recovered_keys
    }

    fn arrivals(&self, senders: impl Iterator<Item = usize>) -> VertexSet {
        VertexSet::from_iter_n(self.graph.n(), senders)
    }

    /// Step 0: records `V1` and returns, per client in `V1`, the keys of
    /// `Adj(j) ∩ V1`.
    pub fn collect_keys(
        &mut self,
        adverts: &[KeyAdvert],
        group: &DhGroup,
    ) -> Result<BTreeMap<usize, Vec<KeyAdvert>>, ProtocolError> {
        for a in adverts {
            group.validate(a.channel)?;
            group.validate(a.masking)?;
            self.adverts.insert(a.client as usize, *a);
        }
        let v1 = self.arrivals(adverts.iter().map(|a| a.client as usize));
        let bundles = v1
            .iter()
            .map(|j| {
                let keys = self
                    .graph
                    .neighbors(j)
                    .iter()
                    .filter(|&&i| v1.contains(i))
                    .map(|i| self.adverts[i])
                    .collect();
                (j, keys)
            })
            .collect();
        self.survivors.push(v1);
        Ok(bundles)
    }

    /// Step 1: records `V2` (clients whose uploads arrived, possibly empty)
    /// and routes each ciphertext to its recipient if that recipient is in `V2`.
    pub fn route_shares(
        &mut self,
        uploads: &BTreeMap<usize, Vec<EncryptedShares>>,
    ) -> BTreeMap<usize, Vec<EncryptedShares>> {
        let v2 = self.arrivals(uploads.keys().copied());
        let mut routed: BTreeMap<usize, Vec<EncryptedShares>> = BTreeMap::new();
        for batch in uploads.values() {
            for e in batch {
                if v2.contains(e.to as usize) {
                    routed.entry(e.to as usize).or_default().push(e.clone());
                }
            }
        }
        self.survivors.push(v2);
        routed
    }

    /// Step 2: records `V3` and the masked models.
    pub fn collect_masked(&mut self, models: BTreeMap<usize, ResidueVector>) -> VertexSet {
        let v3 = self.arrivals(models.keys().copied());
        self.masked = models;
        self.survivors.push(v3.clone());
        v3
    }

    /// Step 3: reconstructs `b_i` for `i ∈ V3` and `s_i^SK` for members of
    /// `V2 \ V3` adjacent to `V3`, then strips every mask.
    pub fn unmask(
        &mut self,
        responses: &[ShareResponse],
        params: &ProtocolParams,
        group: &DhGroup,
        scheme: &ShamirScheme,
    ) -> Result<ResidueVector, ProtocolError> {
        let v4 = self.arrivals(responses.iter().map(|r| r.client as usize));
        self.survivors.push(v4);
        let v2 = self.survivors[1].clone();
        let v3 = self.survivors[2].clone();

        let mut pool: BTreeMap<(usize, ShareKind), Vec<ChunkedShare>> = BTreeMap::new();
        for r in responses {
            for s in &r.shares {
                pool.entry((s.owner as usize, s.kind))
                    .or_default()
                    .push(s.clone());
            }
        }
        let dropped: Vec<usize> = v2
            .difference(&v3)
            .iter()
            .filter(|&i| self.graph.neighbors(i).iter().any(|&j| v3.contains(j)))
            .collect();
        let count = |owner: usize, kind| pool.get(&(owner, kind)).map_or(0, Vec::len);

        let mut non_informative: Vec<usize> = v3
            .iter()
            .filter(|&i| count(i, ShareKind::Seed) < params.t)
            .chain(
                dropped
                    .iter()
                    .copied()
                    .filter(|&i| count(i, ShareKind::SecretKey) < params.t),
            )
            .collect();
        if !non_informative.is_empty() {
            non_informative.sort_unstable();
            return Err(ProtocolError::ReliabilityFailure { non_informative });
        }

        let (m, bits) = (params.m, params.bits);
        let mut sum = ResidueVector::zeros(m, bits);
        for model in self.masked.values() {
            sum += model;
        }
        for i in v3.iter() {
            let seed = scheme
                .reconstruct_bytes(&pool[&(i, ShareKind::Seed)], Some(params.t))
                .ok()
                .and_then(|b| <[u8; 16]>::try_from(b).ok())
                .map(PrgSeed)
                .ok_or(ProtocolError::ShareReconstructionMismatch { owner: i })?;
            sum -= &prg_expand(&seed, m, bits);
            self.recovered_seeds.insert(i, seed);
        }
        for &i in &dropped {
            let secret = scheme
                .reconstruct_bytes(&pool[&(i, ShareKind::SecretKey)], Some(params.t))
                .ok()
                .and_then(|b| <[u8; 8]>::try_from(b).ok())
                .map(|b| SecretKey(u64::from_be_bytes(b)))
                .ok_or(ProtocolError::ShareReconstructionMismatch { owner: i })?;
            let expected: PublicKey = self.adverts[&i].masking;
            if secret.0 == 0 || secret.0 >= group.order() || group.public_for(secret) != expected {
                return Err(ProtocolError::ShareReconstructionMismatch { owner: i });
            }
            self.recovered_keys.insert(i, secret);
            for &j in self.graph.neighbors(i).iter().filter(|&&j| v3.contains(j)) {
                let s_ij = group.key_agree_trusted(self.adverts[&j].masking, secret);
                // j added +PRG(s_ij) iff j < i
                let sign = if j < i { -1 } else { 1 };
                sum.add_signed(&prg_expand(&s_ij, m, bits), sign);
            }
        }
        Ok(sum)
    }
}
