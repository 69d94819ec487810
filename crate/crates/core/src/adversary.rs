//! Passive eavesdropper and malicious-server oracles.
//!
//! The eavesdropper sees every message of a round and nothing else. It
//! reconstructs whatever secrets the Step-3 responses reveal, then tries to
//! strip the masks off a partial sum `Σ_{i∈T} θ̃_i`. Masks are attacked
//! structurally: a PRG term is removable iff its seed is recoverable, and
//! the PRG, key agreement and encryption are treated as ideal.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::{
    prg_expand, ChunkedShare, DhGroup, PrgSeed, PublicKey, ResidueVector, SecretKey, ShamirScheme,
    ShareKind,
};
use crate::graph::{AssignmentGraph, GraphEvolution, VertexSet};
use crate::protocol::{Message, Party, ProtocolParams, Transcript};

/// Largest `|V3|` the brute-force oracle enumerates.
pub const ORACLE_MAX_SURVIVORS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MaskTerm {
    SelfMask {
        client: usize,
    },
    /// `s_{i,j}` with `i < j`.
    Pairwise {
        i: usize,
        j: usize,
    },
}

impl std::fmt::Display for MaskTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MaskTerm::SelfMask { client } => write!(f, "PRG(b_{client})"),
            MaskTerm::Pairwise { i, j } => write!(f, "PRG(s_{i},{j})"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttackError {
    #[error("target subset must be a nonempty proper subset of V3")]
    TrivialSubset,
    #[error("client {0} did not upload a masked model")]
    NotInV3(usize),
    #[error("attack failed: {0} cannot be cancelled")]
    Uncancellable(MaskTerm),
    #[error("{survivors} survivors exceed the brute-force limit of {ORACLE_MAX_SURVIVORS}")]
    TooLarge { survivors: usize },
    #[error("transcript is incomplete: {0}")]
    Incomplete(String),
}

/// Secrets an eavesdropper can rebuild from the Step-3 responses.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecoverableSecrets {
    seeds: BTreeMap<usize, PrgSeed>,
    secret_keys: BTreeMap<usize, SecretKey>,
}

impl RecoverableSecrets {
    pub fn seed(&self, i: usize) -> Option<PrgSeed> {
        self.seeds.get(&i).copied()
    }

    pub fn secret_key(&self, i: usize) -> Option<SecretKey> {
        self.secret_keys.get(&i).copied()
    }

    pub fn seed_owners(&self) -> impl Iterator<Item = usize> + '_ {
        self.seeds.keys().copied()
    }

    pub fn secret_key_owners(&self) -> impl Iterator<Item = usize> + '_ {
        self.secret_keys.keys().copied()
    }
}

/// Everything that crossed the wire in one round, plus the public header.
#[derive(Debug, Clone)]
pub struct EavesdropperView {
    params: ProtocolParams,
    graph: AssignmentGraph,
    group: DhGroup,
    masking_keys: BTreeMap<usize, PublicKey>,
    /// Uploaders of Step-1 shares. Isolated members of `V2` upload nothing,
    /// and never enter any mask.
    v2: VertexSet,
    v3: VertexSet,
    v4: VertexSet,
    masked: BTreeMap<usize, ResidueVector>,
    /// Owners whose forwarded shares reached each client: the pairwise
    /// masks that client applied.
    partners: BTreeMap<usize, Vec<usize>>,
    secrets: RecoverableSecrets,
}

impl EavesdropperView {
    pub fn from_transcript(transcript: &Transcript) -> Result<Self, AttackError> {
        Self::with_crypto(transcript, DhGroup::default(), ShamirScheme::default())
    }

    pub fn with_crypto(
        transcript: &Transcript,
        group: DhGroup,
        scheme: ShamirScheme,
    ) -> Result<Self, AttackError> {
        let params = *transcript.params();
        let graph = transcript.graph().clone();
        let n = graph.n();
        let mut view = Self {
            params,
            group,
            masking_keys: BTreeMap::new(),
            v2: VertexSet::empty(n),
            v3: VertexSet::empty(n),
            v4: VertexSet::empty(n),
            masked: BTreeMap::new(),
            partners: BTreeMap::new(),
            secrets: RecoverableSecrets::default(),
            graph,
        };
        let mut pool: BTreeMap<(usize, ShareKind), Vec<ChunkedShare>> = BTreeMap::new();
        let mut saw_step3 = false;
        for entry in transcript.entries() {
            match (&entry.message, entry.receiver) {
                (Message::AdvertiseKeys(a), _) => {
                    view.masking_keys.insert(a.client as usize, a.masking);
                }
                (Message::EncryptedShares(e), Party::Server) => {
                    view.v2.insert(e.from as usize);
                }
                (Message::EncryptedShares(e), Party::Client(to)) => {
                    view.partners
                        .entry(to as usize)
                        .or_default()
                        .push(e.from as usize);
                }
                (Message::MaskedModel { client, model }, _) => {
                    view.v3.insert(*client as usize);
                    view.masked.insert(*client as usize, model.clone());
                }
                (Message::ShareResponse(r), _) => {
                    saw_step3 = true;
                    view.v4.insert(r.client as usize);
                    for s in &r.shares {
                        pool.entry((s.owner as usize, s.kind))
                            .or_default()
                            .push(s.clone());
                    }
                }
                (Message::SurvivorList(_), _) => saw_step3 = true,
                (Message::KeyBundle(_), _) => {}
            }
        }
        if !saw_step3 && !view.v3.is_empty() {
            return Err(AttackError::Incomplete("no Step-3 traffic".into()));
        }
        view.secrets = reconstruct_all(
            &pool,
            &view.params,
            &view.group,
            &scheme,
            &view.masking_keys,
        );
        Ok(view)
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn graph(&self) -> &AssignmentGraph {
        &self.graph
    }

    pub fn v2(&self) -> &VertexSet {
        &self.v2
    }

    pub fn v3(&self) -> &VertexSet {
        &self.v3
    }

    pub fn v4(&self) -> &VertexSet {
        &self.v4
    }

    /// Pairwise partners of client `i`.
    pub fn partners(&self, i: usize) -> &[usize] {
        self.partners.get(&i).map_or(&[], Vec::as_slice)
    }

    /// `s_{i,j}` if the key of either endpoint was revealed.
    pub fn pair_seed(&self, i: usize, j: usize) -> Option<PrgSeed> {
        let derive = |own: usize, peer: usize| {
            let sk = self.secrets.secret_key(own)?;
            let pk = *self.masking_keys.get(&peer)?;
            self.group.key_agree(pk, sk).ok()
        };
        derive(i, j).or_else(|| derive(j, i))
    }
}

fn reconstruct_all(
    pool: &BTreeMap<(usize, ShareKind), Vec<ChunkedShare>>,
    params: &ProtocolParams,
    group: &DhGroup,
    scheme: &ShamirScheme,
    masking_keys: &BTreeMap<usize, PublicKey>,
) -> RecoverableSecrets {
    let mut out = RecoverableSecrets::default();
    for (&(owner, kind), shares) in pool {
        if shares.len() < params.t {
            continue;
        }
        let Ok(bytes) = scheme.reconstruct_bytes(shares, Some(params.t)) else {
            continue;
        };
        match kind {
            ShareKind::Seed => {
                if let Ok(b) = <[u8; 16]>::try_from(bytes) {
                    out.seeds.insert(owner, PrgSeed(b));
                }
            }
            ShareKind::SecretKey => {
                let Ok(b) = <[u8; 8]>::try_from(bytes) else {
                    continue;
                };
                let sk = SecretKey(u64::from_be_bytes(b));
                let valid = sk.0 != 0 && sk.0 < group.order();
                if valid && masking_keys.get(&owner) == Some(&group.public_for(sk)) {
                    out.secret_keys.insert(owner, sk);
                }
            }
        }
    }
    out
}

/// What the eavesdropper can rebuild: `b_i` from `t` seed shares, `s_i^SK`
/// from `t` key shares checked against the advertised public key.
pub fn recoverable_secrets(view: &EavesdropperView) -> &RecoverableSecrets {
    &view.secrets
}

/// The PRG terms inside `Σ_{i∈T} θ̃_i`, with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicMaskedSum {
    pub target: Vec<usize>,
    pub self_masks: BTreeMap<usize, i64>,
    /// Keyed by `(min, max)`. Pairs inside `T` appear with coefficient 0.
    pub pairwise: BTreeMap<(usize, usize), i64>,
}

impl SymbolicMaskedSum {
    /// Client `i` adds `+PRG(s_ij)` when `i < j` and subtracts it otherwise.
    pub fn expand(view: &EavesdropperView, target: &VertexSet) -> Self {
        let mut self_masks = BTreeMap::new();
        let mut pairwise = BTreeMap::new();
        for i in target.iter() {
            self_masks.insert(i, 1);
            for &j in view.partners(i) {
                let sign = if i < j { 1 } else { -1 };
                *pairwise.entry((i.min(j), i.max(j))).or_insert(0) += sign;
            }
        }
        Self {
            target: target.to_vec(),
            self_masks,
            pairwise,
        }
    }

    /// Terms that survive cancellation; pairwise terms first.
    pub fn nonzero_terms(&self) -> impl Iterator<Item = (MaskTerm, i64)> + '_ {
        let pairs = self
            .pairwise
            .iter()
            .filter(|(_, &c)| c != 0)
            .map(|(&(i, j), &c)| (MaskTerm::Pairwise { i, j }, c));
        let selfs = self
            .self_masks
            .iter()
            .filter(|(_, &c)| c != 0)
            .map(|(&client, &c)| (MaskTerm::SelfMask { client }, c));
        pairs.chain(selfs)
    }
}

fn check_target(view: &EavesdropperView, target: &VertexSet) -> Result<(), AttackError> {
    if let Some(i) = target.iter().find(|&i| !view.v3.contains(i)) {
        return Err(AttackError::NotInV3(i));
    }
    if target.is_empty() || target.len() == view.v3.len() {
        return Err(AttackError::TrivialSubset);
    }
    Ok(())
}

fn term_seed(view: &EavesdropperView, term: &MaskTerm) -> Option<PrgSeed> {
    match *term {
        MaskTerm::SelfMask { client } => view.secrets.seed(client),
        MaskTerm::Pairwise { i, j } => view.pair_seed(i, j),
    }
}

/// Tries to recover `Σ_{i∈T} θ_i`. Succeeds iff every surviving PRG term
/// has a recoverable seed, and then the result is exact.
pub fn partial_sum_attack(
    view: &EavesdropperView,
    target: &VertexSet,
) -> Result<ResidueVector, AttackError> {
    check_target(view, target)?;
    let symbolic = SymbolicMaskedSum::expand(view, target);
    let (m, bits) = (view.params.m, view.params.bits);
    let mut sum = ResidueVector::zeros(m, bits);
    for i in target.iter() {
        sum += &view.masked[&i];
    }
    for (term, coeff) in symbolic.nonzero_terms() {
        let seed = term_seed(view, &term).ok_or(AttackError::Uncancellable(term))?;
        let mask = prg_expand(&seed, m, bits);
        for _ in 0..coeff.unsigned_abs() {
            sum.add_signed(&mask, if coeff > 0 { -1 } else { 1 });
        }
    }
    Ok(sum)
}

/// Per-survivor facts the subset enumeration needs, as bitmasks over the
/// positions of `V3`.
struct SubsetOracle {
    /// Client can appear in some attackable subset at all.
    usable: u32,
    /// Survivors that must join `T` alongside this one.
    requires: Vec<u32>,
}

impl SubsetOracle {
    fn new(view: &EavesdropperView) -> Self {
        let members = view.v3.to_vec();
        let pos: BTreeMap<usize, usize> =
            members.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut usable = 0u32;
        let mut requires = vec![0u32; members.len()];
        for (k, &i) in members.iter().enumerate() {
            let mut ok = view.secrets.seed(i).is_some();
            for &j in view.partners(i) {
                if view.pair_seed(i, j).is_some() {
                    continue;
                }
                // a non-derivable pair cancels only if both ends are in T
                // and each applied it
                match pos.get(&j) {
                    Some(&kj) if view.partners(j).contains(&i) => requires[k] |= 1 << kj,
                    _ => ok = false,
                }
            }
            if ok {
                usable |= 1 << k;
            }
        }
        Self { usable, requires }
    }

    fn attackable(&self, subset: u32) -> bool {
        if subset & !self.usable != 0 {
            return false;
        }
        let mut rest = subset;
        while rest != 0 {
            let k = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if self.requires[k] & !subset != 0 {
                return false;
            }
        }
        true
    }
}

/// `true` iff no nonempty proper subset of `V3` has a recoverable sum.
pub fn privacy_oracle(view: &EavesdropperView) -> Result<bool, AttackError> {
    Ok(exposed_subset(view)?.is_none())
}

/// A subset whose partial sum the eavesdropper can recover, if any.
pub fn exposed_subset(view: &EavesdropperView) -> Result<Option<VertexSet>, AttackError> {
    let size = view.v3.len();
    if size > ORACLE_MAX_SURVIVORS {
        return Err(AttackError::TooLarge { survivors: size });
    }
    if size < 2 {
        return Ok(None);
    }
    let oracle = SubsetOracle::new(view);
    let members = view.v3.to_vec();
    let full = (1u32 << size) - 1;
    Ok((1..full).find(|&s| oracle.attackable(s)).map(|s| {
        VertexSet::from_iter_n(
            view.graph.n(),
            (0..size).filter(|k| s & (1 << k) != 0).map(|k| members[k]),
        )
    }))
}

/// A malicious server can unmask `θ_i` by requesting `b_i` shares from `t`
/// holders and `s_i^SK` shares from `t` others: needs
/// `|(Adj(i) ∪ {i}) ∩ V4| ≥ 2t`.
pub fn unmasking_attack_feasible(i: usize, evolution: &GraphEvolution, t: usize) -> bool {
    let v4 = evolution.level(4);
    let holders = evolution
        .base()
        .neighbors(i)
        .iter()
        .filter(|&&j| v4.contains(j))
        .count()
        + usize::from(v4.contains(i));
    holders >= 2 * t
}
