use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use rand_chacha::ChaCha20Rng;

use super::{EncryptedShares, KeyAdvert, ProtocolError, ProtocolParams, ShareResponse};
use crate::crypto::wire::{SharePair, Wire};
use crate::crypto::{
    ae_decrypt, ae_encrypt, prg_expand, ChunkedShare, DhGroup, KeyPair, MessageNonce, PrgSeed,
    ResidueVector, ShamirScheme, ShareKind,
};

/// Evaluation point of the share held by client `holder`.
pub(crate) fn share_point(scheme: &ShamirScheme, holder: usize) -> crate::crypto::FieldElement {
    scheme.field().element(holder as u128 + 1)
}

/// One neighbour's validated advertisement and the keys derived from it.
///
/// Each key is agreed in the step that first needs it: the channel key in
/// Step 1, the mask seed in Step 2. The cells are shared between clones of
/// a client so a branched simulation agrees on each key once.
#[derive(Debug, Clone)]
struct PeerSecrets {
    advert: KeyAdvert,
    /// `f(c_j^PK, c_i^SK)`, the share-encryption key.
    channel: Arc<OnceLock<PrgSeed>>,
    /// `s_ij = f(s_j^PK, s_i^SK)`, the pairwise mask seed.
    mask: Arc<OnceLock<PrgSeed>>,
}

/// One client's private state across a round.
#[derive(Debug, Clone)]
pub struct ClientState {
    id: usize,
    neighbors: Vec<usize>,
    channel_keys: KeyPair,
    masking_keys: KeyPair,
    self_seed: PrgSeed,
    model: ResidueVector,
    peers: BTreeMap<usize, PeerSecrets>,
    group: DhGroup,
    /// Share pairs this client holds, by owner; includes its own.
    held: BTreeMap<usize, SharePair>,
    rng: ChaCha20Rng,
}

impl ClientState {
    /// Draws both key pairs and the self-mask seed from `rng`.
    pub fn new(
        id: usize,
        neighbors: Vec<usize>,
        model: ResidueVector,
        group: &DhGroup,
        mut rng: ChaCha20Rng,
    ) -> Self {
        let channel_keys = group.keygen(&mut rng);
        let masking_keys = group.keygen(&mut rng);
        let self_seed = PrgSeed::random(&mut rng);
        Self {
            id,
            neighbors,
            channel_keys,
            masking_keys,
            self_seed,
            model,
            peers: BTreeMap::new(),
            group: *group,
            held: BTreeMap::new(),
            rng,
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn neighbors(&self) -> &[usize] {
        &self.neighbors
    }

    pub fn model(&self) -> &ResidueVector {
        &self.model
    }

    pub fn self_seed(&self) -> PrgSeed {
        self.self_seed
    }

    pub fn masking_keys(&self) -> KeyPair {
        self.masking_keys
    }

    /// Step 0 upload.
    pub fn advertise(&self) -> KeyAdvert {
        KeyAdvert {
            client: self.id as u32,
            channel: self.channel_keys.public,
            masking: self.masking_keys.public,
        }
    }

    /// Step 0 download: validates each advertised key once.
    pub fn receive_bundle(
        &mut self,
        bundle: &[KeyAdvert],
        group: &DhGroup,
    ) -> Result<(), ProtocolError> {
        for advert in bundle {
            group.validate(advert.channel)?;
            group.validate(advert.masking)?;
            self.peers.insert(
                advert.client as usize,
                PeerSecrets {
                    advert: *advert,
                    channel: Arc::default(),
                    mask: Arc::default(),
                },
            );
        }
        Ok(())
    }

    fn channel_key(&self, peer: &PeerSecrets) -> PrgSeed {
        *peer.channel.get_or_init(|| {
            self.group
                .key_agree_trusted(peer.advert.channel, self.channel_keys.secret)
        })
    }

    fn mask_seed(&self, peer: &PeerSecrets) -> PrgSeed {
        *peer.mask.get_or_init(|| {
            self.group
                .key_agree_trusted(peer.advert.masking, self.masking_keys.secret)
        })
    }

    /// `|Adj(i)| + 1`, the number of shares dealt per secret.
    pub fn share_count(&self) -> usize {
        self.neighbors.len() + 1
    }

    /// Step 1: `t`-out-of-`(|Adj(i)|+1)` sharing of `b_i` and `s_i^SK`.
    ///
    /// Shares go to every neighbour whose keys arrived in Step 0; the client
    /// keeps its own. With `t` above the share count the sharing is still
    /// dealt, but can never be reconstructed.
    pub fn deal_shares(
        &mut self,
        params: &ProtocolParams,
        scheme: &ShamirScheme,
    ) -> Result<Vec<EncryptedShares>, ProtocolError> {
        let holders: Vec<usize> = {
            let mut h = self.neighbors.clone();
            h.push(self.id);
            h.sort_unstable();
            h
        };
        let points: Vec<_> = holders.iter().map(|&h| share_point(scheme, h)).collect();
        let owner = self.id as u32;
        let seed_shares = scheme.share_bytes(
            self.self_seed.as_bytes(),
            params.t,
            &points,
            owner,
            ShareKind::Seed,
            &mut self.rng,
        )?;
        let key_shares = scheme.share_bytes(
            &self.masking_keys.secret.0.to_be_bytes(),
            params.t,
            &points,
            owner,
            ShareKind::SecretKey,
            &mut self.rng,
        )?;
        let mut out = Vec::with_capacity(self.neighbors.len());
        for ((&holder, seed), secret_key) in holders.iter().zip(seed_shares).zip(key_shares) {
            let pair = SharePair { seed, secret_key };
            if holder == self.id {
                self.held.insert(self.id, pair);
                continue;
            }
            let Some(peer) = self.peers.get(&holder) else {
                continue; // neighbour dropped before Step 0 completed
            };
            let nonce = MessageNonce {
                sender: owner,
                receiver: holder as u32,
                round: params.round,
                step: 1,
            };
            out.push(EncryptedShares {
                from: owner,
                to: holder as u32,
                ciphertext: ae_encrypt(&self.channel_key(peer), &pair.to_bytes(), nonce.to_bytes()),
            });
        }
        Ok(out)
    }

    /// Step 2 download: decrypts forwarded shares. Their senders are exactly
    /// `Adj(i) ∩ V2`.
    pub fn receive_shares(&mut self, delivered: &[EncryptedShares]) -> Result<(), ProtocolError> {
        for e in delivered {
            let from = e.from as usize;
            let fail = ProtocolError::DecryptionFailed { from, to: self.id };
            let peer = self.peers.get(&from).ok_or_else(|| fail.clone())?;
            let plain =
                ae_decrypt(&self.channel_key(peer), &e.ciphertext).map_err(|_| fail.clone())?;
            let pair = SharePair::from_bytes(&plain).map_err(|_| fail.clone())?;
            if pair.seed.owner != e.from || pair.secret_key.owner != e.from {
                return Err(fail);
            }
            self.held.insert(from, pair);
        }
        Ok(())
    }

    /// Neighbours whose shares arrived, `Adj(i) ∩ V2`.
    pub fn step1_neighbors(&self) -> impl Iterator<Item = usize> + '_ {
        self.held.keys().copied().filter(move |&j| j != self.id)
    }

    /// Step 2 upload:
    /// `θ_i + PRG(b_i) + Σ_{j>i} PRG(s_ij) − Σ_{j<i} PRG(s_ij)` over `Adj(i) ∩ V2`.
    pub fn masked_model(&self, params: &ProtocolParams) -> Result<ResidueVector, ProtocolError> {
        let (m, bits) = (params.m, params.bits);
        let mut out = self.model.clone();
        out += &prg_expand(&self.self_seed, m, bits);
        for j in self.step1_neighbors() {
            let peer = self.peers.get(&j).ok_or(ProtocolError::MissingPeerKey {
                client: self.id,
                peer: j,
            })?;
            let sign = if self.id < j { 1 } else { -1 };
            out.add_signed(&prg_expand(&self.mask_seed(peer), m, bits), sign);
        }
        Ok(out)
    }

    /// Step 3 upload: seed shares for owners in `V3`, key shares for the rest.
    /// Never both kinds for one owner.
    pub fn respond(&self, v3: &crate::graph::VertexSet) -> ShareResponse {
        let shares: Vec<ChunkedShare> = self
            .held
            .iter()
            .map(|(&owner, pair)| {
                if v3.contains(owner) {
                    pair.seed.clone()
                } else {
                    pair.secret_key.clone()
                }
            })
            .collect();
        ShareResponse {
            client: self.id as u32,
            shares,
        }
    }
}
