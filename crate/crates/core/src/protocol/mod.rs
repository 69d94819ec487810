//! One round of sparse secure aggregation, Steps 0 to 3.
//!
//! * Step 0: clients advertise two public keys; each client gets back only
//!   its graph neighbours' keys.
//! * Step 1: each client Shamir-shares its self-mask seed `b_i` and masking
//!   secret key among its neighbours and itself, encrypting every share pair
//!   under a pairwise channel key. The server forwards ciphertexts.
//! * Step 2: each client uploads `θ_i + PRG(b_i) ± PRG(s_ij)` over the
//!   neighbours that completed Step 1.
//! * Step 3: the server announces the Step-2 survivors; each remaining client
//!   returns seed shares for survivors and key shares for the rest, and the
//!   server strips every mask.
//!
//! Dropouts are modelled by the survivor set supplied to each step.

mod client;
mod config;
mod dropout;
mod message;
mod round;
mod server;
mod transcript;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::CryptoError;
use crate::graph::GraphError;

pub use client::ClientState;
pub use config::{Choice, RoundConfig, RoundRecord, RoundStatus, Topology};
pub use dropout::{sample_dropouts, DropoutSchedule};
pub use message::{EncryptedShares, KeyAdvert, Message, Party, ShareResponse};
pub use round::{run_round, synthetic_models, Diagnostic, Round, RoundOutcome, StepTimings};
pub use server::ServerState;
pub use transcript::{comm_accounting, CommTotals, Traffic, Transcript, TranscriptEntry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub n: usize,
    /// Connection probability of the graph the round runs on.
    pub p: f64,
    /// Per-step dropout probability.
    pub q: f64,
    pub t: usize,
    /// Model dimension.
    pub m: usize,
    /// Bits per model coordinate, `R`.
    pub bits: u32,
    /// Accounted bits per public key, `a_K`.
    pub key_bits: u64,
    /// Accounted bits per secret share, `a_S`.
    pub share_bits: u64,
    /// Round counter, mixed into nonces and client randomness.
    pub round: u32,
}

impl ProtocolParams {
    /// `a_K = a_S = 256`, round 0.
    pub fn new(n: usize, p: f64, q: f64, t: usize, m: usize, bits: u32) -> Self {
        Self {
            n,
            p,
            q,
            t,
            m,
            bits,
            key_bits: 256,
            share_bits: 256,
            round: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |what: String| Err(ProtocolError::InvalidParams(what));
        if !(0.0..=1.0).contains(&self.p) {
            return bad(format!("p = {} outside [0, 1]", self.p));
        }
        if !(0.0..=1.0).contains(&self.q) {
            return bad(format!("q = {} outside [0, 1]", self.q));
        }
        if self.t < 1 || self.t > self.n {
            return bad(format!("t = {} outside [1, n = {}]", self.t, self.n));
        }
        if self.m < 1 {
            return bad("m must be at least 1".into());
        }
        if !(1..=64).contains(&self.bits) {
            return bad(format!("R = {} outside [1, 64]", self.bits));
        }
        if self.n > u32::MAX as usize {
            return bad(format!("n = {} exceeds client id width", self.n));
        }
        if self.round >= 1 << 24 {
            return bad(format!("round {} exceeds nonce width", self.round));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("client {client}: model has shape (m = {m}, R = {bits}), expected (m = {want_m}, R = {want_bits})")]
    ModelShape {
        client: usize,
        m: usize,
        bits: u32,
        want_m: usize,
        want_bits: u32,
    },
    #[error("expected step {expected}, got step {got}")]
    OutOfOrder { expected: u8, got: u8 },
    #[error("survivors of step {0} are not a subset of the previous survivors")]
    NotNested(u8),
    #[error("client {client} has no public key for peer {peer}")]
    MissingPeerKey { client: usize, peer: usize },
    #[error("client {to} could not authenticate shares from {from}")]
    DecryptionFailed { from: usize, to: usize },
    #[error("cannot unmask: non-informative nodes {non_informative:?}")]
    ReliabilityFailure { non_informative: Vec<usize> },
    #[error("reconstructed secret of client {owner} is inconsistent with its public key")]
    ShareReconstructionMismatch { owner: usize },
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
