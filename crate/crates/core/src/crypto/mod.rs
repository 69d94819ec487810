//! Cryptographic building blocks: prime-field Shamir sharing, finite-field
//! Diffie-Hellman, AES-GCM authenticated encryption and a hash-based PRG.
//!
//! None of this is hardened against side channels. It exists to execute the
//! aggregation protocol faithfully in simulation.

pub mod ae;
pub mod dh;
pub mod field;
pub mod prg;
pub mod residue;
pub mod shamir;
pub mod wire;

use thiserror::Error;

pub use ae::{ae_decrypt, ae_encrypt, AuthCiphertext, MessageNonce};
pub use dh::{DhGroup, KeyPair, PublicKey, SecretKey};
pub use field::{FieldElement, PrimeField};
pub use prg::{prg_expand, PrgSeed};
pub use residue::ResidueVector;
pub use shamir::{ChunkedShare, SecretShare, ShamirScheme, ShareKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("{0} is not prime")]
    NotPrime(u128),
    #[error("value {0} is not reduced modulo the field prime")]
    OutOfField(u128),
    #[error("invalid threshold {t} for {n_shares} shares")]
    InvalidThreshold { t: usize, n_shares: usize },
    #[error("field too small for {0} distinct evaluation points")]
    FieldTooSmall(usize),
    #[error("duplicate evaluation point {0}")]
    DuplicateIndex(u128),
    #[error("{have} shares supplied, {need} required")]
    InsufficientShares { have: usize, need: usize },
    #[error("shares belong to different secrets")]
    MixedOwner,
    #[error("evaluation point must be nonzero")]
    ZeroIndex,
    #[error("{0} is not an element of the key-agreement group")]
    InvalidGroupElement(u64),
    #[error("invalid group parameters: {0}")]
    InvalidGroup(String),
    #[error("authentication failure")]
    AuthenticationFailure,
    #[error("malformed encoding: {0}")]
    Malformed(String),
}
