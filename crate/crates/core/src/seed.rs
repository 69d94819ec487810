//! Derivation of independent random streams from one master seed.
//!
//! Every stream is `ChaCha20` keyed by `SHA-256(domain || master || index)`,
//! so streams never depend on the order in which they are created.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub fn derive_seed(master: u64, domain: &str, index: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((domain.len() as u32).to_be_bytes());
    h.update(domain.as_bytes());
    h.update(master.to_be_bytes());
    h.update(index.to_be_bytes());
    h.finalize().into()
}

pub fn derive_rng(master: u64, domain: &str, index: u64) -> ChaCha20Rng {
    ChaCha20Rng::from_seed(derive_seed(master, domain, index))
}

/// A 64-bit child seed, for handing to APIs that take a master seed.
pub fn derive_u64(master: u64, domain: &str, index: u64) -> u64 {
    let s = derive_seed(master, domain, index);
    u64::from_be_bytes(s[..8].try_into().expect("32-byte digest"))
}
