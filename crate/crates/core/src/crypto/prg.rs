//! Seed expansion: SHA-256 over `seed || counter` in counter mode.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ResidueVector;

pub const SEED_BYTES: usize = 16;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrgSeed(pub [u8; SEED_BYTES]);

impl std::fmt::Debug for PrgSeed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PrgSeed(")?;
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        write!(f, ")")
    }
}

impl PrgSeed {
    pub fn random<G: RngCore + CryptoRng + ?Sized>(rng: &mut G) -> Self {
        let mut bytes = [0u8; SEED_BYTES];
        rng.fill_bytes(&mut bytes);
        Self(bytes)
    }

    /// Truncates a digest (or any byte string of at least 16 bytes).
    pub fn from_digest(digest: &[u8]) -> Self {
        let mut bytes = [0u8; SEED_BYTES];
        bytes.copy_from_slice(&digest[..SEED_BYTES]);
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; SEED_BYTES] {
        &self.0
    }
}

/// Bytes of keystream consumed per coordinate.
pub fn bytes_per_coord(bits: u32) -> usize {
    bits.div_ceil(8) as usize
}

/// Deterministically expands `seed` into `m` coordinates of `bits` bits.
///
/// Each coordinate takes the next `ceil(bits / 8)` keystream bytes read
/// big-endian, masked to `bits`.
pub fn prg_expand(seed: &PrgSeed, m: usize, bits: u32) -> ResidueVector {
    assert!((1..=64).contains(&bits), "R must be in 1..=64");
    let width = bytes_per_coord(bits);
    let needed = m * width;
    let mut stream = Vec::with_capacity(needed.div_ceil(32) * 32);
    let mut counter: u64 = 0;
    let mut prefix = Sha256::new();
    prefix.update(b"ccesa-prg");
    prefix.update(seed.0);
    while stream.len() < needed {
        let mut h = prefix.clone();
        h.update(counter.to_be_bytes());
        stream.extend_from_slice(&h.finalize());
        counter += 1;
    }
    let coords = stream[..needed]
        .chunks_exact(width)
        .map(|chunk| chunk.iter().fold(0u64, |acc, &b| (acc << 8) | b as u64))
        .collect();
    ResidueVector::from_coords(coords, bits)
}
