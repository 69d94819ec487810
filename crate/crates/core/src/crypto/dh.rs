//! Finite-field Diffie-Hellman over a prime modulus below 2^64.
//!
//! The shared group element is hashed with SHA-256 and truncated to a
//! [`PrgSeed`], which serves both as a PRG seed and as an AES-128 key.

use rand::{CryptoRng, Rng};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::field::is_probable_prime;
use super::{CryptoError, PrgSeed};

/// The largest safe prime below 2^64: `P = 2^64 - 1469`, `(P - 1) / 2` prime.
pub const DEFAULT_MODULUS: u64 = 18_446_744_073_709_550_147;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PublicKey(pub u64);

#[derive(Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecretKey(pub u64);

impl std::fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SecretKey(..)")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyPair {
    pub public: PublicKey,
    pub secret: SecretKey,
}

/// A cyclic subgroup of `(Z/PZ)*` generated by `generator`, of order `order`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DhGroup {
    modulus: u64,
    generator: u64,
    order: u64,
}

impl Default for DhGroup {
    /// Quadratic residues modulo [`DEFAULT_MODULUS`], generated by 4.
    fn default() -> Self {
        Self {
            modulus: DEFAULT_MODULUS,
            generator: 4,
            order: (DEFAULT_MODULUS - 1) / 2,
        }
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

impl DhGroup {
    /// Validates that `modulus` is prime and `generator` has order dividing
    /// `order` (and is not the identity).
    pub fn new(modulus: u64, generator: u64, order: u64) -> Result<Self, CryptoError> {
        if !is_probable_prime(modulus as u128) {
            return Err(CryptoError::InvalidGroup(format!(
                "modulus {modulus} is not prime"
            )));
        }
        if generator <= 1 || generator >= modulus {
            return Err(CryptoError::InvalidGroup(format!(
                "generator {generator} out of range"
            )));
        }
        if order < 2 || (modulus - 1) % order != 0 || pow_mod(generator, order, modulus) != 1 {
            return Err(CryptoError::InvalidGroup(format!(
                "{generator} does not have order dividing {order}"
            )));
        }
        Ok(Self {
            modulus,
            generator,
            order,
        })
    }

    /// `P = 23, g = 5`. Only for tests and worked examples.
    pub fn toy() -> Self {
        Self::new(23, 5, 22).expect("toy group is valid")
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn generator(&self) -> u64 {
        self.generator
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Public key for a given secret exponent.
    pub fn public_for(&self, secret: SecretKey) -> PublicKey {
        PublicKey(pow_mod(self.generator, secret.0, self.modulus))
    }

    pub fn keygen<G: Rng + CryptoRng + ?Sized>(&self, rng: &mut G) -> KeyPair {
        let secret = SecretKey(rng.gen_range(1..self.order));
        KeyPair {
            public: self.public_for(secret),
            secret,
        }
    }

    pub fn validate(&self, element: PublicKey) -> Result<(), CryptoError> {
        let y = element.0;
        if y == 0 || y >= self.modulus || pow_mod(y, self.order, self.modulus) != 1 {
            return Err(CryptoError::InvalidGroupElement(y));
        }
        Ok(())
    }

    /// The raw shared element `peer^own`, before hashing.
    pub fn shared_element(&self, peer: PublicKey, own: SecretKey) -> Result<u64, CryptoError> {
        self.validate(peer)?;
        Ok(pow_mod(peer.0, own.0, self.modulus))
    }

    /// `f(peer_public, own_secret)`: the hashed shared secret.
    pub fn key_agree(&self, peer: PublicKey, own: SecretKey) -> Result<PrgSeed, CryptoError> {
        let shared = self.shared_element(peer, own)?;
        let mut h = Sha256::new();
        h.update(b"ccesa-dh");
        h.update(shared.to_be_bytes());
        Ok(PrgSeed::from_digest(&h.finalize()))
    }

    /// `key_agree` without the subgroup membership check, for keys already
    /// validated on receipt.
    pub(crate) fn key_agree_trusted(&self, peer: PublicKey, own: SecretKey) -> PrgSeed {
        let shared = pow_mod(peer.0, own.0, self.modulus);
        let mut h = Sha256::new();
        h.update(b"ccesa-dh");
        h.update(shared.to_be_bytes());
        PrgSeed::from_digest(&h.finalize())
    }
}
