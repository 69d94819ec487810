//! AES-128-GCM with deterministic per-message nonces.

use aes_gcm::aead::{Aead, KeyInit};
use aes_gcm::{Aes128Gcm, Nonce};
use serde::{Deserialize, Serialize};

use super::{CryptoError, PrgSeed};

pub const NONCE_BYTES: usize = 12;
pub const TAG_BYTES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthCiphertext {
    pub nonce: [u8; NONCE_BYTES],
    pub body: Vec<u8>,
    pub tag: [u8; TAG_BYTES],
}

/// The nonce for a message identified by `(sender, receiver, round, step)`.
///
/// Layout: sender (4 bytes) | receiver (4) | round (3, low bits) | step (1),
/// all big-endian. Unique as long as rounds stay below 2^24.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageNonce {
    pub sender: u32,
    pub receiver: u32,
    pub round: u32,
    pub step: u8,
}

impl MessageNonce {
    pub fn to_bytes(self) -> [u8; NONCE_BYTES] {
        let mut out = [0u8; NONCE_BYTES];
        out[..4].copy_from_slice(&self.sender.to_be_bytes());
        out[4..8].copy_from_slice(&self.receiver.to_be_bytes());
        out[8..11].copy_from_slice(&self.round.to_be_bytes()[1..]);
        out[11] = self.step;
        out
    }
}

pub fn ae_encrypt(key: &PrgSeed, plaintext: &[u8], nonce: [u8; NONCE_BYTES]) -> AuthCiphertext {
    let cipher = Aes128Gcm::new_from_slice(key.as_bytes()).expect("16-byte key");
    let mut sealed = cipher
        .encrypt(&Nonce::from(nonce), plaintext)
        .expect("AES-GCM encryption of an in-memory buffer cannot fail");
    let tag_start = sealed.len() - TAG_BYTES;
    let mut tag = [0u8; TAG_BYTES];
    tag.copy_from_slice(&sealed[tag_start..]);
    sealed.truncate(tag_start);
    AuthCiphertext {
        nonce,
        body: sealed,
        tag,
    }
}

pub fn ae_decrypt(key: &PrgSeed, ciphertext: &AuthCiphertext) -> Result<Vec<u8>, CryptoError> {
    let cipher = Aes128Gcm::new_from_slice(key.as_bytes()).expect("16-byte key");
    let mut sealed = Vec::with_capacity(ciphertext.body.len() + TAG_BYTES);
    sealed.extend_from_slice(&ciphertext.body);
    sealed.extend_from_slice(&ciphertext.tag);
    cipher
        .decrypt(&Nonce::from(ciphertext.nonce), sealed.as_slice())
        .map_err(|_| CryptoError::AuthenticationFailure)
}
