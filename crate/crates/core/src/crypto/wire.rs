//! Byte-level encodings for everything that crosses the wire.
//!
//! All integers are big-endian. Fixed-width scalars carry no prefix;
//! variable-length sequences are prefixed with a `u32` element count.
//!
//! | item              | layout                                                        |
//! |-------------------|---------------------------------------------------------------|
//! | `PublicKey`       | `u64`                                                         |
//! | `FieldElement`    | `u128`                                                        |
//! | `ShareKind`       | `u8` (0 = seed, 1 = secret key)                               |
//! | `ChunkedShare`    | kind, owner `u32`, index `u128`, count `u32`, chunks `u128`.. |
//! | `AuthCiphertext`  | nonce `[u8; 12]`, body length `u32`, body, tag `[u8; 16]`     |
//! | `ResidueVector`   | R `u8`, m `u32`, m coordinates of `ceil(R/8)` bytes each      |
//!
//! The plaintext sealed inside a share ciphertext is the seed share
//! followed by the secret-key share, both as `ChunkedShare`.

use super::prg::bytes_per_coord;
use super::{
    AuthCiphertext, ChunkedShare, CryptoError, FieldElement, PublicKey, ResidueVector, ShareKind,
};

pub trait Wire: Sized {
    fn encode(&self, out: &mut Vec<u8>);
    fn decode(input: &mut Reader<'_>) -> Result<Self, CryptoError>;

    fn encoded_len(&self) -> usize {
        let mut buf = Vec::new();
        self.encode(&mut buf);
        buf.len()
    }

    fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.encode(&mut buf);
        buf
    }

    /// Decodes a value that must consume the whole input.
    fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        let mut r = Reader::new(bytes);
        let v = Self::decode(&mut r)?;
        if !r.is_empty() {
            return Err(CryptoError::Malformed(format!(
                "{} trailing bytes",
                r.remaining()
            )));
        }
        Ok(v)
    }
}

pub struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf }
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn remaining(&self) -> usize {
        self.buf.len()
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], CryptoError> {
        if self.buf.len() < n {
            return Err(CryptoError::Malformed(format!(
                "wanted {n} bytes, {} left",
                self.buf.len()
            )));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    pub fn array<const N: usize>(&mut self) -> Result<[u8; N], CryptoError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    pub fn u8(&mut self) -> Result<u8, CryptoError> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32, CryptoError> {
        Ok(u32::from_be_bytes(self.array()?))
    }

    pub fn u64(&mut self) -> Result<u64, CryptoError> {
        Ok(u64::from_be_bytes(self.array()?))
    }

    pub fn u128(&mut self) -> Result<u128, CryptoError> {
        Ok(u128::from_be_bytes(self.array()?))
    }
}

impl Wire for PublicKey {
    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.0.to_be_bytes());
    }

    fn decode(input: &mut Reader<'_>) -> Result<Self, CryptoError> {
        Ok(PublicKey(input.u64()?))
    }

    fn encoded_len(&self) -> usize {
        8
    }
}

fn encode_field(x: FieldElement, out: &mut Vec<u8>) {
    out.extend_from_slice(&x.value().to_be_bytes());
}

impl Wire for ChunkedShare {
    fn encode(&self, out: &mut Vec<u8>) {
        out.push(match self.kind {
            ShareKind::Seed => 0,
            ShareKind::SecretKey => 1,
        });
        out.extend_from_slice(&self.owner.to_be_bytes());
        encode_field(self.index, out);
        out.extend_from_slice(&(self.chunks.len() as u32).to_be_bytes());
        for &c in &self.chunks {
            encode_field(c, out);
        }
    }

    /// Field elements are decoded unreduced; the receiver checks them
    /// against its own field when interpolating.
    fn decode(input: &mut Reader<'_>) -> Result<Self, CryptoError> {
        let kind = match input.u8()? {
            0 => ShareKind::Seed,
            1 => ShareKind::SecretKey,
            k => return Err(CryptoError::Malformed(format!("share kind {k}"))),
        };
        let owner = input.u32()?;
        let index = raw_field(input.u128()?);
        let count = input.u32()? as usize;
        if count * 16 > input.remaining() {
            return Err(CryptoError::Malformed("chunk count exceeds input".into()));
        }
        let chunks = (0..count)
            .map(|_| input.u128().map(raw_field))
            .collect::<Result<_, _>>()?;
        Ok(ChunkedShare {
            index,
            chunks,
            owner,
            kind,
        })
    }

    fn encoded_len(&self) -> usize {
        1 + 4 + 16 + 4 + 16 * self.chunks.len()
    }
}

fn raw_field(v: u128) -> FieldElement {
    FieldElement::from_raw(v)
}

impl Wire for AuthCiphertext {
    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.nonce);
        out.extend_from_slice(&(self.body.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.body);
        out.extend_from_slice(&self.tag);
    }

    fn decode(input: &mut Reader<'_>) -> Result<Self, CryptoError> {
        let nonce = input.array()?;
        let len = input.u32()? as usize;
        let body = input.take(len)?.to_vec();
        let tag = input.array()?;
        Ok(AuthCiphertext { nonce, body, tag })
    }

    fn encoded_len(&self) -> usize {
        12 + 4 + self.body.len() + 16
    }
}

impl Wire for ResidueVector {
    fn encode(&self, out: &mut Vec<u8>) {
        let width = bytes_per_coord(self.bits());
        out.push(self.bits() as u8);
        out.extend_from_slice(&(self.dim() as u32).to_be_bytes());
        for &c in self.coords() {
            out.extend_from_slice(&c.to_be_bytes()[8 - width..]);
        }
    }

    fn decode(input: &mut Reader<'_>) -> Result<Self, CryptoError> {
        let bits = input.u8()? as u32;
        if !(1..=64).contains(&bits) {
            return Err(CryptoError::Malformed(format!("residue width {bits}")));
        }
        let m = input.u32()? as usize;
        let width = bytes_per_coord(bits);
        let raw = input.take(m * width)?;
        let coords = raw
            .chunks_exact(width)
            .map(|chunk| chunk.iter().fold(0u64, |acc, &b| (acc << 8) | b as u64))
            .collect();
        Ok(ResidueVector::from_coords(coords, bits))
    }

    fn encoded_len(&self) -> usize {
        1 + 4 + self.dim() * bytes_per_coord(self.bits())
    }
}

/// The plaintext of one encrypted share pair `(b_ij, s^SK_ij)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharePair {
    pub seed: ChunkedShare,
    pub secret_key: ChunkedShare,
}

impl Wire for SharePair {
    fn encode(&self, out: &mut Vec<u8>) {
        self.seed.encode(out);
        self.secret_key.encode(out);
    }

    fn decode(input: &mut Reader<'_>) -> Result<Self, CryptoError> {
        Ok(SharePair {
            seed: ChunkedShare::decode(input)?,
            secret_key: ChunkedShare::decode(input)?,
        })
    }

    fn encoded_len(&self) -> usize {
        self.seed.encoded_len() + self.secret_key.encoded_len()
    }
}
