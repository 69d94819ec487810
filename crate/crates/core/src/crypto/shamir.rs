//! t-out-of-n Shamir secret sharing over a [`PrimeField`].
//!
//! Secrets wider than one field element are split into 64-bit big-endian
//! chunks, each shared with its own polynomial at the same evaluation
//! points. This needs `P > 2^64`, which the default field satisfies.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CryptoError, FieldElement, PrimeField};

pub const CHUNK_BYTES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ShareKind {
    /// A share of a self-mask seed `b_i`.
    Seed,
    /// A share of a masking secret key `s_i^SK`.
    SecretKey,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecretShare {
    pub index: FieldElement,
    pub value: FieldElement,
    pub owner: u32,
    pub kind: ShareKind,
}

/// A share of a multi-chunk secret: one value per chunk at a common point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkedShare {
    pub index: FieldElement,
    pub chunks: Vec<FieldElement>,
    pub owner: u32,
    pub kind: ShareKind,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShamirScheme {
    field: PrimeField,
}

impl ShamirScheme {
    pub fn new(field: PrimeField) -> Self {
        Self { field }
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    /// Shares `secret` at points `1..=n_shares` with threshold `t`.
    pub fn share<G: Rng + ?Sized>(
        &self,
        secret: FieldElement,
        t: usize,
        n_shares: usize,
        owner: u32,
        kind: ShareKind,
        rng: &mut G,
    ) -> Result<Vec<SecretShare>, CryptoError> {
        if t < 1 || t > n_shares {
            return Err(CryptoError::InvalidThreshold { t, n_shares });
        }
        if n_shares as u128 >= self.field.modulus() {
            return Err(CryptoError::FieldTooSmall(n_shares));
        }
        let points: Vec<_> = (1..=n_shares as u128)
            .map(|x| self.field.element(x))
            .collect();
        let values = self.deal(secret, t, &points, rng)?;
        Ok(points
            .into_iter()
            .zip(values)
            .map(|(index, value)| SecretShare {
                index,
                value,
                owner,
                kind,
            })
            .collect())
    }

    /// Evaluates a random degree-`(t-1)` polynomial with constant term
    /// `secret` at each of `points`.
    ///
    /// Unlike [`share`](Self::share) this allows `t > points.len()`; the
    /// resulting shares are valid but can never reconstruct the secret.
    pub fn deal<G: Rng + ?Sized>(
        &self,
        secret: FieldElement,
        t: usize,
        points: &[FieldElement],
        rng: &mut G,
    ) -> Result<Vec<FieldElement>, CryptoError> {
        if t < 1 {
            return Err(CryptoError::InvalidThreshold {
                t,
                n_shares: points.len(),
            });
        }
        check_points(points.iter().copied())?;
        let mut coeffs = Vec::with_capacity(t);
        coeffs.push(secret);
        for _ in 1..t {
            coeffs.push(self.random_element(rng));
        }
        Ok(points.iter().map(|&x| self.horner(&coeffs, x)).collect())
    }

    fn random_element<G: Rng + ?Sized>(&self, rng: &mut G) -> FieldElement {
        // rejection sampling keeps the coefficients exactly uniform
        let bits = self.field.bits();
        let mask = if bits == 128 {
            u128::MAX
        } else {
            (1u128 << bits) - 1
        };
        loop {
            let v = rng.gen::<u128>() & mask;
            if let Ok(e) = self.field.checked_element(v) {
                return e;
            }
        }
    }

    fn horner(&self, coeffs: &[FieldElement], x: FieldElement) -> FieldElement {
        coeffs.iter().rev().fold(FieldElement::ZERO, |acc, &c| {
            self.field.add(self.field.mul(acc, x), c)
        })
    }

    /// Lagrange basis values at zero for the given distinct nonzero points.
    pub fn lagrange_at_zero(
        &self,
        points: &[FieldElement],
    ) -> Result<Vec<FieldElement>, CryptoError> {
        check_points(points.iter().copied())?;
        let f = &self.field;
        let mut numerators = Vec::with_capacity(points.len());
        let mut denominators = Vec::with_capacity(points.len());
        for (k, &xk) in points.iter().enumerate() {
            let mut num = FieldElement::ONE;
            let mut den = FieldElement::ONE;
            for (j, &xj) in points.iter().enumerate() {
                if j != k {
                    num = f.mul(num, xj);
                    den = f.mul(den, f.sub(xj, xk));
                }
            }
            numerators.push(num);
            denominators.push(den);
        }
        f.batch_inv(&mut denominators)
            .expect("distinct points give nonzero denominators");
        Ok(numerators
            .into_iter()
            .zip(denominators)
            .map(|(n, d)| f.mul(n, d))
            .collect())
    }

    /// Interpolates at zero. With `threshold` known, exactly the first
    /// `threshold` shares are used; otherwise all of them.
    pub fn reconstruct(
        &self,
        shares: &[SecretShare],
        threshold: Option<usize>,
    ) -> Result<FieldElement, CryptoError> {
        let used = select(shares, threshold, |s| (s.index, s.owner, s.kind))?;
        for s in used {
            self.field.checked_element(s.index.value())?;
            self.field.checked_element(s.value.value())?;
        }
        let points: Vec<_> = used.iter().map(|s| s.index).collect();
        let basis = self.lagrange_at_zero(&points)?;
        Ok(used
            .iter()
            .zip(basis)
            .fold(FieldElement::ZERO, |acc, (s, l)| {
                self.field.add(acc, self.field.mul(s.value, l))
            }))
    }

    /// Shares a byte string whose length is a multiple of 8.
    pub fn share_bytes<G: Rng + ?Sized>(
        &self,
        secret: &[u8],
        t: usize,
        points: &[FieldElement],
        owner: u32,
        kind: ShareKind,
        rng: &mut G,
    ) -> Result<Vec<ChunkedShare>, CryptoError> {
        let chunks = bytes_to_chunks(secret, &self.field)?;
        let mut out: Vec<ChunkedShare> = points
            .iter()
            .map(|&index| ChunkedShare {
                index,
                chunks: Vec::with_capacity(chunks.len()),
                owner,
                kind,
            })
            .collect();
        for chunk in chunks {
            let values = self.deal(chunk, t, points, rng)?;
            for (share, v) in out.iter_mut().zip(values) {
                share.chunks.push(v);
            }
        }
        Ok(out)
    }

    pub fn reconstruct_bytes(
        &self,
        shares: &[ChunkedShare],
        threshold: Option<usize>,
    ) -> Result<Vec<u8>, CryptoError> {
        let used = select(shares, threshold, |s| (s.index, s.owner, s.kind))?;
        for s in used {
            for v in std::iter::once(&s.index).chain(&s.chunks) {
                self.field.checked_element(v.value())?;
            }
        }
        let width = used[0].chunks.len();
        if used.iter().any(|s| s.chunks.len() != width) {
            return Err(CryptoError::Malformed(
                "shares disagree on chunk count".into(),
            ));
        }
        let points: Vec<_> = used.iter().map(|s| s.index).collect();
        let basis = self.lagrange_at_zero(&points)?;
        let mut out = Vec::with_capacity(width * CHUNK_BYTES);
        for c in 0..width {
            let value = used
                .iter()
                .zip(&basis)
                .fold(FieldElement::ZERO, |acc, (s, &l)| {
                    self.field.add(acc, self.field.mul(s.chunks[c], l))
                });
            let v = u64::try_from(value.value()).map_err(|_| {
                CryptoError::Malformed("reconstructed chunk exceeds 64 bits".into())
            })?;
            out.extend_from_slice(&v.to_be_bytes());
        }
        Ok(out)
    }
}

fn bytes_to_chunks(secret: &[u8], field: &PrimeField) -> Result<Vec<FieldElement>, CryptoError> {
    if field.modulus() <= u64::MAX as u128 {
        return Err(CryptoError::FieldTooSmall(secret.len()));
    }
    if secret.len() % CHUNK_BYTES != 0 {
        return Err(CryptoError::Malformed(format!(
            "secret length {} is not a multiple of {CHUNK_BYTES}",
            secret.len()
        )));
    }
    Ok(secret
        .chunks_exact(CHUNK_BYTES)
        .map(|c| field.element(u64::from_be_bytes(c.try_into().unwrap()) as u128))
        .collect())
}

fn check_points(points: impl Iterator<Item = FieldElement>) -> Result<(), CryptoError> {
    let mut seen = HashSet::new();
    for p in points {
        if p == FieldElement::ZERO {
            return Err(CryptoError::ZeroIndex);
        }
        if !seen.insert(p) {
            return Err(CryptoError::DuplicateIndex(p.value()));
        }
    }
    Ok(())
}

fn select<S, K: PartialEq + Copy>(
    shares: &[S],
    threshold: Option<usize>,
    key: impl Fn(&S) -> (FieldElement, u32, K),
) -> Result<&[S], CryptoError> {
    let need = threshold.unwrap_or(1).max(1);
    if shares.len() < need {
        return Err(CryptoError::InsufficientShares {
            have: shares.len(),
            need,
        });
    }
    let (_, owner, kind) = key(&shares[0]);
    if shares.iter().any(|s| {
        let (_, o, k) = key(s);
        o != owner || k != kind
    }) {
        return Err(CryptoError::MixedOwner);
    }
    check_points(shares.iter().map(|s| key(s).0))?;
    Ok(match threshold {
        Some(t) => &shares[..t],
        None => shares,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng() -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(11)
    }

    fn scheme() -> ShamirScheme {
        ShamirScheme::default()
    }

    #[test]
    fn constant_polynomial() {
        let s = scheme();
        let secret = s.field().element(5);
        let shares = s
            .share(secret, 1, 1, 0, ShareKind::Seed, &mut rng())
            .unwrap();
        assert_eq!(shares.len(), 1);
        assert_eq!(shares[0].value, secret);
    }

    #[test]
    fn two_of_three_any_pair() {
        let s = scheme();
        let secret = s.field().element(5);
        let shares = s
            .share(secret, 2, 3, 0, ShareKind::Seed, &mut rng())
            .unwrap();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let pair = [shares[a].clone(), shares[b].clone()];
            assert_eq!(s.reconstruct(&pair, Some(2)).unwrap(), secret);
        }
    }

    #[test]
    fn zero_secret() {
        let s = scheme();
        let shares = s
            .share(FieldElement::ZERO, 2, 4, 0, ShareKind::Seed, &mut rng())
            .unwrap();
        assert_eq!(
            s.reconstruct(&shares[1..3], None).unwrap(),
            FieldElement::ZERO
        );
    }

    #[test]
    fn error_paths() {
        let s = scheme();
        let secret = s.field().element(9);
        assert_eq!(
            s.share(secret, 0, 3, 0, ShareKind::Seed, &mut rng()),
            Err(CryptoError::InvalidThreshold { t: 0, n_shares: 3 })
        );
        assert_eq!(
            s.share(secret, 4, 3, 0, ShareKind::Seed, &mut rng()),
            Err(CryptoError::InvalidThreshold { t: 4, n_shares: 3 })
        );
        let tiny = ShamirScheme::new(PrimeField::new(5).unwrap());
        assert_eq!(
            tiny.share(
                tiny.field().element(1),
                2,
                5,
                0,
                ShareKind::Seed,
                &mut rng()
            ),
            Err(CryptoError::FieldTooSmall(5))
        );

        let shares = s
            .share(secret, 2, 3, 0, ShareKind::Seed, &mut rng())
            .unwrap();
        let dup = [shares[0].clone(), shares[0].clone()];
        assert!(matches!(
            s.reconstruct(&dup, None),
            Err(CryptoError::DuplicateIndex(1))
        ));
        assert_eq!(
            s.reconstruct(&shares[..1], Some(2)),
            Err(CryptoError::InsufficientShares { have: 1, need: 2 })
        );
        let mut other = shares[1].clone();
        other.owner = 7;
        assert_eq!(
            s.reconstruct(&[shares[0].clone(), other], None),
            Err(CryptoError::MixedOwner)
        );
    }

    #[test]
    fn chunked_roundtrip() {
        let s = scheme();
        let secret: Vec<u8> = (0u8..16).map(|b| b.wrapping_mul(37)).collect();
        let points: Vec<_> = (1..=5u128).map(|x| s.field().element(x)).collect();
        let shares = s
            .share_bytes(&secret, 3, &points, 4, ShareKind::SecretKey, &mut rng())
            .unwrap();
        assert!(shares.iter().all(|sh| sh.chunks.len() == 2));
        assert_eq!(s.reconstruct_bytes(&shares[2..], Some(3)).unwrap(), secret);
        assert!(s.reconstruct_bytes(&shares[..2], Some(3)).is_err());
    }

    #[test]
    fn chunking_needs_a_wide_field() {
        let small = ShamirScheme::new(PrimeField::new(101).unwrap());
        let points = [small.field().element(1)];
        assert!(small
            .share_bytes(&[0; 8], 1, &points, 0, ShareKind::Seed, &mut rng())
            .is_err());
    }

    #[test]
    fn over_threshold_deal_is_allowed() {
        let s = scheme();
        let points = [s.field().element(1), s.field().element(2)];
        let vals = s
            .deal(s.field().element(3), 5, &points, &mut rng())
            .unwrap();
        assert_eq!(vals.len(), 2);
    }
}
