//! Protocol messages and their wire encoding.
//!
//! Every message is a one-byte tag followed by its body:
//!
//! | tag | message          | body                                               |
//! |-----|------------------|----------------------------------------------------|
//! | 0   | `AdvertiseKeys`  | client `u32`, channel key, masking key             |
//! | 1   | `KeyBundle`      | count `u32`, that many advertisements              |
//! | 2   | `EncryptedShares`| from `u32`, to `u32`, `AuthCiphertext`             |
//! | 3   | `MaskedModel`    | client `u32`, `ResidueVector`                      |
//! | 4   | `SurvivorList`   | count `u32`, client ids `u32`..                    |
//! | 5   | `ShareResponse`  | client `u32`, count `u32`, `ChunkedShare`..        |
//!
//! Two sizes are tracked per message. The encoded byte length is exact. The
//! accounted bit size uses the abstract cost model: `a_K` per public key,
//! `a_S` per secret share, `mR` per model, nothing for survivor lists.

use serde::{Deserialize, Serialize};

use super::ProtocolParams;
use crate::crypto::wire::{Reader, Wire};
use crate::crypto::{AuthCiphertext, ChunkedShare, CryptoError, PublicKey, ResidueVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    Server,
    Client(u32),
}

/// `(i, c_i^PK, s_i^PK)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyAdvert {
    pub client: u32,
    pub channel: PublicKey,
    pub masking: PublicKey,
}

/// One encrypted share pair `(b_ij, s^SK_ij)` from owner `from` to holder `to`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncryptedShares {
    pub from: u32,
    pub to: u32,
    pub ciphertext: AuthCiphertext,
}

/// A holder's Step-3 reply: at most one share per owner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareResponse {
    pub client: u32,
    pub shares: Vec<ChunkedShare>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Message {
    AdvertiseKeys(KeyAdvert),
    KeyBundle(Vec<KeyAdvert>),
    EncryptedShares(EncryptedShares),
    MaskedModel { client: u32, model: ResidueVector },
    SurvivorList(Vec<u32>),
    ShareResponse(ShareResponse),
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::AdvertiseKeys(_) => "advertise-keys",
            Message::KeyBundle(_) => "key-bundle",
            Message::EncryptedShares(_) => "encrypted-shares",
            Message::MaskedModel { .. } => "masked-model",
            Message::SurvivorList(_) => "survivor-list",
            Message::ShareResponse(_) => "share-response",
        }
    }

    pub fn accounted_bits(&self, params: &ProtocolParams) -> u64 {
        match self {
            Message::AdvertiseKeys(_) => 2 * params.key_bits,
            Message::KeyBundle(entries) => 2 * params.key_bits * entries.len() as u64,
            Message::EncryptedShares(_) => 2 * params.share_bits,
            Message::MaskedModel { model, .. } => model.dim() as u64 * model.bits() as u64,
            Message::SurvivorList(_) => 0,
            Message::ShareResponse(r) => params.share_bits * r.shares.len() as u64,
        }
    }
}

impl Wire for KeyAdvert {
    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.client.to_be_bytes());
        self.channel.encode(out);
        self.masking.encode(out);
    }

    fn decode(input: &mut Reader<'_>) -> Result<Self, CryptoError> {
        Ok(KeyAdvert {
            client: input.u32()?,
            channel: PublicKey::decode(input)?,
            masking: PublicKey::decode(input)?,
        })
    }

    fn encoded_len(&self) -> usize {
        20
    }
}

fn encode_seq<T: Wire>(items: &[T], out: &mut Vec<u8>) {
    out.extend_from_slice(&(items.len() as u32).to_be_bytes());
    for item in items {
        item.encode(out);
    }
}

fn decode_seq<T: Wire>(input: &mut Reader<'_>) -> Result<Vec<T>, CryptoError> {
    let count = input.u32()? as usize;
    // every element takes at least one byte
    if count > input.remaining() {
        return Err(CryptoError::Malformed(
            "sequence count exceeds input".into(),
        ));
    }
    (0..count).map(|_| T::decode(input)).collect()
}

impl Wire for u32 {
    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_be_bytes());
    }

    fn decode(input: &mut Reader<'_>) -> Result<Self, CryptoError> {
        input.u32()
    }

    fn encoded_len(&self) -> usize {
        4
    }
}

impl Wire for Message {
    fn encode(&self, out: &mut Vec<u8>) {
        match self {
            Message::AdvertiseKeys(a) => {
                out.push(0);
                a.encode(out);
            }
            Message::KeyBundle(entries) => {
                out.push(1);
                encode_seq(entries, out);
            }
            Message::EncryptedShares(e) => {
                out.push(2);
                out.extend_from_slice(&e.from.to_be_bytes());
                out.extend_from_slice(&e.to.to_be_bytes());
                e.ciphertext.encode(out);
            }
            Message::MaskedModel { client, model } => {
                out.push(3);
                out.extend_from_slice(&client.to_be_bytes());
                model.encode(out);
            }
            Message::SurvivorList(ids) => {
                out.push(4);
                encode_seq(ids, out);
            }
            Message::ShareResponse(r) => {
                out.push(5);
                out.extend_from_slice(&r.client.to_be_bytes());
                encode_seq(&r.shares, out);
            }
        }
    }

    fn decode(input: &mut Reader<'_>) -> Result<Self, CryptoError> {
        Ok(match input.u8()? {
            0 => Message::AdvertiseKeys(KeyAdvert::decode(input)?),
            1 => Message::KeyBundle(decode_seq(input)?),
            2 => Message::EncryptedShares(EncryptedShares {
                from: input.u32()?,
                to: input.u32()?,
                ciphertext: AuthCiphertext::decode(input)?,
            }),
            3 => Message::MaskedModel {
                client: input.u32()?,
                model: ResidueVector::decode(input)?,
            },
            4 => Message::SurvivorList(decode_seq(input)?),
            5 => Message::ShareResponse(ShareResponse {
                client: input.u32()?,
                shares: decode_seq(input)?,
            }),
            tag => return Err(CryptoError::Malformed(format!("message tag {tag}"))),
        })
    }

    fn encoded_len(&self) -> usize {
        1 + match self {
            Message::AdvertiseKeys(_) => 20,
            Message::KeyBundle(entries) => 4 + 20 * entries.len(),
            Message::EncryptedShares(e) => 8 + e.ciphertext.encoded_len(),
            Message::MaskedModel { model, .. } => 4 + model.encoded_len(),
            Message::SurvivorList(ids) => 4 + 4 * ids.len(),
            Message::ShareResponse(r) => 8 + r.shares.iter().map(Wire::encoded_len).sum::<usize>(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{PrimeField, ShareKind};
    use proptest::prelude::*;

    fn sample_messages() -> Vec<Message> {
        let f = PrimeField::mersenne127();
        let advert = KeyAdvert {
            client: 3,
            channel: PublicKey(11),
            masking: PublicKey(12),
        };
        vec![
            Message::AdvertiseKeys(advert),
            Message::KeyBundle(vec![advert, advert]),
            Message::KeyBundle(vec![]),
            Message::EncryptedShares(EncryptedShares {
                from: 1,
                to: 2,
                ciphertext: AuthCiphertext {
                    nonce: [7; 12],
                    body: vec![1, 2, 3],
                    tag: [9; 16],
                },
            }),
            Message::MaskedModel {
                client: 4,
                model: ResidueVector::from_coords(vec![1, 2, 65535], 16),
            },
            Message::SurvivorList(vec![0, 2, 5]),
            Message::ShareResponse(ShareResponse {
                client: 2,
                shares: vec![ChunkedShare {
                    index: f.element(3),
                    chunks: vec![f.element(5), f.element(6)],
                    owner: 1,
                    kind: ShareKind::Seed,
                }],
            }),
        ]
    }

    #[test]
    fn sizes_match_encoding() {
        for msg in sample_messages() {
            let bytes = msg.to_bytes();
            assert_eq!(bytes.len(), msg.encoded_len(), "{}", msg.kind());
            assert_eq!(Message::from_bytes(&bytes).unwrap(), msg);
        }
    }

    #[test]
    fn accounted_bits_follow_cost_model() {
        let params = ProtocolParams {
            key_bits: 100,
            share_bits: 10,
            ..ProtocolParams::new(5, 1.0, 0.0, 2, 3, 16)
        };
        let bits: Vec<u64> = sample_messages()
            .iter()
            .map(|m| m.accounted_bits(&params))
            .collect();
        assert_eq!(bits, vec![200, 400, 0, 20, 48, 0, 10]);
    }

    #[test]
    fn unknown_tag_rejected() {
        assert!(Message::from_bytes(&[9]).is_err());
        assert!(Message::from_bytes(&[1, 0xff, 0xff, 0xff, 0xff]).is_err());
    }

    proptest! {
        #[test]
        fn survivor_list_roundtrip(ids in proptest::collection::vec(any::<u32>(), 0..50)) {
            let msg = Message::SurvivorList(ids);
            prop_assert_eq!(msg.to_bytes().len(), msg.encoded_len());
            prop_assert_eq!(Message::from_bytes(&msg.to_bytes()).unwrap(), msg);
        }
    }
}
