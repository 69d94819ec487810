//! Prime-field arithmetic for secret sharing.
//!
//! The modulus is chosen at runtime so the same code serves the default
//! 127-bit Mersenne field and the tiny fields used for exhaustive checks.

use serde::{Deserialize, Serialize};

use super::CryptoError;

/// The Mersenne prime 2^127 - 1, the default sharing field.
pub const MERSENNE_127: u128 = (1u128 << 127) - 1;

/// An element of a [`PrimeField`], reduced into `[0, P)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FieldElement(u128);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn value(self) -> u128 {
        self.0
    }

    /// Unreduced value straight off the wire; checked before arithmetic.
    pub(crate) fn from_raw(v: u128) -> Self {
        FieldElement(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reduction {
    /// Modulus below 2^64; products fit in a `u128`.
    Small,
    /// 2^127 - 1.
    Mersenne127,
    /// Anything else; products go through a double-and-add ladder.
    Generic,
}

/// A prime field `Z/PZ` with `P < 2^128`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u128", into = "u128")]
pub struct PrimeField {
    modulus: u128,
    #[serde(skip)]
    reduction: Reduction,
}

impl Default for PrimeField {
    fn default() -> Self {
        Self::mersenne127()
    }
}

impl TryFrom<u128> for PrimeField {
    type Error = CryptoError;

    fn try_from(modulus: u128) -> Result<Self, Self::Error> {
        Self::new(modulus)
    }
}

impl From<PrimeField> for u128 {
    fn from(field: PrimeField) -> u128 {
        field.modulus
    }
}

impl PrimeField {
    /// Builds a field, rejecting composite moduli.
    pub fn new(modulus: u128) -> Result<Self, CryptoError> {
        if !is_probable_prime(modulus) {
            return Err(CryptoError::NotPrime(modulus));
        }
        let reduction = if modulus == MERSENNE_127 {
            Reduction::Mersenne127
        } else if modulus < (1u128 << 64) {
            Reduction::Small
        } else {
            Reduction::Generic
        };
        Ok(Self { modulus, reduction })
    }

    pub fn mersenne127() -> Self {
        Self {
            modulus: MERSENNE_127,
            reduction: Reduction::Mersenne127,
        }
    }

    pub fn modulus(&self) -> u128 {
        self.modulus
    }

    /// Number of bits needed to hold any element.
    pub fn bits(&self) -> u32 {
        128 - self.modulus.leading_zeros()
    }

    /// Reduces an arbitrary integer into the field.
    pub fn element(&self, value: u128) -> FieldElement {
        FieldElement(value % self.modulus)
    }

    /// Accepts `value` only if it is already reduced.
    pub fn checked_element(&self, value: u128) -> Result<FieldElement, CryptoError> {
        if value < self.modulus {
            Ok(FieldElement(value))
        } else {
            Err(CryptoError::OutOfField(value))
        }
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let (sum, overflow) = a.0.overflowing_add(b.0);
        if overflow || sum >= self.modulus {
            FieldElement(sum.wrapping_sub(self.modulus))
        } else {
            FieldElement(sum)
        }
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 >= b.0 {
            FieldElement(a.0 - b.0)
        } else {
            FieldElement(self.modulus - (b.0 - a.0))
        }
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        if a.0 == 0 {
            a
        } else {
            FieldElement(self.modulus - a.0)
        }
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match self.reduction {
            Reduction::Small => FieldElement((a.0 * b.0) % self.modulus),
            Reduction::Mersenne127 => FieldElement(mul_mersenne127(a.0, b.0)),
            Reduction::Generic => {
                let mut acc = FieldElement::ZERO;
                let mut base = a;
                let mut k = b.0;
                while k > 0 {
                    if k & 1 == 1 {
                        acc = self.add(acc, base);
                    }
                    base = self.add(base, base);
                    k >>= 1;
                }
                acc
            }
        }
    }

    pub fn pow(&self, base: FieldElement, mut exp: u128) -> FieldElement {
        let mut acc = FieldElement::ONE;
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: FieldElement) -> Option<FieldElement> {
        if a.0 == 0 {
            return None;
        }
        // Bezout coefficients stay reduced in the field; they would overflow
        // i128 for moduli near 2^127.
        let (mut r0, mut r1) = (self.modulus, a.0);
        let (mut s0, mut s1) = (FieldElement::ZERO, FieldElement::ONE);
        while r1 != 0 {
            let q = r0 / r1;
            let r2 = r0 - q * r1;
            let s2 = self.sub(s0, self.mul(self.element(q), s1));
            r0 = r1;
            r1 = r2;
            s0 = s1;
            s1 = s2;
        }
        debug_assert_eq!(r0, 1);
        Some(s0)
    }

    /// Inverts every element in place with a single field inversion.
    pub fn batch_inv(&self, values: &mut [FieldElement]) -> Option<()> {
        let mut prefix = Vec::with_capacity(values.len());
        let mut acc = FieldElement::ONE;
        for v in values.iter() {
            prefix.push(acc);
            acc = self.mul(acc, *v);
        }
        let mut inv = self.inv(acc)?;
        for (v, before) in values.iter_mut().zip(prefix).rev() {
            let next = self.mul(inv, *v);
            *v = self.mul(inv, before);
            inv = next;
        }
        Some(())
    }
}

fn mul_mersenne127(a: u128, b: u128) -> u128 {
    let (a_hi, a_lo) = (a >> 64, a & u64::MAX as u128);
    let (b_hi, b_lo) = (b >> 64, b & u64::MAX as u128);
    // 256-bit product as hi:lo
    let ll = a_lo * b_lo;
    let lh = a_lo * b_hi;
    let hl = a_hi * b_lo;
    let hh = a_hi * b_hi;
    let (mid, mid_carry) = lh.overflowing_add(hl);
    let (lo, c1) = ll.overflowing_add(mid << 64);
    let hi = hh + (mid >> 64) + ((mid_carry as u128) << 64) + c1 as u128;
    // x = hi * 2^128 + lo, and 2^127 == 1
    let folded_lo = lo & MERSENNE_127;
    let folded_hi = (hi << 1) | (lo >> 127);
    let mut r = folded_lo + folded_hi;
    // both summands < 2^127 so r < 2^128
    r = (r & MERSENNE_127) + (r >> 127);
    if r >= MERSENNE_127 {
        r -= MERSENNE_127;
    }
    r
}

fn mul_mod_u128(a: u128, b: u128, m: u128) -> u128 {
    if m < (1u128 << 64) {
        return (a * b) % m;
    }
    if m == MERSENNE_127 {
        return mul_mersenne127(a, b);
    }
    let mut acc: u128 = 0;
    let mut base = a % m;
    let mut k = b;
    while k > 0 {
        if k & 1 == 1 {
            acc = add_mod_u128(acc, base, m);
        }
        base = add_mod_u128(base, base, m);
        k >>= 1;
    }
    acc
}

fn add_mod_u128(a: u128, b: u128, m: u128) -> u128 {
    let (s, o) = a.overflowing_add(b);
    if o || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

fn pow_mod_u128(mut base: u128, mut exp: u128, m: u128) -> u128 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u128(acc, base, m);
        }
        base = mul_mod_u128(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Miller-Rabin over the first 24 prime bases. Deterministic below 2^81,
/// overwhelmingly reliable above.
pub fn is_probable_prime(n: u128) -> bool {
    const BASES: [u128; 24] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    ];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d_shift = (n - 1).trailing_zeros();
    let d = (n - 1) >> d_shift;
    'witness: for a in BASES {
        let mut x = pow_mod_u128(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..d_shift {
            x = mul_mod_u128(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
