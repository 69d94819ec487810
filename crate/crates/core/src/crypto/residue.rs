use std::ops::{AddAssign, SubAssign};

use rand::Rng;
use serde::{Deserialize, Serialize};

/// A length-`m` vector over the integers mod `2^R`.
///
/// Models, masks and masked models all live here. Arithmetic is wrapping,
/// so adding a mask and later subtracting it is exact.
///
/// The in-place operators panic on a shape mismatch.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueVector {
    bits: u32,
    coords: Vec<u64>,
}

fn mask_for(bits: u32) -> u64 {
    if bits == 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

impl ResidueVector {
    pub fn zeros(m: usize, bits: u32) -> Self {
        assert!((1..=64).contains(&bits), "R must be in 1..=64");
        Self {
            bits,
            coords: vec![0; m],
        }
    }

    /// Reduces each coordinate mod `2^bits`.
    pub fn from_coords(coords: Vec<u64>, bits: u32) -> Self {
        assert!((1..=64).contains(&bits), "R must be in 1..=64");
        let mask = mask_for(bits);
        Self {
            bits,
            coords: coords.into_iter().map(|c| c & mask).collect(),
        }
    }

    pub fn random<G: Rng + ?Sized>(m: usize, bits: u32, rng: &mut G) -> Self {
        let mask = mask_for(bits);
        Self::from_coords((0..m).map(|_| rng.gen::<u64>() & mask).collect(), bits)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    fn check_shape(&self, other: &Self) {
        assert_eq!(self.bits, other.bits, "residue width mismatch");
        assert_eq!(self.coords.len(), other.coords.len(), "dimension mismatch");
    }

    /// `self += sign * other`, with `sign` one of `-1, 0, 1`.
    pub fn add_signed(&mut self, other: &Self, sign: i8) {
        match sign {
            1 => *self += other,
            -1 => *self -= other,
            0 => {}
            _ => panic!("sign must be -1, 0 or 1"),
        }
    }
}

impl AddAssign<&ResidueVector> for ResidueVector {
    fn add_assign(&mut self, rhs: &ResidueVector) {
        self.check_shape(rhs);
        let mask = mask_for(self.bits);
        for (a, b) in self.coords.iter_mut().zip(&rhs.coords) {
            *a = a.wrapping_add(*b) & mask;
        }
    }
}

impl SubAssign<&ResidueVector> for ResidueVector {
    fn sub_assign(&mut self, rhs: &ResidueVector) {
        self.check_shape(rhs);
        let mask = mask_for(self.bits);
        for (a, b) in self.coords.iter_mut().zip(&rhs.coords) {
            *a = a.wrapping_sub(*b) & mask;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wraps_modulo_two_to_r() {
        let mut a = ResidueVector::from_coords(vec![65535, 0], 16);
        a += &ResidueVector::from_coords(vec![1, 1], 16);
        assert_eq!(a.coords(), &[0, 1]);
        a -= &ResidueVector::from_coords(vec![1, 2], 16);
        assert_eq!(a.coords(), &[65535, 65535]);
    }

    #[test]
    fn full_width() {
        let mut a = ResidueVector::from_coords(vec![u64::MAX], 64);
        a += &ResidueVector::from_coords(vec![2], 64);
        assert_eq!(a.coords(), &[1]);
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn shape_mismatch_panics() {
        let mut a = ResidueVector::zeros(2, 8);
        a += &ResidueVector::zeros(3, 8);
    }

    proptest! {
        #[test]
        fn add_then_sub_is_identity(bits in 1u32..=64, xs in proptest::collection::vec(any::<u64>(), 1..20), seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = ResidueVector::from_coords(xs, bits);
            let b = ResidueVector::random(a.dim(), bits, &mut rng);
            let mut c = a.clone();
            c += &b;
            c -= &b;
            prop_assert_eq!(c, a);
        }
    }
}
