//! Packed bit vectors.
//!
//! All payloads are byte-packed most-significant-bit first within a byte and
//! XORed bytewise. The packing is part of the wire format, so it is pinned
//! here rather than left to the backing crate's defaults. Trailing bits of
//! the final byte are kept zero (canonical form), which makes the raw byte
//! view directly serializable.

use bitvec::prelude::{BitVec, Msb0};
use rand_core::RngCore;

#[derive(Clone, PartialEq, Eq)]
pub struct Bits {
    inner: BitVec<u8, Msb0>,
}

impl Bits {
    pub fn zeros(bit_len: usize) -> Self {
        Self {
            inner: BitVec::repeat(false, bit_len),
        }
    }

    /// Interprets the leading `bit_len` bits of `bytes`, MSB-first.
    ///
    /// Panics if `bytes` holds fewer than `bit_len` bits.
    pub fn from_bytes(bytes: &[u8], bit_len: usize) -> Self {
        assert!(
            bytes.len() * 8 >= bit_len,
            "byte buffer shorter than bit length"
        );
        let mut inner = BitVec::<u8, Msb0>::from_slice(bytes);
        inner.truncate(bit_len);
        inner.set_uninitialized(false);
        Self { inner }
    }

    pub fn random(rng: &mut dyn RngCore, bit_len: usize) -> Self {
        let mut buf = vec![0u8; bit_len.div_ceil(8)];
        rng.fill_bytes(&mut buf);
        Self::from_bytes(&buf, bit_len)
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    pub fn bit(&self, index: usize) -> bool {
        self.inner[index]
    }

    pub fn set(&mut self, index: usize, value: bool) {
        self.inner.set(index, value);
    }

    /// Bytewise XOR; both operands must have the same bit length.
    pub fn xor_with(&mut self, other: &Bits) {
        assert_eq!(self.len(), other.len(), "xor of unequal bit lengths");
        let rhs = other.inner.as_raw_slice();
        for (a, b) in self.inner.as_raw_mut_slice().iter_mut().zip(rhs) {
            *a ^= *b;
        }
    }

    pub fn xored(&self, other: &Bits) -> Bits {
        let mut out = self.clone();
        out.xor_with(other);
        out
    }

    /// Copies `len` bits starting at `start` into a fresh vector.
    pub fn slice(&self, start: usize, len: usize) -> Bits {
        let mut inner = BitVec::from_bitslice(&self.inner[start..start + len]);
        // from_bitslice keeps the source head offset; realign so the raw
        // byte view starts at bit 0 (the canonical form xor relies on).
        inner.force_align();
        inner.set_uninitialized(false);
        Self { inner }
    }

    pub fn push_bits(&mut self, other: &Bits) {
        self.inner.extend_from_bitslice(&other.inner);
        self.inner.set_uninitialized(false);
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Bits>) -> Bits {
        let mut out = Bits::zeros(0);
        for part in parts {
            out.push_bits(part);
        }
        out
    }

    /// Canonical byte view: `ceil(len/8)` bytes, final byte zero-padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.inner.as_raw_slice().to_vec()
    }

    /// Index of the first differing bit, if any. Length differences count
    /// from the shorter length.
    pub fn first_difference(&self, other: &Bits) -> Option<usize> {
        let common = self.len().min(other.len());
        (0..common)
            .find(|&i| self.bit(i) != other.bit(i))
            .or_else(|| (self.len() != other.len()).then_some(common))
    }
}

impl std::fmt::Debug for Bits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Bits[{}](", self.len())?;
        for i in 0..self.len().min(64) {
            write!(f, "{}", if self.bit(i) { '1' } else { '0' })?;
        }
        if self.len() > 64 {
            write!(f, "…")?;
        }
        write!(f, ")")
    }
}
