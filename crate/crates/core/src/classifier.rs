//! Classifiers over a finite universe and their combinatorial primitives.
//!
//! A classifier is a {0,1}-labeling of the individuals `0..n-1`; it doubles
//! as a two-sided partition of the universe (zeros side / ones side). Bits
//! are packed into a `u64`, so `n <= 64`. The canonical text form is a
//! bitstring with index 0 leftmost, e.g. `"00101"`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_UNIVERSE: usize = 64;

/// A finite universe of `n` individuals, identified with indices `0..n-1`
/// in a fixed canonical ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Universe {
    n: usize,
}

impl Universe {
    /// Pair-based costs divide by C(n,2), so `n >= 2` is required.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidUniverse {
                n,
                reason: "pair-based costs need at least two individuals".into(),
            });
        }
        if n > MAX_UNIVERSE {
            return Err(Error::InvalidUniverse {
                n,
                reason: format!("bit-packed representation caps n at {MAX_UNIVERSE}"),
            });
        }
        Ok(Universe { n })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Number of unordered pairs, C(n,2).
    pub fn pair_count(&self) -> u64 {
        let n = self.n as u64;
        n * (n - 1) / 2
    }

    /// All 2^n classifiers in lexicographic bitstring order.
    pub fn classifiers(&self) -> impl Iterator<Item = Classifier> + '_ {
        let n = self.n;
        (0u64..(1u64 << n)).map(move |key| Classifier::from_lex_key(n, key))
    }

    pub fn classifier_count(&self) -> u64 {
        1u64 << self.n
    }
}

/// A binary classifier over a universe of `n` individuals.
///
/// Bit `i` is the classification of individual `i`. The zeros side and ones
/// side are derived views of one bit sequence, never independent state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Classifier {
    n: usize,
    bits: u64,
}

impl Classifier {
    pub fn from_bits(n: usize, bits: u64) -> Result<Self> {
        if !(2..=MAX_UNIVERSE).contains(&n) {
            return Err(Error::InvalidUniverse {
                n,
                reason: "classifier length must be in 2..=64".into(),
            });
        }
        if n < 64 && bits >> n != 0 {
            return Err(Error::Parse(format!("bits 0x{bits:x} exceed length {n}")));
        }
        Ok(Classifier { n, bits })
    }

    /// Builds from a lexicographic key: bit `i` of the classifier is bit
    /// `n-1-i` of `key`, so numeric order on keys equals bitstring order.
    fn from_lex_key(n: usize, key: u64) -> Self {
        let bits = key.reverse_bits() >> (64 - n);
        Classifier { n, bits }
    }

    fn lex_key(&self) -> u64 {
        self.bits.reverse_bits() >> (64 - self.n)
    }

    pub fn from_ones(n: usize, ones: &[usize]) -> Result<Self> {
        let mut bits = 0u64;
        for &i in ones {
            if i >= n {
                return Err(Error::Parse(format!("index {i} out of range for n={n}")));
            }
            bits |= 1 << i;
        }
        Classifier::from_bits(n, bits)
    }

    pub fn all_zeros(n: usize) -> Result<Self> {
        Classifier::from_bits(n, 0)
    }

    pub fn all_ones(n: usize) -> Result<Self> {
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Classifier::from_bits(n, mask)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn universe(&self) -> Universe {
        Universe { n: self.n }
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    fn mask(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.n);
        (self.bits >> i) & 1 == 1
    }

    /// The complement classifier: every bit inverted. An involution; induces
    /// the same partition of the universe.
    pub fn flip(&self) -> Classifier {
        Classifier {
            n: self.n,
            bits: !self.bits & self.mask(),
        }
    }

    pub fn ones_count(&self) -> u64 {
        self.bits.count_ones() as u64
    }

    pub fn zeros_count(&self) -> u64 {
        self.n as u64 - self.ones_count()
    }

    pub fn ones_side(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.bit(i)).collect()
    }

    pub fn zeros_side(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| !self.bit(i)).collect()
    }

    pub fn is_constant(&self) -> bool {
        self.bits == 0 || self.bits == self.mask()
    }

    /// Lexicographically smaller of this classifier and its flip: the
    /// canonical representative of the induced partition.
    pub fn canonical_partition(&self) -> Classifier {
        (*self).min(self.flip())
    }

    fn check_same_universe(&self, other: &Classifier) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// Number of indices where the two classifiers disagree.
    pub fn hamming(&self, other: &Classifier) -> Result<u64> {
        self.check_same_universe(other)?;
        Ok((self.bits ^ other.bits).count_ones() as u64)
    }

    /// Splits the universe into the four quadrant sets of the ordered pair
    /// `(self, other)` by the joint bit values.
    pub fn quadrants(&self, other: &Classifier) -> Result<Quadrants> {
        self.check_same_universe(other)?;
        let mask = self.mask();
        let u = self.bits;
        let v = other.bits;
        Ok(Quadrants {
            n: self.n,
            set00: !u & !v & mask,
            set01: !u & v & mask,
            set10: u & !v & mask,
            set11: u & v & mask,
        })
    }
}

/// The four quadrant index sets of an ordered classifier pair `(u, v)`:
/// quadrant `ab` holds the individuals with `u_i = a` and `v_i = b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quadrants {
    n: usize,
    pub set00: u64,
    pub set01: u64,
    pub set10: u64,
    pub set11: u64,
}

impl Quadrants {
    pub fn g00(&self) -> u64 {
        self.set00.count_ones() as u64
    }
    pub fn g01(&self) -> u64 {
        self.set01.count_ones() as u64
    }
    pub fn g10(&self) -> u64 {
        self.set10.count_ones() as u64
    }
    pub fn g11(&self) -> u64 {
        self.set11.count_ones() as u64
    }

    pub fn sizes(&self) -> (u64, u64, u64, u64) {
        (self.g00(), self.g01(), self.g10(), self.g11())
    }

    pub fn indices(mask: u64, n: usize) -> Vec<usize> {
        (0..n).filter(|&i| (mask >> i) & 1 == 1).collect()
    }

    pub fn empty_count(&self) -> usize {
        [self.set00, self.set01, self.set10, self.set11]
            .iter()
            .filter(|&&m| m == 0)
            .count()
    }
}

/// Union of the ones sides; zeros side is the complement.
/// Commutative, associative and idempotent as a set operation.
pub fn merge_ones<'a, I>(classifiers: I) -> Result<Classifier>
where
    I: IntoIterator<Item = &'a Classifier>,
{
    let mut iter = classifiers.into_iter();
    let first = iter.next().ok_or(Error::EmptyMerge)?;
    let mut bits = first.bits;
    for c in iter {
        first.check_same_universe(c)?;
        bits |= c.bits;
    }
    Ok(Classifier { n: first.n, bits })
}

/// Union of the zeros sides; ones side is the complement. Dual of
/// [`merge_ones`].
pub fn merge_zeros<'a, I>(classifiers: I) -> Result<Classifier>
where
    I: IntoIterator<Item = &'a Classifier>,
{
    let mut iter = classifiers.into_iter();
    let first = iter.next().ok_or(Error::EmptyMerge)?;
    let mut bits = first.bits;
    for c in iter {
        first.check_same_universe(c)?;
        bits &= c.bits;
    }
    Ok(Classifier { n: first.n, bits })
}

// Ordering is lexicographic on the bitstring (index 0 compared first), the
// canonical order used for pivot selection and serialized sets.
impl Ord for Classifier {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.n, self.lex_key()).cmp(&(other.n, other.lex_key()))
    }
}

impl PartialOrd for Classifier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Classifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Classifier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n = s.len();
        if !(2..=MAX_UNIVERSE).contains(&n) {
            return Err(Error::Parse(format!(
                "bitstring length {n} out of range 2..=64: {s:?}"
            )));
        }
        let mut bits = 0u64;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '1' => bits |= 1 << i,
                '0' => {}
                other => {
                    return Err(Error::Parse(format!("invalid bit {other:?} in {s:?}")));
                }
            }
        }
        Classifier::from_bits(n, bits)
    }
}

impl Serialize for Classifier {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_string().serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Classifier {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
