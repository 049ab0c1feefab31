use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A finite 0/1 sequence. Used both as a variable index `x[σ]` and as a
/// finite prefix of a subset of the naturals.
///
/// Ordering is lexicographic with `0 < 1`, and a proper prefix sorts first.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BinaryString {
    bits: Vec<bool>,
}

impl BinaryString {
    pub fn empty() -> Self {
        Self { bits: Vec::new() }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// The string of length `len` whose bit `n` is bit `len - 1 - n` of
    /// `index`, i.e. `index` written MSB-first. Enumerating `0..2^len` this
    /// way visits `2^len` in lexicographic order.
    pub fn from_index(index: usize, len: u32) -> Self {
        let bits = (0..len).map(|n| (index >> (len - 1 - n)) & 1 == 1).collect();
        Self { bits }
    }

    /// Inverse of [`BinaryString::from_index`].
    pub fn index(&self) -> usize {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    /// All strings of length `len`, lexicographically ordered.
    pub fn all_of_length(len: u32) -> impl Iterator<Item = BinaryString> {
        (0..1usize << len).map(move |i| BinaryString::from_index(i, len))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bit(&self, n: usize) -> Option<bool> {
        self.bits.get(n).copied()
    }

    /// `σ↾m`, the first `m` bits.
    pub fn prefix(&self, m: usize) -> Result<BinaryString, Error> {
        if m > self.bits.len() {
            return Err(Error::Level {
                found: self.bits.len(),
                required: m,
            });
        }
        Ok(Self {
            bits: self.bits[..m].to_vec(),
        })
    }

    pub fn is_prefix_of(&self, other: &BinaryString) -> bool {
        other.bits.starts_with(&self.bits)
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn concat(&self, tail: &BinaryString) -> BinaryString {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&tail.bits);
        Self { bits }
    }

    pub fn with_bit(&self, bit: bool) -> BinaryString {
        let mut out = self.clone();
        out.push(bit);
        out
    }
}

impl fmt::Display for BinaryString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BinaryString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidBits(format!("unexpected character {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { bits })
    }
}

impl From<&[bool]> for BinaryString {
    fn from(bits: &[bool]) -> Self {
        Self { bits: bits.to_vec() }
    }
}

impl Serialize for BinaryString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BinaryString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BinaryString {
        s.parse().unwrap()
    }

    #[test]
    fn prefix_edge_cases() {
        let s = bs("0110");
        assert_eq!(s.prefix(4).unwrap(), s);
        assert_eq!(s.prefix(0).unwrap(), BinaryString::empty());
        assert_eq!(s.prefix(2).unwrap(), bs("01"));
        assert!(s.prefix(5).is_err());
    }

    #[test]
    fn index_enumeration_is_lexicographic() {
        let all: Vec<_> = BinaryString::all_of_length(3).collect();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
        for (i, s) in all.iter().enumerate() {
            assert_eq!(s.index(), i);
        }
        assert_eq!(all[6], bs("110"));
    }

    #[test]
    fn rejects_non_binary() {
        assert!("012".parse::<BinaryString>().is_err());
        assert_eq!("".parse::<BinaryString>().unwrap(), BinaryString::empty());
    }
}
