//! Binary sequences, words and suffix counting.
//!
//! All positions in the public API are 1-based: `x_1..x_N`. A [`Word`] is
//! stored oldest symbol first, a [`RecentFirstPath`] is the same string read
//! backwards, which is the order used to walk a suffix tree.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Rendering of the empty word.
pub const EMPTY_WORD: &str = "ε";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Bit {
    Zero = 0,
    One = 1,
}

impl Bit {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn flip(self) -> Self {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Bit::Zero => '0',
            Bit::One => '1',
        }
    }
}

impl From<Bit> for u8 {
    fn from(b: Bit) -> u8 {
        b as u8
    }
}

impl Serialize for Bit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(*self as u8)
    }
}

impl<'de> Deserialize<'de> for Bit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(Bit::Zero),
            1 => Ok(Bit::One),
            v => Err(serde::de::Error::custom(format!("bit must be 0 or 1, got {v}"))),
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

fn parse_bits(s: &str) -> Result<Vec<Bit>> {
    if s == EMPTY_WORD {
        return Ok(Vec::new());
    }
    s.chars()
        .enumerate()
        .map(|(offset, c)| match c {
            '0' => Ok(Bit::Zero),
            '1' => Ok(Bit::One),
            found => Err(Error::Parse { offset, found }),
        })
        .collect()
}

fn write_bits(bits: &[Bit], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if bits.is_empty() {
        return f.write_str(EMPTY_WORD);
    }
    for b in bits {
        write!(f, "{}", b.as_char())?;
    }
    Ok(())
}

/// A binary string in forward time order (oldest symbol first).
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Bit>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(bits: Vec<Bit>) -> Self {
        Word(bits)
    }

    pub fn parse(s: &str) -> Result<Self> {
        parse_bits(s).map(Word)
    }

    pub fn bits(&self) -> &[Bit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_path(&self) -> RecentFirstPath {
        RecentFirstPath(self.0.iter().rev().copied().collect())
    }

    /// The word extended by one older symbol, i.e. `b` prepended.
    pub fn extend_older(&self, b: Bit) -> Word {
        let mut bits = Vec::with_capacity(self.0.len() + 1);
        bits.push(b);
        bits.extend_from_slice(&self.0);
        Word(bits)
    }

    /// The word extended by one newer symbol, i.e. `b` appended.
    pub fn extend_newer(&self, b: Bit) -> Word {
        let mut bits = self.0.clone();
        bits.push(b);
        Word(bits)
    }

    /// True if `self` is a suffix of `other` (contexts: `self` is an ancestor).
    pub fn is_suffix_of(&self, other: &Word) -> bool {
        other.0.ends_with(&self.0)
    }
}

impl From<&[Bit]> for Word {
    fn from(bits: &[Bit]) -> Self {
        Word(bits.to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bits(&self.0, f)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Word::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// A binary string in reversed time order (most recent symbol first).
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RecentFirstPath(Vec<Bit>);

impl RecentFirstPath {
    pub fn new(bits: Vec<Bit>) -> Self {
        RecentFirstPath(bits)
    }

    pub fn bits(&self) -> &[Bit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_word(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }
}

impl fmt::Display for RecentFirstPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bits(&self.0, f)
    }
}

/// The individual sequence `x_1..x_N`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BinarySequence(Vec<Bit>);

impl BinarySequence {
    pub fn new(bits: Vec<Bit>) -> Self {
        BinarySequence(bits)
    }

    pub fn parse(s: &str) -> Result<Self> {
        load_sequence(s.as_bytes(), SourceFormat::Ascii).map(|l| l.sequence)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[Bit] {
        &self.0
    }

    /// `x_t`, 1-based.
    pub fn at(&self, t: usize) -> Result<Bit> {
        self.check_position(t)?;
        Ok(self.0[t - 1])
    }

    /// `x_1..x_t`.
    pub fn prefix(&self, t: usize) -> &[Bit] {
        &self.0[..t.min(self.0.len())]
    }

    pub fn truncated(&self, n: usize) -> BinarySequence {
        BinarySequence(self.prefix(n).to_vec())
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == Bit::One).count()
    }

    pub fn to_ascii(&self) -> String {
        self.0.iter().map(|b| b.as_char()).collect()
    }

    fn check_position(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.0.len() {
            return Err(Error::Range {
                what: "position",
                value: t,
                min: 1,
                max: self.0.len(),
            });
        }
        Ok(())
    }
}

impl From<Vec<Bit>> for BinarySequence {
    fn from(bits: Vec<Bit>) -> Self {
        BinarySequence(bits)
    }
}

impl fmt::Display for BinarySequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ascii())
    }
}

/// Number of (possibly overlapping) occurrences of `w` ending at positions
/// `|w|..=t` of `bits`, where `t = bits.len()`.
pub fn count_ending_occurrences(bits: &[Bit], w: &[Bit]) -> usize {
    if w.is_empty() {
        return bits.len();
    }
    if w.len() > bits.len() {
        return 0;
    }
    let last = w[w.len() - 1];
    (w.len()..=bits.len())
        .filter(|&end| bits[end - 1] == last && &bits[end - w.len()..end] == w)
        .count()
}

/// Occurrences of `w` along `x_1..x_t`, overlaps allowed, the one ending at
/// `t` included. The empty word occurs `t` times.
pub fn occurrence_count(x: &BinarySequence, t: usize, w: &Word) -> Result<usize> {
    x.check_position(t)?;
    Ok(count_ending_occurrences(x.prefix(t), w.bits()))
}

/// `(x_{t-k+1}, .., x_t)` in forward order.
pub fn suffix_word(x: &BinarySequence, t: usize, k: usize) -> Result<Word> {
    x.check_position(t)?;
    if k > t {
        return Err(Error::Range {
            what: "suffix length",
            value: k,
            min: 0,
            max: t,
        });
    }
    Ok(Word(x.0[t - k..t].to_vec()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    /// Characters '0' / '1', whitespace ignored.
    Ascii,
    /// Raw bytes, most significant bit first.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedSequence {
    pub sequence: BinarySequence,
    /// Length of the source in bytes.
    pub source_len: usize,
}

pub fn load_sequence(source: &[u8], format: SourceFormat) -> Result<LoadedSequence> {
    let bits = match format {
        SourceFormat::Ascii => {
            let mut bits = Vec::with_capacity(source.len());
            for (offset, &byte) in source.iter().enumerate() {
                match byte {
                    b'0' => bits.push(Bit::Zero),
                    b'1' => bits.push(Bit::One),
                    c if c.is_ascii_whitespace() => {}
                    c => {
                        return Err(Error::Parse {
                            offset,
                            found: c as char,
                        })
                    }
                }
            }
            bits
        }
        SourceFormat::Raw => source
            .iter()
            .flat_map(|&byte| (0..8).rev().map(move |i| Bit::from_bool(byte >> i & 1 == 1)))
            .collect(),
    };
    Ok(LoadedSequence {
        sequence: BinarySequence(bits),
        source_len: source.len(),
    })
}
