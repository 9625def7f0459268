//! Flip sequences, overlapping pair counts and the aggregate score process.
//!
//! The aggregate score after `k` flips is `#HT - #HH` over the first `k`
//! flips: positive means B (the HT player) leads, negative means A leads.
//! Pairs are counted with overlap, so `HHH` contains two `HH`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flip {
    H,
    T,
}

impl Flip {
    pub fn is_head(self) -> bool {
        self == Flip::H
    }

    pub fn as_char(self) -> char {
        match self {
            Flip::H => 'H',
            Flip::T => 'T',
        }
    }
}

/// Adjacent-pair patterns that can be counted in a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    HH,
    HT,
    TH,
}

/// A finite sequence of coin outcomes, stored one bit per flip (1 = H).
///
/// Bits beyond `len` are always zero, so derived equality and hashing are
/// structural.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct FlipSequence {
    words: Vec<u64>,
    len: usize,
}

impl FlipSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(len: usize) -> Self {
        FlipSequence {
            words: Vec::with_capacity(len.div_ceil(64)),
            len: 0,
        }
    }

    /// Builds a sequence of `len <= 64` flips from the low bits of `bits`;
    /// bit `i` is flip `i + 1`, set meaning H.
    pub fn from_bits(bits: u64, len: usize) -> Self {
        assert!(len <= 64, "from_bits takes at most 64 flips");
        if len == 0 {
            return Self::new();
        }
        FlipSequence {
            words: vec![bits & low_mask(len)],
            len,
        }
    }

    pub fn repeat(flip: Flip, count: usize) -> Self {
        let mut seq = Self::with_capacity(count);
        for _ in 0..count {
            seq.push(flip);
        }
        seq
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Flip at 0-based index `i`.
    pub fn get(&self, i: usize) -> Flip {
        assert!(i < self.len, "flip index {i} out of range for length {}", self.len);
        if (self.words[i / 64] >> (i % 64)) & 1 == 1 {
            Flip::H
        } else {
            Flip::T
        }
    }

    pub fn first(&self) -> Option<Flip> {
        (!self.is_empty()).then(|| self.get(0))
    }

    pub fn last(&self) -> Option<Flip> {
        (!self.is_empty()).then(|| self.get(self.len - 1))
    }

    pub fn push(&mut self, flip: Flip) {
        let (w, b) = (self.len / 64, self.len % 64);
        if b == 0 {
            self.words.push(0);
        }
        if flip.is_head() {
            self.words[w] |= 1 << b;
        }
        self.len += 1;
    }

    pub fn extend_from(&mut self, other: &FlipSequence) {
        for f in other.iter() {
            self.push(f);
        }
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = Flip> + ExactSizeIterator + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Copy of the flips at 0-based indices `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> FlipSequence {
        assert!(start <= end && end <= self.len);
        (start..end).map(|i| self.get(i)).collect()
    }

    /// The reversal `w_k w_{k-1} ... w_1`.
    pub fn reverse(&self) -> FlipSequence {
        self.iter().rev().collect()
    }

    pub fn count_heads(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn count_overlapping(&self, pattern: Pattern) -> usize {
        if self.len < 2 {
            return 0;
        }
        let pairs = self.len - 1;
        let mut total = 0usize;
        for (wi, &word) in self.words.iter().enumerate() {
            let base = wi * 64;
            if base >= pairs {
                break;
            }
            // bit j of `next` is the flip following flip (base + j)
            let carry = self.words.get(wi + 1).copied().unwrap_or(0);
            let next = (word >> 1) | (carry << 63);
            let hits = match pattern {
                Pattern::HH => word & next,
                Pattern::HT => word & !next,
                Pattern::TH => !word & next,
            };
            let valid = (pairs - base).min(64);
            total += (hits & low_mask(valid)).count_ones() as usize;
        }
        total
    }

    /// Final aggregate score `#HT - #HH`.
    pub fn score(&self) -> i64 {
        self.count_overlapping(Pattern::HT) as i64 - self.count_overlapping(Pattern::HH) as i64
    }

    pub fn score_series(&self) -> ScoreSeries {
        let mut values = Vec::with_capacity(self.len);
        let mut s = 0i64;
        let mut prev = None;
        for f in self.iter() {
            if prev == Some(Flip::H) {
                s += if f.is_head() { -1 } else { 1 };
            }
            values.push(s);
            prev = Some(f);
        }
        ScoreSeries { values }
    }

    /// Final score from run statistics: `r - h` if the sequence starts with
    /// H, `r - 1 - h` otherwise, where `r` counts maximal runs and `h` heads.
    pub fn score_via_runs(&self) -> i64 {
        let Some(first) = self.first() else {
            return 0;
        };
        let mut runs = 0usize;
        let mut heads = 0usize;
        let mut prev = None;
        for f in self.iter() {
            if prev != Some(f) {
                runs += 1;
            }
            heads += f.is_head() as usize;
            prev = Some(f);
        }
        let r = runs as i64 - heads as i64;
        if first.is_head() {
            r
        } else {
            r - 1
        }
    }

    pub fn to_text(&self) -> String {
        self.iter().map(Flip::as_char).collect()
    }
}

impl FromIterator<Flip> for FlipSequence {
    fn from_iter<I: IntoIterator<Item = Flip>>(iter: I) -> Self {
        let mut seq = FlipSequence::new();
        for f in iter {
            seq.push(f);
        }
        seq
    }
}

impl fmt::Display for FlipSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for FlipSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FlipSequence({})", self.to_text())
    }
}

impl FromStr for FlipSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_sequence(s)
    }
}

/// Parses uppercase `H`/`T` text. Errors name the 1-based position of the
/// first offending character.
pub fn parse_sequence(text: &str) -> Result<FlipSequence> {
    if text.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut seq = FlipSequence::with_capacity(text.len());
    for (i, c) in text.chars().enumerate() {
        match c {
            'H' => seq.push(Flip::H),
            'T' => seq.push(Flip::T),
            other => {
                return Err(Error::Parse {
                    position: i + 1,
                    found: other,
                })
            }
        }
    }
    Ok(seq)
}

/// Scores `S_1..S_k` after each flip of a sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreSeries {
    values: Vec<i64>,
}

impl ScoreSeries {
    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// `S_k` for 1-based `k`.
    pub fn at(&self, k: usize) -> i64 {
        self.values[k - 1]
    }

    pub fn last(&self) -> Option<i64> {
        self.values.last().copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[inline]
pub(crate) fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// `(#HH, #HT)` for `len <= 64` flips packed as in [`FlipSequence::from_bits`].
#[inline]
pub fn packed_pair_counts(bits: u64, len: u32) -> (u32, u32) {
    if len < 2 {
        return (0, 0);
    }
    let pairs = low_mask(len as usize - 1);
    let next = bits >> 1;
    ((bits & next & pairs).count_ones(), (bits & !next & pairs).count_ones())
}

/// Final score of a packed sequence of `len <= 64` flips.
#[inline]
pub fn packed_score(bits: u64, len: u32) -> i64 {
    let (hh, ht) = packed_pair_counts(bits, len);
    ht as i64 - hh as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> FlipSequence {
        s.parse().unwrap()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(seq("HHT").iter().collect::<Vec<_>>(), vec![Flip::H, Flip::H, Flip::T]);
        assert_eq!(seq("T").len(), 1);
        assert_eq!(
            parse_sequence("HXT"),
            Err(Error::Parse { position: 2, found: 'X' })
        );
        assert_eq!(parse_sequence(""), Err(Error::EmptySequence));
        assert!(matches!(parse_sequence("hT"), Err(Error::Parse { position: 1, .. })));
    }

    #[test]
    fn reverse_examples() {
        assert_eq!(seq("HTT").reverse(), seq("TTH"));
        assert_eq!(seq("HTH").reverse(), seq("HTH"));
        assert_eq!(seq("HHTH").reverse(), seq("HTHH"));
    }

    #[test]
    fn overlapping_counts() {
        assert_eq!(seq("HHH").count_overlapping(Pattern::HH), 2);
        assert_eq!(seq("HHTH").count_overlapping(Pattern::HT), 1);
        assert_eq!(seq("TTTT").count_overlapping(Pattern::HH), 0);
        assert_eq!(seq("H").count_overlapping(Pattern::HT), 0);
        assert_eq!(FlipSequence::new().count_overlapping(Pattern::HH), 0);
    }

    #[test]
    fn overlapping_counts_cross_word_boundary() {
        let mut s = FlipSequence::repeat(Flip::T, 63);
        s.push(Flip::H);
        s.push(Flip::T);
        s.push(Flip::H);
        s.push(Flip::H);
        assert_eq!(s.count_overlapping(Pattern::HT), 1);
        assert_eq!(s.count_overlapping(Pattern::HH), 1);
        assert_eq!(s.count_overlapping(Pattern::TH), 2);
        let all_heads = FlipSequence::repeat(Flip::H, 200);
        assert_eq!(all_heads.count_overlapping(Pattern::HH), 199);
    }

    #[test]
    fn score_series_examples() {
        assert_eq!(seq("HHT").score_series().values(), &[0, -1, 0]);
        assert_eq!(seq("HTHT").score_series().values(), &[0, 1, 1, 2]);
        assert_eq!(seq("TTTT").score_series().values(), &[0, 0, 0, 0]);
    }

    #[test]
    fn score_via_runs_examples() {
        assert_eq!(seq("TTHHT").score_via_runs(), 0);
        assert_eq!(seq("HHHH").score_via_runs(), -3);
        assert_eq!(seq("T").score_via_runs(), 0);
    }

    #[test]
    fn packed_score_matches_sequence() {
        for len in 0..=10u32 {
            for bits in 0..(1u64 << len) {
                let s = FlipSequence::from_bits(bits, len as usize);
                assert_eq!(packed_score(bits, len), s.score());
            }
        }
    }
}
