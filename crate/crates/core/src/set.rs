//! Finite subsets of the positive integers, stored as bitsets.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A subset of `[1, horizon]`.
///
/// Elements are kept in a bitset, so membership is O(1) and ordered
/// iteration walks set bits. Queries beyond the horizon report non-membership;
/// callers that need to distinguish "absent" from "unknown" check
/// [`IndexSet::horizon`] first.
#[derive(Clone, PartialEq, Eq)]
pub struct IndexSet {
    horizon: u64,
    // bit n stands for the integer n; bit 0 is always clear
    words: Vec<u64>,
}

impl IndexSet {
    pub fn empty(horizon: u64) -> Self {
        let words = vec![0u64; (horizon as usize + 1).div_ceil(64)];
        IndexSet { horizon, words }
    }

    /// All of `[1, horizon]`.
    pub fn full(horizon: u64) -> Self {
        let mut set = Self::empty(horizon);
        set.words.iter_mut().for_each(|w| *w = u64::MAX);
        set.words[0] &= !1;
        set.clear_tail();
        set
    }

    pub fn from_predicate<P: FnMut(u64) -> bool>(horizon: u64, mut pred: P) -> Self {
        let mut set = Self::empty(horizon);
        for n in 1..=horizon {
            if pred(n) {
                set.insert(n);
            }
        }
        set
    }

    /// Builds a set from elements; anything outside `[1, horizon]` is an error.
    pub fn from_elements<I: IntoIterator<Item = u64>>(horizon: u64, elements: I) -> Result<Self> {
        let mut set = Self::empty(horizon);
        for n in elements {
            if n == 0 || n > horizon {
                return Err(Error::Range { value: n, min: 1, max: horizon });
            }
            set.insert(n);
        }
        Ok(set)
    }

    /// Builds a set from closed intervals `[lo, hi]`.
    pub fn from_intervals(horizon: u64, intervals: &[(u64, u64)]) -> Result<Self> {
        let mut set = Self::empty(horizon);
        for &(lo, hi) in intervals {
            if lo == 0 || lo > hi || hi > horizon {
                return Err(Error::Invalid(format!("interval [{lo}, {hi}] outside [1, {horizon}]")));
            }
            set.insert_range(lo, hi);
        }
        Ok(set)
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    #[inline]
    pub fn contains(&self, n: u64) -> bool {
        n <= self.horizon && (self.words[(n >> 6) as usize] >> (n & 63)) & 1 == 1
    }

    /// Inserts `n`. Panics if `n` is 0 or beyond the horizon.
    #[inline]
    pub fn insert(&mut self, n: u64) {
        assert!(n >= 1 && n <= self.horizon, "{n} outside [1, {}]", self.horizon);
        self.words[(n >> 6) as usize] |= 1 << (n & 63);
    }

    #[inline]
    pub fn remove(&mut self, n: u64) {
        if n <= self.horizon {
            self.words[(n >> 6) as usize] &= !(1 << (n & 63));
        }
    }

    /// Inserts every integer in `[lo, hi]` (clamped to the horizon).
    pub fn insert_range(&mut self, lo: u64, hi: u64) {
        let lo = lo.max(1);
        let hi = hi.min(self.horizon);
        for n in lo..=hi {
            self.words[(n >> 6) as usize] |= 1 << (n & 63);
        }
    }

    /// Removes every integer in `[lo, hi]`.
    pub fn remove_range(&mut self, lo: u64, hi: u64) {
        let hi = hi.min(self.horizon);
        for n in lo..=hi {
            self.words[(n >> 6) as usize] &= !(1 << (n & 63));
        }
    }

    pub fn len(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// `|S ∩ [1, n]|`.
    pub fn count_up_to(&self, n: u64) -> u64 {
        let n = n.min(self.horizon);
        let last = (n >> 6) as usize;
        let mut count: u64 = self.words[..last].iter().map(|w| w.count_ones() as u64).sum();
        let bits = (n & 63) + 1;
        let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
        count += (self.words[last] & mask).count_ones() as u64;
        count
    }

    /// Ascending iterator over the elements.
    pub fn iter(&self) -> Iter<'_> {
        Iter { words: &self.words, index: 0, current: self.words.first().copied().unwrap_or(0) }
    }

    pub fn max_element(&self) -> Option<u64> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(i, &w)| (i as u64) * 64 + 63 - w.leading_zeros() as u64)
    }

    /// The `k` largest elements, in descending order.
    pub fn largest(&self, k: usize) -> Vec<u64> {
        let mut out = Vec::with_capacity(k);
        let mut n = self.horizon;
        while n >= 1 && out.len() < k {
            if self.contains(n) {
                out.push(n);
            }
            n -= 1;
        }
        out
    }

    /// Largest element `<= n`.
    pub fn predecessor(&self, n: u64) -> Option<u64> {
        (1..=n.min(self.horizon)).rev().find(|&m| self.contains(m))
    }

    pub fn intersect_with(&mut self, other: &IndexSet) {
        for (i, w) in self.words.iter_mut().enumerate() {
            *w &= other.words.get(i).copied().unwrap_or(0);
        }
    }

    pub fn union_with(&mut self, other: &IndexSet) {
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
        self.clear_tail();
    }

    /// `self ⊆ other` on `[lo, hi]`.
    pub fn is_subset_on(&self, other: &IndexSet, lo: u64, hi: u64) -> bool {
        (lo.max(1)..=hi.min(self.horizon)).all(|n| !self.contains(n) || other.contains(n))
    }

    /// `self` and `other` have the same elements on `[lo, hi]`.
    pub fn agrees_on(&self, other: &IndexSet, lo: u64, hi: u64) -> bool {
        (lo.max(1)..=hi).all(|n| self.contains(n) == other.contains(n))
    }

    /// Same elements, cut or padded (with non-members) to a new horizon.
    pub fn with_horizon(&self, horizon: u64) -> IndexSet {
        let mut out = IndexSet::empty(horizon);
        let shared = out.words.len().min(self.words.len());
        out.words[..shared].copy_from_slice(&self.words[..shared]);
        out.clear_tail();
        out
    }

    /// Maximal runs of consecutive members as closed intervals.
    pub fn intervals(&self) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        let mut start: Option<u64> = None;
        let mut prev = 0u64;
        for n in self.iter() {
            match start {
                Some(_) if n == prev + 1 => {}
                Some(s) => {
                    out.push((s, prev));
                    start = Some(n);
                }
                None => start = Some(n),
            }
            prev = n;
        }
        if let Some(s) = start {
            out.push((s, prev));
        }
        out
    }

    fn clear_tail(&mut self) {
        let used = self.horizon + 1;
        let last = self.words.len() - 1;
        let rem = used - (last as u64) * 64;
        if rem < 64 {
            self.words[last] &= (1u64 << rem) - 1;
        }
    }
}

impl std::fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IndexSet")
            .field("horizon", &self.horizon)
            .field("len", &self.len())
            .field("intervals", &self.intervals().len())
            .finish()
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as u64;
                self.current &= self.current - 1;
                return Some(self.index as u64 * 64 + bit);
            }
            self.index += 1;
            if self.index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.index];
        }
    }
}

/// Run-length wire form: `{"horizon": h, "intervals": [[lo, hi], ...]}`.
#[derive(Serialize, Deserialize)]
struct IntervalEncoding {
    horizon: u64,
    intervals: Vec<(u64, u64)>,
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        IntervalEncoding { horizon: self.horizon, intervals: self.intervals() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let enc = IntervalEncoding::deserialize(deserializer)?;
        IndexSet::from_intervals(enc.horizon, &enc.intervals).map_err(D::Error::custom)
    }
}
