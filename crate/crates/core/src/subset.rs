//! Sets of parties.
//!
//! Parties are 0-based internally and 1-based everywhere a user sees them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest number of parties a [`Subset`] can hold.
pub const MAX_PARTIES: usize = 64;

/// A set of parties stored as a bitmask. Ordering is colex order.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subset(u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn from_bits(bits: u64) -> Self {
        Subset(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// The set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_PARTIES);
        if n == 64 {
            Subset(u64::MAX)
        } else {
            Subset((1u64 << n) - 1)
        }
    }

    /// From 0-based indices.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut bits = 0u64;
        for i in indices {
            assert!(i < MAX_PARTIES, "party index {i} out of range");
            bits |= 1 << i;
        }
        Subset(bits)
    }

    /// From 1-based party labels.
    pub fn from_labels<I: IntoIterator<Item = usize>>(labels: I) -> Self {
        Subset::from_indices(labels.into_iter().map(|l| {
            assert!(l >= 1, "party labels start at 1");
            l - 1
        }))
    }

    pub fn singleton(i: usize) -> Self {
        Subset(1 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_PARTIES && self.0 >> i & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn insert(self, i: usize) -> Self {
        Subset(self.0 | 1 << i)
    }

    pub fn remove(self, i: usize) -> Self {
        Subset(self.0 & !(1 << i))
    }

    pub fn union(self, other: Subset) -> Self {
        Subset(self.0 | other.0)
    }

    pub fn intersection(self, other: Subset) -> Self {
        Subset(self.0 & other.0)
    }

    pub fn difference(self, other: Subset) -> Self {
        Subset(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    /// Largest index plus one, or 0 for the empty set.
    pub fn span(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    /// 0-based members in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// 1-based labels in increasing order.
    pub fn labels(self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }
}

/// All `k`-subsets of `{0, .., n-1}` in colex order.
pub fn k_subsets(n: usize, k: usize) -> impl Iterator<Item = Subset> {
    assert!(n <= 63, "enumeration supports at most 63 parties");
    let limit = 1u64 << n;
    let mut next = if k > n {
        None
    } else if k == 0 {
        Some(0u64)
    } else {
        Some((1u64 << k) - 1)
    };
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            // Gosper's hack.
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            let nxt = (((r ^ cur) >> 2) / c) | r;
            (nxt < limit).then_some(nxt)
        };
        Some(Subset(cur))
    })
}

/// All subsets of `{0, .., n-1}`.
pub fn all_subsets(n: usize) -> impl Iterator<Item = Subset> {
    assert!(n <= 63);
    (0..1u64 << n).map(Subset)
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.labels().iter().map(|l| l.to_string()).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Subset {
    type Err = Error;

    /// Parses `{1,3,5}`, `1,3,5` or `{}` using 1-based labels.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim();
        let inner = inner
            .strip_prefix('{')
            .and_then(|x| x.strip_suffix('}'))
            .unwrap_or(inner)
            .trim();
        if inner.is_empty() {
            return Ok(Subset::EMPTY);
        }
        let mut bits = 0u64;
        for part in inner.split(',') {
            let label: usize = part
                .trim()
                .parse()
                .map_err(|_| Error::parse(s, "party labels must be positive integers"))?;
            if label == 0 || label > MAX_PARTIES {
                return Err(Error::parse(s, format!("party label {label} out of range")));
            }
            bits |= 1 << (label - 1);
        }
        Ok(Subset(bits))
    }
}

impl Serialize for Subset {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Subset {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn enumerates_every_k_subset_once_in_order() {
        for n in 0..=10 {
            for k in 0..=n + 1 {
                let subsets: Vec<Subset> = k_subsets(n, k).collect();
                let expected = if k > n { 0 } else { binomial(n as u64, k as u64) };
                assert_eq!(subsets.len() as u64, expected, "n={n} k={k}");
                assert!(subsets.windows(2).all(|w| w[0] < w[1]));
                assert!(subsets.iter().all(|s| s.len() == k && s.span() <= n));
            }
        }
    }

    #[test]
    fn display_and_parse_use_one_based_labels() {
        let s = Subset::from_indices([0, 2, 4]);
        assert_eq!(s.to_string(), "{1,3,5}");
        assert_eq!("{1,3,5}".parse::<Subset>().unwrap(), s);
        assert_eq!("1, 3,5".parse::<Subset>().unwrap(), s);
        assert_eq!("{}".parse::<Subset>().unwrap(), Subset::EMPTY);
        assert!("{0}".parse::<Subset>().is_err());
    }

    #[test]
    fn set_operations() {
        let a = Subset::from_labels([1, 2, 3]);
        let b = Subset::from_labels([3, 4]);
        assert_eq!(a.union(b), Subset::from_labels([1, 2, 3, 4]));
        assert_eq!(a.intersection(b), Subset::from_labels([3]));
        assert_eq!(a.difference(b), Subset::from_labels([1, 2]));
        assert!(Subset::from_labels([2]).is_subset_of(a));
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 1, 2]);
    }
}
