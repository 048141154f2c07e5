//! Sets of probed customer indices.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest number of probe candidates a [`ProbeSet`] can address.
pub const MAX_PROBES: usize = 64;

/// A subset of `0..n` stored as a bitmask, with `n <= 64`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", try_from = "Vec<usize>")]
pub struct ProbeSet(u64);

impl ProbeSet {
    pub const fn empty() -> Self {
        ProbeSet(0)
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_PROBES, "probe sets hold at most {MAX_PROBES} elements");
        if n == MAX_PROBES {
            ProbeSet(u64::MAX)
        } else {
            ProbeSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(j: usize) -> Self {
        assert!(j < MAX_PROBES);
        ProbeSet(1u64 << j)
    }

    pub const fn from_bits(bits: u64) -> Self {
        ProbeSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, j: usize) -> bool {
        j < MAX_PROBES && self.0 & (1u64 << j) != 0
    }

    pub fn with(self, j: usize) -> Self {
        self | ProbeSet::singleton(j)
    }

    pub fn without(self, j: usize) -> Self {
        ProbeSet(self.0 & !(1u64 << j))
    }

    pub fn insert(&mut self, j: usize) {
        *self = self.with(j);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: ProbeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: ProbeSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn difference(self, other: ProbeSet) -> Self {
        ProbeSet(self.0 & !other.0)
    }

    /// Complement within `0..n`.
    pub fn complement(self, n: usize) -> Self {
        ProbeSet::full(n).difference(self)
    }

    pub fn min_element(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    /// Compact text encoding used in CSV output, e.g. `0;3;7`. Empty set is `-`.
    pub fn encode(self) -> String {
        if self.is_empty() {
            return "-".to_string();
        }
        self.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(";")
    }

    pub fn decode(s: &str) -> Option<Self> {
        let s = s.trim();
        if s == "-" || s.is_empty() {
            return Some(ProbeSet::empty());
        }
        let mut set = ProbeSet::empty();
        for part in s.split([';', ',']) {
            let j: usize = part.trim().parse().ok()?;
            if j >= MAX_PROBES {
                return None;
            }
            set.insert(j);
        }
        Some(set)
    }
}

impl std::ops::BitOr for ProbeSet {
    type Output = ProbeSet;
    fn bitor(self, rhs: Self) -> Self {
        ProbeSet(self.0 | rhs.0)
    }
}

impl std::ops::BitAnd for ProbeSet {
    type Output = ProbeSet;
    fn bitand(self, rhs: Self) -> Self {
        ProbeSet(self.0 & rhs.0)
    }
}

impl FromIterator<usize> for ProbeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = ProbeSet::empty();
        for j in iter {
            set.insert(j);
        }
        set
    }
}

impl From<ProbeSet> for Vec<usize> {
    fn from(set: ProbeSet) -> Self {
        set.iter().collect()
    }
}

impl TryFrom<Vec<usize>> for ProbeSet {
    type Error = String;
    fn try_from(v: Vec<usize>) -> Result<Self, Self::Error> {
        if let Some(&j) = v.iter().find(|&&j| j >= MAX_PROBES) {
            return Err(format!("probe index {j} out of range"));
        }
        Ok(v.into_iter().collect())
    }
}

pub struct Iter(u64);

impl Iterator for Iter {
    type Item = usize;
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let j = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(j)
    }
}

impl fmt::Debug for ProbeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for ProbeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, j) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn full_and_complement() {
        assert_eq!(ProbeSet::full(3).bits(), 0b111);
        assert_eq!(ProbeSet::full(64).len(), 64);
        let s: ProbeSet = [0, 2].into_iter().collect();
        assert_eq!(s.complement(4), [1, 3].into_iter().collect());
    }

    #[test]
    fn encode_decode() {
        let s: ProbeSet = [1, 5, 9].into_iter().collect();
        assert_eq!(s.encode(), "1;5;9");
        assert_eq!(ProbeSet::decode("1;5;9"), Some(s));
        assert_eq!(ProbeSet::decode("-"), Some(ProbeSet::empty()));
        assert_eq!(ProbeSet::decode("70"), None);
        assert_eq!(format!("{s}"), "{1,5,9}");
    }

    proptest! {
        #[test]
        fn iter_roundtrip(bits in any::<u64>()) {
            let s = ProbeSet::from_bits(bits);
            let back: ProbeSet = s.iter().collect();
            prop_assert_eq!(s, back);
            prop_assert_eq!(s.iter().count(), s.len());
        }
    }
}
