//! Dense bitsets over the worlds of one model.

use smallvec::SmallVec;
use std::fmt;

type Words = SmallVec<[u64; 2]>;

/// A set of world indices `0..universe`.
///
/// Sets are only meaningful relative to the model that produced them; mixing
/// sets of different universes panics in debug builds.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WorldSet {
    universe: usize,
    words: Words,
}

fn word_count(n: usize) -> usize {
    n.div_ceil(64)
}

impl WorldSet {
    pub fn empty(universe: usize) -> Self {
        WorldSet {
            universe,
            words: SmallVec::from_elem(0, word_count(universe)),
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for w in 0..universe {
            s.insert(w);
        }
        s
    }

    pub fn singleton(universe: usize, w: usize) -> Self {
        let mut s = Self::empty(universe);
        s.insert(w);
        s
    }

    /// Builds a set from the low bits of `mask` (only for universes up to 64).
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        assert!(universe <= 64);
        let mut s = Self::empty(universe);
        if universe > 0 {
            let keep = if universe == 64 {
                u64::MAX
            } else {
                (1u64 << universe) - 1
            };
            s.words[0] = mask & keep;
        }
        s
    }

    pub fn from_iter_in(universe: usize, it: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(universe);
        for w in it {
            s.insert(w);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn insert(&mut self, w: usize) -> bool {
        assert!(
            w < self.universe,
            "world {w} outside universe {}",
            self.universe
        );
        let (i, b) = (w / 64, w % 64);
        let fresh = self.words[i] & (1 << b) == 0;
        self.words[i] |= 1 << b;
        fresh
    }

    pub fn remove(&mut self, w: usize) {
        if w < self.universe {
            self.words[w / 64] &= !(1 << (w % 64));
        }
    }

    pub fn contains(&self, w: usize) -> bool {
        w < self.universe && self.words[w / 64] & (1 << (w % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|x| x.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&x| x == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.universe).filter(move |&w| self.contains(w))
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & !b)
    }

    pub fn union_with(&mut self, other: &Self) {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a |= b;
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        debug_assert_eq!(self.universe, other.universe);
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &Self) -> bool {
        debug_assert_eq!(self.universe, other.universe);
        self.words
            .iter()
            .zip(other.words.iter())
            .any(|(a, b)| a & b != 0)
    }

    pub fn complement(&self) -> Self {
        Self::full(self.universe).difference(self)
    }

    fn zip(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        debug_assert_eq!(self.universe, other.universe);
        WorldSet {
            universe: self.universe,
            words: self
                .words
                .iter()
                .zip(other.words.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl fmt::Debug for WorldSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
