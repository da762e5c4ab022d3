//! Subsets of a frame stored as variable-width bit patterns.

use alloc::vec::Vec;
use core::fmt;

const BITS: usize = 64;

/// A set of proposition indices.
///
/// The words never end with a zero word, so equal sets have equal
/// representations and the derived `Eq`/`Ord`/`Hash` are canonical. The
/// owning frame is tracked by whoever holds the set (a mass function or a
/// relation), not by the set itself.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PropSet {
    words: Vec<u64>,
}

impl PropSet {
    pub fn empty() -> Self {
        PropSet { words: Vec::new() }
    }

    pub fn singleton(index: usize) -> Self {
        let mut s = PropSet::empty();
        s.insert(index);
        s
    }

    /// Every proposition of a frame of `size` elements.
    pub fn full(size: usize) -> Self {
        let mut words = alloc::vec![u64::MAX; size / BITS];
        let rem = size % BITS;
        if rem != 0 {
            words.push((1u64 << rem) - 1);
        }
        PropSet { words }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut s = PropSet::empty();
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// Builds a set from the low bits of `mask`.
    pub fn from_mask(mask: u64) -> Self {
        let mut s = PropSet { words: alloc::vec![mask] };
        s.trim();
        s
    }

    /// The set as a single machine word, if every index is below 64.
    pub fn to_mask(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    pub fn insert(&mut self, index: usize) {
        let w = index / BITS;
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1u64 << (index % BITS);
    }

    pub fn remove(&mut self, index: usize) {
        let w = index / BITS;
        if w < self.words.len() {
            self.words[w] &= !(1u64 << (index % BITS));
            self.trim();
        }
    }

    pub fn contains(&self, index: usize) -> bool {
        self.words
            .get(index / BITS)
            .is_some_and(|w| w & (1u64 << (index % BITS)) != 0)
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Number of propositions in the set.
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn max_index(&self) -> Option<usize> {
        let last = *self.words.last()?;
        Some((self.words.len() - 1) * BITS + (BITS - 1 - last.leading_zeros() as usize))
    }

    /// True when every index is below `size`.
    pub fn fits(&self, size: usize) -> bool {
        self.max_index().is_none_or(|m| m < size)
    }

    pub fn union(&self, other: &PropSet) -> PropSet {
        let (long, short) = if self.words.len() >= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut words = long.words.clone();
        for (w, s) in words.iter_mut().zip(&short.words) {
            *w |= s;
        }
        PropSet { words }
    }

    pub fn intersection(&self, other: &PropSet) -> PropSet {
        let mut words: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a & b)
            .collect();
        while words.last() == Some(&0) {
            words.pop();
        }
        PropSet { words }
    }

    pub fn difference(&self, other: &PropSet) -> PropSet {
        let mut words = self.words.clone();
        for (w, o) in words.iter_mut().zip(&other.words) {
            *w &= !o;
        }
        let mut s = PropSet { words };
        s.trim();
        s
    }

    /// Complement relative to a frame of `size` elements.
    pub fn complement(&self, size: usize) -> PropSet {
        PropSet::full(size).difference(self)
    }

    pub fn is_subset(&self, other: &PropSet) -> bool {
        if self.words.len() > other.words.len() {
            return false;
        }
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &PropSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_full(&self, size: usize) -> bool {
        self.len() == size && self.fits(size)
    }

    /// Indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            core::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * BITS + bit)
            })
        })
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }
}

impl fmt::Debug for PropSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for PropSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        PropSet::from_indices(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn full_set_spans_word_boundaries() {
        let s = PropSet::full(130);
        assert_eq!(s.len(), 130);
        assert_eq!(s.max_index(), Some(129));
        assert!(s.is_full(130));
        assert!(!s.fits(129));
        assert_eq!(PropSet::full(0), PropSet::empty());
        assert_eq!(PropSet::full(64).len(), 64);
    }

    #[test]
    fn representation_is_canonical() {
        let mut a = PropSet::from_indices([3, 200]);
        a.remove(200);
        assert_eq!(a, PropSet::singleton(3));
        let b = PropSet::from_indices([100]).intersection(&PropSet::from_indices([5, 101]));
        assert_eq!(b, PropSet::empty());
        assert!(b.is_empty());
    }

    #[test]
    fn complement_and_iteration() {
        let s = PropSet::from_indices([0, 2]);
        assert_eq!(s.complement(4).iter().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(PropSet::empty().complement(3), PropSet::full(3));
        assert_eq!(PropSet::from_mask(0b101), s);
        assert_eq!(s.to_mask(), Some(0b101));
        assert_eq!(PropSet::singleton(70).to_mask(), None);
    }

    fn small_set() -> impl Strategy<Value = PropSet> {
        proptest::collection::btree_set(0usize..200, 0..12).prop_map(PropSet::from_indices)
    }

    proptest! {
        #[test]
        fn set_algebra_laws(a in small_set(), b in small_set()) {
            let i = a.intersection(&b);
            let u = a.union(&b);
            prop_assert!(i.is_subset(&a) && i.is_subset(&b));
            prop_assert!(a.is_subset(&u) && b.is_subset(&u));
            prop_assert_eq!(a.intersects(&b), !i.is_empty());
            prop_assert_eq!(u.len() + i.len(), a.len() + b.len());
            prop_assert_eq!(a.difference(&b).union(&i), a.clone());
            let back: PropSet = a.iter().collect();
            prop_assert_eq!(back, a);
        }
    }
}
