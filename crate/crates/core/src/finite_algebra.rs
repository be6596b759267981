//! Atomic finite Boolean algebras.
//!
//! Every finite Boolean algebra is atomic, so a set is identified with the
//! atoms it contains. [`AtomSet`] stores those atoms as a word-packed bit
//! mask: a single `u64` for algebras of at most 64 atoms, more words beyond.

use crate::error::{Error, Result};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AtomSet {
    // Invariant: no trailing zero words.
    words: Vec<u64>,
}

impl AtomSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The set `{0, 1, ..., n - 1}`.
    pub fn full(n: usize) -> Self {
        let mut s = Self::empty();
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    pub fn singleton(i: usize) -> Self {
        let mut s = Self::empty();
        s.insert(i);
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut s = Self::empty();
        for i in indices {
            s.insert(i);
        }
        s
    }

    pub fn insert(&mut self, i: usize) {
        let (w, b) = (i / 64, i % 64);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << b;
    }

    pub fn remove(&mut self, i: usize) {
        let (w, b) = (i / 64, i % 64);
        if w < self.words.len() {
            self.words[w] &= !(1 << b);
            self.trim();
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        let (w, b) = (i / 64, i % 64);
        self.words.get(w).is_some_and(|x| x & (1 << b) != 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Largest index plus one, or 0 for the empty set.
    pub fn bound(&self) -> usize {
        match self.words.last() {
            None => 0,
            Some(w) => (self.words.len() - 1) * 64 + (64 - w.leading_zeros() as usize),
        }
    }

    /// Atom indices in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn union(&self, other: &Self) -> Self {
        let n = self.words.len().max(other.words.len());
        let words = (0..n)
            .map(|i| self.words.get(i).copied().unwrap_or(0) | other.words.get(i).copied().unwrap_or(0))
            .collect();
        Self { words }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        let mut s = Self { words };
        s.trim();
        s
    }

    pub fn difference(&self, other: &Self) -> Self {
        let words = self
            .words
            .iter()
            .enumerate()
            .map(|(i, a)| a & !other.words.get(i).copied().unwrap_or(0))
            .collect();
        let mut s = Self { words };
        s.trim();
        s
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(i, a)| a & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }
}

impl fmt::Debug for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for AtomSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::from_indices(iter)
    }
}

/// Atomic Boolean algebra on `n_atoms` atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAlgebra {
    n_atoms: usize,
    labels: Option<Vec<String>>,
}

impl FiniteAlgebra {
    pub fn new(n_atoms: usize) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::InvalidParameter("an algebra needs at least one atom".into()));
        }
        Ok(Self { n_atoms, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let mut a = Self::new(labels.len())?;
        a.labels = Some(labels);
        Ok(a)
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn label(&self, atom: usize) -> String {
        match &self.labels {
            Some(l) if atom < l.len() => l[atom].clone(),
            _ => atom.to_string(),
        }
    }

    /// The whole ground set.
    pub fn top(&self) -> AtomSet {
        AtomSet::full(self.n_atoms)
    }

    pub fn check(&self, set: &AtomSet) -> Result<()> {
        let bound = set.bound();
        if bound > self.n_atoms {
            return Err(Error::AtomOutOfRange {
                index: bound - 1,
                n_atoms: self.n_atoms,
            });
        }
        Ok(())
    }

    /// Every subset of `set`, in binary-counter order over its atoms.
    pub fn subsets(&self, set: &AtomSet) -> Result<impl Iterator<Item = AtomSet>> {
        self.check(set)?;
        let atoms = set.to_vec();
        if atoms.len() >= 63 {
            return Err(Error::EnumerationCap { size: atoms.len(), cap: 62 });
        }
        Ok((0u64..(1u64 << atoms.len())).map(move |mask| {
            atoms
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &a)| a)
                .collect()
        }))
    }
}

/// Lazily enumerates the partitions of a set of atoms into nonempty blocks.
///
/// Partitions are encoded as restricted growth strings and produced in
/// decreasing lexicographic order, which starts at the finest partition
/// (all singletons) and ends at the single-block partition. Blocks within a
/// partition are ordered by their smallest atom.
#[derive(Debug, Clone)]
pub struct Partitions {
    atoms: Vec<usize>,
    rgs: Vec<usize>,
    done: bool,
}

impl Partitions {
    fn new(atoms: Vec<usize>) -> Self {
        let rgs = (0..atoms.len()).collect();
        Self { atoms, rgs, done: false }
    }

    fn current(&self) -> Vec<AtomSet> {
        let n_blocks = self.rgs.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![AtomSet::empty(); n_blocks];
        for (&atom, &b) in self.atoms.iter().zip(&self.rgs) {
            blocks[b].insert(atom);
        }
        blocks
    }

    /// Moves to the lexicographic predecessor; false when exhausted.
    fn step(&mut self) -> bool {
        let n = self.rgs.len();
        let Some(i) = (1..n).rev().find(|&i| self.rgs[i] > 0) else {
            return false;
        };
        self.rgs[i] -= 1;
        let max = self.rgs[..=i].iter().copied().max().unwrap_or(0);
        for (j, block) in (i + 1..n).zip(max + 1..) {
            self.rgs[j] = block;
        }
        true
    }
}

impl Iterator for Partitions {
    type Item = Vec<AtomSet>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let out = self.current();
        if !self.step() {
            self.done = true;
        }
        Some(out)
    }
}

/// All partitions of `set`, finest first.
pub fn partitions(algebra: &FiniteAlgebra, set: &AtomSet) -> Result<Partitions> {
    algebra.check(set)?;
    Ok(Partitions::new(set.to_vec()))
}

/// Product of two atomic algebras; atom `(i, j)` has index `i * right + j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductAlgebra {
    pub left: FiniteAlgebra,
    pub right: FiniteAlgebra,
}

impl ProductAlgebra {
    pub fn new(left: FiniteAlgebra, right: FiniteAlgebra) -> Self {
        Self { left, right }
    }

    pub fn n_atoms(&self) -> usize {
        self.left.n_atoms() * self.right.n_atoms()
    }

    pub fn as_algebra(&self) -> FiniteAlgebra {
        FiniteAlgebra::new(self.n_atoms()).expect("factors are nonempty")
    }

    pub fn atom_index(&self, i: usize, j: usize) -> usize {
        i * self.right.n_atoms() + j
    }

    pub fn atom_pair(&self, index: usize) -> (usize, usize) {
        (index / self.right.n_atoms(), index % self.right.n_atoms())
    }
}

/// The rectangle `a × b` as a set of the product algebra.
pub fn rectangle(prod: &ProductAlgebra, a: &AtomSet, b: &AtomSet) -> Result<AtomSet> {
    prod.left.check(a)?;
    prod.right.check(b)?;
    let mut out = AtomSet::empty();
    for i in a.iter() {
        for j in b.iter() {
            out.insert(prod.atom_index(i, j));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bell(n: usize) -> usize {
        // Bell triangle.
        let mut row = vec![1usize];
        for _ in 0..n {
            let mut next = vec![*row.last().unwrap()];
            for &x in &row {
                let v = *next.last().unwrap() + x;
                next.push(v);
            }
            row = next;
        }
        row[0]
    }

    #[test]
    fn partition_counts_small() {
        let alg = FiniteAlgebra::new(4).unwrap();
        assert_eq!(partitions(&alg, &AtomSet::from_indices([0])).unwrap().count(), 1);
        assert_eq!(partitions(&alg, &AtomSet::from_indices([0, 3])).unwrap().count(), 2);
        assert_eq!(partitions(&alg, &AtomSet::from_indices([0, 1, 2])).unwrap().count(), 5);
    }

    #[test]
    fn partition_counts_match_bell_numbers() {
        let alg = FiniteAlgebra::new(8).unwrap();
        for n in 0..=8 {
            let count = partitions(&alg, &AtomSet::full(n)).unwrap().count();
            assert_eq!(count, bell(n), "n = {n}");
        }
    }

    #[test]
    fn two_atom_partitions_in_order() {
        let alg = FiniteAlgebra::new(2).unwrap();
        let parts: Vec<_> = partitions(&alg, &AtomSet::full(2)).unwrap().collect();
        assert_eq!(parts[0], vec![AtomSet::singleton(0), AtomSet::singleton(1)]);
        assert_eq!(parts[1], vec![AtomSet::full(2)]);
    }

    #[test]
    fn partitions_are_distinct_and_cover() {
        let alg = FiniteAlgebra::new(6).unwrap();
        let set = AtomSet::from_indices([0, 2, 3, 5]);
        let parts: Vec<_> = partitions(&alg, &set).unwrap().collect();
        let mut seen = std::collections::BTreeSet::new();
        for p in &parts {
            let mut sorted = p.clone();
            sorted.sort();
            assert!(seen.insert(sorted), "duplicate partition");
            let mut union = AtomSet::empty();
            for b in p {
                assert!(!b.is_empty());
                assert!(union.is_disjoint(b));
                union = union.union(b);
            }
            assert_eq!(union, set);
        }
    }

    #[test]
    fn finest_partition_first() {
        let alg = FiniteAlgebra::new(5).unwrap();
        let set = AtomSet::from_indices([1, 2, 4]);
        let first = partitions(&alg, &set).unwrap().next().unwrap();
        let singletons: Vec<_> = set.iter().map(AtomSet::singleton).collect();
        assert_eq!(first, singletons);
    }

    #[test]
    fn rejects_out_of_range_atoms() {
        let alg = FiniteAlgebra::new(3).unwrap();
        let err = partitions(&alg, &AtomSet::from_indices([0, 3])).unwrap_err();
        assert_eq!(err, Error::AtomOutOfRange { index: 3, n_atoms: 3 });
        assert!(FiniteAlgebra::new(0).is_err());
    }

    #[test]
    fn rectangle_examples() {
        let prod = ProductAlgebra::new(FiniteAlgebra::new(2).unwrap(), FiniteAlgebra::new(3).unwrap());
        let r = rectangle(&prod, &AtomSet::singleton(0), &AtomSet::singleton(1)).unwrap();
        assert_eq!(r, AtomSet::singleton(prod.atom_index(0, 1)));
        let r = rectangle(&prod, &AtomSet::empty(), &AtomSet::full(3)).unwrap();
        assert!(r.is_empty());
        let r = rectangle(&prod, &AtomSet::from_indices([0, 1]), &AtomSet::from_indices([0, 2])).unwrap();
        let pairs: Vec<_> = r.iter().map(|k| prod.atom_pair(k)).collect();
        assert_eq!(pairs, vec![(0, 0), (0, 2), (1, 0), (1, 2)]);
        assert!(rectangle(&prod, &AtomSet::singleton(2), &AtomSet::singleton(0)).is_err());
    }

    #[test]
    fn large_algebra_sets_use_several_words() {
        let alg = FiniteAlgebra::new(200).unwrap();
        let s = AtomSet::from_indices([3, 64, 199]);
        alg.check(&s).unwrap();
        assert_eq!(s.to_vec(), vec![3, 64, 199]);
        assert_eq!(s.len(), 3);
        let mut t = s.clone();
        t.remove(199);
        assert_eq!(t.bound(), 65);
        assert!(t.is_subset(&s));
    }

    proptest! {
        #[test]
        fn rectangle_distributes_over_disjoint_unions(
            a1 in prop::collection::btree_set(0usize..5, 0..5),
            a2 in prop::collection::btree_set(5usize..9, 0..4),
            b in prop::collection::btree_set(0usize..7, 0..7),
        ) {
            let prod = ProductAlgebra::new(FiniteAlgebra::new(9).unwrap(), FiniteAlgebra::new(7).unwrap());
            let a1: AtomSet = a1.into_iter().collect();
            let a2: AtomSet = a2.into_iter().collect();
            let b: AtomSet = b.into_iter().collect();
            let whole = rectangle(&prod, &a1.union(&a2), &b).unwrap();
            let r1 = rectangle(&prod, &a1, &b).unwrap();
            let r2 = rectangle(&prod, &a2, &b).unwrap();
            prop_assert!(r1.is_disjoint(&r2));
            prop_assert_eq!(whole.clone(), r1.union(&r2));
            prop_assert_eq!(whole.len(), (a1.len() + a2.len()) * b.len());
        }

        #[test]
        fn set_algebra_identities(
            a in prop::collection::btree_set(0usize..130, 0..20),
            b in prop::collection::btree_set(0usize..130, 0..20),
        ) {
            let a: AtomSet = a.into_iter().collect();
            let b: AtomSet = b.into_iter().collect();
            let i = a.intersection(&b);
            prop_assert_eq!(a.union(&b).len() + i.len(), a.len() + b.len());
            prop_assert!(a.difference(&b).is_disjoint(&b));
            prop_assert_eq!(a.difference(&b).union(&i), a.clone());
        }
    }
}
