//! Finite binary relations over indexed elements.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

/// A relation given by successor sets. The domain is the key set; every
/// successor is expected to lie in the domain.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Relation {
    successors: BTreeMap<usize, BTreeSet<usize>>,
}

impl Relation {
    pub fn new<I: IntoIterator<Item = usize>>(domain: I) -> Self {
        Relation {
            successors: domain.into_iter().map(|x| (x, BTreeSet::new())).collect(),
        }
    }

    pub fn insert(&mut self, from: usize, to: usize) {
        self.successors.entry(to).or_default();
        self.successors.entry(from).or_default().insert(to);
    }

    pub fn contains(&self, from: usize, to: usize) -> bool {
        self.successors.get(&from).is_some_and(|s| s.contains(&to))
    }

    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.successors.keys().copied()
    }

    pub fn successors(&self, x: usize) -> Option<&BTreeSet<usize>> {
        self.successors.get(&x)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.successors
            .iter()
            .flat_map(|(&x, ys)| ys.iter().map(move |&y| (x, y)))
    }

    pub fn is_reflexive(&self) -> bool {
        self.domain().all(|x| self.contains(x, x))
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs().all(|(x, y)| self.contains(y, x))
    }

    pub fn is_transitive(&self) -> bool {
        self.pairs().all(|(x, y)| {
            self.successors(y)
                .is_some_and(|zs| zs.iter().all(|&z| self.contains(x, z)))
        })
    }

    pub fn is_equivalence(&self) -> bool {
        self.is_reflexive() && self.is_symmetric() && self.is_transitive()
    }

    /// Distinct successor sets in order of their least element. For an
    /// equivalence relation these are its classes.
    pub fn classes(&self) -> Vec<BTreeSet<usize>> {
        let mut seen = BTreeSet::new();
        let mut out: Vec<BTreeSet<usize>> = self
            .successors
            .values()
            .filter(|s| seen.insert((*s).clone()))
            .cloned()
            .collect();
        out.sort_by_key(|s| s.iter().next().copied());
        out
    }

    /// Whether every pair of `self` is in `other`.
    pub fn is_subset(&self, other: &Relation) -> bool {
        self.pairs().all(|(x, y)| other.contains(x, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equivalence_checks() {
        let mut r = Relation::new([0, 1, 2]);
        for (x, y) in [(0, 0), (1, 1), (2, 2), (1, 2), (2, 1)] {
            r.insert(x, y);
        }
        assert!(r.is_equivalence());
        assert_eq!(
            r.classes(),
            vec![BTreeSet::from([0]), BTreeSet::from([1, 2])]
        );
        r.insert(0, 1);
        assert!(r.is_reflexive());
        assert!(!r.is_symmetric());
        assert!(!r.is_transitive());
    }

    #[test]
    fn empty_successors_are_not_reflexive() {
        let r = Relation::new([3]);
        assert!(!r.is_reflexive());
        assert!(r.is_symmetric() && r.is_transitive());
    }
}
