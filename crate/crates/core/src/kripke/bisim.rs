use std::collections::{BTreeSet, HashMap};

use super::KripkeModel;

/// Result of naive partition refinement to the coarsest bisimulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refinement {
    /// `levels[k][s]` is the class id of state `s` after `k` rounds. Class
    /// ids are numbered by first occurrence in state order.
    pub levels: Vec<Vec<usize>>,
}

impl Refinement {
    /// Number of refinement rounds run, including the last round that
    /// confirmed stability.
    pub fn rounds(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn stable(&self) -> &[usize] {
        self.levels.last().expect("at least the initial level")
    }

    pub fn class_count(&self) -> usize {
        self.stable().iter().max().map_or(0, |m| m + 1)
    }
}

fn renumber<K: std::hash::Hash + Eq>(keys: Vec<K>) -> Vec<usize> {
    let mut ids: HashMap<K, usize> = HashMap::new();
    keys.into_iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(k).or_insert(next)
        })
        .collect()
}

impl KripkeModel {
    /// Refines the valuation partition until two states share a class only
    /// when, for every agent, their blocks meet the same set of classes.
    pub fn refinement(&self) -> Refinement {
        let n = self.len();
        let initial = renumber((0..n).map(|s| self.valuation(s).clone()).collect());
        let mut levels = vec![initial];
        loop {
            let current = levels.last().unwrap();
            let before = current.iter().max().map_or(0, |m| m + 1);
            let keys: Vec<(usize, Vec<BTreeSet<usize>>)> = (0..n)
                .map(|s| {
                    let seen = (1..=self.agents())
                        .map(|i| self.block(i, s).iter().map(|&u| current[u]).collect())
                        .collect();
                    (current[s], seen)
                })
                .collect();
            let next = renumber(keys);
            let after = next.iter().max().map_or(0, |m| m + 1);
            levels.push(next);
            if after == before {
                break;
            }
        }
        Refinement { levels }
    }

    /// Bisimulation classes as lists of state indices, ordered by their first
    /// member.
    pub fn bisim_classes(&self) -> Vec<Vec<usize>> {
        let r = self.refinement();
        let mut classes = vec![Vec::new(); r.class_count()];
        for (s, &c) in r.stable().iter().enumerate() {
            classes[c].push(s);
        }
        classes
    }

    /// Same as [`bisim_classes`](Self::bisim_classes) with state ids.
    pub fn bisim_class_ids(&self) -> Vec<Vec<String>> {
        self.bisim_classes()
            .into_iter()
            .map(|c| c.into_iter().map(|s| self.states()[s].clone()).collect())
            .collect()
    }

    /// Whether state `a` of `self` and state `b` of `other` are bisimilar,
    /// decided on the disjoint union.
    pub fn bisimilar_across(&self, a: usize, other: &KripkeModel, b: usize) -> bool {
        match self.disjoint_union(other) {
            Ok(u) => {
                let r = u.refinement();
                r.stable()[a] == r.stable()[self.len() + b]
            }
            Err(_) => false,
        }
    }
}
