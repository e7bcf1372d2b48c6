use std::collections::BTreeSet;
use std::sync::Arc;

use super::{KripkeError, KripkeModel};
use crate::formula::Formula;

impl KripkeModel {
    /// Characteristic formulas of every state at modal depth `depth`.
    ///
    /// Level 0 is the valuation literal conjunction. Level `k + 1` adds, for
    /// each agent, `Ki (chi_u1 | ... )` and `~Ki ~chi_u` over the level-`k`
    /// classes met by the agent's block. States in one level-`k` class get
    /// the same (shared) formula.
    pub fn characteristic_formulas(&self, depth: usize) -> Vec<Arc<Formula>> {
        let n = self.len();
        let refinement = self.refinement();
        let level_of = |k: usize| -> &Vec<usize> {
            let last = refinement.levels.len() - 1;
            &refinement.levels[k.min(last)]
        };
        let base: Vec<Arc<Formula>> = (0..n)
            .map(|s| Arc::new(self.valuation_formula(s)))
            .collect();

        // chi[s] for the current level; states of one class share an Arc.
        let mut current = share_by_class(&base, level_of(0));
        for k in 0..depth {
            let classes = level_of(k);
            let mut next = Vec::with_capacity(n);
            for (s, valuation) in base.iter().enumerate() {
                let mut parts = vec![Arc::clone(valuation)];
                for agent in 1..=self.agents() {
                    let reps = class_representatives(&self.block(agent, s), classes);
                    let disjunction = reps
                        .iter()
                        .map(|&u| Arc::clone(&current[u]))
                        .reduce(|a, b| Arc::new(Formula::Or(a, b)))
                        .unwrap_or_else(|| Arc::new(Formula::Bot));
                    parts.push(Arc::new(Formula::Know(agent, disjunction)));
                    for &u in &reps {
                        let neg = Arc::new(Formula::Not(Arc::clone(&current[u])));
                        let know_neg = Arc::new(Formula::Know(agent, neg));
                        parts.push(Arc::new(Formula::Not(know_neg)));
                    }
                }
                let conj = parts
                    .into_iter()
                    .reduce(|a, b| Arc::new(Formula::And(a, b)))
                    .expect("valuation conjunct");
                next.push(conj);
            }
            current = share_by_class(&next, level_of(k + 1));
        }
        current
    }

    /// Depth at which characteristic formulas separate this model's states
    /// from the states of any model with at most as many states.
    ///
    /// Refinement rounds of the model alone only separate its own states. A
    /// disjoint union with a model of at most `n` states has at most `2n`
    /// classes, so its refinement is stable after `2n - 1` rounds.
    pub fn characteristic_depth(&self) -> usize {
        self.refinement().rounds().max(2 * self.len() - 1)
    }

    /// Characteristic formula of `state` at
    /// [`characteristic_depth`](Self::characteristic_depth).
    pub fn characteristic_formula(&self, state: &str) -> Result<Formula, KripkeError> {
        let s = self.require_state(state)?;
        Ok((*self.characteristic_formulas(self.characteristic_depth())[s]).clone())
    }
}

fn class_representatives(block: &[usize], classes: &[usize]) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    let mut reps: Vec<usize> = block
        .iter()
        .copied()
        .filter(|&u| seen.insert(classes[u]))
        .collect();
    reps.sort_by_key(|&u| classes[u]);
    reps
}

fn share_by_class(formulas: &[Arc<Formula>], classes: &[usize]) -> Vec<Arc<Formula>> {
    let mut first: Vec<Option<usize>> = vec![None; formulas.len()];
    (0..formulas.len())
        .map(|s| {
            let c = classes[s];
            let owner = *first[c].get_or_insert(s);
            Arc::clone(&formulas[owner])
        })
        .collect()
}
