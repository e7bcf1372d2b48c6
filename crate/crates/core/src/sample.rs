//! Seeded random formulas, models and carvings for property checks.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::{Formula, Signature};
use crate::kripke::KripkeModel;

/// Deterministic generator for a seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape limits for [`random_formula`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormulaShape {
    pub max_depth: usize,
    /// Upper bound on [`Formula::size`].
    pub max_size: usize,
}

impl Default for FormulaShape {
    fn default() -> Self {
        FormulaShape {
            max_depth: 3,
            max_size: 12,
        }
    }
}

/// A random formula over `sig` within `shape`. Atoms are drawn from the
/// signature; with no atoms, leaves are constants.
pub fn random_formula<R: Rng>(rng: &mut R, sig: &Signature, shape: FormulaShape) -> Formula {
    let size = rng.gen_range(1..=shape.max_size.max(1));
    build(rng, sig, shape.max_depth, size)
}

fn leaf<R: Rng>(rng: &mut R, sig: &Signature) -> Formula {
    let atoms = sig.atoms();
    if atoms.is_empty() || rng.gen_ratio(1, 10) {
        if rng.gen_bool(0.5) {
            Formula::Top
        } else {
            Formula::Bot
        }
    } else {
        Formula::atom(atoms.choose(rng).expect("nonempty"))
    }
}

fn build<R: Rng>(rng: &mut R, sig: &Signature, depth: usize, size: usize) -> Formula {
    if size <= 1 {
        return leaf(rng, sig);
    }
    let unary_only = size == 2;
    let choice = if unary_only {
        rng.gen_range(0..2)
    } else {
        rng.gen_range(0..6)
    };
    match choice {
        1 if depth > 0 => {
            let agent = rng.gen_range(1..=sig.agents());
            Formula::know(agent, build(rng, sig, depth - 1, size - 1))
        }
        0 | 1 => Formula::not(build(rng, sig, depth, size - 1)),
        op => {
            let left = rng.gen_range(1..size - 1);
            let a = build(rng, sig, depth, left);
            let b = build(rng, sig, depth, size - 1 - left);
            match op {
                2 => Formula::and(a, b),
                3 => Formula::or(a, b),
                4 => Formula::implies(a, b),
                _ => Formula::iff(a, b),
            }
        }
    }
}

/// A random valid model with between 1 and `max_states` states named
/// `s0`, `s1`, ...
pub fn random_model<R: Rng>(rng: &mut R, sig: &Signature, max_states: usize) -> KripkeModel {
    let n = rng.gen_range(1..=max_states.max(1));
    let ids: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let valuation: Vec<BTreeSet<usize>> = (0..n)
        .map(|_| {
            (0..sig.atoms().len())
                .filter(|_| rng.gen_bool(0.5))
                .collect()
        })
        .collect();
    let partitions = (0..sig.agents())
        .map(|_| {
            let mut blocks: Vec<Vec<usize>> = Vec::new();
            for s in 0..n {
                let pick = rng.gen_range(0..=blocks.len());
                match blocks.get_mut(pick) {
                    Some(block) => block.push(s),
                    None => blocks.push(vec![s]),
                }
            }
            blocks
        })
        .collect();
    KripkeModel::from_indices(sig.clone(), ids, valuation, partitions)
        .expect("generated partitions are valid")
}

/// A random nonempty subset of the model's state ids.
pub fn random_carving<R: Rng>(rng: &mut R, m: &KripkeModel) -> Vec<String> {
    loop {
        let keep: Vec<String> = m
            .states()
            .iter()
            .filter(|_| rng.gen_bool(0.5))
            .cloned()
            .collect();
        if !keep.is_empty() {
            return keep;
        }
    }
}
