//! Exhaustive small-model search, kept independent of the tableau.

use std::collections::BTreeSet;

use crate::formula::{Formula, Signature};
use crate::kripke::KripkeModel;

/// All set partitions of `0..n`, as restricted growth strings turned into
/// block lists.
pub(crate) fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn extend(prefix: &mut Vec<usize>, n: usize, max: usize, out: &mut Vec<Vec<Vec<usize>>>) {
        if prefix.len() == n {
            let mut blocks = vec![Vec::new(); max + 1];
            for (s, &b) in prefix.iter().enumerate() {
                blocks[b].push(s);
            }
            out.push(blocks);
            return;
        }
        let limit = if prefix.is_empty() { 0 } else { max + 1 };
        for b in 0..=limit {
            prefix.push(b);
            extend(prefix, n, max.max(b), out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        extend(&mut Vec::new(), n, 0, &mut out);
    }
    out
}

/// Non-decreasing sequences of length `n` over `0..values`.
fn sorted_sequences(n: usize, values: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, n: usize, values: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let start = prefix.last().copied().unwrap_or(0);
        for v in start..values {
            prefix.push(v);
            extend(prefix, n, values, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), n, values, &mut out);
    out
}

/// Every S5 model over `sig` with exactly `n` states, up to renaming of
/// states: valuations are listed in non-decreasing order of their bit
/// encoding, partitions range over all set partitions per agent.
pub fn models_with_states(sig: &Signature, n: usize) -> Vec<KripkeModel> {
    let atoms = sig.atoms().len();
    let partitions = set_partitions(n);
    let ids: Vec<String> = (0..n).map(|s| format!("s{s}")).collect();
    let mut out = Vec::new();
    for vals in sorted_sequences(n, 1 << atoms) {
        let valuation: Vec<BTreeSet<usize>> = vals
            .iter()
            .map(|&bits| (0..atoms).filter(|a| bits & (1 << a) != 0).collect())
            .collect();
        let mut choice = vec![0usize; sig.agents()];
        loop {
            let parts = choice.iter().map(|&c| partitions[c].clone()).collect();
            out.push(
                KripkeModel::from_indices(sig.clone(), ids.clone(), valuation.clone(), parts)
                    .expect("enumerated partitions are valid"),
            );
            // odometer over per-agent partition choices
            let mut k = 0;
            while k < choice.len() {
                choice[k] += 1;
                if choice[k] < partitions.len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
            if k == choice.len() {
                break;
            }
        }
    }
    out
}

/// Looks for a pointed model of `f` with at most `max_states` states by
/// trying every model in order of size. An empty answer is not a proof of
/// unsatisfiability.
pub fn oracle_satisfiable(
    sig: &Signature,
    f: &Formula,
    max_states: usize,
) -> Option<(KripkeModel, usize)> {
    for n in 1..=max_states {
        for m in models_with_states(sig, n) {
            if let Some(s) = m.extension(f).iter().position(|&b| b) {
                return Some((m, s));
            }
        }
    }
    None
}
