//! Finite multi-agent S5 Kripke models.
//!
//! Accessibility is stored as one partition of the states per agent, so every
//! relation is an equivalence relation by construction. A model may still be
//! assembled with partitions that fail to cover the states or overlap; such
//! models are reported by [`KripkeModel::validate`] and the remaining
//! operations assume validity.

mod bisim;
mod chi;
mod doc;
mod dot;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::formula::{Agent, Formula, Signature, SignatureError};

pub use bisim::Refinement;
pub use doc::{export_model, import_model, DocumentError};
pub use dot::export_dot;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KripkeError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state `{0}` declared twice")]
    DuplicateState(String),
    #[error("a model needs at least one state")]
    NoStates,
    #[error("state `{state}` mentions atom `{atom}` outside the signature")]
    UnknownAtom { state: String, atom: String },
    #[error("expected partitions for {expected} agents, got {found}")]
    AgentCount { expected: usize, found: usize },
    #[error("models have different signatures")]
    SignatureMismatch,
    #[error("model is not a valid S5 model: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Formula(#[from] SignatureError),
}

/// A failure of the partition invariants.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    /// The state lies in no block of the agent's partition.
    Coverage {
        agent: Agent,
        state: String,
    },
    /// The state lies in more than one block of the agent's partition.
    Overlap {
        agent: Agent,
        state: String,
    },
    EmptyBlock {
        agent: Agent,
        block: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Coverage { agent, state } => {
                write!(f, "agent {agent}: state `{state}` is in no block")
            }
            Violation::Overlap { agent, state } => {
                write!(f, "agent {agent}: state `{state}` is in several blocks")
            }
            Violation::EmptyBlock { agent, block } => {
                write!(f, "agent {agent}: block {block} is empty")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeModel {
    sig: Signature,
    states: Vec<String>,
    /// Per state, the indices of the atoms true there.
    valuation: Vec<BTreeSet<usize>>,
    /// Per agent (0-based), blocks of state indices.
    partitions: Vec<Vec<Vec<usize>>>,
    /// Per agent, the first block containing each state.
    block_of: Vec<Vec<Option<usize>>>,
}

impl KripkeModel {
    /// Builds a model without checking the partition invariants. Unknown
    /// state ids, duplicate ids, unknown atoms and a wrong number of
    /// partitions are still rejected.
    pub fn from_parts<S: AsRef<str>>(
        sig: Signature,
        states: Vec<(String, Vec<S>)>,
        partitions: Vec<Vec<Vec<String>>>,
    ) -> Result<Self, KripkeError> {
        if states.is_empty() {
            return Err(KripkeError::NoStates);
        }
        if partitions.len() != sig.agents() {
            return Err(KripkeError::AgentCount {
                expected: sig.agents(),
                found: partitions.len(),
            });
        }
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut ids = Vec::with_capacity(states.len());
        let mut valuation = Vec::with_capacity(states.len());
        for (id, atoms) in states {
            if index.insert(id.clone(), ids.len()).is_some() {
                return Err(KripkeError::DuplicateState(id));
            }
            let mut val = BTreeSet::new();
            for atom in atoms {
                let atom = atom.as_ref();
                let ai = sig
                    .atom_index(atom)
                    .ok_or_else(|| KripkeError::UnknownAtom {
                        state: id.clone(),
                        atom: atom.to_string(),
                    })?;
                val.insert(ai);
            }
            ids.push(id);
            valuation.push(val);
        }
        let mut parts = Vec::with_capacity(partitions.len());
        for blocks in partitions {
            let mut out = Vec::with_capacity(blocks.len());
            for block in blocks {
                let mut members = Vec::with_capacity(block.len());
                for id in block {
                    let i = *index.get(&id).ok_or(KripkeError::UnknownState(id))?;
                    members.push(i);
                }
                out.push(members);
            }
            parts.push(out);
        }
        Ok(Self::assemble(sig, ids, valuation, parts))
    }

    /// Builds a model and rejects it unless [`validate`](Self::validate) is
    /// empty.
    pub fn new<S: AsRef<str>>(
        sig: Signature,
        states: Vec<(String, Vec<S>)>,
        partitions: Vec<Vec<Vec<String>>>,
    ) -> Result<Self, KripkeError> {
        let m = Self::from_parts(sig, states, partitions)?;
        let violations = m.validate();
        if violations.is_empty() {
            Ok(m)
        } else {
            Err(KripkeError::Invalid(violations))
        }
    }

    /// Index-level constructor used by the prover, the oracle and tests.
    /// Partitions are over state indices.
    pub fn from_indices(
        sig: Signature,
        ids: Vec<String>,
        valuation: Vec<BTreeSet<usize>>,
        partitions: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self, KripkeError> {
        if ids.is_empty() {
            return Err(KripkeError::NoStates);
        }
        if partitions.len() != sig.agents() {
            return Err(KripkeError::AgentCount {
                expected: sig.agents(),
                found: partitions.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for id in &ids {
            if !seen.insert(id) {
                return Err(KripkeError::DuplicateState(id.clone()));
            }
        }
        assert_eq!(ids.len(), valuation.len(), "one valuation per state");
        let m = Self::assemble(sig, ids, valuation, partitions);
        let violations = m.validate();
        if violations.is_empty() {
            Ok(m)
        } else {
            Err(KripkeError::Invalid(violations))
        }
    }

    fn assemble(
        sig: Signature,
        states: Vec<String>,
        valuation: Vec<BTreeSet<usize>>,
        mut partitions: Vec<Vec<Vec<usize>>>,
    ) -> Self {
        for blocks in &mut partitions {
            for block in blocks.iter_mut() {
                block.sort_unstable();
            }
            blocks.sort();
        }
        let block_of = partitions
            .iter()
            .map(|blocks| {
                let mut of = vec![None; states.len()];
                for (b, block) in blocks.iter().enumerate() {
                    for &s in block {
                        if of[s].is_none() {
                            of[s] = Some(b);
                        }
                    }
                }
                of
            })
            .collect();
        Self {
            sig,
            states,
            valuation,
            partitions,
            block_of,
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn agents(&self) -> usize {
        self.sig.agents()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.states.iter().position(|s| s == id)
    }

    pub fn require_state(&self, id: &str) -> Result<usize, KripkeError> {
        self.state_index(id)
            .ok_or_else(|| KripkeError::UnknownState(id.to_string()))
    }

    /// Atom indices true at state `s`.
    pub fn valuation(&self, s: usize) -> &BTreeSet<usize> {
        &self.valuation[s]
    }

    pub fn atom_names(&self, s: usize) -> Vec<&str> {
        self.valuation[s]
            .iter()
            .map(|&a| self.sig.atoms()[a].as_str())
            .collect()
    }

    pub fn partition(&self, agent: Agent) -> &[Vec<usize>] {
        &self.partitions[agent - 1]
    }

    /// The agent's block around `s`. A state outside every block (invalid
    /// model) is treated as a singleton.
    pub fn block(&self, agent: Agent, s: usize) -> Vec<usize> {
        match self.block_of[agent - 1][s] {
            Some(b) => self.partitions[agent - 1][b].clone(),
            None => vec![s],
        }
    }

    pub fn same_block(&self, agent: Agent, a: usize, b: usize) -> bool {
        match (self.block_of[agent - 1][a], self.block_of[agent - 1][b]) {
            (Some(x), Some(y)) => x == y,
            _ => a == b,
        }
    }

    /// Lists every partition invariant violation; empty for a valid model.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (ai, blocks) in self.partitions.iter().enumerate() {
            let agent = ai + 1;
            let mut count = vec![0usize; self.states.len()];
            for (b, block) in blocks.iter().enumerate() {
                if block.is_empty() {
                    out.push(Violation::EmptyBlock { agent, block: b });
                }
                for &s in block.iter().collect::<BTreeSet<_>>() {
                    count[s] += 1;
                }
            }
            for (s, &c) in count.iter().enumerate() {
                let state = self.states[s].clone();
                if c == 0 {
                    out.push(Violation::Coverage { agent, state });
                } else if c > 1 {
                    out.push(Violation::Overlap { agent, state });
                }
            }
        }
        out
    }

    /// Truth of `f` at the state named `state`.
    pub fn model_check(&self, state: &str, f: &Formula) -> Result<bool, KripkeError> {
        let s = self.require_state(state)?;
        f.check(&self.sig)?;
        Ok(self.holds(s, f))
    }

    /// Truth of `f` at state index `s`. The formula is assumed to be over
    /// the model's signature; unknown atoms are false and knowledge operators
    /// for agents beyond the signature are evaluated over singletons.
    pub fn holds(&self, s: usize, f: &Formula) -> bool {
        self.extension(f)[s]
    }

    /// The set of states where `f` holds, as a membership vector.
    ///
    /// Shared subterms (same `Arc`) are evaluated once.
    pub fn extension(&self, f: &Formula) -> Vec<bool> {
        let mut memo = HashMap::new();
        self.eval(f, &mut memo)
    }

    fn eval_shared(
        &self,
        f: &Arc<Formula>,
        memo: &mut HashMap<*const Formula, Vec<bool>>,
    ) -> Vec<bool> {
        let key = Arc::as_ptr(f);
        if let Some(v) = memo.get(&key) {
            return v.clone();
        }
        let v = self.eval(f, memo);
        memo.insert(key, v.clone());
        v
    }

    fn eval(&self, f: &Formula, memo: &mut HashMap<*const Formula, Vec<bool>>) -> Vec<bool> {
        let n = self.states.len();
        match f {
            Formula::Top => vec![true; n],
            Formula::Bot => vec![false; n],
            Formula::Atom(a) => match self.sig.atom_index(a) {
                Some(ai) => self.valuation.iter().map(|v| v.contains(&ai)).collect(),
                None => vec![false; n],
            },
            Formula::Not(g) => self.eval_shared(g, memo).into_iter().map(|b| !b).collect(),
            Formula::And(a, b) => zip(
                self.eval_shared(a, memo),
                self.eval_shared(b, memo),
                |x, y| x && y,
            ),
            Formula::Or(a, b) => zip(
                self.eval_shared(a, memo),
                self.eval_shared(b, memo),
                |x, y| x || y,
            ),
            Formula::Implies(a, b) => zip(
                self.eval_shared(a, memo),
                self.eval_shared(b, memo),
                |x, y| !x || y,
            ),
            Formula::Iff(a, b) => zip(
                self.eval_shared(a, memo),
                self.eval_shared(b, memo),
                |x, y| x == y,
            ),
            Formula::Know(i, g) => {
                let inner = self.eval_shared(g, memo);
                if *i == 0 || *i > self.agents() {
                    return inner;
                }
                (0..n)
                    .map(|s| self.block(*i, s).iter().all(|&u| inner[u]))
                    .collect()
            }
        }
    }

    /// Disjoint union over a shared signature. State ids of both sides are
    /// prefixed with `a.`/`b.` when any id occurs in both. States of `self`
    /// keep their indices; states of `other` are shifted by `self.len()`.
    pub fn disjoint_union(&self, other: &KripkeModel) -> Result<KripkeModel, KripkeError> {
        if self.sig != other.sig {
            return Err(KripkeError::SignatureMismatch);
        }
        let clash = self.states.iter().any(|s| other.states.contains(s));
        let rename = |prefix: &str, s: &String| {
            if clash {
                format!("{prefix}.{s}")
            } else {
                s.clone()
            }
        };
        let offset = self.len();
        let ids = self
            .states
            .iter()
            .map(|s| rename("a", s))
            .chain(other.states.iter().map(|s| rename("b", s)))
            .collect();
        let valuation = self
            .valuation
            .iter()
            .chain(other.valuation.iter())
            .cloned()
            .collect();
        let partitions = (0..self.agents())
            .map(|ai| {
                let mut blocks = self.partitions[ai].clone();
                blocks.extend(
                    other.partitions[ai]
                        .iter()
                        .map(|b| b.iter().map(|&s| s + offset).collect()),
                );
                blocks
            })
            .collect();
        Ok(Self::assemble(self.sig.clone(), ids, valuation, partitions))
    }

    /// Conjunction of atom literals describing the valuation at `s`, in
    /// signature order (`true` for an empty signature).
    pub fn valuation_formula(&self, s: usize) -> Formula {
        Formula::conj(self.sig.atoms().iter().enumerate().map(|(ai, name)| {
            let a = Formula::atom(name);
            if self.valuation[s].contains(&ai) {
                a
            } else {
                Formula::not(a)
            }
        }))
    }
}

fn zip(a: Vec<bool>, b: Vec<bool>, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    fn states(list: &[(&str, &[&str])]) -> Vec<(String, Vec<String>)> {
        list.iter()
            .map(|(id, atoms)| {
                (
                    id.to_string(),
                    atoms.iter().map(|a| a.to_string()).collect(),
                )
            })
            .collect()
    }

    fn blocks(list: &[&[&str]]) -> Vec<Vec<String>> {
        list.iter()
            .map(|b| b.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    pub fn m2() -> KripkeModel {
        let sig = Signature::new(["heads", "tails"], 1).unwrap();
        KripkeModel::new(
            sig,
            states(&[("a", &["heads"]), ("b", &["tails"])]),
            vec![blocks(&[&["a", "b"]])],
        )
        .unwrap()
    }

    pub fn m5() -> KripkeModel {
        let sig = Signature::new(["p"], 1).unwrap();
        KripkeModel::new(
            sig,
            states(&[("w", &["p"]), ("v", &[])]),
            vec![blocks(&[&["w", "v"]])],
        )
        .unwrap()
    }

    pub fn m7() -> KripkeModel {
        let sig = Signature::new(["heads", "tails", "Q"], 1).unwrap();
        KripkeModel::new(
            sig,
            states(&[
                ("w", &["heads", "Q"]),
                ("v", &["tails", "Q"]),
                ("c", &["heads"]),
                ("d", &["tails"]),
            ]),
            vec![blocks(&[&["w", "v", "c", "d"]])],
        )
        .unwrap()
    }

    pub fn m9() -> KripkeModel {
        let sig = Signature::new(["heads", "tails", "Q"], 2).unwrap();
        KripkeModel::new(
            sig,
            states(&[
                ("w", &["heads", "Q"]),
                ("v", &["tails", "Q"]),
                ("c", &["heads"]),
                ("d", &["tails"]),
            ]),
            vec![
                blocks(&[&["w", "v", "c", "d"]]),
                blocks(&[&["w", "v"], &["c"], &["d"]]),
            ],
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::formula::parse;

    #[test]
    fn paper_models_validate() {
        assert!(m2().validate().is_empty());
        assert!(m7().validate().is_empty());
        assert!(m9().validate().is_empty());
    }

    #[test]
    fn missing_state_is_one_coverage_violation() {
        let sig = Signature::new(["p"], 1).unwrap();
        let m = KripkeModel::from_parts(
            sig,
            vec![("w".to_string(), vec!["p"]), ("v".to_string(), vec![])],
            vec![vec![vec!["w".to_string()]]],
        )
        .unwrap();
        assert_eq!(
            m.validate(),
            vec![Violation::Coverage {
                agent: 1,
                state: "v".into()
            }]
        );
    }

    #[test]
    fn overlapping_blocks_are_one_disjointness_violation() {
        let sig = Signature::new(["p"], 1).unwrap();
        let m = KripkeModel::from_parts(
            sig,
            vec![("w".to_string(), vec!["p"]), ("v".to_string(), vec![])],
            vec![vec![
                vec!["w".to_string(), "v".to_string()],
                vec!["v".to_string()],
            ]],
        )
        .unwrap();
        assert_eq!(
            m.validate(),
            vec![Violation::Overlap {
                agent: 1,
                state: "v".into()
            }]
        );
        assert!(matches!(
            KripkeModel::new(
                m.signature().clone(),
                vec![("w".to_string(), vec!["p"])],
                vec![vec![]],
            ),
            Err(KripkeError::Invalid(_))
        ));
    }

    #[test]
    fn structural_errors() {
        let sig = Signature::new(["p"], 1).unwrap();
        let none: Vec<(String, Vec<&str>)> = vec![];
        assert_eq!(
            KripkeModel::from_parts(sig.clone(), none, vec![vec![]]),
            Err(KripkeError::NoStates)
        );
        assert_eq!(
            KripkeModel::from_parts(sig.clone(), vec![("w".into(), vec!["q"])], vec![vec![]]),
            Err(KripkeError::UnknownAtom {
                state: "w".into(),
                atom: "q".into()
            })
        );
        assert_eq!(
            KripkeModel::from_parts(
                sig.clone(),
                vec![("w".into(), vec!["p"])],
                vec![vec![vec!["x".into()]]]
            ),
            Err(KripkeError::UnknownState("x".into()))
        );
        assert_eq!(
            KripkeModel::from_parts(
                sig,
                vec![("w".into(), vec!["p"]), ("w".into(), vec![])],
                vec![vec![]]
            ),
            Err(KripkeError::DuplicateState("w".into()))
        );
    }

    #[test]
    fn ann_does_not_know_q_in_m7() {
        let m = m7();
        let sig = m.signature().clone();
        assert!(m.model_check("w", &parse("Q", &sig).unwrap()).unwrap());
        assert!(!m.model_check("w", &parse("K1 Q", &sig).unwrap()).unwrap());
        assert!(m
            .model_check("v", &parse("Q & ~K Q", &sig).unwrap())
            .unwrap());
    }

    #[test]
    fn bob_knows_q_in_m9() {
        let m = m9();
        let sig = m.signature().clone();
        assert!(m.model_check("w", &parse("K2 Q", &sig).unwrap()).unwrap());
        assert!(!m.model_check("w", &parse("K1 Q", &sig).unwrap()).unwrap());
        assert!(!m
            .model_check("w", &parse("K1 heads | K2 heads", &sig).unwrap())
            .unwrap());
    }

    #[test]
    fn top_holds_everywhere() {
        for m in [m2(), m5(), m7(), m9()] {
            assert!(m.extension(&Formula::Top).iter().all(|&b| b));
        }
    }

    #[test]
    fn model_check_errors() {
        let m = m5();
        assert_eq!(
            m.model_check("x", &Formula::Top),
            Err(KripkeError::UnknownState("x".into()))
        );
        assert!(matches!(
            m.model_check("w", &Formula::know(2, Formula::Top)),
            Err(KripkeError::Formula(_))
        ));
    }

    #[test]
    fn union_prefixes_clashing_ids() {
        let u = m5().disjoint_union(&m5()).unwrap();
        assert_eq!(u.states(), ["a.w", "a.v", "b.w", "b.v"]);
        assert!(u.validate().is_empty());
        assert!(!u.same_block(1, 0, 2));
        assert!(matches!(
            m5().disjoint_union(&m7()),
            Err(KripkeError::SignatureMismatch)
        ));
    }
}
