//! Decision procedures for S5 with `n` agents.
//!
//! Consequence from hypotheses uses the theorems of the logic plus the
//! hypotheses, closed under modus ponens only. Hypotheses are not
//! necessitated, so `{K1 m}` yields `m` but not `K2 m`. For finite
//! hypothesis sets this is validity of `(G1 & ... & Gk) -> F`.

mod oracle;
mod tableau;

use std::time::Duration;

use thiserror::Error;

use crate::formula::{Agent, Formula, Signature, SignatureError};
use crate::kripke::KripkeModel;

pub use oracle::{models_with_states, oracle_satisfiable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProverError {
    #[error("unknown: budget exhausted after {nodes} tableau steps ({elapsed:?})")]
    BudgetExceeded { nodes: u64, elapsed: Duration },
    #[error(transparent)]
    Signature(#[from] SignatureError),
}

/// Per-query resource limits. Exceeding either yields
/// [`ProverError::BudgetExceeded`], never a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: u64,
    pub max_time: Duration,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_nodes: 1_000_000,
            max_time: Duration::from_secs(10),
        }
    }
}

/// A pointed model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Countermodel {
    pub model: KripkeModel,
    pub state: usize,
}

impl Countermodel {
    pub fn state_id(&self) -> &str {
        &self.model.states()[self.state]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofResult {
    Valid,
    /// The countermodel falsifies the formula at its designated state.
    Invalid(Countermodel),
}

impl ProofResult {
    pub fn is_valid(&self) -> bool {
        matches!(self, ProofResult::Valid)
    }

    pub fn countermodel(&self) -> Option<&Countermodel> {
        match self {
            ProofResult::Valid => None,
            ProofResult::Invalid(c) => Some(c),
        }
    }
}

/// A finite hypothesis set. Order of first occurrence is kept; duplicates
/// are dropped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Hypotheses {
    formulas: Vec<Formula>,
}

impl Hypotheses {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, f: Formula) {
        if !self.formulas.contains(&f) {
            self.formulas.push(f);
        }
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn conjunction(&self) -> Formula {
        Formula::conj(self.formulas.iter().cloned())
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Formula> {
        self.formulas.iter()
    }
}

impl FromIterator<Formula> for Hypotheses {
    fn from_iter<I: IntoIterator<Item = Formula>>(iter: I) -> Self {
        let mut h = Hypotheses::new();
        for f in iter {
            h.push(f);
        }
        h
    }
}

impl<'a> IntoIterator for &'a Hypotheses {
    type Item = &'a Formula;
    type IntoIter = std::slice::Iter<'a, Formula>;

    fn into_iter(self) -> Self::IntoIter {
        self.formulas.iter()
    }
}

/// A hypothesis `formula` and an agent for which `Ki formula` does not
/// follow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NecessitationFailure {
    pub formula: Formula,
    pub agent: Agent,
    pub countermodel: Countermodel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NecessitationReport {
    pub closed: bool,
    pub failures: Vec<NecessitationFailure>,
}

/// Tableau prover with a fixed per-query budget.
#[derive(Debug, Clone, Copy, Default)]
pub struct Prover {
    pub budget: Budget,
}

impl Prover {
    pub fn new(budget: Budget) -> Self {
        Self { budget }
    }

    /// A pointed model of `f`, or `None` when `f` is unsatisfiable.
    pub fn satisfiable(
        &self,
        sig: &Signature,
        f: &Formula,
    ) -> Result<Option<Countermodel>, ProverError> {
        f.check(sig)?;
        Ok(tableau::satisfy(sig, f, &self.budget)?
            .map(|(model, state)| Countermodel { model, state }))
    }

    pub fn decide_validity(
        &self,
        sig: &Signature,
        f: &Formula,
    ) -> Result<ProofResult, ProverError> {
        Ok(match self.satisfiable(sig, &Formula::not(f.clone()))? {
            None => ProofResult::Valid,
            Some(c) => ProofResult::Invalid(c),
        })
    }

    /// `gamma |- f` with modus ponens over the theorems and `gamma`. An
    /// invalid answer carries a pointed model of every hypothesis and `~f`.
    pub fn consequence(
        &self,
        sig: &Signature,
        gamma: &Hypotheses,
        f: &Formula,
    ) -> Result<ProofResult, ProverError> {
        if gamma.is_empty() {
            return self.decide_validity(sig, f);
        }
        self.decide_validity(sig, &Formula::implies(gamma.conjunction(), f.clone()))
    }

    /// Whether `gamma |- Ki G` for every hypothesis `G` and agent `i`. This
    /// one-step condition is equivalent to closure of `gamma` under
    /// necessitation and to `gamma` proving its own common knowledge.
    pub fn necessitation_closed(
        &self,
        sig: &Signature,
        gamma: &Hypotheses,
    ) -> Result<NecessitationReport, ProverError> {
        let mut failures = Vec::new();
        for g in gamma {
            for agent in 1..=sig.agents() {
                let goal = Formula::know(agent, g.clone());
                if let ProofResult::Invalid(countermodel) = self.consequence(sig, gamma, &goal)? {
                    failures.push(NecessitationFailure {
                        formula: g.clone(),
                        agent,
                        countermodel,
                    });
                }
            }
        }
        Ok(NecessitationReport {
            closed: failures.is_empty(),
            failures,
        })
    }
}

pub fn decide_validity(sig: &Signature, f: &Formula) -> Result<ProofResult, ProverError> {
    Prover::default().decide_validity(sig, f)
}

pub fn consequence(
    sig: &Signature,
    gamma: &Hypotheses,
    f: &Formula,
) -> Result<ProofResult, ProverError> {
    Prover::default().consequence(sig, gamma, f)
}

pub fn necessitation_closed(
    sig: &Signature,
    gamma: &Hypotheses,
) -> Result<NecessitationReport, ProverError> {
    Prover::default().necessitation_closed(sig, gamma)
}

/// `f` under every prefix `P1 ... Pk` of knowledge operators with
/// `k <= depth`, ordered by prefix length and then lexicographically by
/// agent sequence (outermost operator first).
pub fn ck_unfold(f: &Formula, depth: usize, sig: &Signature) -> Vec<Formula> {
    let n = sig.agents();
    let mut out = vec![f.clone()];
    let mut layer: Vec<Vec<Agent>> = vec![Vec::new()];
    for _ in 0..depth {
        layer = layer
            .iter()
            .flat_map(|prefix| {
                (1..=n).map(move |i| {
                    let mut p = prefix.clone();
                    p.push(i);
                    p
                })
            })
            .collect();
        for prefix in &layer {
            let wrapped = prefix
                .iter()
                .rev()
                .fold(f.clone(), |acc, &i| Formula::know(i, acc));
            out.push(wrapped);
        }
    }
    out
}
