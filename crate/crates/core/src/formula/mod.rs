//! Syntax of the n-agent modal language.

mod parse;
mod render;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parse::{parse, parse_open, ParseError};

/// Agent index, counted from 1.
pub type Agent = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error("a signature needs at least one agent")]
    NoAgents,
    #[error("empty atom name")]
    EmptyAtom,
    #[error("atom `{0}` is not an identifier")]
    BadAtom(String),
    #[error("atom `{0}` declared twice")]
    DuplicateAtom(String),
    #[error("atom `{0}` is not in the signature")]
    UnknownAtom(String),
    #[error("agent {agent} out of range 1..={agents}")]
    AgentOutOfRange { agent: Agent, agents: usize },
}

/// Atom alphabet plus the number of agents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    atoms: Vec<String>,
    agents: usize,
}

impl Signature {
    pub fn new<I, S>(atoms: I, agents: usize) -> Result<Self, SignatureError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if agents == 0 {
            return Err(SignatureError::NoAgents);
        }
        let mut seen = BTreeSet::new();
        let mut list = Vec::new();
        for atom in atoms {
            let atom = atom.into();
            if atom.is_empty() {
                return Err(SignatureError::EmptyAtom);
            }
            if !parse::is_atom_name(&atom) {
                return Err(SignatureError::BadAtom(atom));
            }
            if !seen.insert(atom.clone()) {
                return Err(SignatureError::DuplicateAtom(atom));
            }
            list.push(atom);
        }
        Ok(Self {
            atoms: list,
            agents,
        })
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn atom_index(&self, name: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a == name)
    }

    pub fn contains_atom(&self, name: &str) -> bool {
        self.atom_index(name).is_some()
    }

    /// Same atoms, different agent count.
    pub fn with_agents(&self, agents: usize) -> Result<Self, SignatureError> {
        Self::new(self.atoms.iter().cloned(), agents)
    }

    /// Smallest signature over which every formula is well formed. Atoms are
    /// listed in order of first occurrence.
    pub fn covering<'a, I>(formulas: I, min_agents: usize) -> Self
    where
        I: IntoIterator<Item = &'a Formula>,
    {
        let mut atoms: Vec<String> = Vec::new();
        let mut agents = min_agents.max(1);
        for f in formulas {
            f.visit(&mut |g| match g {
                Formula::Atom(a) => {
                    if !atoms.iter().any(|x| x.as_str() == &**a) {
                        atoms.push(a.to_string());
                    }
                }
                Formula::Know(i, _) => agents = agents.max(*i),
                _ => {}
            });
        }
        Self { atoms, agents }
    }
}

/// A formula of the modal language.
///
/// Children are reference counted so large formulas (characteristic
/// formulas in particular) can share subterms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Arc<str>),
    Top,
    Bot,
    Not(Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    Implies(Arc<Formula>, Arc<Formula>),
    Iff(Arc<Formula>, Arc<Formula>),
    Know(Agent, Arc<Formula>),
}

impl Formula {
    pub fn atom(name: &str) -> Self {
        Formula::Atom(Arc::from(name))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Arc::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Arc::new(a), Arc::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Arc::new(a), Arc::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Arc::new(a), Arc::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Arc::new(a), Arc::new(b))
    }

    pub fn know(agent: Agent, f: Formula) -> Self {
        Formula::Know(agent, Arc::new(f))
    }

    /// `~Ki ~f`
    pub fn possible(agent: Agent, f: Formula) -> Self {
        Formula::not(Formula::know(agent, Formula::not(f)))
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn conj<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::Top)
    }

    /// Left-nested disjunction; `false` when empty.
    pub fn disj<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        items
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::Bot)
    }

    /// Maximal nesting of knowledge operators.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Top | Formula::Bot => 0,
            Formula::Not(f) => f.modal_depth(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => a.modal_depth().max(b.modal_depth()),
            Formula::Know(_, f) => 1 + f.modal_depth(),
        }
    }

    /// Number of syntax nodes, counting shared subterms once per occurrence.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Top | Formula::Bot => 1,
            Formula::Not(f) | Formula::Know(_, f) => 1 + f.size(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Pre-order traversal of every subformula occurrence.
    pub fn visit<F: FnMut(&Formula)>(&self, visitor: &mut F) {
        visitor(self);
        match self {
            Formula::Atom(_) | Formula::Top | Formula::Bot => {}
            Formula::Not(f) | Formula::Know(_, f) => f.visit(visitor),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.visit(visitor);
                b.visit(visitor);
            }
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |g| {
            if let Formula::Atom(a) = g {
                out.insert(a.to_string());
            }
        });
        out
    }

    /// Largest agent index mentioned, 0 for purely propositional formulas.
    pub fn max_agent(&self) -> Agent {
        let mut max = 0;
        self.visit(&mut |g| {
            if let Formula::Know(i, _) = g {
                max = max.max(*i);
            }
        });
        max
    }

    pub fn is_propositional(&self) -> bool {
        self.modal_depth() == 0
    }

    /// All subformulas, including `self`, together with their negations.
    /// Negations of negations are not added.
    pub fn subformula_closure(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        self.visit(&mut |g| {
            out.insert(g.clone());
            if !matches!(g, Formula::Not(_)) {
                out.insert(Formula::not(g.clone()));
            }
        });
        out
    }

    /// Checks atoms and agent indices against `sig`.
    pub fn check(&self, sig: &Signature) -> Result<(), SignatureError> {
        let mut err = None;
        self.visit(&mut |g| {
            if err.is_some() {
                return;
            }
            match g {
                Formula::Atom(a) if !sig.contains_atom(a) => {
                    err = Some(SignatureError::UnknownAtom(a.to_string()));
                }
                Formula::Know(i, _) if *i == 0 || *i > sig.agents() => {
                    err = Some(SignatureError::AgentOutOfRange {
                        agent: *i,
                        agents: sig.agents(),
                    });
                }
                _ => {}
            }
        });
        err.map_or(Ok(()), Err)
    }

    pub fn render(&self) -> String {
        render::render(self)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Formulas serialize as their rendered text.
impl Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}
