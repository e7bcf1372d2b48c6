//! Single-agent S5 normal forms.
//!
//! Every single-agent formula is equivalent to a disjunction of conjunctions
//! `a & K1 b & ~K1 c1 & ... & ~K1 cm` with `a`, `b` and every `ci`
//! propositional. Conversion is compositional: each subformula is turned
//! into a list of such disjuncts, with propositional parts kept in
//! disjunctive normal form over literals, and the knowledge operator is
//! pushed through using the facts that modal conjuncts are constant on an
//! S5 cluster:
//!
//! * `K1 (a1 & M1 | ... | ak & Mk)` is `OR over nonempty T of
//!   (AND_{i in T} Mi) & K1 (OR_{i in T} ai)`;
//! * `~K1 ~(a & M)` is `M & ~K1 ~a`.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::formula::{Formula, Signature};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalFormError {
    #[error("normal forms are single-agent; found K{agent}")]
    MultiAgent { agent: usize },
    #[error("normal form exceeds {limit} disjuncts")]
    Budget { limit: usize },
    #[error("basis restriction needs exactly one atom, signature has {atoms}")]
    BasisAtoms { atoms: usize },
    #[error("atom {0} is not in the signature")]
    UnknownAtom(String),
}

/// Default cap on intermediate disjunct counts.
pub const DEFAULT_MAX_DISJUNCTS: usize = 4096;

/// One disjunct `alpha & K1 beta & ~K1 gamma1 & ...`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Disjunct {
    pub alpha: Formula,
    pub beta: Formula,
    pub gammas: Vec<Formula>,
}

impl Disjunct {
    pub fn to_formula(&self) -> Formula {
        let mut parts = vec![self.alpha.clone(), Formula::know(1, self.beta.clone())];
        parts.extend(
            self.gammas
                .iter()
                .map(|g| Formula::not(Formula::know(1, g.clone()))),
        );
        Formula::conj(parts)
    }

    fn parts(&self) -> impl Iterator<Item = &Formula> {
        [&self.alpha, &self.beta].into_iter().chain(&self.gammas)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalForm {
    pub disjuncts: Vec<Disjunct>,
}

impl NormalForm {
    pub fn to_formula(&self) -> Formula {
        Formula::disj(self.disjuncts.iter().map(Disjunct::to_formula))
    }

    /// Whether every `alpha`, `beta` and `gamma` is propositional and the
    /// disjunct list is nonempty.
    pub fn is_well_shaped(&self) -> bool {
        !self.disjuncts.is_empty()
            && self
                .disjuncts
                .iter()
                .all(|d| d.parts().all(Formula::is_propositional))
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = self
            .disjuncts
            .iter()
            .map(|d| format!("({})", d.to_formula()))
            .join(" | ");
        f.write_str(&text)
    }
}

type Lit = (String, bool);
type Clause = BTreeSet<Lit>;
/// Propositional formula as a set of clauses; empty is false, a set holding
/// the empty clause is true.
type Dnf = BTreeSet<Clause>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Raw {
    alpha: Clause,
    boxes: BTreeSet<Dnf>,
    gammas: BTreeSet<Dnf>,
}

impl Raw {
    fn unit() -> Self {
        Raw {
            alpha: Clause::new(),
            boxes: BTreeSet::new(),
            gammas: BTreeSet::new(),
        }
    }

    fn literal(lit: Lit) -> Self {
        let mut r = Raw::unit();
        r.alpha.insert(lit);
        r
    }

    fn modal_part(&self) -> Raw {
        Raw {
            alpha: Clause::new(),
            boxes: self.boxes.clone(),
            gammas: self.gammas.clone(),
        }
    }

    fn join(&self, other: &Raw) -> Raw {
        Raw {
            alpha: self.alpha.union(&other.alpha).cloned().collect(),
            boxes: self.boxes.union(&other.boxes).cloned().collect(),
            gammas: self.gammas.union(&other.gammas).cloned().collect(),
        }
    }

    fn subsumes(&self, other: &Raw) -> bool {
        self.alpha.is_subset(&other.alpha)
            && self.boxes.is_subset(&other.boxes)
            && self.gammas.is_subset(&other.gammas)
    }

    /// Constant-folds the disjunct; `None` when it is unsatisfiable on its
    /// face.
    fn fold(mut self) -> Option<Raw> {
        if !consistent(&self.alpha) {
            return None;
        }
        let mut boxes = BTreeSet::new();
        for b in self.boxes {
            let b = simplify_dnf(b);
            if b.iter()
                .all(|c| !consistent(&c.union(&self.alpha).cloned().collect()))
            {
                return None;
            }
            if !is_true(&b) {
                boxes.insert(b);
            }
        }
        let mut gammas = BTreeSet::new();
        for g in self.gammas {
            let g = simplify_dnf(g);
            if is_true(&g) {
                return None;
            }
            if !g.is_empty() {
                gammas.insert(g);
            }
        }
        self.boxes = boxes;
        self.gammas = gammas;
        Some(self)
    }
}

fn consistent(clause: &Clause) -> bool {
    !clause
        .iter()
        .any(|(atom, value)| clause.contains(&(atom.clone(), !value)))
}

fn is_true(dnf: &Dnf) -> bool {
    dnf.iter().any(BTreeSet::is_empty)
}

fn simplify_dnf(dnf: Dnf) -> Dnf {
    let clauses: Vec<Clause> = dnf.into_iter().filter(consistent).collect();
    clauses
        .iter()
        .filter(|c| !clauses.iter().any(|d| d != *c && d.is_subset(c)))
        .cloned()
        .collect()
}

fn negate_clause(clause: &Clause) -> Dnf {
    clause
        .iter()
        .map(|(atom, value)| BTreeSet::from([(atom.clone(), !value)]))
        .collect()
}

struct Converter {
    limit: usize,
}

impl Converter {
    fn finish(&self, raws: Vec<Raw>) -> Result<Vec<Raw>, NormalFormError> {
        let mut seen = BTreeSet::new();
        let folded: Vec<Raw> = raws
            .into_iter()
            .filter_map(Raw::fold)
            .filter(|r| seen.insert(r.clone()))
            .collect();
        let kept: Vec<Raw> = folded
            .iter()
            .enumerate()
            .filter(|(i, r)| {
                !folded
                    .iter()
                    .enumerate()
                    .any(|(j, s)| j != *i && s.subsumes(r))
            })
            .map(|(_, r)| r.clone())
            .collect();
        if kept.len() > self.limit {
            return Err(NormalFormError::Budget { limit: self.limit });
        }
        Ok(kept)
    }

    fn product(&self, a: Vec<Raw>, b: Vec<Raw>) -> Result<Vec<Raw>, NormalFormError> {
        if a.len().saturating_mul(b.len()) > self.limit.saturating_mul(4) {
            return Err(NormalFormError::Budget { limit: self.limit });
        }
        let joined = a
            .iter()
            .cartesian_product(&b)
            .map(|(x, y)| x.join(y))
            .collect();
        self.finish(joined)
    }

    fn union(&self, mut a: Vec<Raw>, b: Vec<Raw>) -> Result<Vec<Raw>, NormalFormError> {
        a.extend(b);
        self.finish(a)
    }

    fn know(&self, inner: Vec<Raw>) -> Result<Vec<Raw>, NormalFormError> {
        if inner.len() >= usize::BITS as usize
            || (1usize << inner.len()) > self.limit.saturating_mul(4)
        {
            return Err(NormalFormError::Budget { limit: self.limit });
        }
        let mut out = Vec::new();
        for subset in inner.iter().powerset().skip(1) {
            let mut r = subset
                .iter()
                .fold(Raw::unit(), |acc, d| acc.join(&d.modal_part()));
            r.boxes
                .insert(subset.iter().map(|d| d.alpha.clone()).collect());
            out.push(r);
        }
        self.finish(out)
    }

    fn possible(&self, inner: Vec<Raw>) -> Result<Vec<Raw>, NormalFormError> {
        let out = inner
            .into_iter()
            .map(|d| {
                let mut r = d.modal_part();
                r.gammas.insert(negate_clause(&d.alpha));
                r
            })
            .collect();
        self.finish(out)
    }

    /// Disjuncts equivalent to `f` when `positive`, else to `~f`.
    fn convert(&self, f: &Formula, positive: bool) -> Result<Vec<Raw>, NormalFormError> {
        match f {
            Formula::Atom(a) => Ok(vec![Raw::literal((a.to_string(), positive))]),
            Formula::Top if positive => Ok(vec![Raw::unit()]),
            Formula::Bot if !positive => Ok(vec![Raw::unit()]),
            Formula::Top | Formula::Bot => Ok(Vec::new()),
            Formula::Not(g) => self.convert(g, !positive),
            Formula::And(a, b) if positive => {
                self.product(self.convert(a, true)?, self.convert(b, true)?)
            }
            Formula::And(a, b) => self.union(self.convert(a, false)?, self.convert(b, false)?),
            Formula::Or(a, b) if positive => {
                self.union(self.convert(a, true)?, self.convert(b, true)?)
            }
            Formula::Or(a, b) => self.product(self.convert(a, false)?, self.convert(b, false)?),
            Formula::Implies(a, b) if positive => {
                self.union(self.convert(a, false)?, self.convert(b, true)?)
            }
            Formula::Implies(a, b) => self.product(self.convert(a, true)?, self.convert(b, false)?),
            Formula::Iff(a, b) => {
                let both = self.product(self.convert(a, true)?, self.convert(b, positive)?)?;
                let neither = self.product(self.convert(a, false)?, self.convert(b, !positive)?)?;
                self.union(both, neither)
            }
            Formula::Know(1, g) if positive => self.know(self.convert(g, true)?),
            Formula::Know(1, g) => self.possible(self.convert(g, false)?),
            Formula::Know(agent, _) => Err(NormalFormError::MultiAgent { agent: *agent }),
        }
    }
}

fn lit_formula((atom, value): &Lit) -> Formula {
    let a = Formula::atom(atom);
    if *value {
        a
    } else {
        Formula::not(a)
    }
}

fn clause_formula(clause: &Clause) -> Formula {
    Formula::conj(clause.iter().map(lit_formula))
}

fn dnf_formula(dnf: &Dnf) -> Formula {
    Formula::disj(dnf.iter().map(clause_formula))
}

/// Normal form of a single-agent formula, with the default disjunct budget.
pub fn to_normal_form(f: &Formula) -> Result<NormalForm, NormalFormError> {
    to_normal_form_with_limit(f, DEFAULT_MAX_DISJUNCTS)
}

pub fn to_normal_form_with_limit(f: &Formula, limit: usize) -> Result<NormalForm, NormalFormError> {
    let raws = Converter { limit }.convert(f, true)?;
    if raws.is_empty() {
        return Ok(NormalForm {
            disjuncts: vec![Disjunct {
                alpha: Formula::Bot,
                beta: Formula::Top,
                gammas: Vec::new(),
            }],
        });
    }
    let disjuncts = raws
        .iter()
        .map(|r| Disjunct {
            alpha: clause_formula(&r.alpha),
            beta: Formula::conj(r.boxes.iter().map(dnf_formula)),
            gammas: r.gammas.iter().map(dnf_formula).collect(),
        })
        .collect();
    Ok(NormalForm { disjuncts })
}

fn eval(f: &Formula, atom: &str, value: bool) -> Result<bool, NormalFormError> {
    Ok(match f {
        Formula::Atom(a) if &**a == atom => value,
        Formula::Atom(a) => return Err(NormalFormError::UnknownAtom(a.to_string())),
        Formula::Top => true,
        Formula::Bot => false,
        Formula::Not(g) => !eval(g, atom, value)?,
        Formula::And(a, b) => eval(a, atom, value)? && eval(b, atom, value)?,
        Formula::Or(a, b) => eval(a, atom, value)? || eval(b, atom, value)?,
        Formula::Implies(a, b) => !eval(a, atom, value)? || eval(b, atom, value)?,
        Formula::Iff(a, b) => eval(a, atom, value)? == eval(b, atom, value)?,
        Formula::Know(agent, _) => return Err(NormalFormError::MultiAgent { agent: *agent }),
    })
}

fn basis(f: &Formula, atom: &str) -> Result<Formula, NormalFormError> {
    Ok(match (eval(f, atom, true)?, eval(f, atom, false)?) {
        (true, true) => Formula::Top,
        (false, false) => Formula::Bot,
        (true, false) => Formula::atom(atom),
        (false, true) => Formula::not(Formula::atom(atom)),
    })
}

/// Replaces every propositional part by its equivalent among `true`,
/// `false`, `p`, `~p` where `p` is the signature's only atom.
pub fn restrict_basis(nf: &NormalForm, sig: &Signature) -> Result<NormalForm, NormalFormError> {
    let [atom] = sig.atoms() else {
        return Err(NormalFormError::BasisAtoms {
            atoms: sig.atoms().len(),
        });
    };
    let disjuncts = nf
        .disjuncts
        .iter()
        .map(|d| {
            Ok(Disjunct {
                alpha: basis(&d.alpha, atom)?,
                beta: basis(&d.beta, atom)?,
                gammas: d
                    .gammas
                    .iter()
                    .map(|g| basis(g, atom))
                    .collect::<Result<_, _>>()?,
            })
        })
        .collect::<Result<_, NormalFormError>>()?;
    Ok(NormalForm { disjuncts })
}
