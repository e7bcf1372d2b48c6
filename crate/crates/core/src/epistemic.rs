//! Epistemic models carved out of finite Kripke models.
//!
//! A world is a maximal consistent set of formulas. Here each world is the
//! theory of a state of a parent Kripke model, so two parent states that are
//! bisimilar denote the same world. Carving keeps a subset of the parent's
//! states as the worlds and drops the rest.
//!
//! Accessibility on the worlds is induced by knowledge: `x` is in `Ri(w)`
//! when everything agent `i` knows at `w` holds at `x`. On a finite parent
//! this is the case exactly when `x` is bisimilar to some state of `w`'s
//! agent-`i` block. The model is fully explanatory when every formula true
//! throughout `Ri(w)` is known at `w`, which holds exactly when every state
//! of `w`'s block is bisimilar to some world in `Ri(w)`.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::formula::{Agent, Formula, SignatureError};
use crate::kripke::{export_dot, KripkeModel, Violation};
use crate::relation::Relation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EpistemicError {
    #[error("cannot carve an empty set of states")]
    EmptySubset,
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("parent is not a valid S5 model: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidParent(Vec<Violation>),
    #[error("agent {agent} out of range 1..={agents}")]
    AgentOutOfRange { agent: Agent, agents: usize },
    #[error(transparent)]
    Formula(#[from] SignatureError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpistemicModel {
    parent: KripkeModel,
    /// Parent indices of the worlds, in parent order.
    worlds: Vec<usize>,
    /// Bisimilar groups of requested states; the first id of each group is
    /// the one kept.
    dedup_log: Vec<Vec<String>>,
    classes: Vec<usize>,
}

/// One failure of full explanation: `witness` holds at every world of
/// `Ri(world)` but `Ki witness` is false at `world`, since the parent state
/// `missing` in the agent's block is represented by no accessible world.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeFailure {
    pub world: String,
    pub agent: Agent,
    pub missing: String,
    pub witness: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeReport {
    pub overall: bool,
    pub failures: Vec<FeFailure>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstancyEntry {
    pub world: String,
    /// `Ki f` holds at every world of `Ri(world)`.
    pub known_throughout: bool,
    /// `~Ki f` holds at every world of `Ri(world)`.
    pub unknown_throughout: bool,
}

impl ConstancyEntry {
    pub fn exactly_one(&self) -> bool {
        self.known_throughout != self.unknown_throughout
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstancyReport {
    pub agent: Agent,
    pub formula: Formula,
    pub entries: Vec<ConstancyEntry>,
}

impl ConstancyReport {
    pub fn holds(&self) -> bool {
        self.entries.iter().all(ConstancyEntry::exactly_one)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgentEmbedding {
    pub agent: Agent,
    /// Every induced pair lies in one parent block.
    pub within_blocks: bool,
    /// Every induced pair `(w, x)` has `x` bisimilar to a member of `w`'s
    /// parent block.
    pub within_blocks_up_to_bisimulation: bool,
}

/// The parent, the inclusion of worlds into parent states, and per-agent
/// checks that induced accessibility sits inside the parent relations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmbeddingCertificate {
    pub inclusion: Vec<(String, String)>,
    pub agents: Vec<AgentEmbedding>,
}

impl EmbeddingCertificate {
    pub fn holds(&self) -> bool {
        self.agents
            .iter()
            .all(|a| a.within_blocks_up_to_bisimulation)
    }
}

/// Keeps the parent states named in `subset`, collapsing bisimilar ones.
pub fn carve<I, S>(parent: &KripkeModel, subset: I) -> Result<EpistemicModel, EpistemicError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let violations = parent.validate();
    if !violations.is_empty() {
        return Err(EpistemicError::InvalidParent(violations));
    }
    let mut requested = BTreeSet::new();
    for id in subset {
        let id = id.as_ref();
        let s = parent
            .state_index(id)
            .ok_or_else(|| EpistemicError::UnknownState(id.to_string()))?;
        requested.insert(s);
    }
    if requested.is_empty() {
        return Err(EpistemicError::EmptySubset);
    }
    let classes = parent.refinement().stable().to_vec();
    let mut worlds = Vec::new();
    let mut dedup_log = Vec::new();
    let mut done = BTreeSet::new();
    for &s in &requested {
        if !done.insert(classes[s]) {
            continue;
        }
        worlds.push(s);
        let group: Vec<String> = requested
            .iter()
            .filter(|&&t| classes[t] == classes[s])
            .map(|&t| parent.states()[t].clone())
            .collect();
        if group.len() > 1 {
            dedup_log.push(group);
        }
    }
    Ok(EpistemicModel {
        parent: parent.clone(),
        worlds,
        dedup_log,
        classes,
    })
}

impl EpistemicModel {
    pub fn parent(&self) -> &KripkeModel {
        &self.parent
    }

    /// Parent indices of the worlds.
    pub fn worlds(&self) -> &[usize] {
        &self.worlds
    }

    pub fn world_ids(&self) -> Vec<String> {
        self.worlds.iter().map(|&s| self.id(s)).collect()
    }

    pub fn dedup_log(&self) -> &[Vec<String>] {
        &self.dedup_log
    }

    fn id(&self, s: usize) -> String {
        self.parent.states()[s].clone()
    }

    fn check_agent(&self, agent: Agent) -> Result<(), EpistemicError> {
        let agents = self.parent.agents();
        if agent == 0 || agent > agents {
            return Err(EpistemicError::AgentOutOfRange { agent, agents });
        }
        Ok(())
    }

    fn block_classes(&self, agent: Agent, w: usize) -> BTreeSet<usize> {
        self.parent
            .block(agent, w)
            .into_iter()
            .map(|u| self.classes[u])
            .collect()
    }

    fn accessible(&self, agent: Agent, w: usize) -> Vec<usize> {
        let seen = self.block_classes(agent, w);
        self.worlds
            .iter()
            .copied()
            .filter(|&x| seen.contains(&self.classes[x]))
            .collect()
    }

    /// `Ri` on the worlds, over parent state indices.
    pub fn induced_accessibility(&self, agent: Agent) -> Result<Relation, EpistemicError> {
        self.check_agent(agent)?;
        let mut r = Relation::new(self.worlds.iter().copied());
        for &w in &self.worlds {
            for x in self.accessible(agent, w) {
                r.insert(w, x);
            }
        }
        Ok(r)
    }

    /// Worlds accessible from the world `world` for `agent`.
    pub fn accessible_ids(&self, agent: Agent, world: &str) -> Result<Vec<String>, EpistemicError> {
        self.check_agent(agent)?;
        let w = self
            .parent
            .state_index(world)
            .filter(|s| self.worlds.contains(s))
            .ok_or_else(|| EpistemicError::UnknownState(world.to_string()))?;
        Ok(self
            .accessible(agent, w)
            .into_iter()
            .map(|x| self.id(x))
            .collect())
    }

    /// Truth of `f` at the world `world`, which is its truth at the parent
    /// state.
    pub fn world_satisfies(&self, world: &str, f: &Formula) -> Result<bool, EpistemicError> {
        let s = self
            .parent
            .state_index(world)
            .filter(|s| self.worlds.contains(s))
            .ok_or_else(|| EpistemicError::UnknownState(world.to_string()))?;
        f.check(self.parent.signature())?;
        Ok(self.parent.holds(s, f))
    }

    pub fn fully_explanatory(&self) -> FeReport {
        let mut failures = Vec::new();
        let mut chis: Option<Vec<_>> = None;
        for &w in &self.worlds {
            for agent in 1..=self.parent.agents() {
                let accessible = self.accessible(agent, w);
                let present: BTreeSet<usize> =
                    accessible.iter().map(|&x| self.classes[x]).collect();
                let mut reported = BTreeSet::new();
                for u in self.parent.block(agent, w) {
                    let class = self.classes[u];
                    if present.contains(&class) || !reported.insert(class) {
                        continue;
                    }
                    let chis = chis.get_or_insert_with(|| {
                        self.parent
                            .characteristic_formulas(self.parent.refinement().rounds())
                    });
                    let witness = self.witness(&accessible, u, chis);
                    failures.push(FeFailure {
                        world: self.id(w),
                        agent,
                        missing: self.id(u),
                        witness,
                    });
                }
            }
        }
        FeReport {
            overall: failures.is_empty(),
            failures,
        }
    }

    /// A formula true at every state of `accessible` and false at `missing`.
    fn witness(
        &self,
        accessible: &[usize],
        missing: usize,
        chis: &[std::sync::Arc<Formula>],
    ) -> Formula {
        let m = &self.parent;
        let separates = |f: &Formula| {
            let ext = m.extension(f);
            accessible.iter().all(|&x| ext[x]) && !ext[missing]
        };
        let literals = m.signature().atoms().iter().flat_map(|a| {
            let atom = Formula::atom(a);
            [atom.clone(), Formula::not(atom)]
        });
        let valuations = {
            let mut seen = BTreeSet::new();
            let parts: Vec<Formula> = accessible
                .iter()
                .filter(|&&x| seen.insert(m.valuation(x).clone()))
                .map(|&x| m.valuation_formula(x))
                .collect();
            Formula::disj(parts)
        };
        let characteristic = {
            let mut seen = BTreeSet::new();
            let parts: Vec<Formula> = accessible
                .iter()
                .filter(|&&x| seen.insert(self.classes[x]))
                .map(|&x| (*chis[x]).clone())
                .collect();
            Formula::disj(parts)
        };
        literals
            .chain([valuations])
            .find(|f| separates(f))
            .unwrap_or(characteristic)
    }

    /// For each world `w`, whether `Ki f` or `~Ki f` holds throughout
    /// `Ri(w)`.
    pub fn knowledge_constancy_check(
        &self,
        agent: Agent,
        f: &Formula,
    ) -> Result<ConstancyReport, EpistemicError> {
        self.check_agent(agent)?;
        f.check(self.parent.signature())?;
        let known = self.parent.extension(&Formula::know(agent, f.clone()));
        let entries = self
            .worlds
            .iter()
            .map(|&w| {
                let accessible = self.accessible(agent, w);
                ConstancyEntry {
                    world: self.id(w),
                    known_throughout: accessible.iter().all(|&x| known[x]),
                    unknown_throughout: accessible.iter().all(|&x| !known[x]),
                }
            })
            .collect();
        Ok(ConstancyReport {
            agent,
            formula: f.clone(),
            entries,
        })
    }

    pub fn embedding_certificate(&self) -> EmbeddingCertificate {
        let inclusion = self
            .worlds
            .iter()
            .map(|&w| (self.id(w), self.id(w)))
            .collect();
        let agents = (1..=self.parent.agents())
            .map(|agent| {
                let pairs: Vec<(usize, usize)> = self
                    .worlds
                    .iter()
                    .flat_map(|&w| self.accessible(agent, w).into_iter().map(move |x| (w, x)))
                    .collect();
                AgentEmbedding {
                    agent,
                    within_blocks: pairs
                        .iter()
                        .all(|&(w, x)| self.parent.same_block(agent, w, x)),
                    within_blocks_up_to_bisimulation: pairs.iter().all(|&(w, x)| {
                        self.parent
                            .block(agent, w)
                            .iter()
                            .any(|&u| self.classes[u] == self.classes[x])
                    }),
                }
            })
            .collect();
        EmbeddingCertificate { inclusion, agents }
    }

    /// The parent drawn with the worlds inside a rounded boundary.
    pub fn export_dot(&self) -> String {
        let keep: BTreeSet<String> = self.world_ids().into_iter().collect();
        export_dot(&self.parent, Some(&keep))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::kripke::fixtures::*;

    fn q() -> Formula {
        Formula::atom("Q")
    }

    #[test]
    fn carving_m7_gives_m8() {
        let m8 = carve(&m7(), ["w", "v"]).unwrap();
        assert_eq!(m8.world_ids(), ["w", "v"]);
        assert!(m8.dedup_log().is_empty());
        assert_eq!(m8.accessible_ids(1, "w").unwrap(), ["w", "v"]);
        let r = m8.induced_accessibility(1).unwrap();
        assert!(r.is_equivalence());
        assert!(m8.world_satisfies("w", &q()).unwrap());
        assert!(!m8.world_satisfies("w", &Formula::know(1, q())).unwrap());

        let report = m8.fully_explanatory();
        assert!(!report.overall);
        let first = &report.failures[0];
        assert_eq!((first.world.as_str(), first.agent), ("w", 1));
        assert_eq!(first.witness, q());
        for f in &report.failures {
            let parent = m8.parent();
            for x in m8.accessible_ids(f.agent, &f.world).unwrap() {
                assert!(parent.model_check(&x, &f.witness).unwrap());
            }
            let known = Formula::know(f.agent, f.witness.clone());
            assert!(!parent.model_check(&f.world, &known).unwrap());
        }
    }

    #[test]
    fn carving_m9_gives_m10() {
        let m10 = carve(&m9(), ["w", "v"]).unwrap();
        assert!(m10.world_satisfies("w", &Formula::know(2, q())).unwrap());
        assert!(!m10.world_satisfies("w", &Formula::know(1, q())).unwrap());
        let bob = m10.knowledge_constancy_check(2, &q()).unwrap();
        assert!(bob.holds());
        assert!(bob.entries.iter().all(|e| e.known_throughout));
        let ann = m10.knowledge_constancy_check(1, &q()).unwrap();
        assert!(ann.holds());
        assert!(ann.entries.iter().all(|e| e.unknown_throughout));
    }

    #[test]
    fn singleton_carved_from_m5() {
        let m1 = carve(&m5(), ["w"]).unwrap();
        assert_eq!(m1.accessible_ids(1, "w").unwrap(), ["w"]);
        let p = Formula::atom("p");
        assert!(m1.world_satisfies("w", &p).unwrap());
        assert!(!m1
            .world_satisfies("w", &Formula::know(1, p.clone()))
            .unwrap());
        let report = m1.fully_explanatory();
        assert!(!report.overall);
        assert_eq!(report.failures[0].witness, p);
        assert_eq!(report.failures[0].missing, "v");
        let cert = m1.embedding_certificate();
        assert_eq!(cert.inclusion, vec![("w".to_string(), "w".to_string())]);
        assert!(cert.holds());
    }

    #[test]
    fn full_carve_is_fully_explanatory() {
        for m in [m2(), m5(), m7(), m9()] {
            let all = carve(&m, m.states()).unwrap();
            assert!(all.fully_explanatory().overall);
            let cert = all.embedding_certificate();
            assert!(cert.agents.iter().all(|a| a.within_blocks));
        }
    }

    #[test]
    fn constancy_of_truth() {
        let m8 = carve(&m7(), ["w", "v"]).unwrap();
        let report = m8.knowledge_constancy_check(1, &Formula::Top).unwrap();
        assert!(report
            .entries
            .iter()
            .all(|e| e.known_throughout && e.exactly_one()));
        let ann = m8.knowledge_constancy_check(1, &q()).unwrap();
        assert!(ann.entries.iter().all(|e| e.unknown_throughout));
    }

    #[test]
    fn bisimilar_states_collapse() {
        let sig = crate::Signature::new(["p"], 1).unwrap();
        let m = KripkeModel::new(
            sig.clone(),
            vec![
                ("a".to_string(), vec!["p"]),
                ("b".to_string(), vec!["p"]),
                ("c".to_string(), vec![]),
            ],
            vec![vec![vec!["a".into(), "b".into(), "c".into()]]],
        )
        .unwrap();
        let e = carve(&m, ["b", "a"]).unwrap();
        assert_eq!(e.world_ids(), ["a"]);
        assert_eq!(e.dedup_log(), [vec!["a".to_string(), "b".to_string()]]);
        let report = e.fully_explanatory();
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].witness, parse("p", &sig).unwrap());
    }

    #[test]
    fn carve_errors() {
        let m = m5();
        assert_eq!(
            carve(&m, Vec::<String>::new()).unwrap_err(),
            EpistemicError::EmptySubset
        );
        assert_eq!(
            carve(&m, ["x"]).unwrap_err(),
            EpistemicError::UnknownState("x".into())
        );
        let e = carve(&m, ["w"]).unwrap();
        assert!(matches!(
            e.induced_accessibility(2),
            Err(EpistemicError::AgentOutOfRange {
                agent: 2,
                agents: 1
            })
        ));
    }

    #[test]
    fn dot_puts_worlds_in_boundary() {
        let dot = carve(&m7(), ["w", "v"]).unwrap().export_dot();
        let cluster = dot.split("subgraph cluster_carved").nth(1).unwrap();
        assert!(cluster.contains("\"w\";") && cluster.contains("\"v\";"));
        assert!(!cluster.contains("\"c\";"));
    }
}
