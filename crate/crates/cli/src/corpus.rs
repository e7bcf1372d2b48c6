//! Fixture corpus: subjects plus expectations stored as data.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use epistemod_core::canonical::{CanonicalSpace, Coverage, WorldSet};
use epistemod_core::epistemic::{carve, EpistemicModel};
use epistemod_core::formula::{parse, Formula, Signature};
use epistemod_core::kripke::{export_dot, import_model, KripkeModel};
use epistemod_core::prover::{Hypotheses, Prover};
use serde::Deserialize;
use thiserror::Error;

use crate::report::{CorpusReport, FixtureOutcome};

const MANIFEST: &str = include_str!("../fixtures/corpus.toml");
const DOCUMENTS: &[(&str, &str)] = &[
    ("m2.model", include_str!("../fixtures/m2.model")),
    ("m3.model", include_str!("../fixtures/m3.model")),
    ("m4.model", include_str!("../fixtures/m4.model")),
    ("m5.model", include_str!("../fixtures/m5.model")),
    ("m7.model", include_str!("../fixtures/m7.model")),
    ("m9.model", include_str!("../fixtures/m9.model")),
];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("bad corpus manifest: {0}")]
    Manifest(#[from] toml::de::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Model,
    Carving,
    Canonical,
    Hypotheses,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum Expectation {
    Valid,
    Holds {
        state: String,
        formula: String,
        value: bool,
    },
    BisimClasses {
        classes: Vec<Vec<String>>,
    },
    DotContains {
        text: String,
    },
    Worlds {
        worlds: Vec<String>,
    },
    WorldCount {
        count: usize,
    },
    Accessible {
        agent: usize,
        world: String,
        worlds: Vec<String>,
    },
    FullyExplanatory {
        value: bool,
    },
    Witness {
        #[serde(default)]
        agent: Option<usize>,
        world: String,
        formula: String,
    },
    Constancy {
        agent: usize,
        formula: String,
        known: bool,
    },
    Embedding {
        inclusion: Vec<(String, String)>,
    },
    RelationClasses {
        classes: Vec<Vec<String>>,
    },
    Generator {
        world: String,
        formulas: Vec<String>,
    },
    Classify {
        subsets: usize,
        fully_explanatory: usize,
    },
    Consequence {
        formula: String,
        valid: bool,
    },
    NecessitationClosed {
        value: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixture {
    pub name: String,
    pub kind: Kind,
    pub document: Option<String>,
    pub parent: Option<String>,
    pub keep: Option<Vec<String>>,
    pub atoms: Option<Vec<String>>,
    pub agents: Option<usize>,
    pub gamma: Option<Vec<String>>,
    #[serde(default)]
    pub expect: Vec<Expectation>,
}

#[derive(Debug, Deserialize)]
struct Manifest {
    #[serde(default)]
    fixture: Vec<Fixture>,
}

/// Fixtures with their documents resolved.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub fixtures: Vec<Fixture>,
    documents: BTreeMap<String, String>,
}

impl Corpus {
    /// The corpus compiled into the binary.
    pub fn builtin() -> Self {
        let manifest: Manifest = toml::from_str(MANIFEST).expect("built-in corpus parses");
        Corpus {
            fixtures: manifest.fixture,
            documents: DOCUMENTS
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    /// Reads `corpus.toml` from `dir`; document paths are relative to it.
    pub fn load(dir: &Path) -> Result<Self, CorpusError> {
        let read = |path: &Path| {
            fs::read_to_string(path).map_err(|source| CorpusError::Io {
                path: path.display().to_string(),
                source,
            })
        };
        let manifest: Manifest = toml::from_str(&read(&dir.join("corpus.toml"))?)?;
        let mut documents = BTreeMap::new();
        for f in &manifest.fixture {
            if let Some(doc) = &f.document {
                documents.insert(doc.clone(), read(&dir.join(doc))?);
            }
        }
        Ok(Corpus {
            fixtures: manifest.fixture,
            documents,
        })
    }

    pub fn fixture(&self, name: &str) -> Option<&Fixture> {
        self.fixtures.iter().find(|f| f.name == name)
    }

    /// The Kripke model of a `model` fixture.
    pub fn model(&self, name: &str) -> Result<KripkeModel, String> {
        let f = self
            .fixture(name)
            .ok_or_else(|| format!("no fixture named `{name}`"))?;
        let doc = f
            .document
            .as_ref()
            .ok_or_else(|| format!("fixture `{name}` has no document"))?;
        let text = self
            .documents
            .get(doc)
            .ok_or_else(|| format!("document `{doc}` not found"))?;
        import_model(text).map_err(|e| format!("{doc}: {e}"))
    }

    /// The carved model of a `carving` fixture.
    pub fn carving(&self, name: &str) -> Result<EpistemicModel, String> {
        let f = self
            .fixture(name)
            .ok_or_else(|| format!("no fixture named `{name}`"))?;
        let parent = f
            .parent
            .as_deref()
            .ok_or_else(|| format!("carving `{name}` has no parent"))?;
        let keep = f
            .keep
            .as_ref()
            .ok_or_else(|| format!("carving `{name}` has no keep list"))?;
        carve(&self.model(parent)?, keep).map_err(|e| e.to_string())
    }

    pub fn run(&self, prover: &Prover) -> CorpusReport {
        let fixtures: Vec<FixtureOutcome> = self
            .fixtures
            .iter()
            .map(|f| {
                let failures = match Subject::build(self, f) {
                    Ok(subject) => f
                        .expect
                        .iter()
                        .filter_map(|e| subject.check(e, prover).err())
                        .collect(),
                    Err(e) => vec![e],
                };
                FixtureOutcome {
                    name: f.name.clone(),
                    checks: f.expect.len(),
                    failures,
                }
            })
            .collect();
        let failed = fixtures.iter().filter(|f| !f.failures.is_empty()).count();
        CorpusReport {
            passed: fixtures.len() - failed,
            failed,
            fixtures,
        }
    }
}

enum Subject {
    Model(KripkeModel),
    Carving(EpistemicModel),
    Canonical {
        space: CanonicalSpace,
        gamma: Hypotheses,
        set: WorldSet,
    },
    Hypotheses {
        sig: Signature,
        gamma: Hypotheses,
    },
}

fn parse_all(texts: &[String], sig: &Signature) -> Result<Hypotheses, String> {
    texts
        .iter()
        .map(|t| parse(t, sig).map_err(|e| format!("`{t}`: {e}")))
        .collect()
}

fn same_formula(found: &Formula, expected: &str, sig: &Signature) -> Result<bool, String> {
    let expected = parse(expected, sig).map_err(|e| format!("`{expected}`: {e}"))?;
    Ok(*found == expected)
}

fn expect_eq<T: PartialEq + std::fmt::Debug>(
    what: &str,
    found: T,
    expected: T,
) -> Result<(), String> {
    if found == expected {
        Ok(())
    } else {
        Err(format!("{what}: expected {expected:?}, found {found:?}"))
    }
}

impl Subject {
    fn build(corpus: &Corpus, f: &Fixture) -> Result<Subject, String> {
        match f.kind {
            Kind::Model => Ok(Subject::Model(corpus.model(&f.name)?)),
            Kind::Carving => Ok(Subject::Carving(corpus.carving(&f.name)?)),
            Kind::Canonical => {
                let atoms = f.atoms.clone().unwrap_or_default();
                let sig = Signature::new(atoms, 1).map_err(|e| e.to_string())?;
                let space = CanonicalSpace::new(&sig).map_err(|e| e.to_string())?;
                let gamma = parse_all(f.gamma.as_deref().unwrap_or_default(), space.signature())?;
                let set = space.canonical_model(&gamma).map_err(|e| e.to_string())?;
                Ok(Subject::Canonical { space, gamma, set })
            }
            Kind::Hypotheses => {
                let texts = f.gamma.clone().unwrap_or_default();
                let mut formulas = Vec::new();
                for t in &texts {
                    let (g, _) = epistemod_core::formula::parse_open(t, 1)
                        .map_err(|e| format!("`{t}`: {e}"))?;
                    formulas.push(g);
                }
                let sig = Signature::covering(&formulas, f.agents.unwrap_or(1));
                Ok(Subject::Hypotheses {
                    gamma: formulas.into_iter().collect(),
                    sig,
                })
            }
        }
    }

    fn signature(&self) -> &Signature {
        match self {
            Subject::Model(m) => m.signature(),
            Subject::Carving(e) => e.parent().signature(),
            Subject::Canonical { space, .. } => space.signature(),
            Subject::Hypotheses { sig, .. } => sig,
        }
    }

    fn formula(&self, text: &str) -> Result<Formula, String> {
        parse(text, self.signature()).map_err(|e| format!("`{text}`: {e}"))
    }

    fn check(&self, e: &Expectation, prover: &Prover) -> Result<(), String> {
        let unsupported = || Err(format!("{e:?} does not apply to this fixture"));
        match (e, self) {
            (Expectation::Valid, Subject::Model(m)) => {
                expect_eq("violations", m.validate(), Vec::new())
            }
            (
                Expectation::Holds {
                    state,
                    formula,
                    value,
                },
                _,
            ) => {
                let f = self.formula(formula)?;
                let found = match self {
                    Subject::Model(m) => m.model_check(state, &f).map_err(|e| e.to_string())?,
                    Subject::Carving(c) => {
                        c.world_satisfies(state, &f).map_err(|e| e.to_string())?
                    }
                    Subject::Canonical { space, .. } => {
                        let i = space
                            .index_of(state)
                            .ok_or_else(|| format!("no world `{state}`"))?;
                        space.satisfies(i, &f).map_err(|e| e.to_string())?
                    }
                    Subject::Hypotheses { .. } => return unsupported(),
                };
                expect_eq(&format!("{formula} at {state}"), found, *value)
            }
            (Expectation::BisimClasses { classes }, Subject::Model(m)) => {
                expect_eq("bisimulation classes", m.bisim_class_ids(), classes.clone())
            }
            (Expectation::DotContains { text }, _) => {
                let dot = match self {
                    Subject::Model(m) => export_dot(m, None),
                    Subject::Carving(c) => c.export_dot(),
                    Subject::Canonical { space, set, .. } => space.export_dot(set),
                    Subject::Hypotheses { .. } => return unsupported(),
                };
                if dot.contains(text.as_str()) {
                    Ok(())
                } else {
                    Err(format!("drawing lacks `{text}`"))
                }
            }
            (Expectation::Worlds { worlds }, Subject::Carving(c)) => {
                expect_eq("worlds", c.world_ids(), worlds.clone())
            }
            (Expectation::Worlds { worlds }, Subject::Canonical { space, set, .. }) => {
                expect_eq("worlds", space.names(set), worlds.clone())
            }
            (Expectation::WorldCount { count }, Subject::Canonical { space, .. }) => {
                expect_eq("world count", space.len(), *count)
            }
            (
                Expectation::Accessible {
                    agent,
                    world,
                    worlds,
                },
                Subject::Carving(c),
            ) => expect_eq(
                &format!("R{agent}({world})"),
                c.accessible_ids(*agent, world).map_err(|e| e.to_string())?,
                worlds.clone(),
            ),
            (Expectation::FullyExplanatory { value }, Subject::Carving(c)) => {
                expect_eq("fully explanatory", c.fully_explanatory().overall, *value)
            }
            (Expectation::FullyExplanatory { value }, Subject::Canonical { space, set, gamma }) => {
                let v = space
                    .fully_explanatory(set, Some(gamma))
                    .map_err(|e| e.to_string())?;
                expect_eq("fully explanatory", v.fully_explanatory, *value)
            }
            (
                Expectation::Witness {
                    agent,
                    world,
                    formula,
                },
                Subject::Carving(c),
            ) => {
                let report = c.fully_explanatory();
                let failure = report
                    .failures
                    .iter()
                    .find(|f| &f.world == world && agent.is_none_or(|a| a == f.agent))
                    .ok_or_else(|| format!("no failure at {world}"))?;
                if same_formula(&failure.witness, formula, self.signature())? {
                    Ok(())
                } else {
                    Err(format!(
                        "witness at {world}: expected {formula}, found {}",
                        failure.witness
                    ))
                }
            }
            (
                Expectation::Witness { world, formula, .. },
                Subject::Canonical { space, set, gamma },
            ) => {
                let v = space
                    .fully_explanatory(set, Some(gamma))
                    .map_err(|e| e.to_string())?;
                let w = v.witness.ok_or("set is fully explanatory")?;
                expect_eq("witness world", space.name(w.world), world.clone())?;
                if !space.is_witness(set, w.world, &w.formula) {
                    return Err(format!("{} is not a valid witness", w.formula));
                }
                if same_formula(&w.formula, formula, self.signature())? {
                    Ok(())
                } else {
                    Err(format!("witness: expected {formula}, found {}", w.formula))
                }
            }
            (
                Expectation::Constancy {
                    agent,
                    formula,
                    known,
                },
                Subject::Carving(c),
            ) => {
                let f = self.formula(formula)?;
                let report = c
                    .knowledge_constancy_check(*agent, &f)
                    .map_err(|e| e.to_string())?;
                if !report.holds() {
                    return Err(format!("knowledge of {formula} is not constant"));
                }
                let all = report.entries.iter().all(|e| e.known_throughout == *known);
                expect_eq(&format!("K{agent} {formula} throughout"), all, true)
            }
            (Expectation::Embedding { inclusion }, Subject::Carving(c)) => {
                let cert = c.embedding_certificate();
                if !cert.holds() {
                    return Err("induced relation escapes parent blocks".into());
                }
                expect_eq("inclusion", cert.inclusion, inclusion.clone())
            }
            (Expectation::RelationClasses { classes }, Subject::Canonical { space, set, .. }) => {
                let r = space.induced_relation(set).map_err(|e| e.to_string())?;
                let found: Vec<Vec<String>> = r.classes().iter().map(|c| space.names(c)).collect();
                expect_eq("induced classes", found, classes.clone())
            }
            (Expectation::Generator { world, formulas }, Subject::Canonical { space, .. }) => {
                let i = space
                    .index_of(world)
                    .ok_or_else(|| format!("no world `{world}`"))?;
                let expected = parse_all(formulas, space.signature())?;
                expect_eq(
                    &format!("generator of {world}"),
                    space.generator(i),
                    expected.formulas().to_vec(),
                )
            }
            (
                Expectation::Classify {
                    subsets,
                    fully_explanatory,
                },
                Subject::Canonical { space, .. },
            ) => {
                let c = space.classify_subsets(Coverage::Exhaustive);
                expect_eq(
                    "classification",
                    (c.entries.len(), c.fully_explanatory_count()),
                    (*subsets, *fully_explanatory),
                )
            }
            (Expectation::Consequence { formula, valid }, Subject::Hypotheses { sig, gamma }) => {
                let f = self.formula(formula)?;
                let r = prover
                    .consequence(sig, gamma, &f)
                    .map_err(|e| e.to_string())?;
                if let Some(c) = r.countermodel() {
                    let mut all = gamma.formulas().to_vec();
                    all.push(Formula::not(f.clone()));
                    if !all.iter().all(|g| c.model.holds(c.state, g)) {
                        return Err("countermodel does not refute the consequence".into());
                    }
                }
                expect_eq(&format!("derives {formula}"), r.is_valid(), *valid)
            }
            (Expectation::NecessitationClosed { value }, Subject::Hypotheses { gamma, .. })
            | (Expectation::NecessitationClosed { value }, Subject::Canonical { gamma, .. }) => {
                let r = prover
                    .necessitation_closed(self.signature(), gamma)
                    .map_err(|e| e.to_string())?;
                expect_eq("closed under necessitation", r.closed, *value)
            }
            _ => unsupported(),
        }
    }
}
