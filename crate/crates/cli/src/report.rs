//! Command reports and their text, structured (JSON) and DOT renderings.

use std::fmt::Write as _;

use epistemod_core::epistemic::{EmbeddingCertificate, FeReport};
use epistemod_core::normalform::Disjunct;
use epistemod_core::Formula;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Structured,
    Dot,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("unknown format `{0}` (expected text, structured or dot)")]
    UnknownFormat(String),
    #[error("{0} reports have no dot rendering")]
    NoDrawing(&'static str),
}

impl std::str::FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "structured" | "json" => Ok(Format::Structured),
            "dot" => Ok(Format::Dot),
            other => Err(ReportError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Valid,
    Invalid,
    Unknown,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Valid => 0,
            Verdict::Invalid => 1,
            Verdict::Unknown => 2,
        }
    }

    fn word(self) -> &'static str {
        match self {
            Verdict::Valid => "valid",
            Verdict::Invalid => "invalid",
            Verdict::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PointedModel {
    pub state: String,
    pub model: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProofReport {
    pub hypotheses: Vec<Formula>,
    pub formula: Formula,
    pub verdict: Verdict,
    pub countermodel: Option<PointedModel>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NecessitationFailureReport {
    pub formula: Formula,
    pub agent: usize,
    pub countermodel: PointedModel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NecessitationReport {
    pub hypotheses: Vec<Formula>,
    pub agents: usize,
    pub verdict: Verdict,
    pub failures: Vec<NecessitationFailureReport>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalFormReport {
    pub formula: Formula,
    pub normal_form: Formula,
    pub disjuncts: Vec<Disjunct>,
    pub equivalence: Verdict,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WorldEntry {
    pub name: String,
    pub cluster: Vec<Formula>,
    pub designated: Formula,
    pub generator: Vec<Formula>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessEntry {
    pub world: String,
    pub missing: String,
    pub formula: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WorldSetReport {
    pub hypotheses: Vec<Formula>,
    pub worlds: Vec<String>,
    pub relation_classes: Vec<Vec<String>>,
    pub fully_explanatory: bool,
    pub witness: Option<WitnessEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubsetReport {
    pub worlds: Vec<String>,
    pub fully_explanatory: bool,
    pub witness: Option<WitnessEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassificationReport {
    pub exhaustive: bool,
    pub total: Option<String>,
    pub examined: usize,
    pub fully_explanatory: usize,
    pub subsets: Vec<SubsetReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CanonicalReport {
    pub atoms: Vec<String>,
    pub worlds: Vec<WorldEntry>,
    pub set: Option<WorldSetReport>,
    pub classification: Option<ClassificationReport>,
    #[serde(skip)]
    pub dot: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgentClasses {
    pub agent: usize,
    pub classes: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CarveReport {
    pub parent_states: Vec<String>,
    pub worlds: Vec<String>,
    pub collapsed: Vec<Vec<String>>,
    pub accessibility: Vec<AgentClasses>,
    pub fully_explanatory: Option<FeReport>,
    pub embedding: EmbeddingCertificate,
    #[serde(skip)]
    pub dot: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixtureOutcome {
    pub name: String,
    pub checks: usize,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusReport {
    pub fixtures: Vec<FixtureOutcome>,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateEntry {
    pub id: String,
    pub atoms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelReport {
    pub atoms: Vec<String>,
    pub agents: usize,
    pub states: Vec<StateEntry>,
    pub partitions: Vec<Vec<Vec<String>>>,
    #[serde(skip)]
    pub document: String,
    #[serde(skip)]
    pub dot: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Report {
    Empty,
    Proof(ProofReport),
    Necessitation(NecessitationReport),
    NormalForm(NormalFormReport),
    Canonical(CanonicalReport),
    Carve(CarveReport),
    Corpus(CorpusReport),
    Model(ModelReport),
}

impl Report {
    fn kind(&self) -> &'static str {
        match self {
            Report::Empty => "empty",
            Report::Proof(_) => "proof",
            Report::Necessitation(_) => "necessitation",
            Report::NormalForm(_) => "normal form",
            Report::Canonical(_) => "canonical",
            Report::Carve(_) => "carve",
            Report::Corpus(_) => "corpus",
            Report::Model(_) => "model",
        }
    }

    /// Process exit status for the report: 0 valid or true, 1 invalid or
    /// false, 2 unknown.
    pub fn exit_code(&self) -> i32 {
        match self {
            Report::Proof(r) => r.verdict.exit_code(),
            Report::Necessitation(r) => r.verdict.exit_code(),
            Report::NormalForm(r) => r.equivalence.exit_code(),
            Report::Canonical(r) => match &r.set {
                Some(set) if !set.fully_explanatory => 1,
                _ => 0,
            },
            Report::Carve(r) => match &r.fully_explanatory {
                Some(fe) if !fe.overall => 1,
                _ => 0,
            },
            Report::Corpus(r) => i32::from(r.failed > 0),
            Report::Empty | Report::Model(_) => 0,
        }
    }
}

fn join(items: &[Formula]) -> String {
    items
        .iter()
        .map(Formula::render)
        .collect::<Vec<_>>()
        .join(", ")
}

fn classes_text(classes: &[Vec<String>]) -> String {
    classes
        .iter()
        .map(|c| format!("{{{}}}", c.join(",")))
        .collect::<Vec<_>>()
        .join(" ")
}

fn witness_text(w: &Option<WitnessEntry>) -> String {
    match w {
        Some(w) => format!(
            " (witness {} at {}: holds on R({}) but not known; missing {})",
            w.formula, w.world, w.world, w.missing
        ),
        None => String::new(),
    }
}

fn pointed_text(out: &mut String, label: &str, m: &PointedModel) {
    let _ = writeln!(out, "{label} at {}:", m.state);
    for line in m.model.lines() {
        let _ = writeln!(out, "  {line}");
    }
}

fn text(report: &Report) -> String {
    let mut out = String::new();
    match report {
        Report::Empty => {}
        Report::Proof(r) => {
            if !r.hypotheses.is_empty() {
                let _ = writeln!(out, "hypotheses: {}", join(&r.hypotheses));
            }
            let _ = writeln!(out, "{}: {}", r.verdict.word(), r.formula);
            if let Some(m) = &r.countermodel {
                pointed_text(&mut out, "countermodel", m);
            }
            if let Some(note) = &r.note {
                let _ = writeln!(out, "{note}");
            }
        }
        Report::Necessitation(r) => {
            let answer = match r.verdict {
                Verdict::Valid => "yes",
                Verdict::Invalid => "no",
                Verdict::Unknown => "unknown",
            };
            let _ = writeln!(out, "hypotheses: {}", join(&r.hypotheses));
            let _ = writeln!(
                out,
                "closed under necessitation ({} agents): {answer}",
                r.agents
            );
            for f in &r.failures {
                let _ = writeln!(out, "fails: K{} {} is not derivable", f.agent, f.formula);
                pointed_text(&mut out, "  countermodel", &f.countermodel);
            }
            if let Some(note) = &r.note {
                let _ = writeln!(out, "{note}");
            }
        }
        Report::NormalForm(r) => {
            let _ = writeln!(out, "formula: {}", r.formula);
            let _ = writeln!(out, "normal form: {}", r.normal_form);
            for d in &r.disjuncts {
                let gammas = if d.gammas.is_empty() {
                    "-".to_string()
                } else {
                    join(&d.gammas)
                };
                let _ = writeln!(
                    out,
                    "  alpha: {}  beta: {}  gammas: {}",
                    d.alpha, d.beta, gammas
                );
            }
            let _ = writeln!(out, "equivalence: {}", r.equivalence.word());
            if let Some(note) = &r.note {
                let _ = writeln!(out, "{note}");
            }
        }
        Report::Canonical(r) => {
            let _ = writeln!(out, "atoms: {}", r.atoms.join(","));
            let _ = writeln!(out, "{} canonical worlds", r.worlds.len());
            for w in &r.worlds {
                let _ = writeln!(
                    out,
                    "  {}: cluster {{{}}} designated {} generated by {{{}}}",
                    w.name,
                    join(&w.cluster),
                    w.designated,
                    join(&w.generator)
                );
            }
            if let Some(set) = &r.set {
                if !set.hypotheses.is_empty() {
                    let _ = writeln!(out, "hypotheses: {}", join(&set.hypotheses));
                }
                let _ = writeln!(out, "world set: {{{}}}", set.worlds.join(","));
                let _ = writeln!(
                    out,
                    "induced classes: {}",
                    classes_text(&set.relation_classes)
                );
                let _ = writeln!(
                    out,
                    "fully explanatory: {}{}",
                    if set.fully_explanatory { "yes" } else { "no" },
                    witness_text(&set.witness)
                );
            }
            if let Some(c) = &r.classification {
                let scope = if c.exhaustive {
                    String::new()
                } else {
                    format!(
                        " (sampled from {})",
                        c.total.as_deref().unwrap_or("too many")
                    )
                };
                let _ = writeln!(
                    out,
                    "{} subsets, {} fully explanatory{scope}",
                    c.examined, c.fully_explanatory
                );
                for s in &c.subsets {
                    let _ = writeln!(
                        out,
                        "  {{{}}}: {}{}",
                        s.worlds.join(","),
                        if s.fully_explanatory { "FE" } else { "not FE" },
                        witness_text(&s.witness)
                    );
                }
            }
        }
        Report::Carve(r) => {
            let _ = writeln!(out, "parent states: {}", r.parent_states.join(","));
            let _ = writeln!(out, "worlds: {}", r.worlds.join(","));
            for group in &r.collapsed {
                let _ = writeln!(
                    out,
                    "collapsed bisimilar states: {} (kept {})",
                    group.join(","),
                    group[0]
                );
            }
            for a in &r.accessibility {
                let _ = writeln!(out, "R{} classes: {}", a.agent, classes_text(&a.classes));
            }
            if let Some(fe) = &r.fully_explanatory {
                let _ = writeln!(
                    out,
                    "fully explanatory: {}",
                    if fe.overall { "yes" } else { "no" }
                );
                for f in &fe.failures {
                    let _ =
                        writeln!(
                        out,
                        "  world {} agent {}: {} holds on R{}({}) but K{} {} fails (missing {})",
                        f.world, f.agent, f.witness, f.agent, f.world, f.agent, f.witness, f.missing
                    );
                }
            }
            let inclusion: Vec<String> = r
                .embedding
                .inclusion
                .iter()
                .map(|(a, b)| format!("{a}->{b}"))
                .collect();
            let _ = writeln!(out, "embedding: {}", inclusion.join(" "));
            for a in &r.embedding.agents {
                let _ = writeln!(
                    out,
                    "  R{}: inside parent blocks {}, up to bisimulation {}",
                    a.agent,
                    if a.within_blocks { "yes" } else { "no" },
                    if a.within_blocks_up_to_bisimulation {
                        "yes"
                    } else {
                        "no"
                    }
                );
            }
        }
        Report::Corpus(r) => {
            for f in &r.fixtures {
                let status = if f.failures.is_empty() { "ok" } else { "FAIL" };
                let _ = writeln!(out, "{status:4} {} ({} checks)", f.name, f.checks);
                for failure in &f.failures {
                    let _ = writeln!(out, "     {failure}");
                }
            }
            let _ = writeln!(out, "{} fixtures passed, {} failed", r.passed, r.failed);
        }
        Report::Model(r) => out.push_str(&r.document),
    }
    out
}

/// Renders `report` in `format`. Output is deterministic for fixed input.
pub fn export_report(report: &Report, format: Format) -> Result<String, ReportError> {
    if *report == Report::Empty {
        return Ok(String::new());
    }
    match format {
        Format::Text => Ok(text(report)),
        Format::Structured => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            Ok(s)
        }
        Format::Dot => match report {
            Report::Canonical(r) => Ok(r.dot.clone()),
            Report::Carve(r) => Ok(r.dot.clone()),
            Report::Model(r) => Ok(r.dot.clone()),
            other => Err(ReportError::NoDrawing(other.kind())),
        },
    }
}
