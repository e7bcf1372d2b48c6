//! The `epistemod` command line.
//!
//! Exit codes: 0 valid / true, 1 invalid / false, 2 unknown (prover budget
//! exhausted), 64 usage or input error.

pub mod corpus;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use epistemod_core::canonical::{CanonicalSpace, Coverage, FeVerdict, WorldSet};
use epistemod_core::epistemic::{carve, EpistemicModel};
use epistemod_core::formula::{parse_open, Formula, Signature};
use epistemod_core::kripke::{export_dot, export_model, import_model, KripkeModel};
use epistemod_core::normalform::{restrict_basis, to_normal_form};
use epistemod_core::prover::{Budget, Countermodel, Hypotheses, ProofResult, Prover, ProverError};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::report::{
    export_report, AgentClasses, CanonicalReport, CarveReport, ClassificationReport, Format,
    ModelReport, NecessitationFailureReport, NecessitationReport, NormalFormReport, PointedModel,
    ProofReport, Report, StateEntry, SubsetReport, Verdict, WitnessEntry, WorldEntry,
    WorldSetReport,
};

pub const EXIT_USAGE: i32 = 64;

/// Largest canonical enumeration classified exhaustively without `--samples`.
const EXHAUSTIVE_WORLD_LIMIT: usize = 16;

#[derive(Debug, Parser)]
#[command(name = "epistemod", version, about = "S5 epistemic logic workbench")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide validity of a formula.
    Prove {
        formula: String,
        /// Number of agents (at least the largest agent mentioned).
        #[arg(long, default_value_t = 1)]
        agents: usize,
    },
    /// Decide whether the hypotheses in a file derive a formula.
    Derive {
        #[arg(long)]
        gamma: PathBuf,
        formula: String,
        #[arg(long, default_value_t = 1)]
        agents: usize,
    },
    /// Decide whether a hypothesis set is closed under necessitation.
    NecClosed {
        #[arg(long)]
        gamma: PathBuf,
        #[arg(long, default_value_t = 1)]
        agents: usize,
    },
    /// Single-agent normal form with an equivalence check.
    Nform {
        formula: String,
        /// Rewrite propositional parts over the single atom.
        #[arg(long)]
        basis: bool,
    },
    /// Enumerate canonical worlds; optionally the canonical model of
    /// hypotheses and a classification of world sets.
    Canonical {
        #[arg(long, value_delimiter = ',', required = true)]
        atoms: Vec<String>,
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long)]
        classify: bool,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Carve an epistemic model out of a Kripke model.
    Carve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        keep: Vec<String>,
        #[arg(long)]
        check_fe: bool,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Decide full explanation of a carving or of canonical worlds.
    CheckFe {
        #[arg(long, conflicts_with = "atoms", required_unless_present = "atoms")]
        model: Option<PathBuf>,
        /// States to keep; all states when omitted.
        #[arg(long, value_delimiter = ',', requires = "model")]
        keep: Vec<String>,
        #[arg(long, value_delimiter = ',', requires = "worlds")]
        atoms: Vec<String>,
        #[arg(long, value_delimiter = ',', requires = "atoms")]
        worlds: Vec<String>,
    },
    /// Run the fixture corpus.
    Corpus {
        /// Directory holding `corpus.toml`; the built-in corpus otherwise.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
    /// Re-emit a model document (text), its structure, or a drawing.
    Export {
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct Sampling {
    /// Classify this many random subsets instead of all of them.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("EPISTEMOD_BUDGET must be `nodes` or `nodes:seconds`, got `{0}`")]
    Budget(String),
}

fn input<E: std::fmt::Display>(context: impl std::fmt::Display) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Input(format!("{context}: {e}"))
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses an `EPISTEMOD_BUDGET` value: `nodes` or `nodes:seconds`.
pub fn parse_budget(text: &str) -> Result<Budget, CliError> {
    let bad = || CliError::Budget(text.to_string());
    let (nodes, secs) = match text.split_once(':') {
        Some((n, s)) => (n, Some(s)),
        None => (text, None),
    };
    let mut budget = Budget {
        max_nodes: nodes.trim().parse().map_err(|_| bad())?,
        ..Budget::default()
    };
    if let Some(s) = secs {
        let secs: f64 = s.trim().parse().map_err(|_| bad())?;
        budget.max_time = Duration::try_from_secs_f64(secs).map_err(|_| bad())?;
    }
    Ok(budget)
}

/// Runs one command line. `budget` is the raw `EPISTEMOD_BUDGET` value.
pub fn run<I, T>(args: I, budget: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let result = budget
        .map(parse_budget)
        .transpose()
        .and_then(|b| execute(&cli.command, &Prover::new(b.unwrap_or_default())));
    let report = match result {
        Ok(r) => r,
        Err(e) => return usage(e.to_string()),
    };
    match export_report(&report, cli.format) {
        Ok(stdout) => Outcome {
            code: report.exit_code(),
            stdout,
            stderr: String::new(),
        },
        Err(e) => usage(e.to_string()),
    }
}

fn usage(message: String) -> Outcome {
    Outcome {
        code: EXIT_USAGE,
        stdout: String::new(),
        stderr: format!("error: {message}\n"),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(input(path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(input(path.display()))
}

/// Formulas of a hypothesis file, one per line. Blank lines and lines
/// starting with `#` are skipped.
pub fn read_gamma(text: &str) -> Result<Vec<Formula>, CliError> {
    text.lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(n, l)| {
            parse_open(l, 1)
                .map(|(f, _)| f)
                .map_err(input(format!("line {n}")))
        })
        .collect()
}

fn load_model(path: &Path) -> Result<KripkeModel, CliError> {
    import_model(&read(path)?).map_err(input(path.display()))
}

fn pointed(c: &Countermodel) -> PointedModel {
    PointedModel {
        state: c.state_id().to_string(),
        model: export_model(&c.model),
    }
}

fn signature(formulas: &[&Formula], agents: usize) -> Signature {
    Signature::covering(formulas.iter().copied(), agents)
}

fn proof_report(
    hypotheses: Vec<Formula>,
    formula: Formula,
    result: Result<ProofResult, ProverError>,
) -> Result<Report, CliError> {
    let (verdict, countermodel, note) = match result {
        Ok(ProofResult::Valid) => (Verdict::Valid, None, None),
        Ok(ProofResult::Invalid(c)) => (Verdict::Invalid, Some(pointed(&c)), None),
        Err(e @ ProverError::BudgetExceeded { .. }) => {
            (Verdict::Unknown, None, Some(e.to_string()))
        }
        Err(e) => return Err(CliError::Input(e.to_string())),
    };
    Ok(Report::Proof(ProofReport {
        hypotheses,
        formula,
        verdict,
        countermodel,
        note,
    }))
}

fn execute(command: &Command, prover: &Prover) -> Result<Report, CliError> {
    match command {
        Command::Prove { formula, agents } => {
            let (f, _) = parse_open(formula, 1).map_err(input("formula"))?;
            let sig = signature(&[&f], *agents);
            let result = prover.decide_validity(&sig, &f);
            proof_report(Vec::new(), f, result)
        }
        Command::Derive {
            gamma,
            formula,
            agents,
        } => {
            let hyps = read_gamma(&read(gamma)?)?;
            let (f, _) = parse_open(formula, 1).map_err(input("formula"))?;
            let mut all: Vec<&Formula> = hyps.iter().collect();
            all.push(&f);
            let sig = signature(&all, *agents);
            let gamma: Hypotheses = hyps.iter().cloned().collect();
            let result = prover.consequence(&sig, &gamma, &f);
            proof_report(gamma.formulas().to_vec(), f, result)
        }
        Command::NecClosed { gamma, agents } => {
            let hyps = read_gamma(&read(gamma)?)?;
            let sig = signature(&hyps.iter().collect::<Vec<_>>(), *agents);
            let gamma: Hypotheses = hyps.into_iter().collect();
            let (verdict, failures, note) = match prover.necessitation_closed(&sig, &gamma) {
                Ok(r) => (
                    if r.closed {
                        Verdict::Valid
                    } else {
                        Verdict::Invalid
                    },
                    r.failures
                        .iter()
                        .map(|f| NecessitationFailureReport {
                            formula: f.formula.clone(),
                            agent: f.agent,
                            countermodel: pointed(&f.countermodel),
                        })
                        .collect(),
                    None,
                ),
                Err(e @ ProverError::BudgetExceeded { .. }) => {
                    (Verdict::Unknown, Vec::new(), Some(e.to_string()))
                }
                Err(e) => return Err(CliError::Input(e.to_string())),
            };
            Ok(Report::Necessitation(NecessitationReport {
                hypotheses: gamma.formulas().to_vec(),
                agents: sig.agents(),
                verdict,
                failures,
                note,
            }))
        }
        Command::Nform { formula, basis } => {
            let (f, sig) = parse_open(formula, 1).map_err(input("formula"))?;
            let mut nf = to_normal_form(&f).map_err(input("normal form"))?;
            if *basis {
                nf = restrict_basis(&nf, &sig).map_err(input("basis"))?;
            }
            let normal_form = nf.to_formula();
            let check = prover.decide_validity(&sig, &Formula::iff(f.clone(), normal_form.clone()));
            let (equivalence, note) = match check {
                Ok(r) if r.is_valid() => (Verdict::Valid, None),
                Ok(_) => (Verdict::Invalid, None),
                Err(e) => (Verdict::Unknown, Some(e.to_string())),
            };
            Ok(Report::NormalForm(NormalFormReport {
                formula: f,
                normal_form,
                disjuncts: nf.disjuncts,
                equivalence,
                note,
            }))
        }
        Command::Canonical {
            atoms,
            gamma,
            classify,
            sampling,
            dot,
        } => {
            let space = canonical_space(atoms)?;
            let set = match gamma {
                Some(path) => {
                    let hyps: Hypotheses = read_gamma(&read(path)?)?.into_iter().collect();
                    let ws = space.canonical_model(&hyps).map_err(input("hypotheses"))?;
                    Some((hyps, ws))
                }
                None => None,
            };
            let coverage = match (classify, sampling.samples) {
                (false, _) => None,
                (true, Some(samples)) => Some(Coverage::Sampled {
                    samples,
                    seed: sampling.seed,
                }),
                (true, None) if space.len() <= EXHAUSTIVE_WORLD_LIMIT => Some(Coverage::Exhaustive),
                (true, None) => {
                    return Err(CliError::Input(format!(
                        "{} canonical worlds are too many to classify every subset; pass --samples",
                        space.len()
                    )))
                }
            };
            let report = canonical_report(&space, set.as_ref().map(|(h, ws)| (h, ws)), coverage)?;
            if let (Some(path), Report::Canonical(r)) = (dot, &report) {
                write(path, &r.dot)?;
            }
            Ok(report)
        }
        Command::Carve {
            model,
            keep,
            check_fe,
            dot,
        } => {
            let parent = load_model(model)?;
            let e = carve(&parent, keep).map_err(input("carve"))?;
            let report = carve_report(&e, *check_fe)?;
            if let (Some(path), Report::Carve(r)) = (dot, &report) {
                write(path, &r.dot)?;
            }
            Ok(report)
        }
        Command::CheckFe {
            model,
            keep,
            atoms,
            worlds,
        } => match model {
            Some(path) => {
                let parent = load_model(path)?;
                let e = if keep.is_empty() {
                    carve(&parent, parent.states())
                } else {
                    carve(&parent, keep)
                }
                .map_err(input("carve"))?;
                carve_report(&e, true)
            }
            None => {
                let space = canonical_space(atoms)?;
                let ws = space.world_set(worlds).ok_or_else(|| {
                    CliError::Input(format!("unknown world in {}", worlds.join(",")))
                })?;
                canonical_report(&space, Some((&Hypotheses::new(), &ws)), None)
            }
        },
        Command::Corpus { dir } => {
            let corpus = match dir {
                Some(d) => Corpus::load(d).map_err(|e| CliError::Input(e.to_string()))?,
                None => Corpus::builtin(),
            };
            Ok(Report::Corpus(corpus.run(prover)))
        }
        Command::Export { model } => {
            let m = load_model(model)?;
            Ok(model_report(&m))
        }
    }
}

fn canonical_space(atoms: &[String]) -> Result<CanonicalSpace, CliError> {
    let sig = Signature::new(atoms.iter().map(String::as_str), 1).map_err(input("atoms"))?;
    CanonicalSpace::new(&sig).map_err(input("atoms"))
}

fn witness_entry(space: &CanonicalSpace, verdict: &FeVerdict) -> Option<WitnessEntry> {
    verdict.witness.as_ref().map(|w| WitnessEntry {
        world: space.name(w.world),
        missing: space.name(w.missing),
        formula: w.formula.clone(),
    })
}

fn canonical_report(
    space: &CanonicalSpace,
    set: Option<(&Hypotheses, &WorldSet)>,
    coverage: Option<Coverage>,
) -> Result<Report, CliError> {
    let worlds = space
        .worlds()
        .iter()
        .enumerate()
        .map(|(i, w)| WorldEntry {
            name: space.name(i),
            cluster: w
                .cluster
                .iter()
                .rev()
                .map(|&v| space.valuation_formula(v))
                .collect(),
            designated: space.valuation_formula(w.designated),
            generator: space.generator(i),
        })
        .collect();
    let (set_report, dot) = match set {
        Some((hyps, ws)) => {
            let verdict = space
                .fully_explanatory(ws, Some(hyps))
                .map_err(input("world set"))?;
            let relation = space.induced_relation(ws).map_err(input("world set"))?;
            let report = WorldSetReport {
                hypotheses: hyps.formulas().to_vec(),
                worlds: space.names(ws),
                relation_classes: relation.classes().iter().map(|c| space.names(c)).collect(),
                fully_explanatory: verdict.fully_explanatory,
                witness: witness_entry(space, &verdict),
            };
            (Some(report), space.export_dot(ws))
        }
        None => (None, space.export_dot(&space.all())),
    };
    let classification = coverage.map(|c| {
        let result = space.classify_subsets(c);
        ClassificationReport {
            exhaustive: result.exhaustive,
            total: result.total.map(|t| t.to_string()),
            examined: result.entries.len(),
            fully_explanatory: result.fully_explanatory_count(),
            subsets: result
                .entries
                .iter()
                .map(|e| SubsetReport {
                    worlds: space.names(&e.worlds),
                    fully_explanatory: e.verdict.fully_explanatory,
                    witness: witness_entry(space, &e.verdict),
                })
                .collect(),
        }
    });
    Ok(Report::Canonical(CanonicalReport {
        atoms: space.signature().atoms().to_vec(),
        worlds,
        set: set_report,
        classification,
        dot,
    }))
}

fn carve_report(e: &EpistemicModel, check_fe: bool) -> Result<Report, CliError> {
    let accessibility = (1..=e.parent().agents())
        .map(|agent| {
            let r = e
                .induced_accessibility(agent)
                .map_err(input("accessibility"))?;
            let ids = e.parent().states();
            Ok(AgentClasses {
                agent,
                classes: r
                    .classes()
                    .iter()
                    .map(|c| c.iter().map(|&s| ids[s].clone()).collect())
                    .collect(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Report::Carve(CarveReport {
        parent_states: e.parent().states().to_vec(),
        worlds: e.world_ids(),
        collapsed: e.dedup_log().to_vec(),
        accessibility,
        fully_explanatory: check_fe.then(|| e.fully_explanatory()),
        embedding: e.embedding_certificate(),
        dot: e.export_dot(),
    }))
}

fn model_report(m: &KripkeModel) -> Report {
    let ids = m.states();
    Report::Model(ModelReport {
        atoms: m.signature().atoms().to_vec(),
        agents: m.agents(),
        states: (0..m.len())
            .map(|s| StateEntry {
                id: ids[s].clone(),
                atoms: m.atom_names(s).iter().map(|a| a.to_string()).collect(),
            })
            .collect(),
        partitions: (1..=m.agents())
            .map(|a| {
                m.partition(a)
                    .iter()
                    .map(|b| b.iter().map(|&s| ids[s].clone()).collect())
                    .collect()
            })
            .collect(),
        document: export_model(m),
        dot: export_dot(m, None),
    })
}
