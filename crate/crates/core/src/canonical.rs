//! Single-agent canonical worlds over a finite set of atoms.
//!
//! A maximal consistent set of single-agent S5 formulas is determined by the
//! valuation it makes true and the set of valuations it deems possible, so a
//! world is represented as a `(cluster, designated)` pair with the
//! designated valuation inside the cluster. Satisfaction is model checking
//! at the designated valuation in the one-block model over the cluster.
//!
//! Two worlds see each other exactly when their clusters coincide. A world
//! set is fully explanatory exactly when it is a union of whole cluster
//! classes: if a cluster-mate `u` of `w` is missing, the formula describing
//! the valuations present holds throughout `R(w)` but is not known at `w`.

use std::cmp::Reverse;
use std::collections::BTreeSet;
use std::fmt::Write as _;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::formula::{Formula, Signature, SignatureError};
use crate::prover::Hypotheses;
use crate::relation::Relation;

pub const DEFAULT_ATOM_CAP: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CanonicalError {
    #[error("{atoms} atoms exceed the canonical enumeration cap of {cap}")]
    TooManyAtoms { atoms: usize, cap: usize },
    #[error("canonical worlds are single-agent; found K{agent}")]
    MultiAgent { agent: usize },
    #[error(transparent)]
    Signature(SignatureError),
    #[error("hypotheses are unsatisfiable over atoms {atoms:?}")]
    Unsatisfiable { atoms: Vec<String> },
    #[error("world set is empty")]
    EmptySet,
    #[error("world index {0} is outside the canonical enumeration")]
    UnknownWorld(usize),
}

impl From<SignatureError> for CanonicalError {
    fn from(e: SignatureError) -> Self {
        match e {
            SignatureError::AgentOutOfRange { agent, .. } => CanonicalError::MultiAgent { agent },
            other => CanonicalError::Signature(other),
        }
    }
}

/// Atoms true under a valuation; bit `i` stands for the `i`-th atom of the
/// signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Valuation(pub u32);

impl Valuation {
    pub fn holds(self, atom: usize) -> bool {
        self.0 >> atom & 1 == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CanonicalWorld {
    pub cluster: BTreeSet<Valuation>,
    pub designated: Valuation,
}

/// Indices into [`CanonicalSpace::worlds`].
pub type WorldSet = BTreeSet<usize>;

/// Why a world set fails to be fully explanatory: `formula` holds at every
/// member of `R(world)` but `K1 formula` is false at `world`, because the
/// cluster-mate `missing` is absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CanonicalWitness {
    pub world: usize,
    pub missing: usize,
    pub formula: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeVerdict {
    pub fully_explanatory: bool,
    pub witness: Option<CanonicalWitness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coverage {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubsetEntry {
    pub worlds: WorldSet,
    pub verdict: FeVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub exhaustive: bool,
    /// Number of nonempty subsets, when it fits.
    pub total: Option<u128>,
    pub entries: Vec<SubsetEntry>,
}

impl Classification {
    pub fn fully_explanatory_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.verdict.fully_explanatory)
            .count()
    }
}

/// Spreadsheet-style name: `A`..`Z`, `AA`, `AB`, ...
pub fn world_name(mut index: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'A' + (index % 26) as u8);
        if index < 26 {
            break;
        }
        index = index / 26 - 1;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

/// All canonical worlds over a single-agent signature.
#[derive(Debug, Clone)]
pub struct CanonicalSpace {
    sig: Signature,
    worlds: Vec<CanonicalWorld>,
    /// Indices of worlds sharing each world's cluster.
    cluster_mates: Vec<Vec<usize>>,
}

impl CanonicalSpace {
    pub fn new(sig: &Signature) -> Result<Self, CanonicalError> {
        Self::with_cap(sig, DEFAULT_ATOM_CAP)
    }

    /// Worlds are ordered by cluster, comparing the cluster's valuations in
    /// decreasing order as sequences, then by decreasing designated
    /// valuation. Over one atom `p` this gives `A = ({p}, p)`,
    /// `B = ({p, ~p}, p)`, `C = ({p, ~p}, ~p)`, `D = ({~p}, ~p)`.
    pub fn with_cap(sig: &Signature, cap: usize) -> Result<Self, CanonicalError> {
        let atoms = sig.atoms().len();
        if atoms > cap {
            return Err(CanonicalError::TooManyAtoms { atoms, cap });
        }
        let sig = sig.with_agents(1)?;
        let valuations = 1u32 << atoms;
        let mut clusters: Vec<Vec<u32>> = (0..valuations)
            .rev()
            .powerset()
            .filter(|c| !c.is_empty())
            .collect();
        clusters.sort_by_key(|c| c.iter().copied().map(Reverse).collect::<Vec<_>>());
        let mut worlds = Vec::new();
        let mut cluster_mates = Vec::new();
        for c in clusters {
            let cluster: BTreeSet<Valuation> = c.iter().copied().map(Valuation).collect();
            let mates: Vec<usize> = (worlds.len()..worlds.len() + c.len()).collect();
            for &v in &c {
                worlds.push(CanonicalWorld {
                    cluster: cluster.clone(),
                    designated: Valuation(v),
                });
                cluster_mates.push(mates.clone());
            }
        }
        Ok(CanonicalSpace {
            sig,
            worlds,
            cluster_mates,
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn worlds(&self) -> &[CanonicalWorld] {
        &self.worlds
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn name(&self, index: usize) -> String {
        world_name(index)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        (0..self.len()).find(|&i| world_name(i) == name)
    }

    pub fn index_of_world(&self, w: &CanonicalWorld) -> Option<usize> {
        self.worlds.iter().position(|x| x == w)
    }

    pub fn all(&self) -> WorldSet {
        (0..self.len()).collect()
    }

    /// Conjunction of the atom literals of `v`.
    pub fn valuation_formula(&self, v: Valuation) -> Formula {
        Formula::conj(self.sig.atoms().iter().enumerate().map(|(i, a)| {
            let atom = Formula::atom(a);
            if v.holds(i) {
                atom
            } else {
                Formula::not(atom)
            }
        }))
    }

    /// A short list of formulas true at world `index` and at no other world.
    pub fn generator(&self, index: usize) -> Vec<Formula> {
        let w = &self.worlds[index];
        let singleton = w.cluster.len() == 1;
        let mut out = Vec::new();
        if !singleton {
            out.push(self.valuation_formula(w.designated));
        }
        if w.cluster.len() < 1 << self.sig.atoms().len() {
            out.push(Formula::know(
                1,
                Formula::disj(w.cluster.iter().map(|&v| self.valuation_formula(v))),
            ));
        }
        for &u in w.cluster.iter().rev().filter(|&&u| u != w.designated) {
            let excluded = match self.valuation_formula(u) {
                Formula::Not(inner) => (*inner).clone(),
                other => Formula::not(other),
            };
            out.push(Formula::not(Formula::know(1, excluded)));
        }
        out
    }

    fn check(&self, f: &Formula) -> Result<(), CanonicalError> {
        f.check(&self.sig)?;
        Ok(())
    }

    fn eval(&self, f: &Formula, cluster: &BTreeSet<Valuation>, v: Valuation) -> bool {
        match f {
            Formula::Atom(a) => v.holds(self.sig.atom_index(a).expect("checked atom")),
            Formula::Top => true,
            Formula::Bot => false,
            Formula::Not(g) => !self.eval(g, cluster, v),
            Formula::And(a, b) => self.eval(a, cluster, v) && self.eval(b, cluster, v),
            Formula::Or(a, b) => self.eval(a, cluster, v) || self.eval(b, cluster, v),
            Formula::Implies(a, b) => !self.eval(a, cluster, v) || self.eval(b, cluster, v),
            Formula::Iff(a, b) => self.eval(a, cluster, v) == self.eval(b, cluster, v),
            Formula::Know(_, g) => cluster.iter().all(|&u| self.eval(g, cluster, u)),
        }
    }

    /// Membership of `f` in world `index`.
    pub fn satisfies(&self, index: usize, f: &Formula) -> Result<bool, CanonicalError> {
        let w = self
            .worlds
            .get(index)
            .ok_or(CanonicalError::UnknownWorld(index))?;
        self.check(f)?;
        Ok(self.eval(f, &w.cluster, w.designated))
    }

    /// All worlds containing every hypothesis.
    pub fn canonical_model(&self, gamma: &Hypotheses) -> Result<WorldSet, CanonicalError> {
        for g in gamma {
            self.check(g)?;
        }
        let ws: WorldSet = (0..self.len())
            .filter(|&i| {
                let w = &self.worlds[i];
                gamma.iter().all(|g| self.eval(g, &w.cluster, w.designated))
            })
            .collect();
        if ws.is_empty() {
            return Err(CanonicalError::Unsatisfiable {
                atoms: self.sig.atoms().to_vec(),
            });
        }
        Ok(ws)
    }

    fn check_set(&self, ws: &WorldSet) -> Result<(), CanonicalError> {
        if ws.is_empty() {
            return Err(CanonicalError::EmptySet);
        }
        match ws.iter().find(|&&i| i >= self.len()) {
            Some(&i) => Err(CanonicalError::UnknownWorld(i)),
            None => Ok(()),
        }
    }

    /// `x` in `R(w)` iff the clusters of `x` and `w` coincide.
    pub fn induced_relation(&self, ws: &WorldSet) -> Result<Relation, CanonicalError> {
        self.check_set(ws)?;
        let mut r = Relation::new(ws.iter().copied());
        for &w in ws {
            for &x in &self.cluster_mates[w] {
                if ws.contains(&x) {
                    r.insert(w, x);
                }
            }
        }
        Ok(r)
    }

    /// Decides whether `ws` is fully explanatory. A failing verdict names
    /// the first world with an absent cluster-mate and a witness formula,
    /// preferring an atom literal, then a member of the subformula closure
    /// of `hint`, then the disjunction of the valuations present.
    pub fn fully_explanatory(
        &self,
        ws: &WorldSet,
        hint: Option<&Hypotheses>,
    ) -> Result<FeVerdict, CanonicalError> {
        self.check_set(ws)?;
        let failure = ws.iter().find_map(|&w| {
            self.cluster_mates[w]
                .iter()
                .find(|u| !ws.contains(u))
                .map(|&u| (w, u))
        });
        let Some((world, missing)) = failure else {
            return Ok(FeVerdict {
                fully_explanatory: true,
                witness: None,
            });
        };
        let formula = self.witness_formula(ws, world, hint);
        Ok(FeVerdict {
            fully_explanatory: false,
            witness: Some(CanonicalWitness {
                world,
                missing,
                formula,
            }),
        })
    }

    /// Whether `f` holds throughout `R(world)` within `ws` while `K1 f`
    /// fails at `world`.
    pub fn is_witness(&self, ws: &WorldSet, world: usize, f: &Formula) -> bool {
        let w = &self.worlds[world];
        let seen: Vec<usize> = self.cluster_mates[world]
            .iter()
            .copied()
            .filter(|x| ws.contains(x))
            .collect();
        seen.iter()
            .all(|&x| self.eval(f, &w.cluster, self.worlds[x].designated))
            && !self.eval(&Formula::know(1, f.clone()), &w.cluster, w.designated)
    }

    fn witness_formula(&self, ws: &WorldSet, world: usize, hint: Option<&Hypotheses>) -> Formula {
        let literals = self.sig.atoms().iter().flat_map(|a| {
            let atom = Formula::atom(a);
            [atom.clone(), Formula::not(atom)]
        });
        let closure = hint
            .into_iter()
            .flat_map(|gamma| gamma.iter())
            .filter(|g| self.check(g).is_ok())
            .flat_map(|g| g.subformula_closure())
            .sorted_by_key(Formula::size);
        if let Some(f) = literals
            .chain(closure)
            .find(|f| self.is_witness(ws, world, f))
        {
            return f;
        }
        Formula::disj(
            self.cluster_mates[world]
                .iter()
                .filter(|x| ws.contains(x))
                .map(|&x| self.valuation_formula(self.worlds[x].designated)),
        )
    }

    /// Classifies every nonempty subset (exhaustive) or a seeded sample of
    /// distinct nonempty subsets.
    pub fn classify_subsets(&self, coverage: Coverage) -> Classification {
        let n = self.len();
        let total = u32::try_from(n)
            .ok()
            .and_then(|n| 1u128.checked_shl(n))
            .map(|t| t - 1);
        let subsets: Vec<WorldSet> = match coverage {
            Coverage::Exhaustive => (0..n).powerset().skip(1).map(WorldSet::from_iter).collect(),
            Coverage::Sampled { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let wanted = total.map_or(samples, |t| samples.min(t as usize));
                let mut seen = BTreeSet::new();
                while seen.len() < wanted {
                    let ws: WorldSet = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
                    if !ws.is_empty() {
                        seen.insert(ws);
                    }
                }
                seen.into_iter().collect()
            }
        };
        let entries = subsets
            .into_iter()
            .map(|worlds| {
                let verdict = self
                    .fully_explanatory(&worlds, None)
                    .expect("nonempty subset of the enumeration");
                SubsetEntry { worlds, verdict }
            })
            .collect();
        Classification {
            exhaustive: coverage == Coverage::Exhaustive,
            total,
            entries,
        }
    }

    fn valuation_label(&self, v: Valuation) -> String {
        self.valuation_formula(v).render()
    }

    /// DOT drawing of `ws`: one node per world, one undirected edge per pair
    /// of distinct worlds related by the induced relation.
    pub fn export_dot(&self, ws: &WorldSet) -> String {
        let mut out = String::from("graph canonical {\n  node [shape=circle];\n");
        for &i in ws {
            let w = &self.worlds[i];
            let cluster = w
                .cluster
                .iter()
                .rev()
                .map(|&v| self.valuation_label(v))
                .join(", ");
            let _ = writeln!(
                out,
                "  \"{}\" [label=\"{}\\n{{{}}}\\n{}\"];",
                world_name(i),
                world_name(i),
                cluster,
                self.valuation_label(w.designated)
            );
        }
        for (&a, &b) in ws.iter().tuple_combinations() {
            if self.worlds[a].cluster == self.worlds[b].cluster {
                let _ = writeln!(out, "  \"{}\" -- \"{}\";", world_name(a), world_name(b));
            }
        }
        out.push_str("}\n");
        out
    }

    /// The worlds named in `names`.
    pub fn world_set<S: AsRef<str>>(&self, names: &[S]) -> Option<WorldSet> {
        names.iter().map(|n| self.index_of(n.as_ref())).collect()
    }

    pub fn names(&self, ws: &WorldSet) -> Vec<String> {
        ws.iter().map(|&i| world_name(i)).collect()
    }
}

/// Membership of `f` in `w` over `sig`.
pub fn world_satisfies(
    sig: &Signature,
    w: &CanonicalWorld,
    f: &Formula,
) -> Result<bool, CanonicalError> {
    let space = CanonicalSpace {
        sig: sig.with_agents(1)?,
        worlds: Vec::new(),
        cluster_mates: Vec::new(),
    };
    space.check(f)?;
    Ok(space.eval(f, &w.cluster, w.designated))
}
