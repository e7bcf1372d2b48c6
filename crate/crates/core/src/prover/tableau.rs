//! Block tableau for satisfiability in S5 with several agents.
//!
//! Formulas are put in negation normal form over literals, `&`, `|`, `Ki`
//! and its dual `Mi` (`~Ki~`). Each tableau world belongs to exactly one
//! block per agent. `Ki f` at a world is a fact about its `i`-block: `f` is
//! added to every member, present and future. `Mi f` asks for some member of
//! the `i`-block carrying `f`; when none does, a fresh world joins the block
//! and gets singleton blocks for the other agents.
//!
//! A fresh `j`-block only ever receives subformulas of strictly smaller modal
//! depth than the formula that created its world, and a block holds at most
//! one witness per `Mi` formula, so expansion terminates without blocking.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use super::{Budget, ProverError};
use crate::formula::{Agent, Formula, Signature};
use crate::kripke::KripkeModel;

type Id = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    Top,
    Bot,
    Lit(usize, bool),
    And(Id, Id),
    Or(Id, Id),
    Box(Agent, Id),
    Dia(Agent, Id),
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Node>,
    index: HashMap<Node, Id>,
    negation: HashMap<Id, Id>,
}

impl Arena {
    fn intern(&mut self, node: Node) -> Id {
        let node = match node {
            Node::And(a, b) => match (self.nodes[a], self.nodes[b]) {
                (Node::Bot, _) | (_, Node::Bot) => Node::Bot,
                (Node::Top, _) => return b,
                (_, Node::Top) => return a,
                _ if a == b => return a,
                _ => node,
            },
            Node::Or(a, b) => match (self.nodes[a], self.nodes[b]) {
                (Node::Top, _) | (_, Node::Top) => Node::Top,
                (Node::Bot, _) => return b,
                (_, Node::Bot) => return a,
                _ if a == b => return a,
                _ => node,
            },
            Node::Box(_, a) if self.nodes[a] == Node::Top => Node::Top,
            Node::Dia(_, a) if self.nodes[a] == Node::Bot => Node::Bot,
            other => other,
        };
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(node);
        self.index.insert(node, id);
        id
    }

    fn nnf(&mut self, f: &Formula, positive: bool, sig: &Signature) -> Id {
        let node = match f {
            Formula::Top => {
                if positive {
                    Node::Top
                } else {
                    Node::Bot
                }
            }
            Formula::Bot => {
                if positive {
                    Node::Bot
                } else {
                    Node::Top
                }
            }
            Formula::Atom(a) => {
                let ai = sig
                    .atom_index(a)
                    .expect("formula checked against signature");
                Node::Lit(ai, positive)
            }
            Formula::Not(g) => return self.nnf(g, !positive, sig),
            Formula::And(a, b) => {
                let (x, y) = (self.nnf(a, positive, sig), self.nnf(b, positive, sig));
                if positive {
                    Node::And(x, y)
                } else {
                    Node::Or(x, y)
                }
            }
            Formula::Or(a, b) => {
                let (x, y) = (self.nnf(a, positive, sig), self.nnf(b, positive, sig));
                if positive {
                    Node::Or(x, y)
                } else {
                    Node::And(x, y)
                }
            }
            Formula::Implies(a, b) => {
                let (x, y) = (self.nnf(a, !positive, sig), self.nnf(b, positive, sig));
                if positive {
                    Node::Or(x, y)
                } else {
                    Node::And(x, y)
                }
            }
            Formula::Iff(a, b) => {
                let (ap, an) = (self.nnf(a, true, sig), self.nnf(a, false, sig));
                let (bp, bn) = (self.nnf(b, true, sig), self.nnf(b, false, sig));
                let (l, r) = if positive {
                    (
                        self.intern(Node::And(ap, bp)),
                        self.intern(Node::And(an, bn)),
                    )
                } else {
                    (
                        self.intern(Node::And(ap, bn)),
                        self.intern(Node::And(an, bp)),
                    )
                };
                Node::Or(l, r)
            }
            Formula::Know(i, g) => {
                let x = self.nnf(g, positive, sig);
                if positive {
                    Node::Box(*i, x)
                } else {
                    Node::Dia(*i, x)
                }
            }
        };
        self.intern(node)
    }

    fn negate(&mut self, id: Id) -> Id {
        if let Some(&n) = self.negation.get(&id) {
            return n;
        }
        let node = match self.nodes[id] {
            Node::Top => Node::Bot,
            Node::Bot => Node::Top,
            Node::Lit(a, p) => Node::Lit(a, !p),
            Node::And(a, b) => {
                let (x, y) = (self.negate(a), self.negate(b));
                Node::Or(x, y)
            }
            Node::Or(a, b) => {
                let (x, y) = (self.negate(a), self.negate(b));
                Node::And(x, y)
            }
            Node::Box(i, a) => Node::Dia(i, self.negate(a)),
            Node::Dia(i, a) => Node::Box(i, self.negate(a)),
        };
        let n = self.intern(node);
        self.negation.insert(id, n);
        self.negation.insert(n, id);
        n
    }
}

#[derive(Debug, Clone)]
struct World {
    formulas: BTreeSet<Id>,
    /// Block index per agent (0-based agent).
    blocks: Vec<usize>,
    pending: Vec<Id>,
    disjunctions: Vec<Id>,
}

#[derive(Debug, Clone)]
struct Block {
    agent: Agent,
    members: Vec<usize>,
    boxes: BTreeSet<Id>,
    diamonds: BTreeSet<Id>,
}

#[derive(Debug, Clone)]
struct Branch {
    worlds: Vec<World>,
    blocks: Vec<Block>,
}

enum Step {
    Closed,
    Split { world: usize, left: Id, right: Id },
    Open,
}

struct Meter<'b> {
    budget: &'b Budget,
    nodes: u64,
    start: Instant,
}

impl Meter<'_> {
    fn tick(&mut self) -> Result<(), ProverError> {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes {
            return Err(ProverError::BudgetExceeded {
                nodes: self.nodes,
                elapsed: self.start.elapsed(),
            });
        }
        if self.nodes.is_multiple_of(256) && self.start.elapsed() > self.budget.max_time {
            return Err(ProverError::BudgetExceeded {
                nodes: self.nodes,
                elapsed: self.start.elapsed(),
            });
        }
        Ok(())
    }
}

impl Branch {
    fn new(agents: usize, root: Id) -> Self {
        let mut b = Branch {
            worlds: Vec::new(),
            blocks: Vec::new(),
        };
        let w = b.spawn_world(agents, None);
        b.worlds[w].pending.push(root);
        b
    }

    /// Adds a world. With `join = Some((agent, block))` the world enters
    /// that block; every other agent gets a fresh singleton block.
    fn spawn_world(&mut self, agents: usize, join: Option<(Agent, usize)>) -> usize {
        let w = self.worlds.len();
        let mut blocks = Vec::with_capacity(agents);
        let mut pending = Vec::new();
        for agent in 1..=agents {
            match join {
                Some((a, b)) if a == agent => {
                    self.blocks[b].members.push(w);
                    pending.extend(self.blocks[b].boxes.iter().copied());
                    blocks.push(b);
                }
                _ => {
                    blocks.push(self.blocks.len());
                    self.blocks.push(Block {
                        agent,
                        members: vec![w],
                        boxes: BTreeSet::new(),
                        diamonds: BTreeSet::new(),
                    });
                }
            }
        }
        self.worlds.push(World {
            formulas: BTreeSet::new(),
            blocks,
            pending,
            disjunctions: Vec::new(),
        });
        w
    }

    /// Drains pending formulas. Returns false on a clash.
    fn propagate(&mut self, arena: &Arena) -> bool {
        loop {
            let Some(w) = self.worlds.iter().position(|w| !w.pending.is_empty()) else {
                return true;
            };
            while let Some(id) = self.worlds[w].pending.pop() {
                if !self.worlds[w].formulas.insert(id) {
                    continue;
                }
                match arena.nodes[id] {
                    Node::Top => {}
                    Node::Bot => return false,
                    Node::Lit(a, p) => {
                        if let Some(&neg) = arena.index.get(&Node::Lit(a, !p)) {
                            if self.worlds[w].formulas.contains(&neg) {
                                return false;
                            }
                        }
                    }
                    Node::And(x, y) => {
                        self.worlds[w].pending.push(x);
                        self.worlds[w].pending.push(y);
                    }
                    Node::Or(..) => self.worlds[w].disjunctions.push(id),
                    Node::Box(i, x) => {
                        let b = self.worlds[w].blocks[i - 1];
                        if self.blocks[b].boxes.insert(x) {
                            for m in self.blocks[b].members.clone() {
                                self.worlds[m].pending.push(x);
                            }
                        }
                    }
                    Node::Dia(i, x) => {
                        let b = self.worlds[w].blocks[i - 1];
                        self.blocks[b].diamonds.insert(x);
                    }
                }
            }
        }
    }

    fn step(
        &mut self,
        arena: &Arena,
        agents: usize,
        meter: &mut Meter,
    ) -> Result<Step, ProverError> {
        loop {
            meter.tick()?;
            if !self.propagate(arena) {
                return Ok(Step::Closed);
            }
            for (w, world) in self.worlds.iter().enumerate() {
                for &d in &world.disjunctions {
                    let Node::Or(l, r) = arena.nodes[d] else {
                        unreachable!("only disjunctions are queued")
                    };
                    if !world.formulas.contains(&l) && !world.formulas.contains(&r) {
                        return Ok(Step::Split {
                            world: w,
                            left: l,
                            right: r,
                        });
                    }
                }
            }
            let unmet = self.blocks.iter().enumerate().find_map(|(b, block)| {
                block
                    .diamonds
                    .iter()
                    .find(|g| {
                        !block
                            .members
                            .iter()
                            .any(|&m| self.worlds[m].formulas.contains(g))
                    })
                    .map(|&g| (b, block.agent, g))
            });
            match unmet {
                Some((b, agent, g)) => {
                    let w = self.spawn_world(agents, Some((agent, b)));
                    self.worlds[w].pending.push(g);
                }
                None => return Ok(Step::Open),
            }
        }
    }

    fn into_model(self, sig: &Signature, arena: &Arena) -> KripkeModel {
        let ids = (0..self.worlds.len()).map(|w| format!("s{w}")).collect();
        let valuation = self
            .worlds
            .iter()
            .map(|w| {
                w.formulas
                    .iter()
                    .filter_map(|&id| match arena.nodes[id] {
                        Node::Lit(a, true) => Some(a),
                        _ => None,
                    })
                    .collect()
            })
            .collect();
        let partitions = (1..=sig.agents())
            .map(|agent| {
                self.blocks
                    .iter()
                    .filter(|b| b.agent == agent)
                    .map(|b| b.members.clone())
                    .collect()
            })
            .collect();
        KripkeModel::from_indices(sig.clone(), ids, valuation, partitions)
            .expect("tableau blocks partition the worlds")
    }
}

/// Searches for a pointed model of `f`. `Ok(None)` means unsatisfiable.
pub(super) fn satisfy(
    sig: &Signature,
    f: &Formula,
    budget: &Budget,
) -> Result<Option<(KripkeModel, usize)>, ProverError> {
    let mut arena = Arena::default();
    let root = arena.nnf(f, true, sig);
    let mut meter = Meter {
        budget,
        nodes: 0,
        start: Instant::now(),
    };
    let agents = sig.agents();
    let mut stack = vec![Branch::new(agents, root)];
    while let Some(mut branch) = stack.pop() {
        match branch.step(&arena, agents, &mut meter)? {
            Step::Closed => {}
            Step::Open => return Ok(Some((branch.into_model(sig, &arena), 0))),
            Step::Split { world, left, right } => {
                let not_left = arena.negate(left);
                let mut other = branch.clone();
                other.worlds[world].pending.push(right);
                other.worlds[world].pending.push(not_left);
                stack.push(other);
                branch.worlds[world].pending.push(left);
                stack.push(branch);
            }
        }
    }
    Ok(None)
}
