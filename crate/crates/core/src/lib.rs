//! A workbench for multi-agent S5 epistemic logic.
//!
//! The crate separates two notions of model:
//!
//! * [`kripke::KripkeModel`]: finite states, one partition of the states per
//!   agent, and an atom valuation. Knowledge is evaluated by quantifying over
//!   the agent's block.
//! * [`epistemic::EpistemicModel`]: a set of worlds, each of which is a
//!   maximal consistent set of formulas. Worlds are presented as states of a
//!   parent Kripke model ("scaffolding"), and the accessibility relations are
//!   induced from what the agents know at each world.
//!
//! An epistemic model is a Kripke model exactly when it is *fully
//! explanatory*: every formula true throughout an agent's accessible worlds is
//! known by that agent. [`epistemic::fully_explanatory`] decides this for
//! carved models, and [`canonical`] does the same for sets of single-agent
//! canonical worlds over a finite alphabet.
//!
//! [`prover`] is a tableau decision procedure for S5 with `n` agents, with a
//! brute-force small-model oracle kept alongside for cross-checking.

pub mod canonical;
pub mod epistemic;
pub mod formula;
pub mod kripke;
pub mod normalform;
pub mod prover;
pub mod relation;
pub mod sample;

pub use formula::{Agent, Formula, Signature};
pub use kripke::KripkeModel;
