//! Plain-text model documents.
//!
//! ```text
//! # Bob tosses a coin
//! atoms heads, tails, Q
//! agents 2
//! state w : heads, Q
//! state c : heads
//! agent 1 blocks { {w,c} }
//! agent 2 blocks { {w} {c} }
//! ```
//!
//! Export writes the canonical form: atoms and states in declaration order,
//! block members in state order, blocks ordered by their first member, no
//! comments and single separators.

use thiserror::Error;

use super::{KripkeError, KripkeModel};
use crate::formula::{Signature, SignatureError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DocumentError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unknown atom `{atom}`")]
    UnknownAtom { line: usize, atom: String },
    #[error("line {line}: unknown agent {agent}")]
    UnknownAgent { line: usize, agent: String },
    #[error("line {line}: unknown state `{state}`")]
    UnknownState { line: usize, state: String },
    #[error("missing `{0}` header")]
    MissingHeader(&'static str),
    #[error("document declares no states")]
    NoStates,
    #[error("no blocks given for agent {0}")]
    MissingAgent(usize),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Model(#[from] KripkeError),
}

fn malformed(line: usize, message: impl Into<String>) -> DocumentError {
    DocumentError::Malformed {
        line,
        message: message.into(),
    }
}

fn split_list(text: &str) -> Vec<String> {
    text.split([',', ' ', '\t'])
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_blocks(text: &str, line: usize) -> Result<Vec<Vec<String>>, DocumentError> {
    let inner = text
        .trim()
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| malformed(line, "blocks must be wrapped in `{ ... }`"))?;
    let mut blocks = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('{')
            .ok_or_else(|| malformed(line, format!("expected `{{`, found `{rest}`")))?;
        let close = body
            .find('}')
            .ok_or_else(|| malformed(line, "unterminated block"))?;
        let members = &body[..close];
        if members.contains('{') {
            return Err(malformed(line, "nested block"));
        }
        blocks.push(split_list(members));
        rest = body[close + 1..].trim_start();
    }
    Ok(blocks)
}

/// Reads a model document. The model is validated; partition violations
/// are reported as [`KripkeError::Invalid`].
pub fn import_model(text: &str) -> Result<KripkeModel, DocumentError> {
    let mut atoms: Option<(usize, Vec<String>)> = None;
    let mut agents: Option<usize> = None;
    let mut states: Vec<(String, Vec<String>, usize)> = Vec::new();
    let mut partitions: Vec<(usize, Vec<Vec<String>>, usize)> = Vec::new();

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (keyword, rest) = content
            .split_once(char::is_whitespace)
            .map_or((content, ""), |(k, r)| (k, r.trim()));
        match keyword {
            "atoms" => {
                if atoms.is_some() {
                    return Err(malformed(line, "duplicate `atoms` header"));
                }
                atoms = Some((line, split_list(rest)));
            }
            "agents" => {
                if agents.is_some() {
                    return Err(malformed(line, "duplicate `agents` header"));
                }
                let count = rest
                    .parse::<usize>()
                    .map_err(|_| malformed(line, format!("bad agent count `{rest}`")))?;
                agents = Some(count);
            }
            "state" => {
                let (id, vals) = rest
                    .split_once(':')
                    .ok_or_else(|| malformed(line, "expected `state <id> : <atoms>`"))?;
                let id = id.trim();
                if id.is_empty() || id.contains(char::is_whitespace) {
                    return Err(malformed(line, format!("bad state id `{id}`")));
                }
                states.push((id.to_string(), split_list(vals), line));
            }
            "agent" => {
                let (index, tail) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| malformed(line, "expected `agent <i> blocks { ... }`"))?;
                let tail = tail.trim_start();
                let blocks_text = tail
                    .strip_prefix("blocks")
                    .ok_or_else(|| malformed(line, "expected `blocks` after agent index"))?;
                let agent = index
                    .parse::<usize>()
                    .map_err(|_| DocumentError::UnknownAgent {
                        line,
                        agent: index.to_string(),
                    })?;
                partitions.push((agent, parse_blocks(blocks_text, line)?, line));
            }
            other => return Err(malformed(line, format!("unknown record `{other}`"))),
        }
    }

    let (_, atoms) = atoms.ok_or(DocumentError::MissingHeader("atoms"))?;
    let agents = agents.ok_or(DocumentError::MissingHeader("agents"))?;
    let sig = Signature::new(atoms, agents)?;
    if states.is_empty() {
        return Err(DocumentError::NoStates);
    }
    for (id, vals, line) in &states {
        if states.iter().filter(|(other, _, _)| other == id).count() > 1 {
            return Err(malformed(*line, format!("state `{id}` declared twice")));
        }
        if let Some(atom) = vals.iter().find(|a| !sig.contains_atom(a)) {
            return Err(DocumentError::UnknownAtom {
                line: *line,
                atom: atom.clone(),
            });
        }
    }
    let mut by_agent: Vec<Option<Vec<Vec<String>>>> = vec![None; agents];
    for (agent, blocks, line) in partitions {
        if agent == 0 || agent > agents {
            return Err(DocumentError::UnknownAgent {
                line,
                agent: agent.to_string(),
            });
        }
        if by_agent[agent - 1].is_some() {
            return Err(malformed(
                line,
                format!("blocks for agent {agent} given twice"),
            ));
        }
        for id in blocks.iter().flatten() {
            if !states.iter().any(|(s, _, _)| s == id) {
                return Err(DocumentError::UnknownState {
                    line,
                    state: id.clone(),
                });
            }
        }
        by_agent[agent - 1] = Some(blocks);
    }
    let partitions = by_agent
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.ok_or(DocumentError::MissingAgent(i + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    let states = states.into_iter().map(|(id, vals, _)| (id, vals)).collect();
    Ok(KripkeModel::new(sig, states, partitions)?)
}

/// Writes the canonical document for `m`.
pub fn export_model(m: &KripkeModel) -> String {
    let sig = m.signature();
    let mut out = String::new();
    out.push_str("atoms ");
    out.push_str(&sig.atoms().join(","));
    out.push('\n');
    out.push_str(&format!("agents {}\n", sig.agents()));
    for (s, id) in m.states().iter().enumerate() {
        out.push_str(&format!("state {id} : {}\n", m.atom_names(s).join(",")));
    }
    for agent in 1..=sig.agents() {
        let mut blocks: Vec<Vec<usize>> = m
            .partition(agent)
            .iter()
            .map(|b| {
                let mut b = b.clone();
                b.sort_unstable();
                b.dedup();
                b
            })
            .collect();
        blocks.sort();
        let rendered: Vec<String> = blocks
            .iter()
            .map(|b| {
                let ids: Vec<&str> = b.iter().map(|&s| m.states()[s].as_str()).collect();
                format!("{{{}}}", ids.join(","))
            })
            .collect();
        out.push_str(&format!(
            "agent {agent} blocks {{ {} }}\n",
            rendered.join(" ")
        ));
    }
    out
}
