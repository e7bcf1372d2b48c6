use std::collections::BTreeSet;
use std::fmt::Write;

use super::KripkeModel;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz drawing of `m`.
///
/// Each unordered pair of distinct states sharing a block gets one
/// undirected edge labelled with the agents relating them (`R1`, `R1,R2`).
/// Reflexive loops are left out. States in `highlight` are drawn inside a
/// rounded cluster.
pub fn export_dot(m: &KripkeModel, highlight: Option<&BTreeSet<String>>) -> String {
    let mut out = String::from("graph kripke {\n  node [shape=circle];\n");
    for (s, id) in m.states().iter().enumerate() {
        let atoms = m.atom_names(s).join(", ");
        let label = if atoms.is_empty() {
            id.clone()
        } else {
            format!("{id}\\n{atoms}")
        };
        let _ = writeln!(out, "  {} [label={}];", quote(id), quote(&label));
    }
    for a in 0..m.len() {
        for b in a + 1..m.len() {
            let agents: Vec<String> = (1..=m.agents())
                .filter(|&i| m.same_block(i, a, b))
                .map(|i| format!("R{i}"))
                .collect();
            if !agents.is_empty() {
                let _ = writeln!(
                    out,
                    "  {} -- {} [label={}];",
                    quote(&m.states()[a]),
                    quote(&m.states()[b]),
                    quote(&agents.join(","))
                );
            }
        }
    }
    if let Some(keep) = highlight {
        out.push_str("  subgraph cluster_carved {\n    style=rounded;\n    label=\"carved\";\n");
        for id in m.states().iter().filter(|s| keep.contains(*s)) {
            let _ = writeln!(out, "    {};", quote(id));
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}
