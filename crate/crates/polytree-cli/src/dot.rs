//! GraphViz DOT rendering of result files. Directed edges draw as arrows,
//! undetermined edges as dashed lines without arrowheads, and each causal
//! basin becomes a cluster. The renderer consumes only validated result
//! files, so the drawing can never disagree with the learned structure.

use std::collections::BTreeMap;

use crate::result::ResultFile;

/// Renders a validated result file as DOT text. Deterministic: basins in
/// file order, nodes by index, edges in file order.
pub fn render(result: &ResultFile) -> String {
    let quoted: Vec<String> = result.variables.iter().map(|n| quote(n)).collect();

    // Each directed edge and each basin node belongs to exactly one basin
    // (validation guarantees the edge partition; components share no nodes).
    let mut edge_basin: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut node_basin: BTreeMap<usize, usize> = BTreeMap::new();
    for (b, basin) in result.basins.iter().enumerate() {
        for &(f, t) in basin {
            edge_basin.insert((f, t), b);
            node_basin.entry(f).or_insert(b);
            node_basin.entry(t).or_insert(b);
        }
    }

    let mut out = String::new();
    out.push_str("digraph polytree {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=ellipse];\n");

    for (b, basin) in result.basins.iter().enumerate() {
        out.push_str(&format!("  subgraph cluster_{b} {{\n"));
        out.push_str(&format!("    label=\"basin {}\";\n", b + 1));
        let mut nodes: Vec<usize> = basin.iter().flat_map(|&(f, t)| [f, t]).collect();
        nodes.sort_unstable();
        nodes.dedup();
        for v in nodes {
            out.push_str(&format!("    {};\n", quoted[v]));
        }
        for entry in &result.edges {
            if let Some((f, t)) = entry.directed_pair() {
                if edge_basin.get(&(f, t)) == Some(&b) {
                    out.push_str(&format!("    {} -> {};\n", quoted[f], quoted[t]));
                }
            }
        }
        out.push_str("  }\n");
    }

    for (v, name) in quoted.iter().enumerate() {
        if !node_basin.contains_key(&v) {
            out.push_str(&format!("  {name};\n"));
        }
    }
    for entry in &result.edges {
        match entry.directed_pair() {
            // Validation ties every directed edge to a basin; the fallback
            // arm keeps the renderer total over hand-built structures.
            Some((f, t)) => {
                if !edge_basin.contains_key(&(f, t)) {
                    out.push_str(&format!("  {} -> {};\n", quoted[f], quoted[t]));
                }
            }
            None => {
                out.push_str(&format!(
                    "  {} -> {} [dir=none, style=dashed];\n",
                    quoted[entry.u], quoted[entry.v]
                ));
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Quotes a DOT identifier, escaping backslashes and double quotes.
fn quote(name: &str) -> String {
    let mut s = String::with_capacity(name.len() + 2);
    s.push('"');
    for ch in name.chars() {
        if ch == '"' || ch == '\\' {
            s.push('\\');
        }
        s.push(ch);
    }
    s.push('"');
    s
}
