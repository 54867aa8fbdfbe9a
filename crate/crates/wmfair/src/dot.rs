use std::fmt::Write;

use wmfair_core::checker::ConnectivityGraph;
use wmfair_core::{Machine, MullerSpec};

use crate::render;

/// Graphviz rendering of a connectivity graph. Vertices are labeled with
/// their automaton state, control state and R-set. Edges implied by
/// transitivity are left out to keep the picture readable.
pub fn connectivity_dot(g: &ConnectivityGraph, spec: &MullerSpec, m: &Machine) -> String {
    let prog = &m.program().source;
    let n = g.vertices.len();
    let mut succ = vec![Vec::new(); n];
    for &(a, b) in &g.edges {
        succ[a as usize].push(b as usize);
    }
    let mut out = String::new();
    let _ = writeln!(out, "digraph connectivity {{");
    let _ = writeln!(out, "  // bound {}", g.bound);
    let _ = writeln!(out, "  node [shape=box, fontname=monospace];");
    for (i, v) in g.vertices.iter().enumerate() {
        let label = format!(
            "{}\\n{}\\nR = {{{}}}",
            spec.states[v.q as usize],
            render::control(&m.control_state(&v.config), prog),
            render::states(spec, g.rsets[i]).join(", ")
        );
        let _ = writeln!(out, "  v{i} [label=\"{}\"];", label.replace('"', "\\\""));
    }
    for (a, targets) in succ.iter().enumerate() {
        for &b in targets {
            // skip a -> b when some other successor c of a reaches b
            let implied = a != b && targets.iter().any(|&c| c != a && c != b && succ[c].binary_search(&b).is_ok());
            if !implied {
                let _ = writeln!(out, "  v{a} -> v{b};");
            }
        }
    }
    out.push_str("}\n");
    out
}
