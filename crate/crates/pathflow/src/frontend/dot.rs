use super::{fmt_edge, fmt_node, EdgeId, Label, ProcId, Program};
use std::collections::BTreeMap;
use std::fmt::Write;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz text for one procedure. Edge labels read `e<id>[: <annotation>]`.
pub fn emit_dot(prog: &Program, p: ProcId, annotations: &BTreeMap<EdgeId, String>) -> String {
    let proc = prog.proc(p);
    let mut out = String::new();
    writeln!(out, "digraph \"{}\" {{", escape(&proc.name)).unwrap();
    writeln!(out, "  node [shape=box, fontname=\"monospace\"];").unwrap();
    for n in proc.node_ids() {
        writeln!(out, "  {} [label=\"{}: {}\"];", fmt_node(n), fmt_node(n), escape(&prog.node_text(n))).unwrap();
    }
    for e in proc.edge_ids() {
        let edge = prog.edge(e);
        let mut label = fmt_edge(e);
        if edge.label != Label::None {
            write!(label, " ({})", edge.label).unwrap();
        }
        if let Some(a) = annotations.get(&e) {
            write!(label, ": {a}").unwrap();
        }
        writeln!(out, "  {} -> {} [label=\"{}\"];", fmt_node(edge.src), fmt_node(edge.dst), escape(&label)).unwrap();
    }
    out.push_str("}\n");
    out
}
