use super::{NodeKind, ProcId, Program, VarId};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use std::collections::BTreeSet;

/// Procedure call graph with SCCs and the transitive mod sets used for
/// call transparency.
#[derive(Clone, Debug)]
pub struct CallGraph {
    graph: DiGraph<ProcId, ()>,
    /// SCCs in bottom-up order (callees before callers).
    sccs: Vec<Vec<ProcId>>,
    scc_of: Vec<usize>,
    recursive: Vec<bool>,
    modifies: Vec<BTreeSet<VarId>>,
}

impl CallGraph {
    pub fn build(prog: &Program) -> Self {
        let n = prog.procs.len();
        let mut graph = DiGraph::with_capacity(n, 0);
        let idx: Vec<NodeIndex> = (0..n).map(|p| graph.add_node(p)).collect();
        let mut self_loop = vec![false; n];
        for node in &prog.nodes {
            if let NodeKind::Call(q) = node.kind {
                if graph.find_edge(idx[node.proc], idx[q]).is_none() {
                    graph.add_edge(idx[node.proc], idx[q], ());
                }
                if q == node.proc {
                    self_loop[q] = true;
                }
            }
        }
        // tarjan_scc yields SCCs in reverse topological order, i.e. callees first.
        let mut sccs: Vec<Vec<ProcId>> = tarjan_scc(&graph)
            .into_iter()
            .map(|c| {
                let mut ps: Vec<ProcId> = c.into_iter().map(|i| graph[i]).collect();
                ps.sort_unstable();
                ps
            })
            .collect();
        sccs.iter_mut().for_each(|c| c.sort_unstable());
        let mut scc_of = vec![0; n];
        for (i, c) in sccs.iter().enumerate() {
            for &p in c {
                scc_of[p] = i;
            }
        }
        let recursive = (0..n).map(|p| self_loop[p] || sccs[scc_of[p]].len() > 1).collect();

        let mut modifies: Vec<BTreeSet<VarId>> = vec![BTreeSet::new(); n];
        for node in &prog.nodes {
            if let Some(v) = prog.defined_var(node.id) {
                modifies[node.proc].insert(v);
            }
        }
        let mut cg = CallGraph { graph, sccs, scc_of, recursive, modifies };
        // Propagate through callees until stable; SCC order makes one pass
        // enough outside recursion, the loop covers the rest.
        loop {
            let mut changed = false;
            for c in cg.sccs.clone() {
                for p in c {
                    for q in cg.callees(p) {
                        let add: Vec<VarId> = cg.modifies[q].iter().copied().filter(|v| prog.is_global(*v)).collect();
                        for v in add {
                            changed |= cg.modifies[p].insert(v);
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        cg
    }

    pub fn callees(&self, p: ProcId) -> Vec<ProcId> {
        let mut out: Vec<ProcId> = self.graph.neighbors(NodeIndex::new(p)).map(|i| self.graph[i]).collect();
        out.sort_unstable();
        out
    }

    pub fn callers(&self, p: ProcId) -> Vec<ProcId> {
        let mut out: Vec<ProcId> = self
            .graph
            .neighbors_directed(NodeIndex::new(p), petgraph::Direction::Incoming)
            .map(|i| self.graph[i])
            .collect();
        out.sort_unstable();
        out
    }

    pub fn has_edge(&self, p: ProcId, q: ProcId) -> bool {
        self.graph.find_edge(NodeIndex::new(p), NodeIndex::new(q)).is_some()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn sccs(&self) -> &[Vec<ProcId>] {
        &self.sccs
    }

    pub fn scc_of(&self, p: ProcId) -> usize {
        self.scc_of[p]
    }

    pub fn bottom_up(&self) -> Vec<ProcId> {
        self.sccs.iter().flatten().copied().collect()
    }

    pub fn top_down(&self) -> Vec<ProcId> {
        self.sccs.iter().rev().flatten().copied().collect()
    }

    pub fn is_recursive(&self, p: ProcId) -> bool {
        self.recursive[p]
    }

    /// Variables `p` may assign, directly or through callees (callee locals excluded).
    pub fn modifies(&self, p: ProcId) -> &BTreeSet<VarId> {
        &self.modifies[p]
    }
}
