//! MiniIR programs: parsing, CFG lowering, call graphs and DOT output.

pub mod ast;
mod callgraph;
mod cfg;
mod dot;
mod parser;
mod pretty;

pub use callgraph::CallGraph;
pub use dot::emit_dot;
pub use parser::parse_source;
pub use pretty::pretty_print;

use ast::{Atom, BoolExpr, Expr};
use num_bigint::BigInt;
use std::fmt;
use std::ops::Range;

pub type NodeId = u32;
pub type EdgeId = u32;
pub type VarId = u32;
pub type ProcId = usize;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum FrontendError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("call to undeclared procedure `{0}`")]
    UnresolvedCall(String),
    #[error("node n{0} is unreachable from its procedure start")]
    UnreachableNode(NodeId),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    None,
    True,
    False,
    Case(BigInt),
    Default,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::None => Ok(()),
            Label::True => write!(f, "T"),
            Label::False => write!(f, "F"),
            Label::Case(k) => write!(f, "case {k}"),
            Label::Default => write!(f, "default"),
        }
    }
}

/// Branch condition of a two-way node. `Opaque` conditions come from
/// compound tests kept whole under `@atomic_cond` and are never reasoned about.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cond {
    Cmp(Atom<VarId>),
    Opaque(BoolExpr<VarId>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Assign(VarId, Expr<VarId>),
    Read(VarId),
    Print(Expr<VarId>),
    Assert(BoolExpr<VarId>),
    Branch(Cond),
    Switch(VarId, Vec<BigInt>),
    Call(ProcId),
    /// Call to a prototyped library routine; has no effect on any analysis.
    Extern(String),
    Skip,
    Exit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub proc: ProcId,
    pub kind: NodeKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub src: NodeId,
    pub dst: NodeId,
    pub label: Label,
}

impl Edge {
    pub fn is_conditional(&self) -> bool {
        self.label != Label::None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Var {
    pub name: String,
    /// `None` for globals.
    pub proc: Option<ProcId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Procedure {
    pub name: String,
    pub params: Vec<VarId>,
    pub start: NodeId,
    pub exit: NodeId,
    pub nodes: Range<NodeId>,
    pub edges: Range<EdgeId>,
}

impl Procedure {
    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.clone()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.clone()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

/// A lowered program. Node and edge ids are global and dense, 0-based in
/// memory and printed 1-based (`n1`, `e1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub procs: Vec<Procedure>,
    pub entry: ProcId,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub vars: Vec<Var>,
    pub externs: Vec<String>,
    pub atomic_cond: bool,
    succ: Vec<Vec<EdgeId>>,
    pred: Vec<Vec<EdgeId>>,
    source: ast::SourceProgram,
}

impl Program {
    pub fn node(&self, n: NodeId) -> &Node {
        &self.nodes[n as usize]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e as usize]
    }

    pub fn proc(&self, p: ProcId) -> &Procedure {
        &self.procs[p]
    }

    pub fn proc_by_name(&self, name: &str) -> Option<ProcId> {
        self.procs.iter().position(|p| p.name == name)
    }

    pub fn out_edges(&self, n: NodeId) -> &[EdgeId] {
        &self.succ[n as usize]
    }

    pub fn in_edges(&self, n: NodeId) -> &[EdgeId] {
        &self.pred[n as usize]
    }

    /// Edges entering the source node of `e`.
    pub fn pred_edges(&self, e: EdgeId) -> &[EdgeId] {
        self.in_edges(self.edge(e).src)
    }

    /// Edges leaving the target node of `e`.
    pub fn succ_edges(&self, e: EdgeId) -> &[EdgeId] {
        self.out_edges(self.edge(e).dst)
    }

    pub fn proc_of_edge(&self, e: EdgeId) -> ProcId {
        self.node(self.edge(e).src).proc
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.vars[v as usize].name
    }

    pub fn is_global(&self, v: VarId) -> bool {
        self.vars[v as usize].proc.is_none()
    }

    pub fn globals(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.vars.len() as VarId).filter(|v| self.is_global(*v))
    }

    /// Variables visible in `p`: globals and its locals.
    pub fn vars_of(&self, p: ProcId) -> impl Iterator<Item = VarId> + '_ {
        (0..self.vars.len() as VarId).filter(move |v| {
            let owner = self.vars[*v as usize].proc;
            owner.is_none() || owner == Some(p)
        })
    }

    pub fn var_by_name(&self, p: ProcId, name: &str) -> Option<VarId> {
        self.vars
            .iter()
            .position(|v| v.name == name && (v.proc == Some(p) || v.proc.is_none()))
            .map(|i| i as VarId)
    }

    pub fn source(&self) -> &ast::SourceProgram {
        &self.source
    }

    /// Variable written by the node itself (calls excluded).
    pub fn defined_var(&self, n: NodeId) -> Option<VarId> {
        match &self.node(n).kind {
            NodeKind::Assign(v, _) | NodeKind::Read(v) => Some(*v),
            _ => None,
        }
    }

    /// Variables read by the node.
    pub fn used_vars(&self, n: NodeId) -> Vec<VarId> {
        let mut out: Vec<&VarId> = Vec::new();
        match &self.node(n).kind {
            NodeKind::Assign(_, e) | NodeKind::Print(e) => e.vars(&mut out),
            NodeKind::Assert(c) | NodeKind::Branch(Cond::Opaque(c)) => c.vars(&mut out),
            NodeKind::Branch(Cond::Cmp(a)) => out.extend(a.vars()),
            NodeKind::Switch(v, _) => out.push(v),
            _ => {}
        }
        let mut vs: Vec<VarId> = out.into_iter().copied().collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn node_text(&self, n: NodeId) -> String {
        struct Show<'a>(&'a Program, NodeId);
        impl fmt::Display for Show<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let p = self.0;
                let name = |v: &VarId| p.var_name(*v).to_string();
                match &p.node(self.1).kind {
                    NodeKind::Assign(v, e) => {
                        write!(f, "{} = ", p.var_name(*v))?;
                        e.fmt_with(f, &name)
                    }
                    NodeKind::Read(v) => write!(f, "read {}", p.var_name(*v)),
                    NodeKind::Print(e) => {
                        write!(f, "print ")?;
                        e.fmt_with(f, &name)
                    }
                    NodeKind::Assert(c) => {
                        write!(f, "assert(")?;
                        c.fmt_with(f, &name)?;
                        write!(f, ")")
                    }
                    NodeKind::Branch(Cond::Cmp(a)) => {
                        write!(f, "if (")?;
                        a.fmt_with(f, &name)?;
                        write!(f, ")")
                    }
                    NodeKind::Branch(Cond::Opaque(c)) => {
                        write!(f, "if (")?;
                        c.fmt_with(f, &name)?;
                        write!(f, ")")
                    }
                    NodeKind::Switch(v, _) => write!(f, "switch ({})", p.var_name(*v)),
                    NodeKind::Call(q) => write!(f, "{}()", p.proc(*q).name),
                    NodeKind::Extern(s) => write!(f, "{s}()"),
                    NodeKind::Skip => write!(f, "skip"),
                    NodeKind::Exit => write!(f, "exit"),
                }
            }
        }
        Show(self, n).to_string()
    }

    /// Node ids of `p` in reverse post-order from its start.
    pub fn rpo(&self, p: ProcId) -> Vec<NodeId> {
        let proc = self.proc(p);
        let base = proc.nodes.start;
        let mut seen = vec![false; proc.node_count()];
        let mut post = Vec::with_capacity(proc.node_count());
        let mut stack: Vec<(NodeId, usize)> = vec![(proc.start, 0)];
        seen[(proc.start - base) as usize] = true;
        while let Some((n, i)) = stack.pop() {
            let outs = self.out_edges(n);
            if i < outs.len() {
                stack.push((n, i + 1));
                let m = self.edge(outs[i]).dst;
                if !seen[(m - base) as usize] {
                    seen[(m - base) as usize] = true;
                    stack.push((m, 0));
                }
            } else {
                post.push(n);
            }
        }
        post.reverse();
        post
    }

    /// Retreating edges of a DFS from the start node (target still on stack).
    pub fn back_edges(&self, p: ProcId) -> Vec<EdgeId> {
        let proc = self.proc(p);
        let base = proc.nodes.start;
        let n = proc.node_count();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; n];
        let mut out = Vec::new();
        let mut stack: Vec<(NodeId, usize)> = vec![(proc.start, 0)];
        state[(proc.start - base) as usize] = 1;
        while let Some((v, i)) = stack.pop() {
            let outs = self.out_edges(v);
            if i < outs.len() {
                stack.push((v, i + 1));
                let e = outs[i];
                let m = self.edge(e).dst;
                match state[(m - base) as usize] {
                    0 => {
                        state[(m - base) as usize] = 1;
                        stack.push((m, 0));
                    }
                    1 => out.push(e),
                    _ => {}
                }
            } else {
                state[(v - base) as usize] = 2;
            }
        }
        out.sort_unstable();
        out
    }

    /// Loop heads: targets of back edges.
    pub fn loop_heads(&self, p: ProcId) -> Vec<NodeId> {
        let mut heads: Vec<NodeId> = self.back_edges(p).into_iter().map(|e| self.edge(e).dst).collect();
        heads.sort_unstable();
        heads.dedup();
        heads
    }

    pub fn is_acyclic(&self) -> bool {
        (0..self.procs.len()).all(|p| self.back_edges(p).is_empty())
    }

    pub fn has_calls(&self) -> bool {
        self.nodes.iter().any(|n| matches!(n.kind, NodeKind::Call(_)))
    }
}

/// Parses and lowers MiniIR text.
pub fn parse_program(src: &str) -> Result<Program, FrontendError> {
    let source = parse_source(src)?;
    cfg::lower(source)
}

/// Lowers an already parsed syntax tree.
pub fn lower_program(source: ast::SourceProgram) -> Result<Program, FrontendError> {
    cfg::lower(source)
}

pub fn fmt_node(n: NodeId) -> String {
    format!("n{}", n + 1)
}

pub fn fmt_edge(e: EdgeId) -> String {
    format!("e{}", e + 1)
}
