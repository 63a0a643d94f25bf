//! Worklist fixpoint engine shared by the classic and lifted solvers, the
//! interprocedural driver, and bit-vector procedure summaries.

mod summary;

pub use summary::{compute_summaries, ExitSolver};

use crate::frontend::{CallGraph, EdgeId, NodeId, NodeKind, ProcId, Program};
use crate::lattice::{Analysis, WidenHist};
use crate::par;
use std::collections::{BTreeSet, HashSet};
use std::fmt::Debug;

pub use crate::lattice::WIDEN_AFTER;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("no fixpoint in `{proc}` after {limit} steps")]
    NonTermination { proc: String, limit: usize },
}

pub type BaseOf<E> = <<E as Engine>::A as Analysis>::Value;

/// The value domain a solver iterates over: either the analysis lattice
/// itself or its lifted form.
pub trait Engine: Sync {
    type A: Analysis;
    type Val: Clone + PartialEq + Debug + Send + Sync;
    /// Widening history kept per loop head.
    type Hist: Default + Clone + Debug + Send;

    fn analysis(&self) -> &Self::A;
    fn top(&self) -> Self::Val;
    /// Boundary value of `p` from a plain lattice element.
    fn lift(&self, p: ProcId, v: BaseOf<Self>) -> Self::Val;
    fn fold(&self, v: &Self::Val) -> BaseOf<Self>;
    fn meet_into(&self, acc: &mut Self::Val, v: &Self::Val);
    /// Node flow; `exits` holds each procedure's folded exit value.
    fn node(&self, n: NodeId, v: &Self::Val, exits: &[BaseOf<Self>]) -> Self::Val;
    fn edge(&self, e: EdgeId, v: &Self::Val) -> Self::Val;
    fn widen(&self, hist: &mut Self::Hist, old: &Self::Val, new: &Self::Val) -> Self::Val;
    /// Live (non-⊤) entries in a value.
    fn pairs(&self, v: &Self::Val) -> usize;
    /// Multiplier on the step limit for `p`.
    fn scale(&self, _p: ProcId) -> usize {
        1
    }
}

/// Node flow shared by both engines for a single lattice element.
pub fn base_node<A: Analysis>(a: &A, prog: &Program, n: NodeId, v: &A::Value, exits: &[A::Value]) -> A::Value {
    if a.is_top(v) {
        return v.clone();
    }
    match prog.node(n).kind {
        NodeKind::Call(q) => a.call(n, q, v, &exits[q]),
        _ => a.transfer(n, v),
    }
}

/// The classic solver: values are plain lattice elements.
pub struct Plain<'a, A> {
    pub prog: &'a Program,
    pub analysis: &'a A,
}

impl<'a, A: Analysis> Plain<'a, A> {
    pub fn new(prog: &'a Program, analysis: &'a A) -> Self {
        Plain { prog, analysis }
    }
}

impl<A: Analysis> Engine for Plain<'_, A> {
    type A = A;
    type Val = A::Value;
    type Hist = WidenHist;

    fn analysis(&self) -> &A {
        self.analysis
    }
    fn top(&self) -> A::Value {
        self.analysis.top()
    }
    fn lift(&self, _p: ProcId, v: A::Value) -> A::Value {
        v
    }
    fn fold(&self, v: &A::Value) -> A::Value {
        v.clone()
    }
    fn meet_into(&self, acc: &mut A::Value, v: &A::Value) {
        *acc = self.analysis.meet(acc, v);
    }
    fn node(&self, n: NodeId, v: &A::Value, exits: &[A::Value]) -> A::Value {
        base_node(self.analysis, self.prog, n, v, exits)
    }
    fn edge(&self, e: EdgeId, v: &A::Value) -> A::Value {
        if self.analysis.is_top(v) {
            return v.clone();
        }
        self.analysis.edge(e, v)
    }
    fn widen(&self, hist: &mut WidenHist, old: &A::Value, new: &A::Value) -> A::Value {
        self.analysis.widen(hist, old, new)
    }
    fn pairs(&self, v: &A::Value) -> usize {
        usize::from(!self.analysis.is_top(v))
    }
}

/// Fixpoint of one procedure, indexed relative to its node and edge ranges.
#[derive(Clone, Debug)]
pub struct ProcResult<V> {
    pub ins: Vec<V>,
    pub outs: Vec<V>,
    pub edges: Vec<V>,
    pub steps: usize,
    /// Largest live-pair count seen on any edge during iteration.
    pub max_pairs: usize,
}

pub fn step_limit(prog: &Program, p: ProcId, scale: usize) -> usize {
    (1000 + 200 * prog.proc(p).node_count()) * scale.max(1)
}

/// Solves `p` intraprocedurally from `boundary`, visiting nodes in reverse
/// post-order and widening at loop heads.
pub fn solve_proc<E: Engine>(
    prog: &Program,
    p: ProcId,
    eng: &E,
    boundary: E::Val,
    exits: &[BaseOf<E>],
) -> Result<ProcResult<E::Val>, SolveError> {
    let proc = prog.proc(p);
    let (nb, eb) = (proc.nodes.start, proc.edges.start);
    let rpo = prog.rpo(p);
    let mut order = vec![usize::MAX; proc.node_count()];
    for (i, n) in rpo.iter().enumerate() {
        order[(n - nb) as usize] = i;
    }
    let heads: HashSet<NodeId> = prog.loop_heads(p).into_iter().collect();
    let limit = step_limit(prog, p, eng.scale(p));

    let top = eng.top();
    let mut ins = vec![top.clone(); proc.node_count()];
    let mut outs = vec![top.clone(); proc.node_count()];
    let mut edges = vec![top.clone(); proc.edge_count()];
    let mut visited = vec![false; proc.node_count()];
    let mut hists: Vec<E::Hist> = vec![E::Hist::default(); proc.node_count()];
    let mut work: BTreeSet<usize> = BTreeSet::from([0]);
    let mut steps = 0;
    let mut max_pairs = 0;

    while let Some(i) = work.pop_first() {
        steps += 1;
        if steps > limit {
            return Err(SolveError::NonTermination { proc: proc.name.clone(), limit });
        }
        let n = rpo[i];
        let k = (n - nb) as usize;
        let mut v = if n == proc.start { boundary.clone() } else { top.clone() };
        for &e in prog.in_edges(n) {
            eng.meet_into(&mut v, &edges[(e - eb) as usize]);
        }
        if visited[k] {
            if v == ins[k] {
                continue;
            }
            if heads.contains(&n) {
                v = eng.widen(&mut hists[k], &ins[k], &v);
                if v == ins[k] {
                    continue;
                }
            }
        }
        visited[k] = true;
        outs[k] = eng.node(n, &v, exits);
        ins[k] = v;
        for &e in prog.out_edges(n) {
            let ev = eng.edge(e, &outs[k]);
            max_pairs = max_pairs.max(eng.pairs(&ev));
            let slot = &mut edges[(e - eb) as usize];
            if ev != *slot {
                *slot = ev;
                work.insert(order[(prog.edge(e).dst - nb) as usize]);
            }
        }
    }
    Ok(ProcResult { ins, outs, edges, steps, max_pairs })
}

/// Whole-program fixpoint: per-node and per-edge values indexed by global id.
#[derive(Clone, Debug)]
pub struct Solution<V, B> {
    pub ins: Vec<V>,
    pub outs: Vec<V>,
    /// Value after each edge's flow function.
    pub edges: Vec<V>,
    /// Boundary each procedure was last solved with.
    pub boundaries: Vec<B>,
    /// Folded exit value of each procedure.
    pub exits: Vec<B>,
    pub steps: usize,
    pub rounds: usize,
    pub max_pairs: Vec<usize>,
}

impl<V, B> Solution<V, B> {
    pub fn in_(&self, n: NodeId) -> &V {
        &self.ins[n as usize]
    }
    pub fn out(&self, n: NodeId) -> &V {
        &self.outs[n as usize]
    }
    pub fn edge(&self, e: EdgeId) -> &V {
        &self.edges[e as usize]
    }
}

/// Classic MFP solution.
pub type MfpSolution<V> = Solution<V, V>;

fn round_limit(prog: &Program) -> usize {
    200 * (prog.procs.len() + 1)
}

/// Context-insensitive interprocedural fixpoint. Each round solves every
/// procedure whose boundary or callee exits changed, all against the same
/// snapshot, then merges boundaries from call sites.
pub fn solve_program<E: Engine>(
    prog: &Program,
    cg: &CallGraph,
    eng: &E,
) -> Result<Solution<E::Val, BaseOf<E>>, SolveError> {
    let a = eng.analysis();
    let np = prog.procs.len();
    let top = eng.top();
    let base: Vec<Option<BaseOf<E>>> = (0..np)
        .map(|p| (p == prog.entry || cg.callers(p).is_empty()).then(|| a.boundary(p)))
        .collect();
    let mut sites: Vec<Vec<NodeId>> = vec![Vec::new(); np];
    for node in &prog.nodes {
        if let NodeKind::Call(q) = node.kind {
            sites[q].push(node.id);
        }
    }
    let rank: Vec<usize> = {
        let mut r = vec![0; np];
        for (i, p) in cg.top_down().into_iter().enumerate() {
            r[p] = i;
        }
        r
    };

    let mut sol = Solution {
        ins: vec![top.clone(); prog.nodes.len()],
        outs: vec![top.clone(); prog.nodes.len()],
        edges: vec![top.clone(); prog.edges.len()],
        boundaries: base.iter().map(|b| b.clone().unwrap_or_else(|| a.top())).collect(),
        exits: vec![a.top(); np],
        steps: 0,
        rounds: 0,
        max_pairs: vec![0; np],
    };
    let mut bhist = vec![WidenHist::new(); np];
    let mut ehist = vec![WidenHist::new(); np];
    let mut dirty: BTreeSet<(usize, ProcId)> =
        (0..np).filter(|p| base[*p].is_some()).map(|p| (rank[p], p)).collect();
    let limit = round_limit(prog);

    while !dirty.is_empty() {
        sol.rounds += 1;
        if sol.rounds > limit {
            return Err(SolveError::NonTermination { proc: "<program>".into(), limit });
        }
        let batch: Vec<ProcId> = std::mem::take(&mut dirty).into_iter().map(|(_, p)| p).collect();
        let results = par::map(&batch, |&p| {
            solve_proc(prog, p, eng, eng.lift(p, sol.boundaries[p].clone()), &sol.exits)
        });
        let mut touched: BTreeSet<ProcId> = BTreeSet::new();
        for (&p, r) in batch.iter().zip(results) {
            let r = r?;
            let proc = prog.proc(p);
            let (nb, eb) = (proc.nodes.start as usize, proc.edges.start as usize);
            sol.steps += r.steps;
            sol.max_pairs[p] = sol.max_pairs[p].max(r.max_pairs);
            for (k, (i, o)) in r.ins.into_iter().zip(r.outs).enumerate() {
                sol.ins[nb + k] = i;
                sol.outs[nb + k] = o;
            }
            for (k, v) in r.edges.into_iter().enumerate() {
                sol.edges[eb + k] = v;
            }
            for n in proc.node_ids() {
                if let NodeKind::Call(q) = prog.node(n).kind {
                    touched.insert(q);
                }
            }
            if a.uses_callee_exit() {
                let mut x = eng.fold(&sol.outs[proc.exit as usize]);
                if x != sol.exits[p] {
                    x = a.widen(&mut ehist[p], &sol.exits[p], &x);
                }
                if x != sol.exits[p] {
                    sol.exits[p] = x;
                    for c in cg.callers(p) {
                        dirty.insert((rank[c], c));
                    }
                }
            }
        }
        for q in touched {
            let mut b = base[q].clone().unwrap_or_else(|| a.top());
            for &n in &sites[q] {
                let at = eng.fold(&sol.ins[n as usize]);
                b = a.meet(&b, &a.callee_entry(q, &at));
            }
            if b != sol.boundaries[q] {
                b = a.widen(&mut bhist[q], &sol.boundaries[q], &b);
                if b != sol.boundaries[q] {
                    sol.boundaries[q] = b;
                    dirty.insert((rank[q], q));
                }
            }
        }
    }
    Ok(sol)
}

/// MFP over the whole program.
pub fn solve_mfp<A: Analysis>(prog: &Program, cg: &CallGraph, a: &A) -> Result<MfpSolution<A::Value>, SolveError> {
    solve_program(prog, cg, &Plain::new(prog, a))
}

/// Solves procedures in isolation with the classic engine; used for summaries.
pub struct MfpExits;

impl ExitSolver for MfpExits {
    fn exit_value<A: Analysis>(&self, prog: &Program, p: ProcId, a: &A) -> Result<A::Value, SolveError> {
        let eng = Plain::new(prog, a);
        let exits = vec![a.top(); prog.procs.len()];
        let r = solve_proc(prog, p, &eng, a.boundary(p), &exits)?;
        let proc = prog.proc(p);
        Ok(r.outs[(proc.exit - proc.nodes.start) as usize].clone())
    }
}

#[cfg(test)]
mod tests;
