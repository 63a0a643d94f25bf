use super::{Bounds, Matcher, OracleError, Step, EXPLOSION_LIMIT};
use crate::frontend::{CallGraph, EdgeId, NodeId, NodeKind, ProcId, Program};
use crate::lattice::{Analysis, Kind};
use crate::mips::{MipsId, MipsSet, Universe};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Node(NodeId),
    Edge(EdgeId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Filter {
    All,
    MipsFree,
}

/// A path from a root procedure's start, tagged with the first MIPS it contains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub root: ProcId,
    pub steps: Vec<Step>,
    pub mips: Option<MipsId>,
}

impl Path {
    pub fn contains_mips(&self) -> bool {
        self.mips.is_some()
    }

    pub fn edges(&self) -> Vec<EdgeId> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                Step::Edge(e) => Some(*e),
                _ => None,
            })
            .collect()
    }
}

/// Meets over all enumerated paths, for every node and edge at once.
/// `pairs[e]` splits the edge meet by the MIPS prefixes the path ends with.
#[derive(Clone, Debug)]
pub struct Meets<V> {
    pub ins: Vec<V>,
    pub edges: Vec<V>,
    pub pairs: Vec<BTreeMap<MipsSet, V>>,
    pub paths: usize,
}

impl<V: Clone> Meets<V> {
    fn new(prog: &Program, top: V) -> Self {
        Meets {
            ins: vec![top.clone(); prog.nodes.len()],
            edges: vec![top; prog.edges.len()],
            pairs: vec![BTreeMap::new(); prog.edges.len()],
            paths: 0,
        }
    }
}

fn roots(prog: &Program, cg: &CallGraph) -> Vec<ProcId> {
    (0..prog.procs.len()).filter(|&p| p == prog.entry || cg.callers(p).is_empty()).collect()
}

fn is_exit(prog: &Program, n: NodeId) -> bool {
    prog.proc(prog.node(n).proc).exit == n
}

struct Frame<V> {
    call: NodeId,
    at_call: V,
    matcher: Matcher,
}

struct Dfs<'a, A: Analysis> {
    prog: &'a Program,
    u: &'a Universe,
    a: &'a A,
    bounds: Bounds,
    filter: Filter,
    back: Vec<bool>,
    taken: Vec<u32>,
    len: usize,
    visited: usize,
    frames: Vec<Frame<A::Value>>,
    matcher: Matcher,
    tainted: Option<MipsId>,
    steps: Vec<Step>,
    meets: Meets<A::Value>,
    target: Option<Target>,
    found: Vec<Path>,
    root: ProcId,
}

impl<'a, A: Analysis> Dfs<'a, A> {
    fn new(prog: &'a Program, u: &'a Universe, a: &'a A, bounds: Bounds, filter: Filter) -> Self {
        let mut back = vec![false; prog.edges.len()];
        for p in 0..prog.procs.len() {
            for e in prog.back_edges(p) {
                back[e as usize] = true;
            }
        }
        Dfs {
            prog,
            u,
            a,
            bounds,
            filter,
            back,
            taken: vec![0; prog.edges.len()],
            len: 0,
            visited: 0,
            frames: Vec::new(),
            matcher: Matcher::default(),
            tainted: None,
            steps: Vec::new(),
            meets: Meets::new(prog, a.top()),
            target: None,
            found: Vec::new(),
            root: 0,
        }
    }

    fn run(&mut self, roots: &[ProcId]) -> Result<(), OracleError> {
        for &r in roots {
            self.root = r;
            self.bump()?;
            self.node(self.prog.proc(r).start, self.a.boundary(r))?;
        }
        self.meets.paths = self.visited;
        Ok(())
    }

    fn bump(&mut self) -> Result<(), OracleError> {
        self.visited += 1;
        if self.visited > EXPLOSION_LIMIT {
            return Err(OracleError::Explosion(EXPLOSION_LIMIT));
        }
        Ok(())
    }

    fn found(&mut self, t: Target) {
        if self.target == Some(t) {
            self.found.push(Path { root: self.root, steps: self.steps.clone(), mips: self.tainted });
        }
    }

    fn node(&mut self, n: NodeId, v: A::Value) -> Result<(), OracleError> {
        let slot = &mut self.meets.ins[n as usize];
        *slot = self.a.meet(slot, &v);
        self.found(Target::Node(n));
        match self.prog.node(n).kind {
            NodeKind::Call(q) => {
                if self.frames.len() >= self.bounds.max_len {
                    return Ok(());
                }
                let entry = self.a.callee_entry(q, &v);
                let matcher = std::mem::take(&mut self.matcher);
                self.frames.push(Frame { call: n, at_call: v, matcher });
                self.steps.push(Step::Call(n));
                let r = self.node(self.prog.proc(q).start, entry);
                self.steps.pop();
                let f = self.frames.pop().expect("pushed above");
                self.matcher = f.matcher;
                r
            }
            _ if is_exit(self.prog, n) && !self.frames.is_empty() => {
                let out = self.a.transfer(n, &v);
                let f = self.frames.pop().expect("checked non-empty");
                let back = self.a.return_combine(self.prog.node(n).proc, &f.at_call, &out);
                let inner = std::mem::replace(&mut self.matcher, f.matcher.clone());
                self.steps.push(Step::Return(f.call));
                let r = self.edges_from(f.call, &back);
                self.steps.pop();
                self.matcher = inner;
                self.frames.push(f);
                r
            }
            _ => {
                let out = self.a.transfer(n, &v);
                self.edges_from(n, &out)
            }
        }
    }

    fn edges_from(&mut self, n: NodeId, out: &A::Value) -> Result<(), OracleError> {
        if self.len >= self.bounds.max_len {
            return Ok(());
        }
        for &e in self.prog.out_edges(n) {
            let i = e as usize;
            if self.back[i] && self.taken[i] >= self.bounds.back_edge_budget {
                continue;
            }
            let (m, done) = self.matcher.advance(self.u, e);
            if !done.is_empty() && self.filter == Filter::MipsFree {
                continue;
            }
            let v = self.a.edge(e, out);
            if self.a.is_top(&v) {
                continue;
            }
            self.bump()?;
            self.steps.push(Step::Edge(e));
            let prev_taint = self.tainted;
            self.tainted = self.tainted.or(done.first().copied());
            let slot = &mut self.meets.edges[i];
            *slot = self.a.meet(slot, &v);
            if self.filter == Filter::MipsFree {
                let key = m.key();
                let cur = self.meets.pairs[i].remove(&key).unwrap_or_else(|| self.a.top());
                self.meets.pairs[i].insert(key, self.a.meet(&cur, &v));
            }
            self.found(Target::Edge(e));
            let saved = std::mem::replace(&mut self.matcher, m);
            self.taken[i] += 1;
            self.len += 1;
            let r = self.node(self.prog.edge(e).dst, v);
            self.len -= 1;
            self.taken[i] -= 1;
            self.matcher = saved;
            self.tainted = prev_taint;
            self.steps.pop();
            r?;
        }
        Ok(())
    }
}

/// Meet over all bounded paths (or only the MIPS-free ones) from every root
/// procedure, at every node and edge.
pub fn meets<A: Analysis>(
    prog: &Program,
    cg: &CallGraph,
    u: &Universe,
    a: &A,
    bounds: Bounds,
    filter: Filter,
) -> Result<Meets<A::Value>, OracleError> {
    let mut dfs = Dfs::new(prog, u, a, bounds, filter);
    dfs.run(&roots(prog, cg))?;
    Ok(dfs.meets)
}

/// Analysis with a single value, used to enumerate paths without pruning.
struct Reach;

impl Analysis for Reach {
    type Value = ();

    fn name(&self) -> &'static str {
        "reach"
    }
    fn kind(&self) -> Kind {
        Kind::General
    }
    fn top(&self) {}
    fn is_top(&self, _v: &()) -> bool {
        false
    }
    fn meet(&self, _a: &(), _b: &()) {}
    fn leq(&self, _a: &(), _b: &()) -> bool {
        true
    }
    fn boundary(&self, _p: ProcId) {}
    fn transfer(&self, _n: NodeId, _v: &()) {}
    fn call(&self, _n: NodeId, _callee: ProcId, _v: &(), _exit: &()) {}
    fn callee_entry(&self, _callee: ProcId, _at_call: &()) {}
    fn return_combine(&self, _callee: ProcId, _at_call: &(), _exit: &()) {}
    fn show(&self, _prog: &Program, _p: ProcId, _v: &()) -> serde_json::Value {
        serde_json::Value::Null
    }
}

/// Every bounded path reaching `target`, in deterministic DFS order.
pub fn enumerate_paths(
    prog: &Program,
    cg: &CallGraph,
    u: &Universe,
    target: Target,
    bounds: Bounds,
) -> Result<Vec<Path>, OracleError> {
    let mut dfs = Dfs::new(prog, u, &Reach, bounds, Filter::All);
    dfs.target = Some(target);
    dfs.run(&roots(prog, cg))?;
    Ok(dfs.found)
}

enum At<V> {
    Node(NodeId, V),
    Returned(V),
}

/// Walks `steps` from `root`'s boundary, reporting the value after each edge.
fn walk<A: Analysis>(prog: &Program, a: &A, root: ProcId, steps: &[Step], mut visit: impl FnMut(Target, &A::Value)) -> A::Value {
    let start = prog.proc(root).start;
    let mut at = At::Node(start, a.boundary(root));
    if let At::Node(n, v) = &at {
        visit(Target::Node(*n), v);
    }
    let mut stack: Vec<A::Value> = Vec::new();
    for s in steps {
        at = match (s, at) {
            (Step::Edge(e), at) => {
                let out = match at {
                    At::Node(n, v) => a.transfer(n, &v),
                    At::Returned(v) => v,
                };
                let v = a.edge(*e, &out);
                visit(Target::Edge(*e), &v);
                let dst = prog.edge(*e).dst;
                visit(Target::Node(dst), &v);
                At::Node(dst, v)
            }
            (Step::Call(n), At::Node(_, v)) => {
                let NodeKind::Call(q) = prog.node(*n).kind else { panic!("call step at a non-call node") };
                let entry = a.callee_entry(q, &v);
                stack.push(v);
                let s = prog.proc(q).start;
                visit(Target::Node(s), &entry);
                At::Node(s, entry)
            }
            (Step::Return(_), At::Node(x, v)) => {
                let out = a.transfer(x, &v);
                let at_call = stack.pop().expect("return without call");
                At::Returned(a.return_combine(prog.node(x).proc, &at_call, &out))
            }
            _ => panic!("malformed path"),
        };
    }
    match at {
        At::Node(_, v) | At::Returned(v) => v,
    }
}

/// `f_σ(BI)` for one path.
pub fn eval_path<A: Analysis>(prog: &Program, a: &A, path: &Path) -> A::Value {
    walk(prog, a, path.root, &path.steps, |_, _| {})
}

/// Meet of `f_σ(BI)` over the given paths; ⊤ for none.
pub fn path_meet<'p, A: Analysis>(prog: &Program, a: &A, paths: impl IntoIterator<Item = &'p Path>) -> A::Value {
    paths.into_iter().fold(a.top(), |acc, p| a.meet(&acc, &eval_path(prog, a, p)))
}

/// Folds every prefix of the given step sequences (all rooted at `root`)
/// into per-node and per-edge meets.
pub fn trace_meets<'t, A: Analysis>(
    prog: &Program,
    a: &A,
    root: ProcId,
    traces: impl IntoIterator<Item = &'t [Step]>,
) -> Meets<A::Value> {
    let mut m = Meets::new(prog, a.top());
    for t in traces {
        m.paths += 1;
        walk(prog, a, root, t, |at, v| match at {
            Target::Node(n) => m.ins[n as usize] = a.meet(&m.ins[n as usize], v),
            Target::Edge(e) => m.edges[e as usize] = a.meet(&m.edges[e as usize], v),
        });
    }
    m
}
