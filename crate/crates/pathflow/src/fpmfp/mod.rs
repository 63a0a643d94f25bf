//! Feasible-path MFP: values are sparse maps from MIPS sets to lattice
//! elements, blocked at MIPS end edges and folded into the final solution.

mod lifted;

pub use lifted::Lifted;

use crate::frontend::{CallGraph, EdgeId, NodeId, ProcId, Program};
use crate::lattice::{Analysis, WidenHist};
use crate::mfp::{base_node, solve_proc, solve_program, Engine, ExitSolver, SolveError, Solution};
use crate::mips::{MipsId, MipsSet, Universe};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Which of the three pair-space optimizations are active.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OptConfig {
    /// Merge keys with equal end-edge unions.
    pub opt1: bool,
    /// Merge equal values along the contains-suffix-of relation.
    pub opt2: bool,
    /// Drop ⊤ pairs instead of storing them.
    pub opt3: bool,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig::all()
    }
}

impl OptConfig {
    pub fn all() -> Self {
        OptConfig { opt1: true, opt2: true, opt3: true }
    }

    pub fn none() -> Self {
        OptConfig { opt1: false, opt2: false, opt3: false }
    }

    /// Parses `"1,2,3"`, any subset of it, or `"none"`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let mut o = OptConfig::none();
        if s.trim() == "none" {
            return Ok(o);
        }
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "1" => o.opt1 = true,
                "2" => o.opt2 = true,
                "3" => o.opt3 = true,
                other => return Err(format!("unknown optimization `{other}` (expected 1, 2, 3 or none)")),
            }
        }
        Ok(o)
    }

    pub fn label(&self) -> String {
        let on: Vec<&str> = [(self.opt1, "1"), (self.opt2, "2"), (self.opt3, "3")]
            .into_iter()
            .filter_map(|(b, s)| b.then_some(s))
            .collect();
        if on.is_empty() {
            "none".into()
        } else {
            on.join(",")
        }
    }
}

/// ⊓ over all stored values; ⊤ when there are none.
pub fn fold<A: Analysis>(a: &A, v: &Lifted<A::Value>) -> A::Value {
    a.meet_all(v.values())
}

/// Keywise meet, absent keys standing for ⊤.
pub fn lifted_meet<A: Analysis>(a: &A, x: &Lifted<A::Value>, y: &Lifted<A::Value>) -> Lifted<A::Value> {
    let mut out = x.clone();
    meet_into(a, &mut out, y);
    out
}

fn meet_into<A: Analysis>(a: &A, acc: &mut Lifted<A::Value>, y: &Lifted<A::Value>) {
    for (m, d) in y.iter() {
        acc.meet_at(a, m.clone(), d);
    }
}

/// Pointwise node flow.
pub fn lifted_transfer<A: Analysis>(
    a: &A,
    prog: &Program,
    n: NodeId,
    v: &Lifted<A::Value>,
    exits: &[A::Value],
    opts: OptConfig,
) -> Lifted<A::Value> {
    let mut out = Lifted::new();
    for (m, d) in v.iter() {
        let d = base_node(a, prog, n, d, exits);
        if !a.is_top(&d) || !opts.opt3 {
            out.insert_raw(m.clone(), d);
        }
    }
    out
}

/// Edge flow: extend each key along `e`, block keys containing a MIPS that
/// ends at `e`, apply the base edge function, then normalize.
pub fn lifted_edge_flow<A: Analysis>(
    a: &A,
    u: &Universe,
    opts: OptConfig,
    e: EdgeId,
    v: &Lifted<A::Value>,
) -> Lifted<A::Value> {
    let mut out: Lifted<A::Value> = Lifted::new();
    let mut blocked: BTreeSet<MipsSet> = BTreeSet::new();
    for (m, d) in v.iter() {
        if a.is_top(d) {
            continue;
        }
        let m2 = u.ext(e, m);
        if u.endof(&m2, e) {
            blocked.insert(m2);
            continue;
        }
        let d2 = a.edge(e, d);
        if a.is_top(&d2) {
            if !opts.opt3 {
                out.meet_at(a, m2, &d2);
            }
            continue;
        }
        out.meet_at(a, m2, &d2);
    }
    if opts.opt1 {
        out = normalize_opt1(a, u, &out);
    }
    if opts.opt2 {
        out = normalize_opt2(a, u, e, &out);
    }
    if opts.opt3 {
        out.drop_top(a);
    } else {
        for m in blocked {
            out.meet_at(a, m, &a.top());
        }
    }
    out
}

/// Merges pairs whose keys consist of start-edge-property MIPS and have the
/// same union of end edges.
pub fn normalize_opt1<A: Analysis>(a: &A, u: &Universe, v: &Lifted<A::Value>) -> Lifted<A::Value> {
    let mut groups: BTreeMap<BTreeSet<EdgeId>, Vec<(MipsSet, A::Value)>> = BTreeMap::new();
    let mut out = Lifted::new();
    for (m, d) in v.iter() {
        if !m.is_empty() && !a.is_top(d) && u.all_satisfy_p(m) {
            groups.entry(u.end_edges(m)).or_default().push((m.clone(), d.clone()));
        } else {
            out.insert_raw(m.clone(), d.clone());
        }
    }
    for (_, group) in groups {
        let mut key: MipsSet = group.iter().flat_map(|(m, _)| m.iter().copied()).collect();
        key.sort_unstable();
        key.dedup();
        let d = a.meet_all(group.iter().map(|(_, d)| d));
        out.meet_at(a, key, &d);
    }
    out
}

/// `µ1` contains the suffix of `µ2` from `e`.
fn cso_holds(u: &Universe, e: EdgeId, mu1: MipsId, mu2: MipsId) -> bool {
    u.cso(e, mu1).is_ok_and(|s| s.contains(&mu2))
}

/// Repeatedly replaces two keys holding the same value by one key made of
/// the MIPS that contain a suffix of some MIPS on the other side.
pub fn normalize_opt2<A: Analysis>(a: &A, u: &Universe, e: EdgeId, v: &Lifted<A::Value>) -> Lifted<A::Value> {
    let mut out = v.clone();
    loop {
        let entries: Vec<(&MipsSet, &A::Value)> = out.iter().filter(|(_, d)| !a.is_top(d)).collect();
        let mut found = None;
        'scan: for i in 0..entries.len() {
            for j in i + 1..entries.len() {
                if entries[i].1 == entries[j].1 {
                    found = Some((entries[i].0.clone(), entries[j].0.clone(), entries[i].1.clone()));
                    break 'scan;
                }
            }
        }
        let Some((m1, m2, d)) = found else { break };
        let mut m3: MipsSet = m1
            .iter()
            .copied()
            .filter(|x| m2.iter().any(|y| cso_holds(u, e, *x, *y)))
            .chain(m2.iter().copied().filter(|y| m1.iter().any(|x| cso_holds(u, e, *y, *x))))
            .collect();
        m3.sort_unstable();
        m3.dedup();
        out.remove(&m1);
        out.remove(&m2);
        out.meet_at(a, m3, &d);
    }
    out
}

/// The lifted solver.
pub struct LiftedEngine<'a, A> {
    pub prog: &'a Program,
    pub analysis: &'a A,
    pub universe: &'a Universe,
    pub opts: OptConfig,
}

impl<'a, A: Analysis> LiftedEngine<'a, A> {
    pub fn new(prog: &'a Program, analysis: &'a A, universe: &'a Universe, opts: OptConfig) -> Self {
        LiftedEngine { prog, analysis, universe, opts }
    }
}

impl<A: Analysis> Engine for LiftedEngine<'_, A> {
    type A = A;
    type Val = Lifted<A::Value>;
    type Hist = BTreeMap<MipsSet, WidenHist>;

    fn analysis(&self) -> &A {
        self.analysis
    }
    fn top(&self) -> Self::Val {
        Lifted::new()
    }
    fn lift(&self, _p: ProcId, v: A::Value) -> Self::Val {
        let mut out = Lifted::new();
        if !self.analysis.is_top(&v) {
            out.insert_raw(MipsSet::new(), v);
        }
        out
    }
    fn fold(&self, v: &Self::Val) -> A::Value {
        fold(self.analysis, v)
    }
    fn meet_into(&self, acc: &mut Self::Val, v: &Self::Val) {
        meet_into(self.analysis, acc, v);
    }
    fn node(&self, n: NodeId, v: &Self::Val, exits: &[A::Value]) -> Self::Val {
        lifted_transfer(self.analysis, self.prog, n, v, exits, self.opts)
    }
    fn edge(&self, e: EdgeId, v: &Self::Val) -> Self::Val {
        lifted_edge_flow(self.analysis, self.universe, self.opts, e, v)
    }
    fn widen(&self, hist: &mut Self::Hist, old: &Self::Val, new: &Self::Val) -> Self::Val {
        let mut out = Lifted::new();
        for (m, d) in new.iter() {
            let w = match old.get(m) {
                Some(o) if !self.analysis.is_top(o) => self.analysis.widen(hist.entry(m.clone()).or_default(), o, d),
                _ => d.clone(),
            };
            out.insert_raw(m.clone(), w);
        }
        out
    }
    fn pairs(&self, v: &Self::Val) -> usize {
        v.live(self.analysis)
    }
    fn scale(&self, p: ProcId) -> usize {
        self.universe.of_proc(p).len() + 1
    }
}

pub type FpmfpSolution<V> = Solution<Lifted<V>, V>;

pub fn solve_fpmfp<A: Analysis>(
    prog: &Program,
    cg: &CallGraph,
    a: &A,
    u: &Universe,
    opts: OptConfig,
) -> Result<FpmfpSolution<A::Value>, SolveError> {
    solve_program(prog, cg, &LiftedEngine::new(prog, a, u, opts))
}

/// Folded In and Out of every node.
pub fn folded<A: Analysis>(a: &A, sol: &FpmfpSolution<A::Value>) -> (Vec<A::Value>, Vec<A::Value>) {
    (sol.ins.iter().map(|v| fold(a, v)).collect(), sol.outs.iter().map(|v| fold(a, v)).collect())
}

/// Summaries computed with the lifted solver: pairs through a MIPS of the
/// summarized procedure are blocked before they reach its exit.
pub struct LiftedExits<'a> {
    pub universe: &'a Universe,
    pub opts: OptConfig,
}

impl ExitSolver for LiftedExits<'_> {
    fn exit_value<A: Analysis>(&self, prog: &Program, p: ProcId, a: &A) -> Result<A::Value, SolveError> {
        let eng = LiftedEngine::new(prog, a, self.universe, self.opts);
        let exits = vec![a.top(); prog.procs.len()];
        let r = solve_proc(prog, p, &eng, eng.lift(p, a.boundary(p)), &exits)?;
        let proc = prog.proc(p);
        Ok(fold(a, &r.outs[(proc.exit - proc.nodes.start) as usize]))
    }
}

/// Live-pair statistics over the final edge values.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PairStats {
    pub max_live: usize,
    pub avg_live: f64,
    /// Largest count seen at any point during iteration.
    pub max_seen: usize,
    /// Max over procedures of `max_live - (|U_p| + 1)`; positive means the bound broke.
    pub worst_slack: i64,
}

pub fn pair_stats<A: Analysis>(prog: &Program, a: &A, u: &Universe, sol: &FpmfpSolution<A::Value>) -> PairStats {
    let counts: Vec<usize> = sol.edges.iter().map(|v| v.live(a)).collect();
    let mut worst = i64::MIN;
    for (p, proc) in prog.procs.iter().enumerate() {
        let bound = u.of_proc(p).len() as i64 + 1;
        let seen = proc.edge_ids().map(|e| counts[e as usize]).max().unwrap_or(0).max(sol.max_pairs[p]);
        worst = worst.max(seen as i64 - bound);
    }
    PairStats {
        max_live: counts.iter().copied().max().unwrap_or(0),
        avg_live: if counts.is_empty() { 0.0 } else { counts.iter().sum::<usize>() as f64 / counts.len() as f64 },
        max_seen: sol.max_pairs.iter().copied().max().unwrap_or(0),
        worst_slack: if prog.procs.is_empty() { 0 } else { worst },
    }
}
