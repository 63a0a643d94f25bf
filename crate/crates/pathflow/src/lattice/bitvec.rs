//! Bit-vector frameworks: reaching definitions, must-defined variables, and
//! the kill/gen summary problems derived from them.

use super::{Analysis, Kind};
use crate::frontend::{fmt_node, NodeId, ProcId, Program, VarId};
use fixedbitset::FixedBitSet;
use std::collections::HashMap;

/// A bit-vector value with a distinguished unreached element. The plain
/// set lattice cannot be used directly because the empty set is a real
/// value for union problems yet would also be their top.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BitVal {
    Top,
    Set(FixedBitSet),
}

impl BitVal {
    pub fn set(&self) -> Option<&FixedBitSet> {
        match self {
            BitVal::Top => None,
            BitVal::Set(s) => Some(s),
        }
    }

    pub fn contains(&self, f: usize) -> bool {
        self.set().is_some_and(|s| s.contains(f))
    }

    fn map(&self, f: impl FnOnce(&mut FixedBitSet)) -> BitVal {
        match self {
            BitVal::Top => BitVal::Top,
            BitVal::Set(s) => {
                let mut s = s.clone();
                f(&mut s);
                BitVal::Set(s)
            }
        }
    }

    fn combine(a: &BitVal, b: &BitVal, union: bool) -> BitVal {
        match (a, b) {
            (BitVal::Top, x) | (x, BitVal::Top) => x.clone(),
            (BitVal::Set(x), BitVal::Set(y)) => {
                let mut s = x.clone();
                if union {
                    s.union_with(y);
                } else {
                    s.intersect_with(y);
                }
                BitVal::Set(s)
            }
        }
    }

    /// Order of a union lattice when `union`, of an intersection lattice otherwise.
    fn leq(a: &BitVal, b: &BitVal, union: bool) -> bool {
        match (a, b) {
            (_, BitVal::Top) => true,
            (BitVal::Top, _) => false,
            (BitVal::Set(x), BitVal::Set(y)) => {
                if union {
                    x.is_superset(y)
                } else {
                    x.is_subset(y)
                }
            }
        }
    }
}

/// Constant GEN/KILL description of a bit-vector problem.
pub trait BitVectorProblem: Send + Sync {
    fn name(&self) -> &'static str;
    /// Meet is union (may problem) rather than intersection (must problem).
    fn union(&self) -> bool;
    fn width(&self) -> usize;
    fn gen(&self, n: NodeId) -> &FixedBitSet;
    fn kill(&self, n: NodeId) -> &FixedBitSet;
    /// Facts that cross procedure boundaries.
    fn global_facts(&self) -> &FixedBitSet;
    /// Facts holding on entry to `p` regardless of the caller.
    fn entry_facts(&self, p: ProcId) -> FixedBitSet;
    fn fact_label(&self, f: usize) -> &str;
}

fn empty_sets(n: usize, width: usize) -> Vec<FixedBitSet> {
    vec![FixedBitSet::with_capacity(width); n]
}

/// Facts are definition sites (assignments and reads).
#[derive(Clone, Debug)]
pub struct ReachingDefs {
    gen: Vec<FixedBitSet>,
    kill: Vec<FixedBitSet>,
    globals: FixedBitSet,
    labels: Vec<String>,
    fact_of: HashMap<NodeId, usize>,
    defs: Vec<(VarId, NodeId)>,
    width: usize,
}

impl ReachingDefs {
    pub fn new(prog: &Program) -> Self {
        let defs: Vec<(VarId, NodeId)> =
            prog.nodes.iter().filter_map(|n| prog.defined_var(n.id).map(|v| (v, n.id))).collect();
        let width = defs.len();
        let fact_of: HashMap<NodeId, usize> = defs.iter().enumerate().map(|(i, (_, n))| (*n, i)).collect();
        let mut by_var: HashMap<VarId, FixedBitSet> = HashMap::new();
        for (i, (v, _)) in defs.iter().enumerate() {
            by_var.entry(*v).or_insert_with(|| FixedBitSet::with_capacity(width)).insert(i);
        }
        let mut gen = empty_sets(prog.nodes.len(), width);
        let mut kill = empty_sets(prog.nodes.len(), width);
        let mut globals = FixedBitSet::with_capacity(width);
        let mut labels = Vec::with_capacity(width);
        for (i, (v, n)) in defs.iter().enumerate() {
            gen[*n as usize].insert(i);
            let mut k = by_var[v].clone();
            k.set(i, false);
            kill[*n as usize] = k;
            if prog.is_global(*v) {
                globals.insert(i);
            }
            labels.push(format!("{}@{}", prog.var_name(*v), fmt_node(*n)));
        }
        ReachingDefs { gen, kill, globals, labels, fact_of, defs, width }
    }

    pub fn fact_of_node(&self, n: NodeId) -> Option<usize> {
        self.fact_of.get(&n).copied()
    }

    /// `(variable, defining node)` of a fact.
    pub fn def(&self, f: usize) -> (VarId, NodeId) {
        self.defs[f]
    }
}

impl BitVectorProblem for ReachingDefs {
    fn name(&self) -> &'static str {
        "rd"
    }
    fn union(&self) -> bool {
        true
    }
    fn width(&self) -> usize {
        self.width
    }
    fn gen(&self, n: NodeId) -> &FixedBitSet {
        &self.gen[n as usize]
    }
    fn kill(&self, n: NodeId) -> &FixedBitSet {
        &self.kill[n as usize]
    }
    fn global_facts(&self) -> &FixedBitSet {
        &self.globals
    }
    fn entry_facts(&self, _p: ProcId) -> FixedBitSet {
        FixedBitSet::with_capacity(self.width)
    }
    fn fact_label(&self, f: usize) -> &str {
        &self.labels[f]
    }
}

/// Facts are variables; a fact holds when the variable is assigned on every path.
#[derive(Clone, Debug)]
pub struct MustDefined {
    gen: Vec<FixedBitSet>,
    kill: FixedBitSet,
    globals: FixedBitSet,
    params: Vec<FixedBitSet>,
    labels: Vec<String>,
    width: usize,
}

impl MustDefined {
    pub fn new(prog: &Program) -> Self {
        let width = prog.vars.len();
        let mut gen = empty_sets(prog.nodes.len(), width);
        for n in &prog.nodes {
            if let Some(v) = prog.defined_var(n.id) {
                gen[n.id as usize].insert(v as usize);
            }
        }
        let mut globals = FixedBitSet::with_capacity(width);
        for g in prog.globals() {
            globals.insert(g as usize);
        }
        let params = prog
            .procs
            .iter()
            .map(|p| {
                let mut s = FixedBitSet::with_capacity(width);
                p.params.iter().for_each(|v| s.insert(*v as usize));
                s
            })
            .collect();
        let labels = prog.vars.iter().map(|v| v.name.clone()).collect();
        MustDefined { gen, kill: FixedBitSet::with_capacity(width), globals, params, labels, width }
    }
}

impl BitVectorProblem for MustDefined {
    fn name(&self) -> &'static str {
        "uninit"
    }
    fn union(&self) -> bool {
        false
    }
    fn width(&self) -> usize {
        self.width
    }
    fn gen(&self, n: NodeId) -> &FixedBitSet {
        &self.gen[n as usize]
    }
    fn kill(&self, _n: NodeId) -> &FixedBitSet {
        &self.kill
    }
    fn global_facts(&self) -> &FixedBitSet {
        &self.globals
    }
    fn entry_facts(&self, p: ProcId) -> FixedBitSet {
        self.params[p].clone()
    }
    fn fact_label(&self, f: usize) -> &str {
        &self.labels[f]
    }
}

/// Per-procedure KSUM/GSUM, restricted to global facts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Summary {
    pub kill: FixedBitSet,
    pub gen: FixedBitSet,
}

/// A bit-vector problem lifted to an [`Analysis`], with calls substituted
/// by summaries. A missing summary means the callee never returns.
#[derive(Clone, Debug)]
pub struct BitVector<P> {
    pub problem: P,
    pub summaries: Vec<Option<Summary>>,
}

impl<P: BitVectorProblem> BitVector<P> {
    pub fn new(problem: P, summaries: Vec<Option<Summary>>) -> Self {
        BitVector { problem, summaries }
    }

    pub fn facts(&self, v: &BitVal) -> Vec<usize> {
        v.set().map(|s| s.ones().collect()).unwrap_or_default()
    }
}

fn show_facts<P: BitVectorProblem>(p: &P, v: &BitVal) -> serde_json::Value {
    match v {
        BitVal::Top => serde_json::Value::String("top".into()),
        BitVal::Set(s) => {
            let mut labels: Vec<&str> = s.ones().map(|f| p.fact_label(f)).collect();
            labels.sort_unstable();
            serde_json::json!(labels)
        }
    }
}

impl<P: BitVectorProblem> Analysis for BitVector<P> {
    type Value = BitVal;

    fn name(&self) -> &'static str {
        self.problem.name()
    }

    fn kind(&self) -> Kind {
        if self.problem.union() {
            Kind::BitVectorUnion
        } else {
            Kind::BitVectorIntersection
        }
    }

    fn top(&self) -> BitVal {
        BitVal::Top
    }

    fn is_top(&self, v: &BitVal) -> bool {
        *v == BitVal::Top
    }

    fn meet(&self, a: &BitVal, b: &BitVal) -> BitVal {
        BitVal::combine(a, b, self.problem.union())
    }

    fn leq(&self, a: &BitVal, b: &BitVal) -> bool {
        BitVal::leq(a, b, self.problem.union())
    }

    fn boundary(&self, p: ProcId) -> BitVal {
        BitVal::Set(self.problem.entry_facts(p))
    }

    fn transfer(&self, n: NodeId, v: &BitVal) -> BitVal {
        v.map(|s| {
            s.difference_with(self.problem.kill(n));
            s.union_with(self.problem.gen(n));
        })
    }

    fn call(&self, _n: NodeId, callee: ProcId, v: &BitVal, _exit: &BitVal) -> BitVal {
        match &self.summaries[callee] {
            None => BitVal::Top,
            Some(sum) => v.map(|s| {
                s.difference_with(&sum.kill);
                s.union_with(&sum.gen);
            }),
        }
    }

    fn callee_entry(&self, callee: ProcId, at_call: &BitVal) -> BitVal {
        at_call.map(|s| {
            s.intersect_with(self.problem.global_facts());
            s.union_with(&self.problem.entry_facts(callee));
        })
    }

    fn return_combine(&self, _callee: ProcId, at_call: &BitVal, exit: &BitVal) -> BitVal {
        let (BitVal::Set(a), BitVal::Set(x)) = (at_call, exit) else { return BitVal::Top };
        let g = self.problem.global_facts();
        let mut s = a.clone();
        s.difference_with(g);
        let mut from_exit = x.clone();
        from_exit.intersect_with(g);
        s.union_with(&from_exit);
        BitVal::Set(s)
    }

    fn show(&self, _prog: &Program, _p: ProcId, v: &BitVal) -> serde_json::Value {
        show_facts(&self.problem, v)
    }
}

/// Kill summary problem: which global facts every path through a procedure kills.
pub struct KillProblem<'a, P> {
    pub problem: &'a P,
    pub summaries: &'a [Option<Summary>],
}

impl<P: BitVectorProblem> Analysis for KillProblem<'_, P> {
    type Value = BitVal;

    fn name(&self) -> &'static str {
        "kill-summary"
    }
    fn kind(&self) -> Kind {
        Kind::BitVectorIntersection
    }
    fn top(&self) -> BitVal {
        BitVal::Top
    }
    fn is_top(&self, v: &BitVal) -> bool {
        *v == BitVal::Top
    }
    fn meet(&self, a: &BitVal, b: &BitVal) -> BitVal {
        BitVal::combine(a, b, false)
    }
    fn leq(&self, a: &BitVal, b: &BitVal) -> bool {
        BitVal::leq(a, b, false)
    }
    fn boundary(&self, _p: ProcId) -> BitVal {
        BitVal::Set(FixedBitSet::with_capacity(self.problem.width()))
    }
    fn transfer(&self, n: NodeId, v: &BitVal) -> BitVal {
        v.map(|s| s.union_with(self.problem.kill(n)))
    }
    fn call(&self, _n: NodeId, callee: ProcId, v: &BitVal, _exit: &BitVal) -> BitVal {
        match &self.summaries[callee] {
            None => BitVal::Top,
            Some(sum) => v.map(|s| s.union_with(&sum.kill)),
        }
    }
    fn callee_entry(&self, _callee: ProcId, _at_call: &BitVal) -> BitVal {
        self.boundary(0)
    }
    fn return_combine(&self, _callee: ProcId, at_call: &BitVal, exit: &BitVal) -> BitVal {
        let (BitVal::Set(_), BitVal::Set(x)) = (at_call, exit) else { return BitVal::Top };
        let mut killed = x.clone();
        killed.intersect_with(self.problem.global_facts());
        at_call.map(|s| s.union_with(&killed))
    }
    fn show(&self, _prog: &Program, _p: ProcId, v: &BitVal) -> serde_json::Value {
        show_facts(self.problem, v)
    }
}

/// Gen summary problem: which global facts a procedure generates at its exit.
/// Uses the client's own meet (union for may problems, intersection for must).
pub struct GenProblem<'a, P> {
    pub problem: &'a P,
    pub summaries: &'a [Option<Summary>],
}

impl<P: BitVectorProblem> Analysis for GenProblem<'_, P> {
    type Value = BitVal;

    fn name(&self) -> &'static str {
        "gen-summary"
    }
    fn kind(&self) -> Kind {
        if self.problem.union() {
            Kind::BitVectorUnion
        } else {
            Kind::BitVectorIntersection
        }
    }
    fn top(&self) -> BitVal {
        BitVal::Top
    }
    fn is_top(&self, v: &BitVal) -> bool {
        *v == BitVal::Top
    }
    fn meet(&self, a: &BitVal, b: &BitVal) -> BitVal {
        BitVal::combine(a, b, self.problem.union())
    }
    fn leq(&self, a: &BitVal, b: &BitVal) -> bool {
        BitVal::leq(a, b, self.problem.union())
    }
    fn boundary(&self, _p: ProcId) -> BitVal {
        BitVal::Set(FixedBitSet::with_capacity(self.problem.width()))
    }
    fn transfer(&self, n: NodeId, v: &BitVal) -> BitVal {
        v.map(|s| {
            s.difference_with(self.problem.kill(n));
            s.union_with(self.problem.gen(n));
        })
    }
    fn call(&self, _n: NodeId, callee: ProcId, v: &BitVal, _exit: &BitVal) -> BitVal {
        match &self.summaries[callee] {
            None => BitVal::Top,
            Some(sum) => v.map(|s| {
                s.difference_with(&sum.kill);
                s.union_with(&sum.gen);
            }),
        }
    }
    fn callee_entry(&self, _callee: ProcId, _at_call: &BitVal) -> BitVal {
        self.boundary(0)
    }
    fn return_combine(&self, callee: ProcId, at_call: &BitVal, exit: &BitVal) -> BitVal {
        self.call(0, callee, at_call, exit)
    }
    fn show(&self, _prog: &Program, _p: ProcId, v: &BitVal) -> serde_json::Value {
        show_facts(self.problem, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;

    fn set(width: usize, xs: &[usize]) -> BitVal {
        let mut s = FixedBitSet::with_capacity(width);
        xs.iter().for_each(|x| s.insert(*x));
        BitVal::Set(s)
    }

    #[test]
    fn rd_gen_kill() {
        let prog = parse_program("proc m() { a = 0; b = 1; a = 2; skip; }").unwrap();
        let rd = ReachingDefs::new(&prog);
        assert_eq!(rd.gen(0).ones().collect::<Vec<_>>(), vec![0]);
        assert_eq!(rd.kill(0).ones().collect::<Vec<_>>(), vec![2]);
        assert_eq!(rd.gen(3).count_ones(..), 0);
        assert_eq!(rd.kill(3).count_ones(..), 0);
        let a = BitVector::new(rd, vec![None]);
        assert_eq!(a.transfer(0, &set(3, &[2])), set(3, &[0]));
        assert_eq!(a.meet(&set(3, &[0]), &BitVal::Top), set(3, &[0]));
        assert!(a.leq(&set(3, &[0, 1]), &set(3, &[0])));
        assert_eq!(a.show(&prog, 0, &set(3, &[0, 2])), serde_json::json!(["a@n1", "a@n3"]));
    }

    #[test]
    fn must_defined_meet_is_intersection() {
        let prog = parse_program("proc m(p) { read c; if (c > 0) { a = 1; } print a; }").unwrap();
        let md = BitVector::new(MustDefined::new(&prog), vec![None]);
        assert_eq!(md.boundary(0), set(3, &[0]));
        let a = prog.var_by_name(0, "a").unwrap() as usize;
        let c = prog.var_by_name(0, "c").unwrap() as usize;
        let joined = md.meet(&set(3, &[0, a, c]), &set(3, &[0, c]));
        assert!(!joined.contains(a));
        assert!(md.leq(&set(3, &[0]), &set(3, &[0, a])));
    }
}
