//! Interval value analysis. Larger ranges sit lower in the order; the
//! unreached element is `Env::Top`.

use super::bound::{Bound, IntSet, Interval};
use super::{Analysis, Kind, WidenHist, WIDEN_AFTER};
use crate::frontend::ast::{Atom, CmpOp, Expr, Operand};
use crate::frontend::{CallGraph, Cond, EdgeId, Label, NodeId, NodeKind, ProcId, Program, VarId};
use num_traits::ToPrimitive;
use std::collections::{BTreeMap, BTreeSet};

/// Variable environment. Absent variables range over all integers; no
/// stored interval is full, so equal environments are structurally equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Env {
    Top,
    Map(BTreeMap<VarId, Interval>),
}

impl Env {
    pub fn unconstrained() -> Env {
        Env::Map(BTreeMap::new())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, Interval)>) -> Env {
        let mut env = Env::unconstrained();
        for (v, i) in pairs {
            env.set(v, i);
        }
        env
    }

    /// Range of `v`; `None` when unreached.
    pub fn get(&self, v: VarId) -> Option<Interval> {
        match self {
            Env::Top => None,
            Env::Map(m) => Some(m.get(&v).cloned().unwrap_or_else(Interval::full)),
        }
    }

    pub fn set(&mut self, v: VarId, i: Interval) {
        if let Env::Map(m) = self {
            if i.is_full() {
                m.remove(&v);
            } else {
                m.insert(v, i);
            }
        }
    }

    /// Narrow `v` to the hull of its range intersected with `s`; an empty
    /// result makes the environment unreachable.
    fn restrict(&mut self, v: VarId, s: &IntSet) {
        let Some(cur) = self.get(v) else { return };
        match IntSet::from_interval(cur).intersect(s).hull() {
            Some(h) => self.set(v, h),
            None => *self = Env::Top,
        }
    }

    pub fn eval(&self, e: &Expr<VarId>) -> Option<Interval> {
        Some(match e {
            Expr::Int(k) => Interval::point(k.clone()),
            Expr::Var(v) => self.get(*v)?,
            Expr::Neg(a) => self.eval(a)?.neg(),
            Expr::Bin(op, a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                match op {
                    crate::frontend::ast::BinOp::Add => x.add(&y),
                    crate::frontend::ast::BinOp::Sub => x.sub(&y),
                    crate::frontend::ast::BinOp::Mul => x.mul(&y),
                    crate::frontend::ast::BinOp::Div => x.div(&y),
                }
            }
        })
    }
}

/// Values `x` with `x op w` for some `w` in `y`.
fn cmp_range(op: CmpOp, y: &Interval) -> IntSet {
    let iv = |lo: Bound, hi: Bound| Interval::new(lo, hi).map(IntSet::from_interval).unwrap_or_else(IntSet::empty);
    match op {
        CmpOp::Lt => iv(Bound::NegInf, y.hi.pred()),
        CmpOp::Le => iv(Bound::NegInf, y.hi.clone()),
        CmpOp::Gt => iv(y.lo.succ(), Bound::PosInf),
        CmpOp::Ge => iv(y.lo.clone(), Bound::PosInf),
        CmpOp::Eq => IntSet::from_interval(y.clone()),
        CmpOp::Ne => match (&y.lo, &y.hi) {
            (Bound::Fin(a), Bound::Fin(b)) if a == b => IntSet::point(a).complement(),
            _ => IntSet::full(),
        },
    }
}

fn refine_atom(env: &mut Env, a: &Atom<VarId>, holds: bool) {
    let op = if holds { a.op } else { a.op.negate() };
    match &a.rhs {
        Operand::Const(k) => env.restrict(a.lhs, &IntSet::from_cmp(op, k)),
        Operand::Var(y) if *y == a.lhs => {
            if matches!(op, CmpOp::Lt | CmpOp::Gt | CmpOp::Ne) {
                *env = Env::Top;
            }
        }
        Operand::Var(y) => {
            let Some(yi) = env.get(*y) else { return };
            env.restrict(a.lhs, &cmp_range(op, &yi));
            let Some(xi) = env.get(a.lhs) else { return };
            env.restrict(*y, &cmp_range(op.flip(), &xi));
        }
    }
}

#[derive(Clone, Debug)]
pub struct IntervalAnalysis<'a> {
    prog: &'a Program,
    /// Globals each procedure may modify, transitively.
    modifies: Vec<BTreeSet<VarId>>,
}

impl<'a> IntervalAnalysis<'a> {
    pub fn new(prog: &'a Program, cg: &CallGraph) -> Self {
        let modifies = (0..prog.procs.len())
            .map(|p| cg.modifies(p).iter().copied().filter(|v| prog.is_global(*v)).collect())
            .collect();
        IntervalAnalysis { prog, modifies }
    }

    /// Value of the branch test at edge `e` applied to `v`.
    pub fn refine(&self, e: EdgeId, v: &Env) -> Env {
        let edge = self.prog.edge(e);
        let mut env = v.clone();
        if env == Env::Top {
            return env;
        }
        match (&self.prog.node(edge.src).kind, &edge.label) {
            (NodeKind::Branch(Cond::Cmp(a)), Label::True) => refine_atom(&mut env, a, true),
            (NodeKind::Branch(Cond::Cmp(a)), Label::False) => refine_atom(&mut env, a, false),
            (NodeKind::Switch(x, _), Label::Case(k)) => env.restrict(*x, &IntSet::point(k)),
            (NodeKind::Switch(x, ks), Label::Default) => {
                let cases = ks.iter().fold(IntSet::empty(), |acc, k| acc.union(&IntSet::point(k)));
                env.restrict(*x, &cases.complement());
            }
            _ => {}
        }
        env
    }
}

fn bound_json(b: &Bound) -> serde_json::Value {
    match b {
        Bound::Fin(k) => k.to_i64().map(serde_json::Value::from).unwrap_or_else(|| k.to_string().into()),
        other => other.to_string().into(),
    }
}

pub fn interval_json(i: &Interval) -> serde_json::Value {
    serde_json::json!([bound_json(&i.lo), bound_json(&i.hi)])
}

impl Analysis for IntervalAnalysis<'_> {
    type Value = Env;

    fn name(&self) -> &'static str {
        "interval"
    }

    fn kind(&self) -> Kind {
        Kind::General
    }

    fn top(&self) -> Env {
        Env::Top
    }

    fn is_top(&self, v: &Env) -> bool {
        *v == Env::Top
    }

    fn meet(&self, a: &Env, b: &Env) -> Env {
        match (a, b) {
            (Env::Top, x) | (x, Env::Top) => x.clone(),
            (Env::Map(x), Env::Map(y)) => Env::Map(
                x.iter()
                    .filter_map(|(v, i)| y.get(v).map(|j| (*v, i.hull(j))))
                    .filter(|(_, i)| !i.is_full())
                    .collect(),
            ),
        }
    }

    fn leq(&self, a: &Env, b: &Env) -> bool {
        match (a, b) {
            (_, Env::Top) => true,
            (Env::Top, _) => false,
            (Env::Map(x), Env::Map(y)) => x.iter().all(|(v, i)| y.get(v).is_some_and(|j| i.encloses(j))),
        }
    }

    fn boundary(&self, _p: ProcId) -> Env {
        Env::unconstrained()
    }

    fn transfer(&self, n: NodeId, v: &Env) -> Env {
        let mut env = v.clone();
        match &self.prog.node(n).kind {
            NodeKind::Assign(x, e) => {
                if let Some(i) = v.eval(e) {
                    env.set(*x, i);
                }
            }
            NodeKind::Read(x) => env.set(*x, Interval::full()),
            _ => {}
        }
        env
    }

    fn edge(&self, e: EdgeId, v: &Env) -> Env {
        self.refine(e, v)
    }

    fn widen(&self, hist: &mut WidenHist, old: &Env, new: &Env) -> Env {
        let (Env::Map(o), Env::Map(n)) = (old, new) else { return new.clone() };
        let mut out = Env::unconstrained();
        for (v, i) in n {
            let Some(prev) = o.get(v) else {
                out.set(*v, i.clone());
                continue;
            };
            let mut bump = |side: bool, changed: bool| {
                let c = hist.entry((*v, side)).or_insert(0);
                *c += u32::from(changed);
                *c > WIDEN_AFTER
            };
            let lo = if bump(false, i.lo != prev.lo) && i.lo < prev.lo { Bound::NegInf } else { i.lo.clone() };
            let hi = if bump(true, i.hi != prev.hi) && i.hi > prev.hi { Bound::PosInf } else { i.hi.clone() };
            out.set(*v, Interval { lo, hi });
        }
        out
    }

    fn needs_widening(&self) -> bool {
        true
    }

    fn call(&self, _n: NodeId, callee: ProcId, v: &Env, callee_exit: &Env) -> Env {
        if *callee_exit == Env::Top {
            return Env::Top;
        }
        let mut env = v.clone();
        for g in &self.modifies[callee] {
            if let Some(i) = callee_exit.get(*g) {
                env.set(*g, i);
            }
        }
        env
    }

    fn uses_callee_exit(&self) -> bool {
        true
    }

    fn callee_entry(&self, _callee: ProcId, at_call: &Env) -> Env {
        match at_call {
            Env::Top => Env::Top,
            Env::Map(m) => Env::Map(m.iter().filter(|(v, _)| self.prog.is_global(**v)).map(|(v, i)| (*v, i.clone())).collect()),
        }
    }

    fn return_combine(&self, callee: ProcId, at_call: &Env, exit: &Env) -> Env {
        self.call(0, callee, at_call, exit)
    }

    fn show(&self, prog: &Program, _p: ProcId, v: &Env) -> serde_json::Value {
        match v {
            Env::Top => serde_json::Value::String("top".into()),
            Env::Map(m) => {
                let obj: serde_json::Map<String, serde_json::Value> =
                    m.iter().map(|(x, i)| (prog.var_name(*x).to_string(), interval_json(i))).collect();
                serde_json::Value::Object(obj)
            }
        }
    }
}
