//! Backward query propagation from every conditional edge.

use crate::frontend::ast::{BinOp, Expr, Operand};
use crate::frontend::{CallGraph, Cond, EdgeId, Label, NodeKind, Program, VarId};
use crate::lattice::IntSet;
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::{BTreeSet, HashMap, VecDeque};

pub type QueryId = u32;

/// What a query constrains: a variable, or the difference of two.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subject {
    Var(VarId),
    /// `a - b` with `a < b`.
    Diff(VarId, VarId),
}

impl Subject {
    pub fn vars(&self) -> Vec<VarId> {
        match self {
            Subject::Var(v) => vec![*v],
            Subject::Diff(a, b) => vec![*a, *b],
        }
    }
}

/// "Does `subject ∈ holds` hold when control reaches `origin`?"
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub id: QueryId,
    pub origin: EdgeId,
    pub subject: Subject,
    pub holds: IntSet,
}

impl Query {
    pub fn describe(&self, prog: &Program) -> String {
        let text = prog.node_text(prog.edge(self.origin).src);
        let cond = text.strip_prefix("if (").and_then(|t| t.strip_suffix(')')).unwrap_or(&text).to_string();
        match &prog.edge(self.origin).label {
            Label::True => cond,
            Label::False => format!("!({cond})"),
            Label::Case(k) => format!("{} == {k}", cond.trim_start_matches("switch (")),
            Label::Default => format!("{} is no case", cond.trim_start_matches("switch (")),
            Label::None => cond,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Answer {
    True,
    False,
    Undef,
    Unresolved,
}

/// Constraint a conditional edge places on its branch subject.
pub fn edge_constraint(prog: &Program, e: EdgeId) -> Option<(Subject, IntSet)> {
    let edge = prog.edge(e);
    let (subject, set) = match (&prog.node(edge.src).kind, &edge.label) {
        (NodeKind::Branch(Cond::Cmp(a)), Label::True | Label::False) => {
            let (subject, set) = match &a.rhs {
                Operand::Const(k) => (Subject::Var(a.lhs), IntSet::from_cmp(a.op, k)),
                Operand::Var(y) if *y == a.lhs => return None,
                Operand::Var(y) => {
                    let zero = BigInt::zero();
                    if a.lhs < *y {
                        (Subject::Diff(a.lhs, *y), IntSet::from_cmp(a.op, &zero))
                    } else {
                        (Subject::Diff(*y, a.lhs), IntSet::from_cmp(a.op.flip(), &zero))
                    }
                }
            };
            if edge.label == Label::True {
                (subject, set)
            } else {
                (subject, set.complement())
            }
        }
        (NodeKind::Switch(x, _), Label::Case(k)) => (Subject::Var(*x), IntSet::point(k)),
        (NodeKind::Switch(x, ks), Label::Default) => {
            let cases = ks.iter().fold(IntSet::empty(), |acc, k| acc.union(&IntSet::point(k)));
            (Subject::Var(*x), cases.complement())
        }
        _ => return None,
    };
    Some((subject, set))
}

fn const_value(e: &Expr<VarId>) -> Option<BigInt> {
    match e {
        Expr::Int(k) => Some(k.clone()),
        Expr::Var(_) => None,
        Expr::Neg(a) => Some(-const_value(a)?),
        Expr::Bin(op, a, b) => {
            let (x, y) = (const_value(a)?, const_value(b)?);
            match op {
                BinOp::Add => Some(x + y),
                BinOp::Sub => Some(x - y),
                BinOp::Mul => Some(x * y),
                BinOp::Div if y.is_zero() => None,
                BinOp::Div => Some(x / y),
            }
        }
    }
}

/// Answers `q` at edge `e` from the source node's statement and the edge's branch label.
pub fn resolve(prog: &Program, cg: &CallGraph, e: EdgeId, q: &Query) -> Answer {
    let edge = prog.edge(e);
    let vars = q.subject.vars();
    match &prog.node(edge.src).kind {
        NodeKind::Assign(x, rhs) if vars.contains(x) => {
            return match (&q.subject, const_value(rhs)) {
                (Subject::Var(_), Some(k)) => {
                    if q.holds.contains(&k) {
                        Answer::True
                    } else {
                        Answer::False
                    }
                }
                _ => Answer::Undef,
            };
        }
        NodeKind::Read(x) if vars.contains(x) => return Answer::Undef,
        NodeKind::Call(callee) if vars.iter().any(|v| cg.modifies(*callee).contains(v)) => return Answer::Undef,
        _ => {}
    }
    if let Some((subject, set)) = edge_constraint(prog, e) {
        if subject == q.subject {
            if set.is_subset(&q.holds) {
                return Answer::True;
            }
            if set.is_disjoint(&q.holds) {
                return Answer::False;
            }
        }
    }
    Answer::Unresolved
}

/// Result of query propagation.
#[derive(Clone, Debug, Default)]
pub struct Step1 {
    pub queries: Vec<Query>,
    /// `Q[e]`: queries that reached edge `e`.
    pub reached: Vec<BTreeSet<QueryId>>,
    /// `A[e, q]` for resolved pairs.
    pub answers: HashMap<(EdgeId, QueryId), Answer>,
}

impl Step1 {
    pub fn answer(&self, e: EdgeId, q: QueryId) -> Option<Answer> {
        self.answers.get(&(e, q)).copied()
    }

    pub fn query_at(&self, origin: EdgeId) -> Option<&Query> {
        self.queries.iter().find(|q| q.origin == origin)
    }
}

pub fn detect_step1(prog: &Program, cg: &CallGraph) -> Step1 {
    let mut out = Step1 { reached: vec![BTreeSet::new(); prog.edges.len()], ..Default::default() };
    for edge in &prog.edges {
        let Some((subject, holds)) = edge_constraint(prog, edge.id) else { continue };
        let id = out.queries.len() as QueryId;
        out.queries.push(Query { id, origin: edge.id, subject, holds });
    }
    let mut work: VecDeque<(EdgeId, QueryId)> = VecDeque::new();
    for q in &out.queries {
        for &pe in prog.pred_edges(q.origin) {
            if out.reached[pe as usize].insert(q.id) {
                work.push_back((pe, q.id));
            }
        }
    }
    while let Some((e, qi)) = work.pop_front() {
        let q = &out.queries[qi as usize];
        match resolve(prog, cg, e, q) {
            Answer::Unresolved => {
                let preds = prog.pred_edges(e);
                if preds.is_empty() {
                    out.answers.insert((e, qi), Answer::Undef);
                }
                for &pe in preds {
                    if out.reached[pe as usize].insert(qi) {
                        work.push_back((pe, qi));
                    }
                }
            }
            a => {
                out.answers.insert((e, qi), a);
            }
        }
    }
    out
}
