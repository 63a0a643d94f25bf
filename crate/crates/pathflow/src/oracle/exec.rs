use super::{mips_in, OracleError, Step, EXPLOSION_LIMIT};
use crate::frontend::ast::{BinOp, BoolExpr, Expr, Operand};
use crate::frontend::{Cond, EdgeId, Label, NodeId, NodeKind, ProcId, Program, VarId};
use crate::mips::{MipsId, Universe};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, HashMap};

/// Every input value is drawn from this range.
pub const INPUT_BOX: (i64, i64) = (-3, 3);
/// Most traversals of one back edge (and deepest call nesting) per run.
pub const LOOP_CAP: u32 = 64;

/// Runs explored per procedure by the infeasibility witness.
pub const WITNESS_BUDGET: usize = 100_000;

const MAGNITUDE_CAP: u32 = 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RunEnd {
    Exit,
    AssertFailed,
    LoopCap,
    DivByZero,
    Overflow,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub steps: Vec<Step>,
    pub end: RunEnd,
}

#[derive(Clone)]
struct State {
    globals: HashMap<VarId, BigInt>,
    frames: Vec<(Option<NodeId>, HashMap<VarId, BigInt>)>,
    at: NodeId,
    steps: Vec<Step>,
    taken: HashMap<EdgeId, u32>,
}

enum Fault {
    Need(VarId),
    DivByZero,
    Overflow,
}

enum Next {
    Go,
    End(RunEnd),
    /// A fresh input for the variable; `consume` moves past the node afterwards.
    Input { var: VarId, consume: bool },
}

impl State {
    fn get(&self, prog: &Program, v: VarId) -> Option<&BigInt> {
        if prog.is_global(v) {
            self.globals.get(&v)
        } else {
            self.frames.last().and_then(|(_, l)| l.get(&v))
        }
    }

    fn set(&mut self, prog: &Program, v: VarId, x: BigInt) {
        if prog.is_global(v) {
            self.globals.insert(v, x);
        } else {
            self.frames.last_mut().expect("a frame").1.insert(v, x);
        }
    }

    fn eval(&self, prog: &Program, e: &Expr<VarId>) -> Result<BigInt, Fault> {
        let x = match e {
            Expr::Int(k) => k.clone(),
            Expr::Var(v) => self.get(prog, *v).cloned().ok_or(Fault::Need(*v))?,
            Expr::Neg(a) => -self.eval(prog, a)?,
            Expr::Bin(op, a, b) => {
                let (x, y) = (self.eval(prog, a)?, self.eval(prog, b)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div if y.is_zero() => return Err(Fault::DivByZero),
                    BinOp::Div => x / y,
                }
            }
        };
        if x.abs().bits() > MAGNITUDE_CAP as u64 {
            return Err(Fault::Overflow);
        }
        Ok(x)
    }

    fn operand(&self, prog: &Program, o: &Operand<VarId>) -> Result<BigInt, Fault> {
        match o {
            Operand::Const(k) => Ok(k.clone()),
            Operand::Var(v) => self.get(prog, *v).cloned().ok_or(Fault::Need(*v)),
        }
    }

    fn test(&self, prog: &Program, b: &BoolExpr<VarId>) -> Result<bool, Fault> {
        Ok(match b {
            BoolExpr::Atom(a) => {
                let l = self.get(prog, a.lhs).cloned().ok_or(Fault::Need(a.lhs))?;
                a.op.eval(&l, &self.operand(prog, &a.rhs)?)
            }
            BoolExpr::And(x, y) => self.test(prog, x)? && self.test(prog, y)?,
            BoolExpr::Or(x, y) => self.test(prog, x)? || self.test(prog, y)?,
            BoolExpr::Not(x) => !self.test(prog, x)?,
        })
    }

    fn take(&mut self, prog: &Program, e: EdgeId, back: &[bool]) -> Next {
        if back[e as usize] {
            let c = self.taken.entry(e).or_insert(0);
            if *c >= LOOP_CAP {
                return Next::End(RunEnd::LoopCap);
            }
            *c += 1;
        }
        self.steps.push(Step::Edge(e));
        self.at = prog.edge(e).dst;
        Next::Go
    }

    fn labelled(&mut self, prog: &Program, want: &Label, back: &[bool]) -> Next {
        let e = prog.out_edges(self.at).iter().copied().find(|e| prog.edge(*e).label == *want);
        match e {
            Some(e) => self.take(prog, e, back),
            None => Next::End(RunEnd::Exit),
        }
    }

    fn straight(&mut self, prog: &Program, back: &[bool]) -> Next {
        match prog.out_edges(self.at).first() {
            Some(&e) => self.take(prog, e, back),
            None => Next::End(RunEnd::Exit),
        }
    }

    fn step(&mut self, prog: &Program, back: &[bool]) -> Next {
        let n = self.at;
        let fault = |f: Fault| match f {
            Fault::Need(v) => Next::Input { var: v, consume: false },
            Fault::DivByZero => Next::End(RunEnd::DivByZero),
            Fault::Overflow => Next::End(RunEnd::Overflow),
        };
        match &prog.node(n).kind {
            NodeKind::Assign(x, e) => match self.eval(prog, e) {
                Ok(v) => {
                    self.set(prog, *x, v);
                    self.straight(prog, back)
                }
                Err(f) => fault(f),
            },
            NodeKind::Read(x) => Next::Input { var: *x, consume: true },
            NodeKind::Assert(b) => match self.test(prog, b) {
                Ok(true) => self.straight(prog, back),
                Ok(false) => Next::End(RunEnd::AssertFailed),
                Err(f) => fault(f),
            },
            NodeKind::Branch(c) => {
                let r = match c {
                    Cond::Cmp(a) => self.test(prog, &BoolExpr::Atom(a.clone())),
                    Cond::Opaque(b) => self.test(prog, b),
                };
                match r {
                    Ok(t) => self.labelled(prog, if t { &Label::True } else { &Label::False }, back),
                    Err(f) => fault(f),
                }
            }
            NodeKind::Switch(x, ks) => match self.get(prog, *x).cloned() {
                Some(v) => {
                    let l = if ks.contains(&v) { Label::Case(v) } else { Label::Default };
                    self.labelled(prog, &l, back)
                }
                None => Next::Input { var: *x, consume: false },
            },
            NodeKind::Call(q) => {
                if self.frames.len() > LOOP_CAP as usize {
                    return Next::End(RunEnd::LoopCap);
                }
                self.frames.push((Some(n), HashMap::new()));
                self.steps.push(Step::Call(n));
                self.at = prog.proc(*q).start;
                Next::Go
            }
            NodeKind::Exit => match self.frames.pop() {
                Some((Some(call), _)) => {
                    self.steps.push(Step::Return(call));
                    self.at = call;
                    self.straight(prog, back)
                }
                _ => Next::End(RunEnd::Exit),
            },
            NodeKind::Print(_) | NodeKind::Extern(_) | NodeKind::Skip => self.straight(prog, back),
        }
    }
}

fn back_edges(prog: &Program) -> Vec<bool> {
    let mut back = vec![false; prog.edges.len()];
    for p in 0..prog.procs.len() {
        for e in prog.back_edges(p) {
            back[e as usize] = true;
        }
    }
    back
}

/// Runs `root` on every assignment of inputs from `lo..=hi`, handing each
/// run's trace to `visit`. Inputs are read statements plus any variable
/// used before it is assigned (parameters, globals). Returns the run count,
/// or `Explosion` once more than `limit` runs have been visited.
pub fn execute(
    prog: &Program,
    root: ProcId,
    (lo, hi): (i64, i64),
    limit: usize,
    mut visit: impl FnMut(&Run),
) -> Result<usize, OracleError> {
    let back = back_edges(prog);
    let init = State {
        globals: HashMap::new(),
        frames: vec![(None, HashMap::new())],
        at: prog.proc(root).start,
        steps: Vec::new(),
        taken: HashMap::new(),
    };
    let mut runs = 0usize;
    let mut pending = vec![init];
    while let Some(mut st) = pending.pop() {
        loop {
            match st.step(prog, &back) {
                Next::Go => {}
                Next::End(end) => {
                    runs += 1;
                    if runs > limit {
                        return Err(OracleError::Explosion(limit));
                    }
                    visit(&Run { steps: std::mem::take(&mut st.steps), end });
                    break;
                }
                Next::Input { var, consume } => {
                    for x in (lo..=hi).rev() {
                        let mut s = st.clone();
                        s.set(prog, var, BigInt::from(x));
                        if consume {
                            if let Next::End(end) = s.straight(prog, &back) {
                                runs += 1;
                                if runs > limit {
                                    return Err(OracleError::Explosion(limit));
                                }
                                visit(&Run { steps: s.steps, end });
                                continue;
                            }
                        }
                        pending.push(s);
                    }
                    break;
                }
            }
        }
    }
    Ok(runs)
}

/// All runs of `root` over the input box.
pub fn traces(prog: &Program, root: ProcId) -> Result<Vec<Run>, OracleError> {
    let mut out = Vec::new();
    execute(prog, root, INPUT_BOX, EXPLOSION_LIMIT, |r| out.push(r.clone()))?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessViolation {
    pub mips: MipsId,
    pub proc: ProcId,
    pub trace: Vec<Step>,
}

/// Outcome of the infeasibility witness.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Witness {
    pub violations: Vec<WitnessViolation>,
    pub runs: usize,
    /// Procedures whose runs were cut off at the budget; only the explored
    /// runs back the witness there.
    pub truncated: Vec<ProcId>,
}

/// Runs every procedure owning a MIPS that satisfies 𝒫 over the input box,
/// at most `budget` runs each, and reports each such MIPS seen on a concrete trace.
pub fn infeasibility_witness(prog: &Program, u: &Universe, budget: usize) -> Witness {
    let mut seen: BTreeMap<MipsId, WitnessViolation> = BTreeMap::new();
    let mut out = Witness::default();
    for p in 0..prog.procs.len() {
        if !u.of_proc(p).iter().any(|id| u.get(*id).satisfies_p) {
            continue;
        }
        let r = execute(prog, p, INPUT_BOX, budget, |r| {
            for id in mips_in(u, &r.steps) {
                if u.get(id).satisfies_p {
                    seen.entry(id).or_insert_with(|| WitnessViolation { mips: id, proc: p, trace: r.steps.clone() });
                }
            }
        });
        match r {
            Ok(n) => out.runs += n,
            Err(OracleError::Explosion(n)) => {
                out.runs += n;
                out.truncated.push(p);
            }
        }
    }
    out.violations = seen.into_values().collect();
    out
}
