//! Surface syntax of MiniIR, before lowering to a CFG.
//!
//! The expression and condition types are generic over the variable
//! representation so the same shapes serve the parser (names) and the
//! CFG (interned [`VarId`](super::VarId)s).

use num_bigint::BigInt;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    /// The operator `op'` with `a op b <=> !(a op' b)`.
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
        }
    }

    /// The operator `op'` with `a op b <=> b op' a`.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            CmpOp::Eq => CmpOp::Eq,
            CmpOp::Ne => CmpOp::Ne,
        }
    }

    pub fn eval<T: Ord>(self, a: &T, b: &T) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr<V> {
    Int(BigInt),
    Var(V),
    Neg(Box<Expr<V>>),
    Bin(BinOp, Box<Expr<V>>, Box<Expr<V>>),
}

impl<V> Expr<V> {
    pub fn map<W>(&self, f: &mut impl FnMut(&V) -> W) -> Expr<W> {
        match self {
            Expr::Int(k) => Expr::Int(k.clone()),
            Expr::Var(v) => Expr::Var(f(v)),
            Expr::Neg(e) => Expr::Neg(Box::new(e.map(f))),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.map(f)), Box::new(b.map(f))),
        }
    }

    pub fn vars<'a>(&'a self, out: &mut Vec<&'a V>) {
        match self {
            Expr::Int(_) => {}
            Expr::Var(v) => out.push(v),
            Expr::Neg(e) => e.vars(out),
            Expr::Bin(_, a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    pub fn fmt_with(&self, f: &mut fmt::Formatter<'_>, name: &impl Fn(&V) -> String) -> fmt::Result {
        match self {
            Expr::Int(k) => write!(f, "{k}"),
            Expr::Var(v) => write!(f, "{}", name(v)),
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_atom(f, name)
            }
            Expr::Bin(op, a, b) => {
                a.fmt_operand(f, name, *op, false)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_operand(f, name, *op, true)
            }
        }
    }

    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>, name: &impl Fn(&V) -> String) -> fmt::Result {
        match self {
            Expr::Int(k) if k.sign() != num_bigint::Sign::Minus => self.fmt_with(f, name),
            Expr::Var(_) => self.fmt_with(f, name),
            _ => {
                write!(f, "(")?;
                self.fmt_with(f, name)?;
                write!(f, ")")
            }
        }
    }

    fn fmt_operand(
        &self,
        f: &mut fmt::Formatter<'_>,
        name: &impl Fn(&V) -> String,
        parent: BinOp,
        right: bool,
    ) -> fmt::Result {
        let prec = |op: BinOp| match op {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        };
        let paren = match self {
            Expr::Bin(op, _, _) => prec(*op) < prec(parent) || (right && prec(*op) == prec(parent)),
            Expr::Int(k) => k.sign() == num_bigint::Sign::Minus,
            _ => false,
        };
        if paren {
            write!(f, "(")?;
            self.fmt_with(f, name)?;
            write!(f, ")")
        } else {
            self.fmt_with(f, name)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Operand<V> {
    Const(BigInt),
    Var(V),
}

/// A single comparison `lhs op rhs`; a bare variable `v` parses as `v != 0`
/// but keeps its surface form through `truthy`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom<V> {
    pub lhs: V,
    pub op: CmpOp,
    pub rhs: Operand<V>,
    pub truthy: bool,
}

impl<V> Atom<V> {
    pub fn map<W>(&self, f: &mut impl FnMut(&V) -> W) -> Atom<W> {
        Atom {
            lhs: f(&self.lhs),
            op: self.op,
            rhs: match &self.rhs {
                Operand::Const(k) => Operand::Const(k.clone()),
                Operand::Var(v) => Operand::Var(f(v)),
            },
            truthy: self.truthy,
        }
    }

    pub fn vars(&self) -> Vec<&V> {
        match &self.rhs {
            Operand::Var(r) => vec![&self.lhs, r],
            Operand::Const(_) => vec![&self.lhs],
        }
    }

    pub fn fmt_with(&self, f: &mut fmt::Formatter<'_>, name: &impl Fn(&V) -> String) -> fmt::Result {
        if self.truthy {
            return write!(f, "{}", name(&self.lhs));
        }
        write!(f, "{} {} ", name(&self.lhs), self.op.symbol())?;
        match &self.rhs {
            Operand::Const(k) => write!(f, "{k}"),
            Operand::Var(v) => write!(f, "{}", name(v)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BoolExpr<V> {
    Atom(Atom<V>),
    And(Box<BoolExpr<V>>, Box<BoolExpr<V>>),
    Or(Box<BoolExpr<V>>, Box<BoolExpr<V>>),
    Not(Box<BoolExpr<V>>),
}

impl<V> BoolExpr<V> {
    pub fn map<W>(&self, f: &mut impl FnMut(&V) -> W) -> BoolExpr<W> {
        match self {
            BoolExpr::Atom(a) => BoolExpr::Atom(a.map(f)),
            BoolExpr::And(a, b) => BoolExpr::And(Box::new(a.map(f)), Box::new(b.map(f))),
            BoolExpr::Or(a, b) => BoolExpr::Or(Box::new(a.map(f)), Box::new(b.map(f))),
            BoolExpr::Not(a) => BoolExpr::Not(Box::new(a.map(f))),
        }
    }

    pub fn is_compound(&self) -> bool {
        !matches!(self, BoolExpr::Atom(_))
    }

    pub fn vars<'a>(&'a self, out: &mut Vec<&'a V>) {
        match self {
            BoolExpr::Atom(a) => out.extend(a.vars()),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            BoolExpr::Not(a) => a.vars(out),
        }
    }

    pub fn fmt_with(&self, f: &mut fmt::Formatter<'_>, name: &impl Fn(&V) -> String) -> fmt::Result {
        let wrap = |e: &BoolExpr<V>, f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if e.is_compound() && !matches!(e, BoolExpr::Not(_)) {
                write!(f, "(")?;
                e.fmt_with(f, name)?;
                write!(f, ")")
            } else {
                e.fmt_with(f, name)
            }
        };
        match self {
            BoolExpr::Atom(a) => a.fmt_with(f, name),
            BoolExpr::And(a, b) => {
                wrap(a, f)?;
                write!(f, " && ")?;
                wrap(b, f)
            }
            BoolExpr::Or(a, b) => {
                wrap(a, f)?;
                write!(f, " || ")?;
                wrap(b, f)
            }
            BoolExpr::Not(a) => {
                write!(f, "!(")?;
                a.fmt_with(f, name)?;
                write!(f, ")")
            }
        }
    }
}

pub type Block = Vec<Stmt>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Assign(String, Expr<String>),
    Read(String),
    Print(Expr<String>),
    Assert(BoolExpr<String>),
    If(BoolExpr<String>, Block, Option<Block>),
    Switch(String, Vec<(BigInt, Block)>, Block),
    While(BoolExpr<String>, Block),
    Call(String),
    Skip,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcDecl {
    pub name: String,
    pub params: Vec<String>,
    pub entry: bool,
    pub body: Block,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SourceProgram {
    pub atomic_cond: bool,
    pub globals: Vec<String>,
    pub externs: Vec<String>,
    pub procs: Vec<ProcDecl>,
}
