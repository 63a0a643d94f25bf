//! Extended integers, intervals over them, and finite unions of intervals.

use crate::frontend::ast::CmpOp;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bound {
    NegInf,
    Fin(BigInt),
    PosInf,
}

impl Bound {
    pub fn fin(k: impl Into<BigInt>) -> Bound {
        Bound::Fin(k.into())
    }

    fn sign(&self) -> i8 {
        match self {
            Bound::NegInf => -1,
            Bound::PosInf => 1,
            Bound::Fin(k) if k.is_zero() => 0,
            Bound::Fin(k) if k.is_negative() => -1,
            Bound::Fin(_) => 1,
        }
    }

    fn inf_of_sign(s: i8) -> Bound {
        if s < 0 {
            Bound::NegInf
        } else {
            Bound::PosInf
        }
    }

    pub fn succ(&self) -> Bound {
        match self {
            Bound::Fin(k) => Bound::Fin(k + 1),
            b => b.clone(),
        }
    }

    pub fn pred(&self) -> Bound {
        match self {
            Bound::Fin(k) => Bound::Fin(k - 1),
            b => b.clone(),
        }
    }

    pub fn neg(&self) -> Bound {
        match self {
            Bound::NegInf => Bound::PosInf,
            Bound::PosInf => Bound::NegInf,
            Bound::Fin(k) => Bound::Fin(-k),
        }
    }

    /// Sum; `None` for the undefined `-inf + inf`.
    fn add(&self, o: &Bound) -> Option<Bound> {
        match (self, o) {
            (Bound::Fin(a), Bound::Fin(b)) => Some(Bound::Fin(a + b)),
            (Bound::NegInf, Bound::PosInf) | (Bound::PosInf, Bound::NegInf) => None,
            (Bound::Fin(_), inf) | (inf, _) => Some(inf.clone()),
        }
    }

    fn mul(&self, o: &Bound) -> Bound {
        match (self, o) {
            (Bound::Fin(a), Bound::Fin(b)) => Bound::Fin(a * b),
            _ if self.sign() == 0 || o.sign() == 0 => Bound::Fin(BigInt::zero()),
            _ => Bound::inf_of_sign(self.sign() * o.sign()),
        }
    }

    /// Truncating quotient; `None` when both operands are infinite.
    fn div(&self, o: &Bound) -> Option<Bound> {
        match (self, o) {
            (Bound::Fin(a), Bound::Fin(b)) => Some(Bound::Fin(a / b)),
            (Bound::Fin(_), _) => Some(Bound::Fin(BigInt::zero())),
            (_, Bound::Fin(_)) => Some(Bound::inf_of_sign(self.sign() * o.sign())),
            _ => None,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => write!(f, "-inf"),
            Bound::PosInf => write!(f, "+inf"),
            Bound::Fin(k) => write!(f, "{k}"),
        }
    }
}

/// A nonempty interval `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub lo: Bound,
    pub hi: Bound,
}

impl Interval {
    pub fn new(lo: Bound, hi: Bound) -> Option<Interval> {
        (lo <= hi && lo != Bound::PosInf && hi != Bound::NegInf).then_some(Interval { lo, hi })
    }

    pub fn full() -> Interval {
        Interval { lo: Bound::NegInf, hi: Bound::PosInf }
    }

    pub fn point(k: impl Into<BigInt>) -> Interval {
        let k = k.into();
        Interval { lo: Bound::Fin(k.clone()), hi: Bound::Fin(k) }
    }

    pub fn range(lo: i64, hi: i64) -> Interval {
        Interval::new(Bound::fin(lo), Bound::fin(hi)).expect("lo <= hi")
    }

    pub fn is_full(&self) -> bool {
        self.lo == Bound::NegInf && self.hi == Bound::PosInf
    }

    pub fn contains(&self, k: &BigInt) -> bool {
        let b = Bound::Fin(k.clone());
        self.lo <= b && b <= self.hi
    }

    /// Smallest interval containing both.
    pub fn hull(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.clone().min(o.lo.clone()), hi: self.hi.clone().max(o.hi.clone()) }
    }

    pub fn intersect(&self, o: &Interval) -> Option<Interval> {
        Interval::new(self.lo.clone().max(o.lo.clone()), self.hi.clone().min(o.hi.clone()))
    }

    pub fn encloses(&self, o: &Interval) -> bool {
        self.lo <= o.lo && o.hi <= self.hi
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: self.hi.neg(), hi: self.lo.neg() }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        let lo = self.lo.add(&o.lo).unwrap_or(Bound::NegInf);
        let hi = self.hi.add(&o.hi).unwrap_or(Bound::PosInf);
        Interval { lo, hi }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        self.add(&o.neg())
    }

    fn from_corners(cs: impl IntoIterator<Item = Option<Bound>>) -> Interval {
        let mut lo: Option<Bound> = None;
        let mut hi: Option<Bound> = None;
        for c in cs {
            let Some(c) = c else { return Interval::full() };
            lo = Some(lo.map_or(c.clone(), |l| l.min(c.clone())));
            hi = Some(hi.map_or(c.clone(), |h| h.max(c)));
        }
        Interval { lo: lo.unwrap_or(Bound::NegInf), hi: hi.unwrap_or(Bound::PosInf) }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        Interval::from_corners([
            Some(self.lo.mul(&o.lo)),
            Some(self.lo.mul(&o.hi)),
            Some(self.hi.mul(&o.lo)),
            Some(self.hi.mul(&o.hi)),
        ])
    }

    /// Truncating division; a divisor range containing zero gives the full range.
    pub fn div(&self, o: &Interval) -> Interval {
        if o.contains(&BigInt::zero()) {
            return Interval::full();
        }
        Interval::from_corners([self.lo.div(&o.lo), self.lo.div(&o.hi), self.hi.div(&o.lo), self.hi.div(&o.hi)])
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A finite union of disjoint, non-adjacent intervals, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntSet(Vec<Interval>);

impl IntSet {
    pub fn empty() -> IntSet {
        IntSet(Vec::new())
    }

    pub fn full() -> IntSet {
        IntSet(vec![Interval::full()])
    }

    pub fn point(k: &BigInt) -> IntSet {
        IntSet(vec![Interval::point(k.clone())])
    }

    pub fn from_interval(i: Interval) -> IntSet {
        IntSet(vec![i])
    }

    /// `{ v | v op k }`.
    pub fn from_cmp(op: CmpOp, k: &BigInt) -> IntSet {
        let fin = Bound::Fin(k.clone());
        let mk = |lo: Bound, hi: Bound| IntSet(vec![Interval { lo, hi }]);
        match op {
            CmpOp::Lt => mk(Bound::NegInf, fin.pred()),
            CmpOp::Le => mk(Bound::NegInf, fin),
            CmpOp::Gt => mk(fin.succ(), Bound::PosInf),
            CmpOp::Ge => mk(fin, Bound::PosInf),
            CmpOp::Eq => IntSet::point(k),
            CmpOp::Ne => IntSet::point(k).complement(),
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, k: &BigInt) -> bool {
        self.0.iter().any(|i| i.contains(k))
    }

    pub fn complement(&self) -> IntSet {
        let mut out = Vec::new();
        let mut cursor = Some(Bound::NegInf);
        for i in &self.0 {
            if let Some(iv) = cursor.and_then(|c| Interval::new(c, i.lo.pred())) {
                out.push(iv);
            }
            cursor = (i.hi != Bound::PosInf).then(|| i.hi.succ());
        }
        if let Some(iv) = cursor.and_then(|c| Interval::new(c, Bound::PosInf)) {
            out.push(iv);
        }
        IntSet(out)
    }

    pub fn intersect(&self, o: &IntSet) -> IntSet {
        let mut out = Vec::new();
        for a in &self.0 {
            for b in &o.0 {
                if let Some(i) = a.intersect(b) {
                    out.push(i);
                }
            }
        }
        out.sort();
        IntSet(out)
    }

    pub fn union(&self, o: &IntSet) -> IntSet {
        let mut all: Vec<Interval> = self.0.iter().chain(o.0.iter()).cloned().collect();
        all.sort();
        let mut out: Vec<Interval> = Vec::new();
        for i in all {
            match out.last_mut() {
                Some(last) if i.lo <= last.hi.succ() => {
                    if i.hi > last.hi {
                        last.hi = i.hi;
                    }
                }
                _ => out.push(i),
            }
        }
        IntSet(out)
    }

    /// `{ -v | v in self }`.
    pub fn neg(&self) -> IntSet {
        IntSet(self.0.iter().rev().map(Interval::neg).collect())
    }

    pub fn is_subset(&self, o: &IntSet) -> bool {
        self.intersect(&o.complement()).is_empty()
    }

    pub fn is_disjoint(&self, o: &IntSet) -> bool {
        self.intersect(o).is_empty()
    }

    /// Smallest interval containing the set.
    pub fn hull(&self) -> Option<Interval> {
        Some(Interval { lo: self.0.first()?.lo.clone(), hi: self.0.last()?.hi.clone() })
    }
}
