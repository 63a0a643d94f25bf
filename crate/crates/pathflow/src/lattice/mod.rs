//! The pluggable analysis interface and the three client analyses.

pub mod bitvec;
pub mod bound;
pub mod interval;

pub use bitvec::{BitVal, BitVector, BitVectorProblem, GenProblem, KillProblem, MustDefined, ReachingDefs, Summary};
pub use bound::{Bound, IntSet, Interval};
pub use interval::{Env, IntervalAnalysis};

use crate::frontend::{EdgeId, NodeId, ProcId, Program};
use std::collections::BTreeMap;
use std::fmt::Debug;
use std::hash::Hash;

/// Changes a bound may go through at one widening point before it is pushed to infinity.
pub const WIDEN_AFTER: u32 = 4;

/// Per-component change counts at one widening point, keyed by component
/// and side (`false` low, `true` high).
pub type WidenHist = BTreeMap<(u32, bool), u32>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    BitVectorUnion,
    BitVectorIntersection,
    General,
}

/// A forward data-flow problem over a meet semi-lattice.
///
/// `top` is the "not yet reached" element; the solvers start from it and
/// the lifted map drops it. `call` handles call nodes, everything else goes
/// through `transfer`.
pub trait Analysis: Send + Sync {
    type Value: Clone + Eq + Hash + Debug + Send + Sync;

    fn name(&self) -> &'static str;
    fn kind(&self) -> Kind;
    fn top(&self) -> Self::Value;
    fn is_top(&self, v: &Self::Value) -> bool;
    fn meet(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    /// `a ⊑ b`.
    fn leq(&self, a: &Self::Value, b: &Self::Value) -> bool;
    /// Boundary value for a procedure nobody calls.
    fn boundary(&self, p: ProcId) -> Self::Value;
    fn transfer(&self, n: NodeId, v: &Self::Value) -> Self::Value;

    fn edge(&self, _e: EdgeId, v: &Self::Value) -> Self::Value {
        v.clone()
    }

    /// Widening applied at loop heads; `hist` counts earlier changes at the same point.
    fn widen(&self, _hist: &mut WidenHist, _old: &Self::Value, new: &Self::Value) -> Self::Value {
        new.clone()
    }

    fn needs_widening(&self) -> bool {
        false
    }

    /// Effect of call node `n` to `callee`. `callee_exit` is the callee's
    /// current folded exit value, for analyses without precomputed summaries.
    fn call(&self, n: NodeId, callee: ProcId, v: &Self::Value, callee_exit: &Self::Value) -> Self::Value;

    /// Whether `call` reads `callee_exit` (callers must be revisited when it changes).
    fn uses_callee_exit(&self) -> bool {
        false
    }

    /// The part of a call-site value that enters the callee.
    fn callee_entry(&self, callee: ProcId, at_call: &Self::Value) -> Self::Value;

    /// Exact return of a single callee path: caller value at the call and the
    /// callee's value at its exit. Used by the path oracle.
    fn return_combine(&self, callee: ProcId, at_call: &Self::Value, exit: &Self::Value) -> Self::Value;

    fn meet_all<'a>(&self, vs: impl IntoIterator<Item = &'a Self::Value>) -> Self::Value
    where
        Self::Value: 'a,
    {
        vs.into_iter().fold(self.top(), |acc, v| self.meet(&acc, v))
    }

    fn equiv(&self, a: &Self::Value, b: &Self::Value) -> bool {
        self.leq(a, b) && self.leq(b, a)
    }

    /// Render a value for reports.
    fn show(&self, prog: &Program, p: ProcId, v: &Self::Value) -> serde_json::Value;
}
