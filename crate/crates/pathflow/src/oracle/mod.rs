//! Brute-force reference semantics: bounded path enumeration, path meets
//! and a concrete interpreter over a small input box.

mod check;
mod exec;
mod paths;

pub use check::{check, check_witness, exhaustive, exhaustive_bounds, CheckError, Checked, Property, Violation, Witnessed};
pub use exec::{execute, infeasibility_witness, traces, Run, RunEnd, Witness, WitnessViolation, INPUT_BOX, LOOP_CAP, WITNESS_BUDGET};
pub use paths::{enumerate_paths, eval_path, meets, path_meet, trace_meets, Filter, Meets, Path, Target};

use crate::frontend::{EdgeId, NodeId, Program};
use crate::mips::{MipsId, MipsSet, Universe};

/// Most paths (or concrete runs) an oracle query may visit.
pub const EXPLOSION_LIMIT: usize = 1_000_000;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("explosion: more than {0} paths")]
    Explosion(usize),
}

/// One step of an interprocedural path. `Call(n)` enters the callee of call
/// node `n`; `Return(n)` leaves the callee's exit back to `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    Edge(EdgeId),
    Call(NodeId),
    Return(NodeId),
}

/// Enumeration bounds: at most `max_len` edges per path and at most
/// `back_edge_budget` traversals of any single back edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Bounds {
    pub max_len: usize,
    pub back_edge_budget: u32,
}

impl Bounds {
    pub fn new(max_len: usize, back_edge_budget: u32) -> Self {
        Bounds { max_len, back_edge_budget }
    }

    /// `L = 2·|edges|`, `k = 2`.
    pub fn for_program(prog: &Program) -> Self {
        Bounds::new(2 * prog.edges.len().max(1), 2)
    }

    /// `L = |edges|`, `k = 1`: the starting bound for batch checks over
    /// generated programs, where [`Bounds::for_program`] is too slow.
    pub fn batch(prog: &Program) -> Self {
        Bounds::new(prog.edges.len().max(1), 1)
    }

    /// The next smaller bound to retry with after an explosion: the loop
    /// budget drops first, then the length by a quarter. `None` once both
    /// are exhausted.
    pub fn tighter(self) -> Option<Bounds> {
        if self.back_edge_budget > 0 {
            Some(Bounds { back_edge_budget: self.back_edge_budget - 1, ..self })
        } else if self.max_len > 4 {
            Some(Bounds { max_len: self.max_len * 3 / 4, ..self })
        } else {
            None
        }
    }
}

/// The MIPS prefixes a frame's edge sequence currently ends with.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Matcher {
    active: Vec<(MipsId, usize)>,
}

impl Matcher {
    /// Extends the frame by `e`; also returns the MIPS completed by `e`.
    pub fn advance(&self, u: &Universe, e: EdgeId) -> (Matcher, Vec<MipsId>) {
        let mut active = Vec::new();
        let mut done = Vec::new();
        let mut push = |id: MipsId, pos: usize| {
            if pos + 1 == u.get(id).edges.len() {
                done.push(id);
            } else {
                active.push((id, pos));
            }
        };
        for &(id, pos) in &self.active {
            if u.get(id).edges.get(pos + 1) == Some(&e) {
                push(id, pos + 1);
            }
        }
        for &id in u.starting_at(e) {
            push(id, 0);
        }
        active.sort_unstable();
        active.dedup();
        (Matcher { active }, done)
    }

    /// MIPS whose prefix up to the last edge the frame ends with.
    pub fn key(&self) -> MipsSet {
        let mut k: MipsSet = self.active.iter().map(|(id, _)| *id).collect();
        k.dedup();
        k
    }
}

/// MIPS occurring contiguously within one frame of `steps`, sorted.
pub fn mips_in(u: &Universe, steps: &[Step]) -> Vec<MipsId> {
    let mut frames: Vec<Matcher> = vec![Matcher::default()];
    let mut found = Vec::new();
    for s in steps {
        match s {
            Step::Edge(e) => {
                let top = frames.last_mut().expect("root frame");
                let (m, done) = top.advance(u, *e);
                found.extend(done);
                *top = m;
            }
            Step::Call(_) => frames.push(Matcher::default()),
            Step::Return(_) => {
                frames.pop();
            }
        }
    }
    found.sort_unstable();
    found.dedup();
    found
}

#[cfg(test)]
mod tests;
