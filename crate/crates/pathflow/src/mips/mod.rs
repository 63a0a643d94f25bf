//! Minimal infeasible path segments: detection and the set operations the
//! lifting engine needs.

mod step1;
mod step2;

pub use step1::{detect_step1, edge_constraint, resolve, Answer, Query, QueryId, Step1, Subject};
pub use step2::detect_step2;

use crate::frontend::{fmt_edge, CallGraph, EdgeId, ProcId, Program};
use serde::Serialize;
use std::collections::BTreeSet;

pub type MipsId = u32;

/// A canonical (sorted, deduplicated) set of MIPS ids.
pub type MipsSet = Vec<MipsId>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mips {
    pub id: MipsId,
    pub proc: ProcId,
    pub edges: Vec<EdgeId>,
    pub satisfies_p: bool,
    pub query: Query,
}

impl Mips {
    pub fn start(&self) -> EdgeId {
        self.edges[0]
    }

    pub fn end(&self) -> EdgeId {
        *self.edges.last().expect("a MIPS has at least two edges")
    }

    pub fn inner(&self) -> &[EdgeId] {
        &self.edges[1..self.edges.len() - 1]
    }

    pub fn position(&self, e: EdgeId) -> Option<usize> {
        self.edges.iter().position(|x| *x == e)
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        self.edges.contains(&e)
    }

    /// Whether `seg` occurs contiguously in this MIPS.
    pub fn contains_segment(&self, seg: &[EdgeId]) -> bool {
        !seg.is_empty() && self.edges.windows(seg.len()).any(|w| w == seg)
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum MipsError {
    #[error("edge {edge} is not on MIPS µ{mips}")]
    EdgeNotInMips { edge: String, mips: u32 },
}

/// All admitted MIPS of a program, indexed by edge role.
#[derive(Clone, Debug, Default)]
pub struct Universe {
    pub mips: Vec<Mips>,
    by_proc: Vec<Vec<MipsId>>,
    starts: Vec<Vec<MipsId>>,
    inners: Vec<Vec<MipsId>>,
    ends: Vec<Vec<MipsId>>,
    on_edge: Vec<Vec<MipsId>>,
}

impl Universe {
    /// Builds the index; `mips` must already carry ids `0..n` in order.
    pub fn new(prog: &Program, mips: Vec<Mips>) -> Self {
        let ne = prog.edges.len();
        let mut u = Universe {
            by_proc: vec![Vec::new(); prog.procs.len()],
            starts: vec![Vec::new(); ne],
            inners: vec![Vec::new(); ne],
            ends: vec![Vec::new(); ne],
            on_edge: vec![Vec::new(); ne],
            mips: Vec::new(),
        };
        for m in &mips {
            debug_assert_eq!(m.id as usize, u.by_proc.iter().map(Vec::len).sum::<usize>());
            u.by_proc[m.proc].push(m.id);
            u.starts[m.start() as usize].push(m.id);
            u.ends[m.end() as usize].push(m.id);
            for e in m.inner() {
                u.inners[*e as usize].push(m.id);
            }
            for e in &m.edges {
                u.on_edge[*e as usize].push(m.id);
            }
        }
        u.mips = mips;
        u
    }

    pub fn empty(prog: &Program) -> Self {
        Universe::new(prog, Vec::new())
    }

    /// Runs both detection steps.
    pub fn detect(prog: &Program, cg: &CallGraph) -> Self {
        let s1 = detect_step1(prog, cg);
        detect_step2(prog, cg, &s1)
    }

    pub fn len(&self) -> usize {
        self.mips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mips.is_empty()
    }

    pub fn get(&self, id: MipsId) -> &Mips {
        &self.mips[id as usize]
    }

    pub fn of_proc(&self, p: ProcId) -> &[MipsId] {
        &self.by_proc[p]
    }

    pub fn starting_at(&self, e: EdgeId) -> &[MipsId] {
        &self.starts[e as usize]
    }

    pub fn inner_at(&self, e: EdgeId) -> &[MipsId] {
        &self.inners[e as usize]
    }

    pub fn ending_at(&self, e: EdgeId) -> &[MipsId] {
        &self.ends[e as usize]
    }

    pub fn on_edge(&self, e: EdgeId) -> &[MipsId] {
        &self.on_edge[e as usize]
    }

    /// `{µ ∈ M | e ∈ edges(µ)} ∪ {µ | e = start(µ)}`.
    pub fn ext(&self, e: EdgeId, m: &[MipsId]) -> MipsSet {
        let on = &self.on_edge[e as usize];
        let mut out: MipsSet = m.iter().copied().filter(|id| on.contains(id)).collect();
        out.extend_from_slice(&self.starts[e as usize]);
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Some MIPS of `m` ends at `e`.
    pub fn endof(&self, m: &[MipsId], e: EdgeId) -> bool {
        let ends = &self.ends[e as usize];
        m.iter().any(|id| ends.contains(id))
    }

    fn check_on(&self, e: EdgeId, mu: MipsId) -> Result<&Mips, MipsError> {
        let m = self.get(mu);
        if m.contains_edge(e) {
            Ok(m)
        } else {
            Err(MipsError::EdgeNotInMips { edge: fmt_edge(e), mips: mu + 1 })
        }
    }

    /// MIPS whose prefix up to `e` is contained in `mu`.
    pub fn cpo(&self, e: EdgeId, mu: MipsId) -> Result<MipsSet, MipsError> {
        let m = self.check_on(e, mu)?;
        Ok(self.on_edge[e as usize]
            .iter()
            .copied()
            .filter(|id| {
                let other = self.get(*id);
                let pos = other.position(e).expect("indexed edge");
                m.contains_segment(&other.edges[..=pos])
            })
            .collect())
    }

    /// MIPS whose suffix from `e` is contained in `mu`.
    pub fn cso(&self, e: EdgeId, mu: MipsId) -> Result<MipsSet, MipsError> {
        let m = self.check_on(e, mu)?;
        Ok(self.on_edge[e as usize]
            .iter()
            .copied()
            .filter(|id| {
                let other = self.get(*id);
                let pos = other.position(e).expect("indexed edge");
                m.contains_segment(&other.edges[pos..])
            })
            .collect())
    }

    /// Union of end edges of a set of MIPS.
    pub fn end_edges(&self, m: &[MipsId]) -> BTreeSet<EdgeId> {
        m.iter().map(|id| self.get(*id).end()).collect()
    }

    pub fn all_satisfy_p(&self, m: &[MipsId]) -> bool {
        m.iter().all(|id| self.get(*id).satisfies_p)
    }

    pub fn report(&self, prog: &Program) -> Vec<MipsReport> {
        self.mips
            .iter()
            .map(|m| MipsReport {
                id: m.id + 1,
                proc: prog.proc(m.proc).name.clone(),
                edges: m.edges.iter().map(|e| fmt_edge(*e)).collect(),
                start: fmt_edge(m.start()),
                inner: m.inner().iter().map(|e| fmt_edge(*e)).collect(),
                end: fmt_edge(m.end()),
                satisfies_p: m.satisfies_p,
                end_condition: m.query.describe(prog),
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct MipsReport {
    pub id: u32,
    pub proc: String,
    pub edges: Vec<String>,
    pub start: String,
    pub inner: Vec<String>,
    pub end: String,
    pub satisfies_p: bool,
    pub end_condition: String,
}

pub fn fmt_mips_set(m: &[MipsId]) -> String {
    let ids: Vec<String> = m.iter().map(|id| format!("µ{}", id + 1)).collect();
    format!("{{{}}}", ids.join(","))
}
