//! Client reports built on solved analyses: def-use pairs, possibly
//! uninitialized uses, and MFP-vs-FPMFP comparisons.

use crate::fpmfp::{OptConfig, PairStats};
use crate::frontend::{fmt_edge, fmt_node, NodeId, Program, VarId};
use crate::lattice::{Analysis, BitVal, BitVector, ReachingDefs};
use crate::mfp::SolveError;
use crate::pipeline::{intervals, must_defined, reaching_defs, run, AnalysisKind, Context, Mode, Run};
use serde_json::{json, Value};
use std::time::Duration;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DefUse {
    pub def: NodeId,
    pub use_: NodeId,
    pub var: VarId,
}

impl DefUse {
    pub fn to_json(&self, prog: &Program) -> Value {
        json!({ "def": fmt_node(self.def), "use": fmt_node(self.use_), "var": prog.var_name(self.var) })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Alarm {
    pub use_: NodeId,
    pub var: VarId,
}

impl Alarm {
    pub fn to_json(&self, prog: &Program) -> Value {
        json!({ "use": fmt_node(self.use_), "var": prog.var_name(self.var) })
    }
}

/// `(mfp - fpmfp) / mfp` in percent; `None` when MFP reports nothing.
pub fn reduction(mfp: usize, fpmfp: usize) -> Option<f64> {
    (mfp > 0).then(|| 100.0 * (mfp as f64 - fpmfp as f64) / mfp as f64)
}

/// Renders a reduction the way the tables print it: two decimals or "-".
pub fn fmt_reduction(r: Option<f64>) -> String {
    r.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

/// One pair per reaching definition of a variable used at a node.
pub fn def_use_pairs(prog: &Program, rd: &BitVector<ReachingDefs>, ins: &[BitVal]) -> Vec<DefUse> {
    let mut out = Vec::new();
    for n in &prog.nodes {
        let used = prog.used_vars(n.id);
        if used.is_empty() {
            continue;
        }
        for f in rd.facts(&ins[n.id as usize]) {
            let (v, def) = rd.problem.def(f);
            if used.contains(&v) {
                out.push(DefUse { def, use_: n.id, var: v });
            }
        }
    }
    out.sort_unstable();
    out
}

/// A use of `v` at `n` alarms when `v` is not must-defined on entry to `n`.
/// Unreached nodes never alarm.
pub fn uninit_alarms(prog: &Program, ins: &[BitVal]) -> Vec<Alarm> {
    let mut out = Vec::new();
    for n in &prog.nodes {
        let BitVal::Set(s) = &ins[n.id as usize] else { continue };
        for v in prog.used_vars(n.id) {
            if !s.contains(v as usize) {
                out.push(Alarm { use_: n.id, var: v });
            }
        }
    }
    out
}

/// Both modes of one client, plus what FPMFP removed.
#[derive(Clone, Debug, PartialEq)]
pub struct ClientReport<T> {
    pub mfp: Vec<T>,
    pub fpmfp: Vec<T>,
}

impl<T: Ord + Copy> ClientReport<T> {
    pub fn removed(&self) -> Vec<T> {
        self.mfp.iter().copied().filter(|x| self.fpmfp.binary_search(x).is_err()).collect()
    }

    /// Items FPMFP reports that MFP does not; always empty for a sound solver.
    pub fn added(&self) -> Vec<T> {
        self.fpmfp.iter().copied().filter(|x| self.mfp.binary_search(x).is_err()).collect()
    }

    pub fn reduction(&self) -> Option<f64> {
        reduction(self.mfp.len(), self.fpmfp.len())
    }

    pub fn to_json(&self, show: impl Fn(&T) -> Value) -> Value {
        json!({
            "mfp": { "total": self.mfp.len(), "items": self.mfp.iter().map(&show).collect::<Vec<_>>() },
            "fpmfp": { "total": self.fpmfp.len(), "items": self.fpmfp.iter().map(&show).collect::<Vec<_>>() },
            "removed": self.removed().iter().map(&show).collect::<Vec<_>>(),
            "reduction": fmt_reduction(self.reduction()),
        })
    }
}

pub type DefUseReport = ClientReport<DefUse>;
pub type UninitReport = ClientReport<Alarm>;

pub fn def_use_report(ctx: &Context, opts: OptConfig) -> Result<DefUseReport, SolveError> {
    let side = |mode| -> Result<Vec<DefUse>, SolveError> {
        let a = reaching_defs(ctx, mode, opts)?;
        let r = run(ctx, &a, mode, opts)?;
        Ok(def_use_pairs(&ctx.prog, &a, &r.ins))
    };
    Ok(ClientReport { mfp: side(Mode::Mfp)?, fpmfp: side(Mode::Fpmfp)? })
}

pub fn uninit_report(ctx: &Context, opts: OptConfig) -> Result<UninitReport, SolveError> {
    let side = |mode| -> Result<Vec<Alarm>, SolveError> {
        let a = must_defined(ctx, mode, opts)?;
        let r = run(ctx, &a, mode, opts)?;
        let mut v = uninit_alarms(&ctx.prog, &r.ins);
        v.sort_unstable();
        Ok(v)
    };
    Ok(ClientReport { mfp: side(Mode::Mfp)?, fpmfp: side(Mode::Fpmfp)? })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Equal,
    /// FPMFP strictly more precise.
    Better,
    /// MFP ⊑ FPMFP fails.
    Violation,
}

impl Relation {
    pub fn name(self) -> &'static str {
        match self {
            Relation::Equal => "equal",
            Relation::Better => "better",
            Relation::Violation => "violation",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointCompare {
    pub at: String,
    pub relation: Relation,
    pub mfp: Value,
    pub fpmfp: Value,
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub analysis: AnalysisKind,
    pub opts: OptConfig,
    pub nodes: Vec<PointCompare>,
    pub edges: Vec<PointCompare>,
    pub mfp_time: Duration,
    pub fpmfp_time: Duration,
    pub mfp_steps: usize,
    pub fpmfp_steps: usize,
    pub pairs: PairStats,
}

impl ComparisonReport {
    pub fn violations(&self) -> Vec<&str> {
        self.nodes.iter().filter(|p| p.relation == Relation::Violation).map(|p| p.at.as_str()).collect()
    }

    pub fn improved_nodes(&self) -> Vec<&str> {
        self.nodes.iter().filter(|p| p.relation == Relation::Better).map(|p| p.at.as_str()).collect()
    }

    pub fn improved_edges(&self) -> Vec<&str> {
        self.edges.iter().filter(|p| p.relation == Relation::Better).map(|p| p.at.as_str()).collect()
    }

    pub fn to_json(&self, timing: bool) -> Value {
        let points = |ps: &[PointCompare]| -> Vec<Value> {
            ps.iter()
                .map(|p| match p.relation {
                    Relation::Equal => json!({ "at": p.at, "relation": p.relation.name() }),
                    _ => json!({ "at": p.at, "relation": p.relation.name(), "mfp": p.mfp, "fpmfp": p.fpmfp }),
                })
                .collect()
        };
        let mut v = json!({
            "analysis": self.analysis.name(),
            "opts": self.opts.label(),
            "mfp_below_fpmfp": self.violations().is_empty(),
            "improved_nodes": self.improved_nodes(),
            "improved_edges": self.improved_edges(),
            "nodes": points(&self.nodes),
            "edges": points(&self.edges),
            "steps": { "mfp": self.mfp_steps, "fpmfp": self.fpmfp_steps },
            "pairs": {
                "max_live": self.pairs.max_live,
                "avg_live": (self.pairs.avg_live * 1000.0).round() / 1000.0,
                "max_seen": self.pairs.max_seen,
                "bound_slack": self.pairs.worst_slack,
            },
        });
        if timing {
            let ms = |d: Duration| d.as_secs_f64() * 1000.0;
            let ratio = if self.mfp_time.is_zero() { Value::Null } else { json!(ms(self.fpmfp_time) / ms(self.mfp_time)) };
            v["timing_ms"] = json!({ "mfp": ms(self.mfp_time), "fpmfp": ms(self.fpmfp_time), "ratio": ratio });
        }
        v
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CompareError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("precision violation: MFP is not below FPMFP at {}", .nodes.join(", "))]
    PrecisionViolation { nodes: Vec<String>, report: Box<ComparisonReport> },
}

fn relation<A: Analysis>(a: &A, mfp: &A::Value, fpmfp: &A::Value) -> Relation {
    match (a.leq(mfp, fpmfp), a.leq(fpmfp, mfp)) {
        (true, true) => Relation::Equal,
        (true, false) => Relation::Better,
        _ => Relation::Violation,
    }
}

fn compare_runs<A: Analysis>(ctx: &Context, kind: AnalysisKind, opts: OptConfig, a: &A, m: Run<A::Value>, f: Run<A::Value>) -> ComparisonReport {
    let prog = &ctx.prog;
    let point = |at: String, p, x: &A::Value, y: &A::Value| PointCompare {
        at,
        relation: relation(a, x, y),
        mfp: a.show(prog, p, x),
        fpmfp: a.show(prog, p, y),
    };
    let nodes = prog.nodes.iter().map(|n| point(fmt_node(n.id), n.proc, &m.ins[n.id as usize], &f.ins[n.id as usize])).collect();
    let edges = prog
        .edges
        .iter()
        .map(|e| point(fmt_edge(e.id), prog.proc_of_edge(e.id), &m.edges[e.id as usize], &f.edges[e.id as usize]))
        .collect();
    ComparisonReport {
        analysis: kind,
        opts,
        nodes,
        edges,
        mfp_time: m.elapsed,
        fpmfp_time: f.elapsed,
        mfp_steps: m.steps,
        fpmfp_steps: f.steps,
        pairs: f.stats.expect("fpmfp run"),
    }
}

/// Solves `kind` in both modes and relates them at every node and edge.
pub fn compare_modes(ctx: &Context, kind: AnalysisKind, opts: OptConfig) -> Result<ComparisonReport, CompareError> {
    let report = match kind {
        AnalysisKind::Rd => {
            let (am, af) = (reaching_defs(ctx, Mode::Mfp, opts)?, reaching_defs(ctx, Mode::Fpmfp, opts)?);
            let (m, f) = (run(ctx, &am, Mode::Mfp, opts)?, run(ctx, &af, Mode::Fpmfp, opts)?);
            compare_runs(ctx, kind, opts, &af, m, f)
        }
        AnalysisKind::Uninit => {
            let (am, af) = (must_defined(ctx, Mode::Mfp, opts)?, must_defined(ctx, Mode::Fpmfp, opts)?);
            let (m, f) = (run(ctx, &am, Mode::Mfp, opts)?, run(ctx, &af, Mode::Fpmfp, opts)?);
            compare_runs(ctx, kind, opts, &af, m, f)
        }
        AnalysisKind::Interval => {
            let a = intervals(ctx);
            let (m, f) = (run(ctx, &a, Mode::Mfp, opts)?, run(ctx, &a, Mode::Fpmfp, opts)?);
            compare_runs(ctx, kind, opts, &a, m, f)
        }
    };
    let bad: Vec<String> = report.violations().into_iter().map(String::from).collect();
    if bad.is_empty() {
        Ok(report)
    } else {
        Err(CompareError::PrecisionViolation { nodes: bad, report: Box::new(report) })
    }
}
