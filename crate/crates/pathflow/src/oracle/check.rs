use super::{infeasibility_witness, meets, Bounds, Filter, OracleError, WITNESS_BUDGET};
use crate::fpmfp::OptConfig;
use crate::frontend::{fmt_edge, fmt_node};
use crate::lattice::Analysis;
use crate::mfp::SolveError;
use crate::pipeline::{intervals, must_defined, reaching_defs, run, AnalysisKind, Context, Mode};
use crate::mips::fmt_mips_set;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    MfpBelowFpmfp,
    FpmfpBelowOracle,
    PairBelowOracle,
    DistributiveEquality,
    OptNeutrality,
    PairBound,
    MipsWitness,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub property: Property,
    pub analysis: String,
    pub at: String,
    pub detail: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CheckError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Outcome of checking one analysis on one program.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Checked {
    pub properties: Vec<Property>,
    pub paths: usize,
    /// Bounds the oracle finally ran with.
    pub bounds: Option<Bounds>,
    pub violations: Vec<Violation>,
}

/// Whether bounded enumeration reaches every path: no loops, no recursion.
pub fn exhaustive(ctx: &Context) -> bool {
    ctx.prog.is_acyclic() && (0..ctx.prog.procs.len()).all(|p| !ctx.cg.is_recursive(p))
}

/// Bound large enough to enumerate every path of an [`exhaustive`] program.
pub fn exhaustive_bounds() -> Bounds {
    Bounds::new(usize::MAX, 0)
}

/// Runs the soundness chain, pair check, neutrality and pair bound for one analysis.
/// The oracle retries with [`Bounds::tighter`] bounds when enumeration explodes.
/// Distributive equality is added for the bit-vector analyses when
/// enumeration is exhaustive.
pub fn check(ctx: &Context, kind: AnalysisKind, bounds: Bounds) -> Result<Checked, CheckError> {
    let (all, none) = (OptConfig::all(), OptConfig::none());
    match kind {
        AnalysisKind::Rd => {
            let m = reaching_defs(ctx, Mode::Mfp, all)?;
            let f = reaching_defs(ctx, Mode::Fpmfp, all)?;
            let f0 = reaching_defs(ctx, Mode::Fpmfp, none)?;
            check_with(ctx, kind, [&m, &f, &f0], bounds, true)
        }
        AnalysisKind::Uninit => {
            let m = must_defined(ctx, Mode::Mfp, all)?;
            let f = must_defined(ctx, Mode::Fpmfp, all)?;
            let f0 = must_defined(ctx, Mode::Fpmfp, none)?;
            check_with(ctx, kind, [&m, &f, &f0], bounds, true)
        }
        AnalysisKind::Interval => {
            let a = intervals(ctx);
            check_with(ctx, kind, [&a, &a, &a], bounds, false)
        }
    }
}

fn check_with<A: Analysis>(
    ctx: &Context,
    kind: AnalysisKind,
    [am, af, af0]: [&A; 3],
    bounds: Bounds,
    distributive: bool,
) -> Result<Checked, CheckError> {
    let prog = &ctx.prog;
    let mut out = Checked::default();
    let flag = |property, at: String, detail: String| Violation { property, analysis: kind.to_string(), at, detail };
    let mut violations = Vec::new();

    let m = run(ctx, am, Mode::Mfp, OptConfig::all())?;
    let f = run(ctx, af, Mode::Fpmfp, OptConfig::all())?;
    let f0 = run(ctx, af0, Mode::Fpmfp, OptConfig::none())?;
    let show = |a: &A, n: u32, v: &A::Value| a.show(prog, prog.node(n).proc, v).to_string();

    out.properties.push(Property::MfpBelowFpmfp);
    for n in &prog.nodes {
        let i = n.id as usize;
        if !af.leq(&m.ins[i], &f.ins[i]) {
            violations.push(flag(
                Property::MfpBelowFpmfp,
                fmt_node(n.id),
                format!("mfp {} vs fpmfp {}", show(am, n.id, &m.ins[i]), show(af, n.id, &f.ins[i])),
            ));
        }
    }

    out.properties.push(Property::OptNeutrality);
    for n in &prog.nodes {
        let i = n.id as usize;
        if f.ins[i] != f0.ins[i] || f.outs[i] != f0.outs[i] {
            violations.push(flag(
                Property::OptNeutrality,
                fmt_node(n.id),
                format!("opts 1,2,3 {} vs none {}", show(af, n.id, &f.ins[i]), show(af0, n.id, &f0.ins[i])),
            ));
        }
    }

    out.properties.push(Property::PairBound);
    for (label, r) in [("1,2,3", &f), ("none", &f0)] {
        let s = r.stats.as_ref().expect("fpmfp run");
        if s.worst_slack > 0 {
            violations.push(flag(Property::PairBound, "program".into(), format!("opts {label}: exceeded |U|+1 by {}", s.worst_slack)));
        }
    }

    // a meet over fewer paths only rises, so shrinking the bound keeps the check valid
    let exact = distributive && exhaustive(ctx);
    let mut bounds = if exact { exhaustive_bounds() } else { bounds };
    let oracle = loop {
        match meets(prog, &ctx.cg, &ctx.universe, af0, bounds, Filter::MipsFree) {
            Ok(o) => break o,
            Err(OracleError::Explosion(n)) => match bounds.tighter().filter(|_| !exact) {
                Some(b) => {
                    log::debug!("oracle explosion at {bounds:?}, retrying with {b:?}");
                    bounds = b;
                }
                None => return Err(OracleError::Explosion(n).into()),
            },
        }
    };
    out.paths = oracle.paths;
    out.bounds = Some(bounds);

    out.properties.push(Property::FpmfpBelowOracle);
    for n in &prog.nodes {
        let i = n.id as usize;
        if !af.leq(&f.ins[i], &oracle.ins[i]) {
            violations.push(flag(
                Property::FpmfpBelowOracle,
                fmt_node(n.id),
                format!("fpmfp {} vs oracle {}", show(af, n.id, &f.ins[i]), show(af, n.id, &oracle.ins[i])),
            ));
        }
    }

    out.properties.push(Property::PairBelowOracle);
    let lifted = f0.lifted.as_ref().expect("fpmfp run");
    for e in &prog.edges {
        for (key, want) in &oracle.pairs[e.id as usize] {
            let top = af0.top();
            let got = lifted.edge(e.id).get(key).unwrap_or(&top);
            if !af0.leq(got, want) {
                violations.push(flag(
                    Property::PairBelowOracle,
                    format!("{} {}", fmt_edge(e.id), fmt_mips_set(key)),
                    format!("stored {} vs oracle {}", show(af0, e.src, got), show(af0, e.src, want)),
                ));
            }
        }
    }

    if exact {
        out.properties.push(Property::DistributiveEquality);
        for n in &prog.nodes {
            let i = n.id as usize;
            if !af.equiv(&f.ins[i], &oracle.ins[i]) {
                violations.push(flag(
                    Property::DistributiveEquality,
                    fmt_node(n.id),
                    format!("fpmfp {} vs oracle {}", show(af, n.id, &f.ins[i]), show(af, n.id, &oracle.ins[i])),
                ));
            }
        }
    }
    out.violations = violations;
    Ok(out)
}

/// Concrete-execution witness summary for one program.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Witnessed {
    pub violations: Vec<Violation>,
    pub runs: usize,
    /// Procedures explored only up to the run budget.
    pub truncated: Vec<String>,
}

/// Concrete-execution witness that every MIPS satisfying 𝒫 is infeasible.
pub fn check_witness(ctx: &Context) -> Witnessed {
    let w = infeasibility_witness(&ctx.prog, &ctx.universe, WITNESS_BUDGET);
    let violations = w
        .violations
        .into_iter()
        .map(|v| Violation {
            property: Property::MipsWitness,
            analysis: "-".into(),
            at: format!("µ{}", v.mips + 1),
            detail: format!("executed in {} over a trace of {} steps", ctx.prog.proc(v.proc).name, v.trace.len()),
        })
        .collect();
    Witnessed { violations, runs: w.runs, truncated: w.truncated.iter().map(|p| ctx.prog.proc(*p).name.clone()).collect() }
}
