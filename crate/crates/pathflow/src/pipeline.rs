//! Glue between the pieces: build a program's context once, instantiate an
//! analysis for a solving mode, and run it.

use crate::fpmfp::{fold, pair_stats, solve_fpmfp, FpmfpSolution, LiftedExits, OptConfig, PairStats};
use crate::frontend::{parse_program, CallGraph, FrontendError, Program};
use crate::lattice::{Analysis, BitVector, BitVectorProblem, IntervalAnalysis, MustDefined, ReachingDefs};
use crate::mfp::{compute_summaries, solve_mfp, MfpExits, SolveError};
use crate::mips::Universe;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AnalysisKind {
    Rd,
    Uninit,
    Interval,
}

impl AnalysisKind {
    pub const ALL: [AnalysisKind; 3] = [AnalysisKind::Rd, AnalysisKind::Uninit, AnalysisKind::Interval];

    pub fn name(self) -> &'static str {
        match self {
            AnalysisKind::Rd => "rd",
            AnalysisKind::Uninit => "uninit",
            AnalysisKind::Interval => "interval",
        }
    }
}

impl fmt::Display for AnalysisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AnalysisKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rd" => Ok(AnalysisKind::Rd),
            "uninit" => Ok(AnalysisKind::Uninit),
            "interval" => Ok(AnalysisKind::Interval),
            other => Err(format!("unknown analysis `{other}` (expected rd, uninit or interval)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Mfp,
    Fpmfp,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Mfp => "mfp",
            Mode::Fpmfp => "fpmfp",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mfp" => Ok(Mode::Mfp),
            "fpmfp" => Ok(Mode::Fpmfp),
            other => Err(format!("unknown mode `{other}` (expected mfp or fpmfp)")),
        }
    }
}

/// A parsed program with its call graph and detected MIPS.
#[derive(Clone, Debug)]
pub struct Context {
    pub prog: Program,
    pub cg: CallGraph,
    pub universe: Universe,
}

impl Context {
    pub fn new(prog: Program) -> Self {
        let cg = CallGraph::build(&prog);
        let universe = Universe::detect(&prog, &cg);
        Context { prog, cg, universe }
    }

    pub fn parse(src: &str) -> Result<Self, FrontendError> {
        Ok(Context::new(parse_program(src)?))
    }

    /// Same program with no MIPS at all.
    pub fn without_mips(&self) -> Self {
        Context { prog: self.prog.clone(), cg: self.cg.clone(), universe: Universe::empty(&self.prog) }
    }
}

/// Attaches call summaries computed in the given mode.
pub fn bitvector<P: BitVectorProblem>(
    ctx: &Context,
    problem: P,
    mode: Mode,
    opts: OptConfig,
) -> Result<BitVector<P>, SolveError> {
    let sums = match mode {
        Mode::Mfp => compute_summaries(&ctx.prog, &ctx.cg, &problem, &MfpExits)?,
        Mode::Fpmfp => compute_summaries(&ctx.prog, &ctx.cg, &problem, &LiftedExits { universe: &ctx.universe, opts })?,
    };
    Ok(BitVector::new(problem, sums))
}

pub fn reaching_defs(ctx: &Context, mode: Mode, opts: OptConfig) -> Result<BitVector<ReachingDefs>, SolveError> {
    bitvector(ctx, ReachingDefs::new(&ctx.prog), mode, opts)
}

pub fn must_defined(ctx: &Context, mode: Mode, opts: OptConfig) -> Result<BitVector<MustDefined>, SolveError> {
    bitvector(ctx, MustDefined::new(&ctx.prog), mode, opts)
}

pub fn intervals(ctx: &Context) -> IntervalAnalysis<'_> {
    IntervalAnalysis::new(&ctx.prog, &ctx.cg)
}

/// Result of one solver run, folded to plain lattice values.
#[derive(Clone, Debug)]
pub struct Run<V> {
    pub mode: Mode,
    pub ins: Vec<V>,
    pub outs: Vec<V>,
    pub edges: Vec<V>,
    pub lifted: Option<FpmfpSolution<V>>,
    pub stats: Option<PairStats>,
    pub steps: usize,
    pub elapsed: Duration,
}

pub fn run<A: Analysis>(ctx: &Context, a: &A, mode: Mode, opts: OptConfig) -> Result<Run<A::Value>, SolveError> {
    let t = Instant::now();
    match mode {
        Mode::Mfp => {
            let sol = solve_mfp(&ctx.prog, &ctx.cg, a)?;
            Ok(Run {
                mode,
                ins: sol.ins,
                outs: sol.outs,
                edges: sol.edges,
                lifted: None,
                stats: None,
                steps: sol.steps,
                elapsed: t.elapsed(),
            })
        }
        Mode::Fpmfp => {
            let sol = solve_fpmfp(&ctx.prog, &ctx.cg, a, &ctx.universe, opts)?;
            let elapsed = t.elapsed();
            let stats = pair_stats(&ctx.prog, a, &ctx.universe, &sol);
            Ok(Run {
                mode,
                ins: sol.ins.iter().map(|v| fold(a, v)).collect(),
                outs: sol.outs.iter().map(|v| fold(a, v)).collect(),
                edges: sol.edges.iter().map(|v| fold(a, v)).collect(),
                steps: sol.steps,
                stats: Some(stats),
                lifted: Some(sol),
                elapsed,
            })
        }
    }
}

/// Instantiates the analysis for `mode` (summaries included) and runs it.
/// The closure sees the analysis and the run.
pub fn with_analysis<R>(
    ctx: &Context,
    kind: AnalysisKind,
    mode: Mode,
    opts: OptConfig,
    k: impl AnalysisVisitor<Output = R>,
) -> Result<R, SolveError> {
    match kind {
        AnalysisKind::Rd => {
            let a = reaching_defs(ctx, mode, opts)?;
            let r = run(ctx, &a, mode, opts)?;
            Ok(k.visit(ctx, &a, r))
        }
        AnalysisKind::Uninit => {
            let a = must_defined(ctx, mode, opts)?;
            let r = run(ctx, &a, mode, opts)?;
            Ok(k.visit(ctx, &a, r))
        }
        AnalysisKind::Interval => {
            let a = intervals(ctx);
            let r = run(ctx, &a, mode, opts)?;
            Ok(k.visit(ctx, &a, r))
        }
    }
}

/// Consumer of a run whose analysis type is only known at runtime.
pub trait AnalysisVisitor {
    type Output;
    fn visit<A: Analysis>(self, ctx: &Context, a: &A, run: Run<A::Value>) -> Self::Output;
}
