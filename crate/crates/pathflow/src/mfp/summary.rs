use super::SolveError;
use crate::frontend::{CallGraph, ProcId, Program};
use crate::lattice::{Analysis, BitVal, BitVectorProblem, GenProblem, KillProblem, Summary};
use crate::par;

/// Solves one procedure from its own boundary and returns the value at its exit.
pub trait ExitSolver: Sync {
    fn exit_value<A: Analysis>(&self, prog: &Program, p: ProcId, a: &A) -> Result<A::Value, SolveError>;
}

/// Bottom-up KSUM/GSUM for every procedure. Callees are summarized before
/// callers; SCCs of one call-graph level run in parallel, and each
/// recursive SCC is re-solved until its summaries stop changing.
pub fn compute_summaries<P: BitVectorProblem, S: ExitSolver>(
    prog: &Program,
    cg: &CallGraph,
    problem: &P,
    solver: &S,
) -> Result<Vec<Option<Summary>>, SolveError> {
    let np = prog.procs.len();
    let sccs = cg.sccs();
    let mut level = vec![0usize; sccs.len()];
    for (i, scc) in sccs.iter().enumerate() {
        for &p in scc {
            for q in cg.callees(p) {
                let j = cg.scc_of(q);
                if j != i {
                    level[i] = level[i].max(level[j] + 1);
                }
            }
        }
    }
    let depth = level.iter().copied().max().map_or(0, |d| d + 1);
    let mut sums: Vec<Option<Summary>> = vec![None; np];
    for l in 0..depth {
        let group: Vec<&Vec<ProcId>> = sccs.iter().zip(&level).filter(|(_, x)| **x == l).map(|(s, _)| s).collect();
        let results = par::map(&group, |scc| solve_scc(prog, problem, solver, scc, &sums));
        for r in results {
            for (p, s) in r? {
                sums[p] = s;
            }
        }
    }
    Ok(sums)
}

fn solve_scc<P: BitVectorProblem, S: ExitSolver>(
    prog: &Program,
    problem: &P,
    solver: &S,
    scc: &[ProcId],
    sums: &[Option<Summary>],
) -> Result<Vec<(ProcId, Option<Summary>)>, SolveError> {
    let mut local = sums.to_vec();
    let limit = 64 * (scc.len() + 1) * (problem.width() + 1);
    for _ in 0..limit {
        let mut changed = false;
        for &p in scc {
            let kill = solver.exit_value(prog, p, &KillProblem { problem, summaries: &local })?;
            let gen = solver.exit_value(prog, p, &GenProblem { problem, summaries: &local })?;
            let s = match (kill, gen) {
                (BitVal::Set(mut k), BitVal::Set(mut g)) => {
                    k.intersect_with(problem.global_facts());
                    g.intersect_with(problem.global_facts());
                    Some(Summary { kill: k, gen: g })
                }
                _ => None,
            };
            if s != local[p] {
                local[p] = s;
                changed = true;
            }
        }
        if !changed {
            return Ok(scc.iter().map(|&p| (p, local[p].clone())).collect());
        }
    }
    Err(SolveError::NonTermination { proc: prog.proc(scc[0]).name.clone(), limit })
}
