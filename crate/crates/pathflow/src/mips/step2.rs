//! Start/inner/end marking and materialization of MIPS edge sequences.

use super::step1::{Answer, QueryId, Step1};
use super::{Mips, Universe};
use crate::frontend::{CallGraph, EdgeId, NodeId, NodeKind, ProcId, Program};
use std::collections::HashSet;

/// Upper bound on materialized walks per query.
pub const WALK_CAP: usize = 256;

struct Candidate {
    proc: ProcId,
    edges: Vec<EdgeId>,
    satisfies_p: bool,
    query: QueryId,
}

fn modifies_any(prog: &Program, cg: &CallGraph, n: NodeId, vars: &[u32]) -> bool {
    match &prog.node(n).kind {
        NodeKind::Call(q) => vars.iter().any(|v| cg.modifies(*q).contains(v)),
        _ => prog.defined_var(n).is_some_and(|v| vars.contains(&v)),
    }
}

/// Every node-simple walk `start → inner* → ex`.
fn walks(prog: &Program, start: EdgeId, ex: EdgeId, inner: &HashSet<EdgeId>, budget: &mut usize) -> Vec<Vec<EdgeId>> {
    let mut out = Vec::new();
    let first = prog.edge(start);
    if first.src == first.dst {
        return out;
    }
    let mut path = vec![start];
    let mut seen: HashSet<NodeId> = [first.src, first.dst].into_iter().collect();
    // Stack of successor cursors, one per edge on `path`.
    let mut cursors: Vec<usize> = vec![0];
    while let Some(cur) = cursors.last_mut() {
        let last = *path.last().expect("nonempty");
        let succs = prog.succ_edges(last);
        if *cur >= succs.len() || *budget == 0 {
            cursors.pop();
            let e = path.pop().expect("nonempty");
            if !path.is_empty() {
                seen.remove(&prog.edge(e).dst);
            }
            continue;
        }
        let next = succs[*cur];
        *cur += 1;
        let dst = prog.edge(next).dst;
        if seen.contains(&dst) {
            continue;
        }
        if next == ex {
            let mut w = path.clone();
            w.push(ex);
            out.push(w);
            *budget -= 1;
        } else if inner.contains(&next) {
            path.push(next);
            seen.insert(dst);
            cursors.push(0);
        }
    }
    out
}

pub fn detect_step2(prog: &Program, cg: &CallGraph, s1: &Step1) -> Universe {
    let mut reached: Vec<Vec<EdgeId>> = vec![Vec::new(); s1.queries.len()];
    for (e, qs) in s1.reached.iter().enumerate() {
        for q in qs {
            reached[*q as usize].push(e as EdgeId);
        }
    }

    let mut cands: Vec<Candidate> = Vec::new();
    for q in &s1.queries {
        let r = &reached[q.id as usize];
        let propagated = |e: EdgeId| s1.answer(e, q.id).is_none();
        let mut doomed: HashSet<EdgeId> =
            r.iter().copied().filter(|e| s1.answer(*e, q.id) == Some(Answer::False)).collect();
        if doomed.is_empty() {
            continue;
        }
        loop {
            let grow: Vec<EdgeId> = r
                .iter()
                .copied()
                .filter(|e| {
                    let preds = prog.pred_edges(*e);
                    !doomed.contains(e)
                        && propagated(*e)
                        && prog.edge(*e).is_conditional()
                        && !preds.is_empty()
                        && preds.iter().all(|p| doomed.contains(p))
                })
                .collect();
            if grow.is_empty() {
                break;
            }
            doomed.extend(grow);
        }
        let inner: HashSet<EdgeId> = r.iter().copied().filter(|e| propagated(*e) && !doomed.contains(e)).collect();
        let mut starts: Vec<EdgeId> = doomed
            .iter()
            .copied()
            .filter(|e| prog.succ_edges(*e).iter().any(|s| *s == q.origin || inner.contains(s)))
            .collect();
        starts.sort_unstable();

        let vars = q.subject.vars();
        let mut budget = WALK_CAP;
        for s in starts {
            for w in walks(prog, s, q.origin, &inner, &mut budget) {
                let resolved_here = s1.answer(s, q.id) == Some(Answer::False);
                let clean = w[1..].iter().all(|e| !modifies_any(prog, cg, prog.edge(*e).src, &vars));
                cands.push(Candidate {
                    proc: prog.proc_of_edge(s),
                    edges: w,
                    satisfies_p: resolved_here && clean,
                    query: q.id,
                });
            }
        }
        if budget == 0 {
            log::warn!("query at e{} hit the walk cap of {WALK_CAP}", q.origin + 1);
        }
    }

    let contains = |big: &[EdgeId], small: &[EdgeId]| small.len() < big.len() && big.windows(small.len()).any(|w| w == small);
    let keep: Vec<bool> =
        cands.iter().map(|c| !cands.iter().any(|d| contains(&c.edges, &d.edges))).collect();
    let mut kept: Vec<Candidate> = cands.into_iter().zip(keep).filter(|(_, k)| *k).map(|(c, _)| c).collect();
    kept.sort_by(|a, b| {
        (a.proc, a.edges.last(), a.edges[0], &a.edges).cmp(&(b.proc, b.edges.last(), b.edges[0], &b.edges))
    });
    let mips = kept
        .into_iter()
        .enumerate()
        .map(|(i, c)| Mips {
            id: i as u32,
            proc: c.proc,
            edges: c.edges,
            satisfies_p: c.satisfies_p,
            query: s1.queries[c.query as usize].clone(),
        })
        .collect();
    Universe::new(prog, mips)
}
