use super::*;
use crate::frontend::parse_program;
use crate::lattice::{BitVal, BitVector, Env, Interval, IntervalAnalysis, MustDefined, ReachingDefs};
use crate::testutil::fixture;

fn rd(prog: &Program, cg: &CallGraph) -> BitVector<ReachingDefs> {
    let problem = ReachingDefs::new(prog);
    let sums = compute_summaries(prog, cg, &problem, &MfpExits).unwrap();
    BitVector::new(problem, sums)
}

fn facts_at(an: &BitVector<ReachingDefs>, v: &BitVal) -> Vec<u32> {
    an.facts(v).into_iter().map(|f| an.problem.def(f).1 + 1).collect()
}

fn var(prog: &Program, p: &str, name: &str) -> u32 {
    prog.var_by_name(prog.proc_by_name(p).unwrap(), name).unwrap()
}

#[test]
fn fig2_interval_mfp() {
    let prog = fixture("fig2");
    let cg = CallGraph::build(&prog);
    let an = IntervalAnalysis::new(&prog, &cg);
    let sol = solve_mfp(&prog, &cg, &an).unwrap();
    let a = var(&prog, "main", "a");
    assert_eq!(sol.in_(5).get(a), Some(Interval::range(0, 5)));
    // the true edge of x >= 0 carries a = 5 after the increment
    assert_eq!(sol.out(2).get(a), Some(Interval::point(5)));
}

#[test]
fn fig3_mfp_loses_z() {
    let prog = fixture("fig3");
    let cg = CallGraph::build(&prog);
    let an = IntervalAnalysis::new(&prog, &cg);
    let sol = solve_mfp(&prog, &cg, &an).unwrap();
    let z = var(&prog, "main", "z");
    assert_eq!(sol.edge(3).get(z), Some(Interval::full()));
    assert_eq!(sol.edge(2).get(z), Some(Interval::new(crate::lattice::Bound::NegInf, crate::lattice::Bound::fin(0)).unwrap()));
}

#[test]
fn rd_kill_chain() {
    let prog = parse_program("proc m() { a = 0; a = 5; print a; }").unwrap();
    let cg = CallGraph::build(&prog);
    let an = rd(&prog, &cg);
    let sol = solve_mfp(&prog, &cg, &an).unwrap();
    assert_eq!(facts_at(&an, sol.in_(2)), vec![2]);
}

#[test]
fn fig7_summaries_and_boundary() {
    let prog = fixture("fig7");
    let cg = CallGraph::build(&prog);
    let an = rd(&prog, &cg);
    let q = prog.proc_by_name("q").unwrap();
    let s = an.summaries[q].clone().unwrap();
    let l_in_q = prog.proc(q).nodes.start + 1;
    let kill: Vec<u32> = s.kill.ones().map(|f| an.problem.def(f).1 + 1).collect();
    let gen: Vec<u32> = s.gen.ones().map(|f| an.problem.def(f).1 + 1).collect();
    assert_eq!(kill, vec![1]);
    assert_eq!(gen, vec![l_in_q + 1]);

    let iv = IntervalAnalysis::new(&prog, &cg);
    let sol = solve_mfp(&prog, &cg, &iv).unwrap();
    let l = var(&prog, "p", "l");
    assert_eq!(sol.boundaries[q], Env::from_pairs([(l, Interval::point(2))]));
    // after the call l is whatever q leaves it at
    let after_call = prog.edge(prog.out_edges(5)[0]).id;
    assert_eq!(sol.edge(after_call).get(l), Some(Interval::point(0)));
}

#[test]
fn kill_summary_meets_over_arms() {
    let src = "global g; entry proc main() { g = 1; f(); print g; } proc f() { read t; if (t > 0) { g = 5; } }";
    let prog = parse_program(src).unwrap();
    let cg = CallGraph::build(&prog);
    let an = rd(&prog, &cg);
    let f = prog.proc_by_name("f").unwrap();
    let s = an.summaries[f].clone().unwrap();
    assert_eq!(s.kill.count_ones(..), 0);
    assert_eq!(s.gen.count_ones(..), 1);
    let sol = solve_mfp(&prog, &cg, &an).unwrap();
    assert_eq!(facts_at(&an, sol.in_(2)).len(), 2);
}

#[test]
fn empty_proc_summary() {
    let prog = parse_program("global g; entry proc main() { g = 1; e(); print g; } proc e() { }").unwrap();
    let cg = CallGraph::build(&prog);
    let an = rd(&prog, &cg);
    let s = an.summaries[1].clone().unwrap();
    assert_eq!((s.kill.count_ones(..), s.gen.count_ones(..)), (0, 0));
}

#[test]
fn call_sites_merge_into_boundary() {
    let src = "global g; entry proc main() { g = 1; f(); g = 2; f(); } proc f() { print g; }";
    let prog = parse_program(src).unwrap();
    let cg = CallGraph::build(&prog);
    let an = rd(&prog, &cg);
    let sol = solve_mfp(&prog, &cg, &an).unwrap();
    assert_eq!(facts_at(&an, &sol.boundaries[1]), vec![1, 3]);
}

#[test]
fn uncalled_proc_uses_own_boundary() {
    let prog = parse_program("entry proc main() { skip; } proc h(x) { print x; }").unwrap();
    let cg = CallGraph::build(&prog);
    let md = MustDefined::new(&prog);
    let sums = compute_summaries(&prog, &cg, &md, &MfpExits).unwrap();
    let an = BitVector::new(md, sums);
    let sol = solve_mfp(&prog, &cg, &an).unwrap();
    let x = var(&prog, "h", "x") as usize;
    assert_eq!(an.facts(&sol.boundaries[1]), vec![x]);
}

#[test]
fn widening_terminates_loops() {
    let prog = parse_program("proc m() { i = 0; while (i < 10) { i = i + 1; } print i; }").unwrap();
    let cg = CallGraph::build(&prog);
    let an = IntervalAnalysis::new(&prog, &cg);
    let sol = solve_mfp(&prog, &cg, &an).unwrap();
    let i = var(&prog, "m", "i");
    let print = prog.nodes.iter().find(|n| prog.node_text(n.id) == "print i").unwrap().id;
    assert_eq!(sol.in_(print).get(i), Some(Interval::point(10)));
}

#[test]
fn recursion_converges() {
    let src = "global g; entry proc main() { g = 0; r(); print g; } proc r() { if (g < 3) { g = g + 1; r(); } }";
    let prog = parse_program(src).unwrap();
    let cg = CallGraph::build(&prog);
    let an = rd(&prog, &cg);
    assert!(an.summaries[1].is_some());
    solve_mfp(&prog, &cg, &an).unwrap();
    let iv = IntervalAnalysis::new(&prog, &cg);
    let sol = solve_mfp(&prog, &cg, &iv).unwrap();
    assert!(sol.in_(2) != &Env::Top);
}

#[test]
fn solution_is_a_fixpoint() {
    for name in ["fig2", "fig3", "fig4", "fig7", "fig8", "summary_block"] {
        let prog = fixture(name);
        let cg = CallGraph::build(&prog);
        let an = rd(&prog, &cg);
        let sol = solve_mfp(&prog, &cg, &an).unwrap();
        for n in &prog.nodes {
            let proc = prog.proc(n.proc);
            let mut v = if n.id == proc.start { sol.boundaries[n.proc].clone() } else { BitVal::Top };
            for &e in prog.in_edges(n.id) {
                v = an.meet(&v, sol.edge(e));
            }
            assert_eq!(&v, sol.in_(n.id), "{name} n{}", n.id + 1);
        }
    }
}
