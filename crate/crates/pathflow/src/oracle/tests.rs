use super::*;
use crate::frontend::{parse_program, CallGraph};
use crate::lattice::{Analysis, Env, Interval};
use crate::pipeline::{intervals, AnalysisKind, Context};
use crate::testutil::fixture;

fn ctx(name: &str) -> Context {
    Context::new(fixture(name))
}

fn src(s: &str) -> Context {
    Context::new(parse_program(s).unwrap())
}

fn paths_to(c: &Context, t: Target) -> Vec<Path> {
    enumerate_paths(&c.prog, &c.cg, &c.universe, t, Bounds::for_program(&c.prog)).unwrap()
}

const FIXTURES: [&str; 13] = [
    "fig2",
    "fig3",
    "fig4",
    "fig7",
    "fig8",
    "fig10",
    "fig11",
    "fig12",
    "balanced",
    "sphinx_like",
    "nlkain_like",
    "stripcc_like",
    "summary_block",
];

#[test]
fn fig2_paths_to_the_assert() {
    let c = ctx("fig2");
    let ps = paths_to(&c, Target::Node(5));
    assert_eq!(ps.len(), 2);
    let tagged: Vec<&Path> = ps.iter().filter(|p| p.contains_mips()).collect();
    assert_eq!(tagged.len(), 1);
    assert!(tagged[0].edges().contains(&2));
    assert!(!ps.iter().find(|p| !p.contains_mips()).unwrap().edges().contains(&2));
}

#[test]
fn simple_shapes() {
    let c = src("proc m() { a = 1; b = a; print b; }");
    let exit = c.prog.proc(0).exit;
    assert_eq!(paths_to(&c, Target::Node(exit)).len(), 1);
    let c = src("proc m(x) { if (x > 0) { a = 1; } else { a = 2; } print a; }");
    let exit = c.prog.proc(0).exit;
    assert_eq!(paths_to(&c, Target::Node(exit)).len(), 2);
}

#[test]
fn loop_bounds_cap_paths() {
    let c = src("proc m(x) { i = 0; while (i < x) { i = i + 1; } print i; }");
    let exit = c.prog.proc(0).exit;
    let n = |k| enumerate_paths(&c.prog, &c.cg, &c.universe, Target::Node(exit), Bounds::new(100, k)).unwrap().len();
    assert_eq!(n(0), 1);
    assert_eq!(n(2), 3);
    assert_eq!(enumerate_paths(&c.prog, &c.cg, &c.universe, Target::Node(exit), Bounds::new(3, 2)).unwrap().len(), 1);
}

#[test]
fn fig2_path_meets() {
    let c = ctx("fig2");
    let a = intervals(&c);
    let x = c.prog.var_by_name(0, "a").unwrap();
    let ps = paths_to(&c, Target::Node(5));
    let free = path_meet(&c.prog, &a, ps.iter().filter(|p| !p.contains_mips()));
    assert_eq!(free.get(x), Some(Interval::point(5)));
    // the tagged path is already refuted by edge refinement (x < 0, then x == 5)
    let tagged = ps.iter().find(|p| p.contains_mips()).unwrap();
    assert_eq!(eval_path(&c.prog, &a, tagged), Env::Top);
    assert_eq!(path_meet(&c.prog, &a, &ps).get(x), Some(Interval::point(5)));
    assert_eq!(path_meet(&c.prog, &a, std::iter::empty()), Env::Top);

    let m = meets(&c.prog, &c.cg, &c.universe, &a, Bounds::for_program(&c.prog), Filter::MipsFree).unwrap();
    assert_eq!(m.ins[5].get(x), Some(Interval::point(5)));
    let mfp = crate::mfp::solve_mfp(&c.prog, &c.cg, &a).unwrap();
    assert_eq!(mfp.ins[5].get(x), Some(Interval::range(0, 5)));
}

#[test]
fn paths_through_calls() {
    let c = ctx("fig7");
    let q = c.prog.proc_by_name("q").unwrap();
    let qs = c.prog.proc(q).start;
    let ps = paths_to(&c, Target::Node(qs));
    assert!(!ps.is_empty());
    assert!(ps.iter().all(|p| matches!(p.steps.last(), Some(Step::Call(_)))));
    let exit = c.prog.proc(c.prog.entry).exit;
    for p in paths_to(&c, Target::Node(exit)) {
        let calls = p.steps.iter().filter(|s| matches!(s, Step::Call(_))).count();
        let rets = p.steps.iter().filter(|s| matches!(s, Step::Return(_))).count();
        assert_eq!(calls, rets);
    }
}

#[test]
fn explosion_is_reported() {
    let body: String = (0..22).map(|i| format!("if (x > {i}) {{ a = {i}; }} ")).collect();
    let c = src(&format!("proc m(x) {{ {body} print a; }}"));
    let exit = c.prog.proc(0).exit;
    let r = enumerate_paths(&c.prog, &c.cg, &c.universe, Target::Node(exit), Bounds::new(1000, 0));
    assert_eq!(r, Err(OracleError::Explosion(EXPLOSION_LIMIT)));
}

#[test]
fn matcher_tracks_prefixes() {
    let c = ctx("fig2");
    let mu = c.universe.get(0).edges.clone();
    let mut m = Matcher::default();
    for (i, e) in mu.iter().enumerate() {
        let (next, done) = m.advance(&c.universe, *e);
        if i + 1 == mu.len() {
            assert_eq!(done, vec![0]);
        } else {
            assert!(done.is_empty());
            assert_eq!(next.key(), vec![0]);
        }
        m = next;
    }
    let steps: Vec<Step> = mu.iter().map(|e| Step::Edge(*e)).collect();
    assert_eq!(mips_in(&c.universe, &steps), vec![0]);
    assert!(mips_in(&c.universe, &steps[1..]).is_empty());
}

#[test]
fn executor_basics() {
    let c = src("proc m() { a = 1; b = a + 1; print b; }");
    let runs = traces(&c.prog, 0).unwrap();
    assert_eq!(runs.len(), 1);
    assert_eq!(runs[0].end, RunEnd::Exit);

    let c = src("proc m() { a = 1; assert(a == 0); print a; }");
    let runs = traces(&c.prog, 0).unwrap();
    assert_eq!(runs.len(), 1);
    assert_eq!(runs[0].end, RunEnd::AssertFailed);
    let last = match runs[0].steps.last() {
        Some(Step::Edge(e)) => c.prog.edge(*e).dst,
        _ => panic!(),
    };
    assert!(matches!(c.prog.node(last).kind, crate::frontend::NodeKind::Assert(_)));

    let c = src("proc m(x) { read y; if (x < y) { print x; } }");
    assert_eq!(traces(&c.prog, 0).unwrap().len(), 49);

    let c = src("proc m() { i = 0; while (i >= 0) { i = i + 1; } }");
    assert_eq!(traces(&c.prog, 0).unwrap()[0].end, RunEnd::LoopCap);
}

#[test]
fn fig3_mips_never_executes() {
    let c = ctx("fig3");
    let mu = c.universe.get(0).edges.clone();
    let runs = traces(&c.prog, 0).unwrap();
    assert!(runs.len() >= 7);
    for r in &runs {
        let es: Vec<u32> = r.steps.iter().filter_map(|s| if let Step::Edge(e) = s { Some(*e) } else { None }).collect();
        assert!(!es.windows(mu.len()).any(|w| w == mu.as_slice()));
    }
}

#[test]
fn witness_holds_on_fixtures() {
    for name in FIXTURES {
        let c = ctx(name);
        let w = check_witness(&c);
        assert!(w.violations.is_empty(), "{name}: {:?}", w.violations);
        assert!(w.truncated.is_empty(), "{name}");
    }
}

#[test]
fn witness_catches_a_feasible_segment() {
    let c = src("proc m(x) { a = 0; if (x > 0) { a = 1; } print a; if (a == 1) { print x; } }");
    let mut fake = c.universe.get(0).clone();
    // true arm then the true edge of the second test: perfectly feasible
    fake.edges = vec![1, 3, 4, 5];
    fake.satisfies_p = true;
    let bogus = crate::mips::Universe::new(&c.prog, vec![fake]);
    let bad = infeasibility_witness(&c.prog, &bogus, WITNESS_BUDGET).violations;
    assert_eq!(bad.len(), 1);
    assert_eq!(bad[0].mips, 0);
}

#[test]
fn mips_free_meet_below_concrete_meet() {
    for name in FIXTURES {
        let c = ctx(name);
        if !exhaustive(&c) {
            continue;
        }
        let a = intervals(&c);
        let free = meets(&c.prog, &c.cg, &c.universe, &a, exhaustive_bounds(), Filter::MipsFree).unwrap();
        let runs = traces(&c.prog, c.prog.entry).unwrap();
        let conc = trace_meets(&c.prog, &a, c.prog.entry, runs.iter().map(|r| r.steps.as_slice()));
        for n in &c.prog.nodes {
            let i = n.id as usize;
            assert!(a.leq(&free.ins[i], &conc.ins[i]), "{name} n{}", i + 1);
        }
    }
}

#[test]
fn full_property_suite_on_fixtures() {
    for name in FIXTURES {
        let c = ctx(name);
        for kind in AnalysisKind::ALL {
            let r = check(&c, kind, Bounds::for_program(&c.prog)).unwrap();
            assert!(r.violations.is_empty(), "{name} {kind}: {:#?}", r.violations);
        }
    }
}

#[test]
fn roots_include_uncalled_procs() {
    let c = src("proc main() { g = 1; } proc other() { h = g; print h; }");
    let cg = CallGraph::build(&c.prog);
    let a = intervals(&c);
    let m = meets(&c.prog, &cg, &c.universe, &a, Bounds::for_program(&c.prog), Filter::All).unwrap();
    let other = c.prog.proc_by_name("other").unwrap();
    assert!(!a.is_top(&m.ins[c.prog.proc(other).exit as usize]));
}
