//! Acceptance suite: one PASS/FAIL line per criterion.
//! Runs without the libtest harness so the lines are always printed.

use pathflow::clients::{def_use_report, uninit_alarms, uninit_report};
use pathflow::fpmfp::{fold, solve_fpmfp, FpmfpSolution, OptConfig};
use pathflow::frontend::EdgeId;
use pathflow::gen::{perf_program, random_program, GenConfig};
use pathflow::lattice::{Bound, Env, Interval};
use pathflow::mfp::solve_mfp;
use pathflow::oracle::{check, check_witness, exhaustive, exhaustive_bounds, meets, Bounds, CheckError, Checked, Filter, Property};
use pathflow::pipeline::{intervals, must_defined, reaching_defs, run, AnalysisKind, Context, Mode};
use serde_json::Value;
use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

const FIXTURE_LIMIT: Duration = Duration::from_secs(1);
const BATCH_LIMIT: Duration = Duration::from_secs(300);
const GENERATED: u64 = 200;
const ACYCLIC_SEED: u64 = 0;
const CYCLIC_SEED: u64 = 10_000;
const PERF_NODES: usize = 2000;
const PERF_MIPS: usize = 200;
const PERF_RATIO: f64 = 20.0;
const PERF_REPEATS: usize = 5;

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
const CLIENTS: [&str; 3] = ["nlkain_like", "stripcc_like", "sphinx_like"];

type Outcome = Result<String, String>;

fn ensure(ok: bool, what: impl Display) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.to_string())
    }
}

fn fixture_dir() -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures"].iter().collect()
}

fn ctx(name: &str) -> Context {
    let path = fixture_dir().join(format!("{name}.mir"));
    let src = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    Context::parse(&src).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn var(c: &Context, p: &str, name: &str) -> u32 {
    c.prog.var_by_name(c.prog.proc_by_name(p).unwrap(), name).unwrap()
}

struct Solved {
    mfp_edges: Vec<Env>,
    fp: FpmfpSolution<Env>,
}

fn solve(c: &Context, opts: OptConfig) -> Solved {
    let an = intervals(c);
    let mfp = solve_mfp(&c.prog, &c.cg, &an).unwrap();
    let fp = solve_fpmfp(&c.prog, &c.cg, &an, &c.universe, opts).unwrap();
    Solved { mfp_edges: mfp.edges, fp }
}

fn folded(c: &Context, s: &Solved, e: EdgeId) -> Env {
    fold(&intervals(c), s.fp.edge(e))
}

type Keys = Vec<Vec<u32>>;

fn keys(s: &Solved, e: EdgeId) -> Keys {
    s.fp.edge(e).keys().cloned().collect()
}

fn no_opt(which: u8) -> OptConfig {
    let mut o = OptConfig::all();
    if which == 1 {
        o.opt1 = false;
    } else {
        o.opt2 = false;
    }
    o
}

fn fixture_values(name: &str) -> Result<(), String> {
    let c = ctx(name);
    let pt = |k| Some(Interval::point(k));
    match name {
        "fig2" => {
            let a = var(&c, "main", "a");
            let an = intervals(&c);
            let mfp = solve_mfp(&c.prog, &c.cg, &an).unwrap();
            let s = solve(&c, OptConfig::all());
            ensure(mfp.in_(5).get(a) == Some(Interval::range(0, 5)), "MFP In(n6) a != [0,5]")?;
            ensure(fold(&an, s.fp.in_(5)).get(a) == pt(5), "FPMFP In(n6) a != [5,5]")
        }
        "fig3" => {
            let z = var(&c, "main", "z");
            let s = solve(&c, OptConfig::all());
            ensure(s.mfp_edges[3].get(z) == Some(Interval::full()), "MFP e4 z not full")?;
            let low = s.fp.edge(3).get(&[0]).and_then(|d| d.get(z));
            ensure(low == Some(Interval::new(Bound::NegInf, Bound::fin(0)).unwrap()), "FPMFP e4 {µ1} z != [-inf,0]")?;
            ensure(folded(&c, &s, 4).get(z) == Some(Interval::new(Bound::fin(1), Bound::PosInf).unwrap()), "FPMFP e5 z != [1,+inf]")
        }
        "fig4" => {
            let l = var(&c, "main", "l");
            let s = solve(&c, OptConfig::all());
            for e in [7, 8] {
                ensure(folded(&c, &s, e).get(l) == pt(2), format!("FPMFP e{} l != [2,2]", e + 1))?;
                ensure(s.mfp_edges[e as usize].get(l) == Some(Interval::range(0, 2)), format!("MFP e{} l != [0,2]", e + 1))?;
            }
            for e in [6, 9] {
                ensure(folded(&c, &s, e) == s.mfp_edges[e as usize], format!("e{} differs from MFP", e + 1))?;
            }
            Ok(())
        }
        "fig7" => {
            let l = var(&c, "p", "l");
            let s = solve(&c, OptConfig::all());
            let pairs: Vec<_> = s.fp.edge(5).values().map(|d| d.get(l)).collect();
            ensure(pairs == vec![pt(2); 2], format!("e6 pairs l = {pairs:?}"))?;
            for (e, want) in [(6, 0), (10, 2), (11, 0)] {
                ensure(folded(&c, &s, e).get(l) == pt(want), format!("e{} l != [{want},{want}]", e + 1))?;
            }
            Ok(())
        }
        "fig8" => {
            let z = var(&c, "main", "z");
            let s = solve(&c, OptConfig::all());
            ensure(folded(&c, &s, 13).get(z) == pt(1), "e14 z != [1,1]")?;
            ensure(folded(&c, &s, 11).get(z) == Some(Interval::range(0, 2)), "e12 z != [0,2]")?;
            ensure(s.fp.edge(11).len() == 2 && s.fp.edge(11).get(&[0, 1]).is_some(), "e12 keys with opt1")?;
            ensure(solve(&c, no_opt(1)).fp.edge(11).len() == 3, "e12 keys without opt1")
        }
        "fig10" | "fig11" => {
            let (e, on, off): (EdgeId, Keys, Option<Keys>) =
                if name == "fig10" { (6, vec![vec![2]], None) } else { (4, vec![vec![]], Some(vec![vec![0], vec![1]])) };
            let s = solve(&c, OptConfig::all());
            let t = solve(&c, no_opt(2));
            ensure(keys(&s, e) == on, format!("e{} keys {:?} with opt2", e + 1, keys(&s, e)))?;
            if let Some(off) = off {
                ensure(keys(&t, e) == off, format!("e{} keys {:?} without opt2", e + 1, keys(&t, e)))?;
            }
            for e in c.prog.edges.iter().map(|e| e.id) {
                ensure(folded(&c, &s, e) == folded(&c, &t, e), format!("e{} fold depends on opt2", e + 1))?;
            }
            Ok(())
        }
        "fig12" => {
            let r = c.universe.report(&c.prog);
            ensure(r.len() == 1, format!("{} MIPS", r.len()))?;
            ensure(r[0].edges == ["e3", "e6", "e7", "e8"], format!("MIPS edges {:?}", r[0].edges))
        }
        _ => unreachable!(),
    }
}

fn c1_fixtures() -> Outcome {
    let mut slowest = Duration::ZERO;
    let names = ["fig2", "fig3", "fig4", "fig7", "fig8", "fig10", "fig11", "fig12"];
    for name in names {
        let t = Instant::now();
        fixture_values(name).map_err(|e| format!("{name}: {e}"))?;
        let took = t.elapsed();
        ensure(took < FIXTURE_LIMIT, format!("{name} took {took:?}"))?;
        slowest = slowest.max(took);
    }
    Ok(format!("{} fixtures exact, slowest {:.1} ms < {} ms", names.len(), ms(slowest), FIXTURE_LIMIT.as_millis()))
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

struct Checks {
    acyclic: Vec<Vec<Result<Checked, String>>>,
    cyclic: Vec<Vec<Result<Checked, String>>>,
    elapsed: Duration,
}

fn check_generated(seed: u64, cfg: &GenConfig) -> Vec<Result<Checked, String>> {
    let c = Context::parse(&random_program(seed, cfg)).expect("generated programs parse");
    AnalysisKind::ALL
        .iter()
        .map(|&k| check(&c, k, Bounds::batch(&c.prog)).map_err(|e: CheckError| format!("seed {seed} {k}: {e}")))
        .collect()
}

fn run_checks() -> Checks {
    let t = Instant::now();
    let seeds = |base: u64| (base..base + GENERATED).collect::<Vec<_>>();
    let (acyclic, cyclic) = pathflow::par::join(
        || pathflow::par::map(&seeds(ACYCLIC_SEED), |&s| check_generated(s, &GenConfig::acyclic())),
        || pathflow::par::map(&seeds(CYCLIC_SEED), |&s| check_generated(s, &GenConfig::cyclic())),
    );
    Checks { acyclic, cyclic, elapsed: t.elapsed() }
}

impl Checks {
    fn all(&self) -> impl Iterator<Item = &Result<Checked, String>> {
        self.acyclic.iter().chain(&self.cyclic).flatten()
    }

    fn violations(&self, keep: impl Fn(Property) -> bool) -> Vec<String> {
        self.all()
            .filter_map(|r| r.as_ref().ok())
            .flat_map(|c| &c.violations)
            .filter(|v| keep(v.property))
            .map(|v| format!("{:?} {} {}: {}", v.property, v.analysis, v.at, v.detail))
            .collect()
    }
}

fn none_of(v: &[String]) -> Result<(), String> {
    match v.first() {
        None => Ok(()),
        Some(f) => Err(format!("{} violations, first: {f}", v.len())),
    }
}

fn c2_soundness(ch: &Checks) -> Outcome {
    let errors: Vec<&String> = ch.all().filter_map(|r| r.as_ref().err()).collect();
    ensure(errors.is_empty(), format!("{} programs not checked, first: {}", errors.len(), errors.first().map_or("", |e| e.as_str())))?;
    let chain = [Property::MfpBelowFpmfp, Property::FpmfpBelowOracle, Property::PairBelowOracle];
    let v = ch.violations(|p| chain.contains(&p));
    none_of(&v)?;
    ensure(ch.elapsed < BATCH_LIMIT, format!("took {:.1} s", ch.elapsed.as_secs_f64()))?;
    Ok(format!(
        "{} acyclic + {} cyclic programs x 3 analyses, 0 violations, {:.1} s < {} s",
        ch.acyclic.len(),
        ch.cyclic.len(),
        ch.elapsed.as_secs_f64(),
        BATCH_LIMIT.as_secs()
    ))
}

fn c3_distributive(ch: &Checks) -> Outcome {
    let checked = ch.acyclic.iter().flatten().flatten().filter(|r| r.properties.contains(&Property::DistributiveEquality)).count();
    let want = 2 * ch.acyclic.len();
    ensure(checked == want, format!("equality checked on {checked} of {want} rd/uninit runs"))?;
    let v = ch.violations(|p| p == Property::DistributiveEquality);
    none_of(&v)?;
    Ok(format!("rd and uninit equal the exhaustive MIPS-free meet on {} acyclic programs", ch.acyclic.len()))
}

fn all_opt_configs() -> Vec<OptConfig> {
    (0..8).map(|b| OptConfig { opt1: b & 1 != 0, opt2: b & 2 != 0, opt3: b & 4 != 0 }).collect()
}

fn c4_neutrality(ch: &Checks) -> Outcome {
    for name in FIXTURES {
        let c = ctx(name);
        let none = OptConfig::none();
        let iv = intervals(&c);
        let base_iv = run(&c, &iv, Mode::Fpmfp, none).unwrap();
        let base_rd = {
            let a = reaching_defs(&c, Mode::Fpmfp, none).unwrap();
            run(&c, &a, Mode::Fpmfp, none).unwrap()
        };
        let base_md = {
            let a = must_defined(&c, Mode::Fpmfp, none).unwrap();
            run(&c, &a, Mode::Fpmfp, none).unwrap()
        };
        for o in all_opt_configs() {
            let r = run(&c, &iv, Mode::Fpmfp, o).unwrap();
            ensure(r.ins == base_iv.ins && r.edges == base_iv.edges, format!("{name} interval opts {}", o.label()))?;
            let a = reaching_defs(&c, Mode::Fpmfp, o).unwrap();
            let r = run(&c, &a, Mode::Fpmfp, o).unwrap();
            ensure(r.ins == base_rd.ins && r.edges == base_rd.edges, format!("{name} rd opts {}", o.label()))?;
            let a = must_defined(&c, Mode::Fpmfp, o).unwrap();
            let r = run(&c, &a, Mode::Fpmfp, o).unwrap();
            ensure(r.ins == base_md.ins && r.edges == base_md.edges, format!("{name} uninit opts {}", o.label()))?;
        }
    }
    let v = ch.violations(|p| p == Property::OptNeutrality);
    none_of(&v)?;
    Ok(format!(
        "{} fixtures under all 8 option sets, {} generated programs under 1,2,3 vs none",
        FIXTURES.len(),
        ch.acyclic.len() + ch.cyclic.len()
    ))
}

fn c5_pair_bound(ch: &Checks) -> Outcome {
    let mut tightest = i64::MIN;
    for name in FIXTURES {
        let c = ctx(name);
        let iv = intervals(&c);
        for o in all_opt_configs() {
            let slack = run(&c, &iv, Mode::Fpmfp, o).unwrap().stats.unwrap().worst_slack;
            ensure(slack <= 0, format!("{name} opts {}: {slack} pairs over |U|+1", o.label()))?;
            tightest = tightest.max(slack);
        }
    }
    let v = ch.violations(|p| p == Property::PairBound);
    none_of(&v)?;
    Ok(format!("live pairs <= |U|+1 everywhere, fixture worst slack {tightest}"))
}

fn c6_witness() -> Outcome {
    let mut runs = 0;
    let mut mips = 0;
    for name in FIXTURES {
        let c = ctx(name);
        let w = check_witness(&c);
        ensure(w.truncated.is_empty(), format!("{name}: execution truncated in {:?}", w.truncated))?;
        ensure(w.violations.is_empty(), format!("{name}: {} executed", w.violations.first().map_or("", |v| v.at.as_str())))?;
        runs += w.runs;
        mips += c.universe.len();
    }
    Ok(format!("{mips} MIPS never executed in {runs} exhaustive runs over inputs in [-3,3]"))
}

fn golden(name: &str) -> Value {
    let path = fixture_dir().join("golden").join(format!("{name}.json"));
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

fn c7_clients() -> Outcome {
    let mut summary = Vec::new();
    for name in CLIENTS {
        let c = ctx(name);
        ensure(exhaustive(&c), format!("{name} is not exhaustively enumerable"))?;
        let du = def_use_report(&c, OptConfig::all()).unwrap();
        let un = uninit_report(&c, OptConfig::all()).unwrap();
        // alarms that disappear once paths through a MIPS are dropped
        let md = must_defined(&c, Mode::Fpmfp, OptConfig::none()).unwrap();
        let free = meets(&c.prog, &c.cg, &c.universe, &md, exhaustive_bounds(), Filter::MipsFree).unwrap();
        let real = uninit_alarms(&c.prog, &free.ins);
        let covered: Vec<_> = un.mfp.iter().filter(|a| !real.contains(a)).collect();
        let kept: Vec<_> = covered.iter().filter(|a| un.fpmfp.contains(a)).collect();
        ensure(kept.is_empty(), format!("{name}: {} covered alarms survive", kept.len()))?;

        let got = serde_json::json!({
            "def_use": { "mfp": du.mfp.len(), "fpmfp": du.fpmfp.len(), "removed": du.removed().len() },
            "uninit": { "mfp": un.mfp.len(), "fpmfp": un.fpmfp.len(), "covered": covered.len(), "removed": un.removed().len() },
        });
        ensure(got == golden(name), format!("{name}: counts {got} differ from golden"))?;
        if name == "sphinx_like" {
            ensure(!du.removed().is_empty(), "sphinx_like: no def-use pair removed")?;
        }
        summary.push(format!(
            "{name} alarms {}->{} ({} covered), pairs {}->{}",
            un.mfp.len(),
            un.fpmfp.len(),
            covered.len(),
            du.mfp.len(),
            du.fpmfp.len()
        ));
    }
    Ok(summary.join("; "))
}

fn min_time(mut f: impl FnMut()) -> Duration {
    (0..PERF_REPEATS)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed()
        })
        .min()
        .unwrap()
}

fn c9_performance() -> Outcome {
    let c = Context::parse(&perf_program(PERF_NODES, PERF_MIPS)).unwrap();
    let all = OptConfig::all();
    let mfp = min_time(|| {
        let a = reaching_defs(&c, Mode::Mfp, all).unwrap();
        run(&c, &a, Mode::Mfp, all).unwrap();
    });
    let fp = min_time(|| {
        let a = reaching_defs(&c, Mode::Fpmfp, all).unwrap();
        run(&c, &a, Mode::Fpmfp, all).unwrap();
    });
    let ratio = fp.as_secs_f64() / mfp.as_secs_f64();
    let detail = format!(
        "{} nodes, {} MIPS: MFP {:.2} ms, FPMFP {:.2} ms, ratio {ratio:.2} (limit {PERF_RATIO})",
        c.prog.nodes.len(),
        c.universe.len(),
        ms(mfp),
        ms(fp)
    );
    ensure(ratio <= PERF_RATIO, &detail)?;
    Ok(detail)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    // cargo passes libtest flags; `--list` must print nothing for tooling
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut failed = 0;
    let mut report = |id: u32, title: &str, r: Outcome| {
        let (tag, text) = match r {
            Ok(s) => ("PASS", s),
            Err(s) => {
                failed += 1;
                ("FAIL", s)
            }
        };
        println!("{tag}  [{id}] {title}: {text}");
    };
    report(1, "fixture values", c1_fixtures());
    let checks = run_checks();
    report(2, "soundness chain", c2_soundness(&checks));
    report(3, "distributive equality", c3_distributive(&checks));
    report(4, "optimization neutrality", c4_neutrality(&checks));
    report(5, "pair bound", c5_pair_bound(&checks));
    report(6, "MIPS infeasibility witness", c6_witness());
    report(7, "clients", c7_clients());
    println!(
        "NOT REPRODUCIBLE  [8] benchmark aggregates: the reported def-use, alarm and runtime figures come from a \
         corpus of real programs that is not available here"
    );
    report(9, "performance", c9_performance());
    if failed == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
