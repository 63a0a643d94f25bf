use fixedbitset::FixedBitSet;
use pathflow::fpmfp::{lifted_edge_flow, Lifted, OptConfig};
use pathflow::frontend::{parse_source, pretty_print, NodeId};
use pathflow::gen::{random_program, GenConfig};
use pathflow::lattice::{Analysis, BitVal, BitVector, BitVectorProblem, Bound, Env, Interval, MustDefined, ReachingDefs};
use pathflow::mips::{MipsId, MipsSet};
use pathflow::oracle::{check, Bounds};
use pathflow::pipeline::{intervals, AnalysisKind, Context};
use proptest::prelude::*;
use std::collections::BTreeMap;
use std::sync::OnceLock;

/// A generated program with plenty of definitions, branches and MIPS.
fn sample_ctx() -> &'static Context {
    static CTX: OnceLock<Context> = OnceLock::new();
    CTX.get_or_init(|| {
        (0..)
            .map(|s| Context::parse(&random_program(s, &GenConfig::acyclic())).unwrap())
            .find(|c| c.universe.len() >= 3 && c.prog.nodes.len() >= 30)
            .unwrap()
    })
}

fn rd() -> BitVector<ReachingDefs> {
    let c = sample_ctx();
    BitVector::new(ReachingDefs::new(&c.prog), vec![None; c.prog.procs.len()])
}

fn md() -> BitVector<MustDefined> {
    let c = sample_ctx();
    BitVector::new(MustDefined::new(&c.prog), vec![None; c.prog.procs.len()])
}

fn bitval(width: usize) -> impl Strategy<Value = BitVal> {
    prop_oneof![
        1 => Just(BitVal::Top),
        9 => proptest::collection::vec(any::<bool>(), width).prop_map(move |bits| {
            let mut s = FixedBitSet::with_capacity(width);
            for (i, b) in bits.into_iter().enumerate() {
                s.set(i, b);
            }
            BitVal::Set(s)
        }),
    ]
}

fn bound_lo() -> impl Strategy<Value = Bound> {
    prop_oneof![1 => Just(Bound::NegInf), 4 => (-3i64..=3).prop_map(Bound::fin)]
}

fn interval() -> impl Strategy<Value = Interval> {
    (bound_lo(), prop_oneof![1 => Just(None), 4 => (0i64..=4).prop_map(Some)]).prop_map(|(lo, span)| {
        let hi = match (&lo, span) {
            (_, None) => Bound::PosInf,
            (Bound::Fin(k), Some(d)) => Bound::Fin(k + d),
            (_, Some(d)) => Bound::fin(d - 2),
        };
        Interval::new(lo, hi).unwrap()
    })
}

fn env() -> impl Strategy<Value = Env> {
    prop_oneof![
        1 => Just(Env::Top),
        9 => proptest::collection::vec(proptest::option::of(interval()), 4)
            .prop_map(|vs| Env::from_pairs(vs.into_iter().enumerate().filter_map(|(v, i)| i.map(|i| (v as u32, i))))),
    ]
}

fn lattice_laws<A: Analysis>(a: &A, x: &A::Value, y: &A::Value, z: &A::Value) -> Result<(), TestCaseError> {
    let top = a.top();
    prop_assert_eq!(a.meet(x, y), a.meet(y, x));
    prop_assert_eq!(a.meet(&a.meet(x, y), z), a.meet(x, &a.meet(y, z)));
    prop_assert_eq!(&a.meet(x, x), x);
    prop_assert_eq!(&a.meet(&top, x), x);
    prop_assert!(a.leq(x, &top));
    prop_assert!(a.leq(x, x));
    prop_assert_eq!(a.leq(x, y), a.meet(x, y) == *x);
    let m = a.meet(x, y);
    prop_assert!(a.leq(&m, x) && a.leq(&m, y));
    if a.leq(x, y) && a.leq(y, z) {
        prop_assert!(a.leq(x, z));
    }
    if a.leq(x, y) && a.leq(y, x) {
        prop_assert_eq!(x, y);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn reaching_defs_lattice_laws((x, y, z) in (bitval(rd().problem.width()), bitval(rd().problem.width()), bitval(rd().problem.width()))) {
        lattice_laws(&rd(), &x, &y, &z)?;
    }

    #[test]
    fn must_defined_lattice_laws((x, y, z) in (bitval(md().problem.width()), bitval(md().problem.width()), bitval(md().problem.width()))) {
        lattice_laws(&md(), &x, &y, &z)?;
    }

    #[test]
    fn interval_lattice_laws(x in env(), y in env(), z in env()) {
        lattice_laws(&intervals(sample_ctx()), &x, &y, &z)?;
    }

    #[test]
    fn bitvector_transfer_distributes(
        n in 0..sample_ctx().prog.nodes.len() as NodeId,
        x in bitval(rd().problem.width()),
        y in bitval(rd().problem.width()),
        u in bitval(md().problem.width()),
        w in bitval(md().problem.width()),
    ) {
        let a = rd();
        prop_assert_eq!(a.transfer(n, &a.meet(&x, &y)), a.meet(&a.transfer(n, &x), &a.transfer(n, &y)));
        let b = md();
        prop_assert_eq!(b.transfer(n, &b.meet(&u, &w)), b.meet(&b.transfer(n, &u), &b.transfer(n, &w)));
    }

    #[test]
    fn interval_meet_is_hull(x in interval(), y in interval()) {
        let a = intervals(sample_ctx());
        let m = a.meet(&Env::from_pairs([(0, x.clone())]), &Env::from_pairs([(0, y.clone())]));
        let h = m.get(0).unwrap();
        prop_assert!(h.encloses(&x) && h.encloses(&y));
        prop_assert!(h.lo == x.lo.clone().min(y.lo.clone()) && h.hi == x.hi.clone().max(y.hi.clone()));
    }
}

#[test]
fn interval_hull_examples() {
    let a = intervals(sample_ctx());
    let zero = Env::from_pairs([(0, Interval::range(0, 0))]);
    let five = Env::from_pairs([(0, Interval::range(5, 5))]);
    let wide = Env::from_pairs([(0, Interval::range(0, 5))]);
    assert_eq!(a.meet(&zero, &five), wide);
    assert!(a.leq(&wide, &five));
    assert!(!a.leq(&five, &wide));
}

fn any_seed() -> impl Strategy<Value = u64> {
    0u64..1_000_000
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pretty_print_round_trips(seed in any_seed(), cyclic in any::<bool>()) {
        let cfg = if cyclic { GenConfig::cyclic() } else { GenConfig::acyclic() };
        let src = random_program(seed, &cfg);
        let ast = parse_source(&src).unwrap();
        let printed = pretty_print(&ast);
        let again = parse_source(&printed).unwrap();
        prop_assert_eq!(&again, &ast);
        prop_assert_eq!(pretty_print(&again), printed);
    }

    #[test]
    fn ext_cpo_cso_are_coherent(seed in any_seed(), pick in proptest::collection::vec(any::<bool>(), 16)) {
        let c = Context::parse(&random_program(seed, &GenConfig::acyclic())).unwrap();
        let u = &c.universe;
        let ids: Vec<MipsId> = (0..u.len() as MipsId).collect();
        let m: MipsSet = ids.iter().copied().filter(|id| pick[*id as usize % pick.len()]).collect();
        for e in 0..c.prog.edges.len() as u32 {
            let mut want: MipsSet = ids
                .iter()
                .copied()
                .filter(|id| {
                    let es = &u.get(*id).edges;
                    (m.contains(id) && es.contains(&e)) || es[0] == e
                })
                .collect();
            want.sort_unstable();
            prop_assert_eq!(u.ext(e, &m), want);
        }
        for &mu in &ids {
            let own = &u.get(mu).edges;
            for &e in own {
                let cpo = u.cpo(e, mu).unwrap();
                let cso = u.cso(e, mu).unwrap();
                prop_assert!(cpo.contains(&mu) && cso.contains(&mu));
                for &nu in &ids {
                    let other = &u.get(nu).edges;
                    let Some(at) = other.iter().position(|x| *x == e) else {
                        prop_assert!(!cpo.contains(&nu) && !cso.contains(&nu));
                        continue;
                    };
                    let inside = |seg: &[u32]| own.windows(seg.len()).any(|w| w == seg);
                    prop_assert_eq!(cpo.contains(&nu), inside(&other[..=at]));
                    prop_assert_eq!(cso.contains(&nu), inside(&other[at..]));
                }
            }
        }
    }

    #[test]
    fn blocking_is_exact(seed in any_seed(), keys in proptest::collection::vec(proptest::collection::vec(0u32..8, 0..3), 1..5)) {
        let c = Context::parse(&random_program(seed, &GenConfig::acyclic())).unwrap();
        let u = &c.universe;
        prop_assume!(!u.is_empty());
        let a = BitVector::new(ReachingDefs::new(&c.prog), vec![None; c.prog.procs.len()]);
        let width = a.problem.width();
        let keys: Vec<MipsSet> = keys
            .into_iter()
            .map(|mut k| {
                k.retain(|id| (*id as usize) < u.len());
                k.sort_unstable();
                k.dedup();
                k
            })
            .collect();
        let v = Lifted::from_pairs(keys.iter().enumerate().map(|(i, k)| {
            let mut s = FixedBitSet::with_capacity(width);
            if width > 0 {
                s.insert(i % width);
            }
            (k.clone(), BitVal::Set(s))
        }));
        for e in 0..c.prog.edges.len() as u32 {
            let mut want: BTreeMap<MipsSet, BitVal> = BTreeMap::new();
            for (k, d) in v.iter() {
                let k2 = u.ext(e, k);
                let ends = k2.iter().any(|id| *u.get(*id).edges.last().unwrap() == e);
                if !ends {
                    let cur = want.remove(&k2).unwrap_or(BitVal::Top);
                    want.insert(k2, a.meet(&cur, d));
                }
            }
            let opts = OptConfig { opt1: false, opt2: false, opt3: true };
            prop_assert_eq!(lifted_edge_flow(&a, u, opts, e, &v), Lifted::from_pairs(want));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn soundness_chain_on_acyclic_programs(seed in any_seed()) {
        let c = Context::parse(&random_program(seed, &GenConfig::acyclic())).unwrap();
        for k in AnalysisKind::ALL {
            let r = check(&c, k, Bounds::batch(&c.prog)).unwrap();
            prop_assert!(r.violations.is_empty(), "seed {} {}: {:?}", seed, k, r.violations);
        }
    }

    #[test]
    fn soundness_chain_on_cyclic_programs(seed in any_seed()) {
        let c = Context::parse(&random_program(seed, &GenConfig::cyclic())).unwrap();
        for k in AnalysisKind::ALL {
            let r = check(&c, k, Bounds::batch(&c.prog)).unwrap();
            prop_assert!(r.violations.is_empty(), "seed {} {}: {:?}", seed, k, r.violations);
        }
    }
}
