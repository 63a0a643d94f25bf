use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pathflow::fpmfp::OptConfig;
use pathflow::gen::{perf_program, random_program, GenConfig};
use pathflow::pipeline::{intervals, reaching_defs, run, Context, Mode};
use std::hint::black_box;

const SIZES: [(usize, usize); 3] = [(250, 20), (1000, 100), (2000, 200)];

fn rd(c: &Context, mode: Mode, opts: OptConfig) -> usize {
    let a = reaching_defs(c, mode, opts).unwrap();
    run(c, &a, mode, opts).unwrap().steps
}

fn modes(cr: &mut Criterion) {
    let mut g = cr.benchmark_group("rd");
    for (nodes, mips) in SIZES {
        let c = Context::parse(&perf_program(nodes, mips)).unwrap();
        for mode in [Mode::Mfp, Mode::Fpmfp] {
            g.bench_with_input(BenchmarkId::new(mode.name(), nodes), &c, |b, c| b.iter(|| rd(black_box(c), mode, OptConfig::all())));
        }
    }
    g.finish();

    let mut g = cr.benchmark_group("interval");
    let c = Context::parse(&random_program(7, &GenConfig::cyclic())).unwrap();
    let a = intervals(&c);
    for mode in [Mode::Mfp, Mode::Fpmfp] {
        g.bench_function(mode.name(), |b| b.iter(|| run(black_box(&c), &a, mode, OptConfig::all()).unwrap().steps));
    }
    g.finish();
}

fn options(cr: &mut Criterion) {
    let mut g = cr.benchmark_group("fpmfp_options");
    let c = Context::parse(&perf_program(1000, 100)).unwrap();
    for opts in [OptConfig::all(), OptConfig::none()] {
        g.bench_function(opts.label(), |b| b.iter(|| rd(black_box(&c), Mode::Fpmfp, opts)));
    }
    g.finish();
}

/// Same work on a one-thread pool and on the global pool.
#[cfg(feature = "parallel")]
fn threads(cr: &mut Criterion) {
    let mut g = cr.benchmark_group("threads");
    let c = Context::parse(&perf_program(2000, 200)).unwrap();
    let seq = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    for mode in [Mode::Mfp, Mode::Fpmfp] {
        g.bench_function(BenchmarkId::new("sequential", mode.name()), |b| {
            b.iter(|| seq.install(|| rd(black_box(&c), mode, OptConfig::all())))
        });
        g.bench_function(BenchmarkId::new("parallel", mode.name()), |b| b.iter(|| rd(black_box(&c), mode, OptConfig::all())));
    }
    g.finish();
}

/// Without the feature only the sequential path exists.
#[cfg(not(feature = "parallel"))]
fn threads(cr: &mut Criterion) {
    let mut g = cr.benchmark_group("threads");
    let c = Context::parse(&perf_program(2000, 200)).unwrap();
    for mode in [Mode::Mfp, Mode::Fpmfp] {
        g.bench_function(BenchmarkId::new("sequential", mode.name()), |b| b.iter(|| rd(black_box(&c), mode, OptConfig::all())));
    }
    g.finish();
}

criterion_group!(benches, modes, options, threads);
criterion_main!(benches);
