//! Seeded generators of MiniIR programs for property tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenConfig {
    /// Helper procedures besides `main`.
    pub helpers: usize,
    /// Statements per procedure body, before nesting.
    pub stmts: usize,
    pub depth: usize,
    pub loops: bool,
    pub recursion: bool,
}

impl GenConfig {
    /// No loops and no recursion, so path enumeration is exhaustive.
    pub fn acyclic() -> Self {
        GenConfig { helpers: 2, stmts: 6, depth: 2, loops: false, recursion: false }
    }

    pub fn cyclic() -> Self {
        GenConfig { helpers: 2, stmts: 5, depth: 2, loops: true, recursion: true }
    }
}

const LOCALS: [&str; 4] = ["a", "b", "c", "d"];
const GLOBALS: [&str; 2] = ["g", "h"];
const PARAMS: [&str; 2] = ["x", "y"];
const OPS: [&str; 6] = ["<", "<=", ">", ">=", "==", "!="];

struct Gen<'a> {
    rng: ChaCha8Rng,
    cfg: &'a GenConfig,
    out: String,
    proc: usize,
    branches: usize,
    calls: usize,
    fresh: usize,
}

impl Gen<'_> {
    fn line(&mut self, indent: usize, s: &str) {
        let _ = writeln!(self.out, "{}{}", "    ".repeat(indent), s);
    }

    fn var(&mut self) -> String {
        let mut pool: Vec<&str> = LOCALS.to_vec();
        pool.extend(GLOBALS);
        if self.proc == 0 {
            pool.extend(PARAMS);
        }
        pool[self.rng.random_range(0..pool.len())].to_string()
    }

    fn konst(&mut self) -> i64 {
        self.rng.random_range(-1..=3)
    }

    fn cond(&mut self) -> String {
        let v = self.var();
        let op = OPS[self.rng.random_range(0..OPS.len())];
        if self.rng.random_bool(0.2) {
            let w = self.var();
            format!("{v} {op} {w}")
        } else {
            format!("{v} {op} {}", self.konst())
        }
    }

    fn block(&mut self, indent: usize, n: usize, depth: usize) {
        for _ in 0..n {
            self.stmt(indent, depth);
        }
    }

    fn stmt(&mut self, ind: usize, depth: usize) {
        let can_branch = depth < self.cfg.depth && self.branches < 4;
        let roll = self.rng.random_range(0..100);
        match roll {
            0..=24 => {
                let v = self.var();
                let rhs = match self.rng.random_range(0..3) {
                    0 => self.konst().to_string(),
                    1 => self.var(),
                    _ => format!("{} + {}", self.var(), self.konst()),
                };
                self.line(ind, &format!("{v} = {rhs};"));
            }
            25..=34 => {
                let v = self.var();
                self.line(ind, &format!("read {v};"));
            }
            35..=44 => {
                let v = self.var();
                self.line(ind, &format!("print {v};"));
            }
            45..=49 => {
                let c = self.cond();
                self.line(ind, &format!("assert({c});"));
            }
            50..=64 if can_branch => {
                self.branches += 1;
                let c = self.cond();
                self.line(ind, &format!("if ({c}) {{"));
                let k = self.rng.random_range(1..=2);
                self.block(ind + 1, k, depth + 1);
                if self.rng.random_bool(0.4) {
                    self.line(ind, "} else {");
                    self.block(ind + 1, 1, depth + 1);
                }
                self.line(ind, "}");
            }
            65..=79 if can_branch => {
                // a flag set on one arm and tested again later
                self.branches += 2;
                let f = self.var();
                let x = self.var();
                let k = self.konst();
                let (lo, hi) = (self.rng.random_range(0..=1), self.rng.random_range(2..=3));
                self.line(ind, &format!("{f} = {lo};"));
                self.line(ind, &format!("if ({x} > {k}) {{"));
                self.line(ind + 1, &format!("{f} = {hi};"));
                self.block(ind + 1, 1, depth + 1);
                self.line(ind, "}");
                self.line(ind, &format!("print {x};"));
                let (op, val) = if self.rng.random_bool(0.5) { ("==", hi) } else { ("!=", lo) };
                self.line(ind, &format!("if ({f} {op} {val}) {{"));
                self.block(ind + 1, 1, depth + 1);
                self.line(ind, "}");
            }
            80..=84 if can_branch => {
                self.branches += 2;
                let v = self.var();
                self.line(ind, &format!("switch ({v}) {{"));
                for k in 1..=2 {
                    self.line(ind + 1, &format!("case {k}: {{"));
                    self.block(ind + 2, 1, depth + 1);
                    self.line(ind + 1, "}");
                }
                self.line(ind + 1, "default: {");
                self.block(ind + 2, 1, depth + 1);
                self.line(ind + 1, "}");
                self.line(ind, "}");
            }
            85..=92 if self.calls < 2 => {
                let lo = if self.cfg.recursion { 1 } else { self.proc + 1 };
                if lo <= self.cfg.helpers {
                    self.calls += 1;
                    let q = self.rng.random_range(lo..=self.cfg.helpers);
                    self.line(ind, &format!("p{q}();"));
                } else {
                    self.line(ind, "skip;");
                }
            }
            93..=99 if self.cfg.loops && can_branch => {
                self.branches += 2;
                self.fresh += 1;
                let i = format!("i{}", self.fresh);
                let n = self.rng.random_range(1..=3);
                self.line(ind, &format!("{i} = 0;"));
                self.line(ind, &format!("while ({i} < {n}) {{"));
                self.block(ind + 1, 1, depth + 1);
                self.line(ind + 1, &format!("{i} = {i} + 1;"));
                self.line(ind, "}");
            }
            _ => {
                let v = self.var();
                self.line(ind, &format!("print {v};"));
            }
        }
    }
}

/// A random well-formed program. The same seed and config always give
/// the same text.
pub fn random_program(seed: u64, cfg: &GenConfig) -> String {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        cfg,
        out: String::new(),
        proc: 0,
        branches: 0,
        calls: 0,
        fresh: 0,
    };
    for v in GLOBALS {
        g.line(0, &format!("global {v};"));
    }
    for p in 0..=cfg.helpers {
        g.proc = p;
        g.branches = 0;
        g.calls = 0;
        g.line(0, "");
        if p == 0 {
            g.line(0, &format!("entry proc main({}) {{", PARAMS.join(", ")));
        } else {
            g.line(0, &format!("proc p{p}() {{"));
        }
        let n = if p == 0 { cfg.stmts } else { cfg.stmts.div_ceil(2) };
        g.block(1, n, 0);
        g.line(0, "}");
    }
    g.out
}

/// One helper: `blocks` flag-correlated diamonds, each contributing two MIPS.
fn perf_helper(out: &mut String, p: usize, blocks: usize, filler: usize) {
    let _ = writeln!(out, "proc w{p}() {{");
    for b in 0..blocks {
        let _ = writeln!(out, "    read x{b};");
        let _ = writeln!(out, "    f{b} = 0;");
        let _ = writeln!(out, "    if (x{b} > 0) {{");
        let _ = writeln!(out, "        f{b} = 1;");
        let _ = writeln!(out, "        g = x{b};");
        let _ = writeln!(out, "    }}");
        let _ = writeln!(out, "    print x{b};");
        for k in 0..filler {
            let _ = writeln!(out, "    t{k} = x{b} + {k};");
        }
        let _ = writeln!(out, "    if (f{b} == 1) {{");
        let _ = writeln!(out, "        print g;");
        let _ = writeln!(out, "    }}");
    }
    let _ = writeln!(out, "}}");
}

/// Deterministic program with at least `nodes` CFG nodes and exactly
/// `mips` MIPS, spread over helpers of ten diamonds each.
pub fn perf_program(nodes: usize, mips: usize) -> String {
    let blocks = mips.div_ceil(2);
    let helpers = blocks.div_ceil(10);
    // each block lowers to 8 nodes plus its filler, each helper adds start and exit
    let base = blocks * 8 + helpers * 3 + 2;
    let filler = nodes.saturating_sub(base).div_ceil(blocks.max(1));
    let mut out = String::from("global g;\n\nentry proc main() {\n");
    for p in 0..helpers {
        let _ = writeln!(out, "    w{p}();");
    }
    out.push_str("}\n");
    let mut left = blocks;
    for p in 0..helpers {
        let n = left.min(10);
        left -= n;
        out.push('\n');
        perf_helper(&mut out, p, n, filler);
    }
    out
}
