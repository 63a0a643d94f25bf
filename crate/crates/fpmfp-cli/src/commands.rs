use crate::output::{cell, json, table, SCHEMA};
use crate::{Format, Outcome, Status};
use anyhow::{bail, Context as _};
use pathflow::clients::{def_use_report, fmt_reduction, uninit_report, CompareError, ComparisonReport};
use pathflow::fpmfp::OptConfig;
use pathflow::frontend::{emit_dot, fmt_edge, fmt_node, EdgeId};
use pathflow::gen::{random_program, GenConfig};
use pathflow::lattice::Analysis;
use pathflow::oracle::{check, check_witness, Bounds, Checked, Violation};
use pathflow::pipeline::{with_analysis, AnalysisKind, AnalysisVisitor, Context, Mode, Run};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

fn load(path: &Path) -> anyhow::Result<Context> {
    let src = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Context::parse(&src).with_context(|| format!("parsing {}", path.display()))
}

fn done(text: String) -> anyhow::Result<Outcome> {
    Ok(Outcome { text, status: Status::Ok })
}

pub fn detect_mips(path: &Path, fmt: Format) -> anyhow::Result<Outcome> {
    let ctx = load(path)?;
    let reports = ctx.universe.report(&ctx.prog);
    let text = match fmt {
        Format::Json => json(&json!({
            "schema": SCHEMA,
            "program": path.display().to_string(),
            "count": reports.len(),
            "mips": reports,
        })),
        Format::Table => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        format!("µ{}", r.id),
                        r.proc.clone(),
                        r.edges.join(" -> "),
                        if r.satisfies_p { "yes" } else { "no" }.into(),
                        r.end_condition.clone(),
                    ]
                })
                .collect();
            table(&["mips", "proc", "edges", "P", "end condition"], &rows)
        }
    };
    done(text)
}

struct AnalyzeView {
    kind: AnalysisKind,
    opts: OptConfig,
    fmt: Format,
    timing: bool,
}

impl AnalysisVisitor for AnalyzeView {
    type Output = String;

    fn visit<A: Analysis>(self, ctx: &Context, a: &A, run: Run<A::Value>) -> String {
        let prog = &ctx.prog;
        let pname = |p: usize| prog.proc(p).name.clone();
        if self.fmt == Format::Table {
            let rows: Vec<Vec<String>> = prog
                .nodes
                .iter()
                .map(|n| {
                    let i = n.id as usize;
                    vec![
                        pname(n.proc),
                        fmt_node(n.id),
                        prog.node_text(n.id),
                        cell(&a.show(prog, n.proc, &run.ins[i])),
                        cell(&a.show(prog, n.proc, &run.outs[i])),
                    ]
                })
                .collect();
            return table(&["proc", "node", "stmt", "in", "out"], &rows);
        }
        let nodes: Vec<Value> = prog
            .nodes
            .iter()
            .map(|n| {
                let i = n.id as usize;
                json!({
                    "proc": pname(n.proc),
                    "node": fmt_node(n.id),
                    "in": a.show(prog, n.proc, &run.ins[i]),
                    "out": a.show(prog, n.proc, &run.outs[i]),
                })
            })
            .collect();
        let edges: Vec<Value> = prog
            .edges
            .iter()
            .map(|e| {
                let p = prog.proc_of_edge(e.id);
                let mut v = json!({
                    "proc": pname(p),
                    "edge": fmt_edge(e.id),
                    "src": fmt_node(e.src),
                    "dst": fmt_node(e.dst),
                    "value": a.show(prog, p, &run.edges[e.id as usize]),
                });
                if let Some(l) = &run.lifted {
                    v["pairs"] = l.edge(e.id).show(|d| a.show(prog, p, d));
                }
                v
            })
            .collect();
        let mut out = json!({
            "schema": SCHEMA,
            "analysis": self.kind.name(),
            "mode": run.mode.name(),
            "opts": self.opts.label(),
            "mips": ctx.universe.len(),
            "steps": run.steps,
            "nodes": nodes,
            "edges": edges,
        });
        if let Some(s) = &run.stats {
            out["pairs"] = serde_json::to_value(s).expect("stats serialize");
        }
        if self.timing {
            out["timing_ms"] = json!(run.elapsed.as_secs_f64() * 1000.0);
        }
        json(&out)
    }
}

pub fn analyze(path: &Path, kind: AnalysisKind, mode: Mode, opts: OptConfig, fmt: Format, timing: bool) -> anyhow::Result<Outcome> {
    let ctx = load(path)?;
    let text = with_analysis(&ctx, kind, mode, opts, AnalyzeView { kind, opts, fmt, timing })?;
    done(text)
}

/// MFP count, FPMFP count, formatted reduction.
type ClientCounts = (usize, usize, String);

pub fn compare(path: &Path, only: Option<AnalysisKind>, opts: OptConfig, fmt: Format, timing: bool) -> anyhow::Result<Outcome> {
    let ctx = load(path)?;
    let kinds: Vec<AnalysisKind> = only.map_or_else(|| AnalysisKind::ALL.to_vec(), |k| vec![k]);
    let mut violated = false;
    let mut reports: Vec<(ComparisonReport, Option<Value>, Option<ClientCounts>)> = Vec::new();
    for kind in kinds {
        let report = match pathflow::clients::compare_modes(&ctx, kind, opts) {
            Ok(r) => r,
            Err(CompareError::PrecisionViolation { nodes, report }) => {
                log::error!("{kind}: MFP is not below FPMFP at {}", nodes.join(", "));
                violated = true;
                *report
            }
            Err(CompareError::Solve(e)) => return Err(e.into()),
        };
        let client = match kind {
            AnalysisKind::Rd => {
                let c = def_use_report(&ctx, opts)?;
                let row = (c.mfp.len(), c.fpmfp.len(), fmt_reduction(c.reduction()));
                Some((c.to_json(|d| d.to_json(&ctx.prog)), row))
            }
            AnalysisKind::Uninit => {
                let c = uninit_report(&ctx, opts)?;
                let row = (c.mfp.len(), c.fpmfp.len(), fmt_reduction(c.reduction()));
                Some((c.to_json(|d| d.to_json(&ctx.prog)), row))
            }
            AnalysisKind::Interval => None,
        };
        let (cj, row) = client.map_or((None, None), |(j, r)| (Some(j), Some(r)));
        reports.push((report, cj, row));
    }
    let text = match fmt {
        Format::Json => {
            let analyses: Vec<Value> = reports
                .iter()
                .map(|(r, c, _)| {
                    let mut v = r.to_json(timing);
                    if let Some(c) = c {
                        v["client"] = c.clone();
                    }
                    v
                })
                .collect();
            json(&json!({
                "schema": SCHEMA,
                "program": path.display().to_string(),
                "mips": ctx.universe.len(),
                "analyses": analyses,
            }))
        }
        Format::Table => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|(r, _, row)| {
                    let (m, f, red) = row.clone().map_or(("-".into(), "-".into(), "-".into()), |(m, f, red)| (m.to_string(), f.to_string(), red));
                    vec![
                        r.analysis.name().into(),
                        if r.violations().is_empty() { "yes" } else { "NO" }.into(),
                        r.improved_nodes().len().to_string(),
                        r.improved_edges().len().to_string(),
                        r.pairs.max_live.to_string(),
                        m,
                        f,
                        red,
                    ]
                })
                .collect();
            table(&["analysis", "mfp⊑fpmfp", "better nodes", "better edges", "max pairs", "client mfp", "client fpmfp", "reduction %"], &rows)
        }
    };
    Ok(Outcome { text, status: if violated { Status::Violated } else { Status::Ok } })
}

pub struct OracleArgs {
    pub inputs: Vec<PathBuf>,
    pub jobs: usize,
    pub random: u64,
    pub seed: u64,
    pub max_len: Option<usize>,
    pub loop_budget: Option<u32>,
}

struct Item {
    name: String,
    src: String,
    generated: bool,
}

fn collect_items(args: &OracleArgs) -> anyhow::Result<Vec<Item>> {
    let mut items = Vec::new();
    for input in &args.inputs {
        let mut files = Vec::new();
        if input.is_dir() {
            for entry in std::fs::read_dir(input).with_context(|| format!("reading {}", input.display()))? {
                let p = entry?.path();
                if p.extension().is_some_and(|x| x == "mir") {
                    files.push(p);
                }
            }
            files.sort();
            if files.is_empty() {
                bail!("no .mir files in {}", input.display());
            }
        } else {
            files.push(input.clone());
        }
        for f in files {
            let src = std::fs::read_to_string(&f).with_context(|| format!("reading {}", f.display()))?;
            items.push(Item { name: f.display().to_string(), src, generated: false });
        }
    }
    for i in 0..args.random {
        let seed = args.seed + i;
        let (label, cfg) = if i % 2 == 0 { ("acyclic", GenConfig::acyclic()) } else { ("cyclic", GenConfig::cyclic()) };
        items.push(Item { name: format!("generated:{label}:{seed}"), src: random_program(seed, &cfg), generated: true });
    }
    Ok(items)
}

struct Checks {
    value: Value,
    violations: usize,
    failed: bool,
}

fn check_item(item: &Item, args: &OracleArgs) -> Checks {
    let ctx = match Context::parse(&item.src) {
        Ok(c) => c,
        Err(e) => return Checks { value: json!({ "program": item.name, "error": e.to_string() }), violations: 0, failed: true },
    };
    let base = if item.generated { Bounds::batch(&ctx.prog) } else { Bounds::for_program(&ctx.prog) };
    let bounds = Bounds::new(args.max_len.unwrap_or(base.max_len), args.loop_budget.unwrap_or(base.back_edge_budget));
    let mut found: Vec<Violation> = Vec::new();
    let mut analyses = Vec::new();
    let mut errors = Vec::new();
    for kind in AnalysisKind::ALL {
        match check(&ctx, kind, bounds) {
            Ok(Checked { properties, paths, bounds, violations }) => {
                analyses.push(json!({ "analysis": kind.name(), "properties": properties, "paths": paths, "bounds": bounds }));
                found.extend(violations);
            }
            Err(e) => errors.push(format!("{kind}: {e}")),
        }
    }
    let w = check_witness(&ctx);
    found.extend(w.violations);
    log::info!("{}: {} violations, {} errors", item.name, found.len(), errors.len());
    Checks {
        value: json!({
            "program": item.name,
            "mips": ctx.universe.len(),
            "analyses": analyses,
            "witness": { "runs": w.runs, "truncated": w.truncated },
            "violations": found,
            "errors": errors,
        }),
        violations: found.len(),
        failed: !errors.is_empty(),
    }
}

#[cfg(feature = "parallel")]
fn check_all(items: &[Item], args: &OracleArgs) -> anyhow::Result<Vec<Checks>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs.max(1)).build()?;
    Ok(pool.install(|| items.par_iter().map(|i| check_item(i, args)).collect()))
}

#[cfg(not(feature = "parallel"))]
fn check_all(items: &[Item], args: &OracleArgs) -> anyhow::Result<Vec<Checks>> {
    if args.jobs > 1 {
        log::warn!("built without the parallel feature; --jobs {} runs sequentially", args.jobs);
    }
    Ok(items.iter().map(|i| check_item(i, args)).collect())
}

pub fn oracle_check(args: &OracleArgs, fmt: Format, timing: bool) -> anyhow::Result<Outcome> {
    let t = Instant::now();
    let items = collect_items(args)?;
    let results = check_all(&items, args)?;
    let violations: usize = results.iter().map(|r| r.violations).sum();
    let failed = results.iter().filter(|r| r.failed).count();
    let status = if violations > 0 {
        Status::Violated
    } else if failed > 0 {
        Status::Failed
    } else {
        Status::Ok
    };
    let text = match fmt {
        Format::Json => {
            let mut v = json!({
                "schema": SCHEMA,
                "programs": results.iter().map(|r| r.value.clone()).collect::<Vec<_>>(),
                "checked": results.len(),
                "violations": violations,
                "failed": failed,
            });
            if timing {
                v["timing_ms"] = json!(t.elapsed().as_secs_f64() * 1000.0);
            }
            json(&v)
        }
        Format::Table => {
            let rows: Vec<Vec<String>> = results
                .iter()
                .map(|r| {
                    let v = &r.value;
                    let errs = v["errors"].as_array().map_or(0, Vec::len);
                    vec![
                        cell(&v["program"]),
                        cell(&v["mips"]),
                        r.violations.to_string(),
                        if r.failed { format!("{errs} error(s)") } else { "ok".into() },
                    ]
                })
                .collect();
            let mut s = table(&["program", "mips", "violations", "status"], &rows);
            s.push_str(&format!("{} programs, {violations} violations, {failed} failed\n", results.len()));
            s
        }
    };
    Ok(Outcome { text, status })
}

struct DotLabels;

impl AnalysisVisitor for DotLabels {
    type Output = BTreeMap<EdgeId, String>;

    fn visit<A: Analysis>(self, ctx: &Context, a: &A, run: Run<A::Value>) -> Self::Output {
        let prog = &ctx.prog;
        prog.edges
            .iter()
            .map(|e| {
                let p = prog.proc_of_edge(e.id);
                let label = match &run.lifted {
                    Some(l) => l.edge(e.id).describe(|d| a.show(prog, p, d).to_string()),
                    None => a.show(prog, p, &run.edges[e.id as usize]).to_string(),
                };
                (e.id, label)
            })
            .collect()
    }
}

pub fn dump_dot(path: &Path, only: Option<&str>, kind: Option<AnalysisKind>, mode: Mode, opts: OptConfig) -> anyhow::Result<Outcome> {
    let ctx = load(path)?;
    let procs: Vec<usize> = match only {
        Some(name) => vec![ctx.prog.proc_by_name(name).with_context(|| format!("no procedure `{name}`"))?],
        None => (0..ctx.prog.procs.len()).collect(),
    };
    let labels = match kind {
        Some(k) => with_analysis(&ctx, k, mode, opts, DotLabels)?,
        None => BTreeMap::new(),
    };
    let text: String = procs.into_iter().map(|p| emit_dot(&ctx.prog, p, &labels)).collect();
    done(text)
}
