use super::ast::*;
use std::fmt::{self, Write};

struct Cond<'a>(&'a BoolExpr<String>);

impl fmt::Display for Cond<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_with(f, &|v: &String| v.clone())
    }
}

struct Ex<'a>(&'a Expr<String>);

impl fmt::Display for Ex<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_with(f, &|v: &String| v.clone())
    }
}

fn block(out: &mut String, b: &Block, depth: usize) {
    out.push_str("{\n");
    for s in b {
        stmt(out, s, depth + 1);
    }
    out.push_str(&"    ".repeat(depth));
    out.push('}');
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    let pad = "    ".repeat(depth);
    out.push_str(&pad);
    match s {
        Stmt::Assign(v, e) => writeln!(out, "{v} = {};", Ex(e)).unwrap(),
        Stmt::Read(v) => writeln!(out, "read {v};").unwrap(),
        Stmt::Print(e) => writeln!(out, "print {};", Ex(e)).unwrap(),
        Stmt::Assert(c) => writeln!(out, "assert({});", Cond(c)).unwrap(),
        Stmt::Skip => out.push_str("skip;\n"),
        Stmt::Call(p) => writeln!(out, "{p}();").unwrap(),
        Stmt::If(c, t, e) => {
            write!(out, "if ({}) ", Cond(c)).unwrap();
            block(out, t, depth);
            if let Some(e) = e {
                out.push_str(" else ");
                block(out, e, depth);
            }
            out.push('\n');
        }
        Stmt::While(c, b) => {
            write!(out, "while ({}) ", Cond(c)).unwrap();
            block(out, b, depth);
            out.push('\n');
        }
        Stmt::Switch(v, cases, default) => {
            writeln!(out, "switch ({v}) {{").unwrap();
            for (k, b) in cases {
                write!(out, "{pad}    case {k}: ").unwrap();
                block(out, b, depth + 1);
                out.push('\n');
            }
            write!(out, "{pad}    default: ").unwrap();
            block(out, default, depth + 1);
            writeln!(out, "\n{pad}}}").unwrap();
        }
    }
}

/// Renders a syntax tree back to MiniIR text that parses to an equal tree.
pub fn pretty_print(p: &SourceProgram) -> String {
    let mut out = String::new();
    if p.atomic_cond {
        out.push_str("@atomic_cond\n");
    }
    if !p.globals.is_empty() {
        writeln!(out, "global {};", p.globals.join(", ")).unwrap();
    }
    if !p.externs.is_empty() {
        writeln!(out, "extern {};", p.externs.join(", ")).unwrap();
    }
    for (i, proc) in p.procs.iter().enumerate() {
        if i > 0 || !out.is_empty() {
            out.push('\n');
        }
        if proc.entry {
            out.push_str("entry ");
        }
        write!(out, "proc {}({}) ", proc.name, proc.params.join(", ")).unwrap();
        block(&mut out, &proc.body, 0);
        out.push('\n');
    }
    out
}
