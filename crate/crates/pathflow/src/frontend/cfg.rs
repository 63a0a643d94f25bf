use super::ast::*;
use super::*;
use std::collections::{HashMap, VecDeque};

struct RawEdge {
    src: NodeId,
    dst: NodeId,
    label: Label,
    rank: usize,
}

type Exits = Vec<(NodeId, Label, usize)>;

struct Builder<'a> {
    nodes: Vec<Node>,
    raw: Vec<RawEdge>,
    vars: Vec<Var>,
    var_index: HashMap<(Option<ProcId>, String), VarId>,
    proc_names: &'a HashMap<String, ProcId>,
    externs: &'a [String],
    atomic_cond: bool,
    cur: ProcId,
}

impl Builder<'_> {
    fn var(&mut self, name: &str) -> VarId {
        if let Some(v) = self.var_index.get(&(None, name.to_string())) {
            return *v;
        }
        let key = (Some(self.cur), name.to_string());
        if let Some(v) = self.var_index.get(&key) {
            return *v;
        }
        let id = self.vars.len() as VarId;
        self.vars.push(Var { name: name.to_string(), proc: Some(self.cur) });
        self.var_index.insert(key, id);
        id
    }

    fn node(&mut self, kind: NodeKind) -> NodeId {
        let id = self.nodes.len() as NodeId;
        self.nodes.push(Node { id, proc: self.cur, kind });
        id
    }

    fn connect(&mut self, preds: Exits, dst: NodeId) {
        for (src, label, rank) in preds {
            self.raw.push(RawEdge { src, dst, label, rank });
        }
    }

    fn simple(&mut self, kind: NodeKind, preds: Exits) -> Exits {
        let n = self.node(kind);
        self.connect(preds, n);
        vec![(n, Label::None, 0)]
    }

    fn block(&mut self, block: &[Stmt], mut preds: Exits) -> Result<Exits, FrontendError> {
        for s in block {
            preds = self.stmt(s, preds)?;
        }
        Ok(preds)
    }

    fn stmt(&mut self, s: &Stmt, preds: Exits) -> Result<Exits, FrontendError> {
        Ok(match s {
            Stmt::Assign(v, e) => {
                let v = self.var(v);
                let e = e.map(&mut |n| self.var(n));
                self.simple(NodeKind::Assign(v, e), preds)
            }
            Stmt::Read(v) => {
                let v = self.var(v);
                self.simple(NodeKind::Read(v), preds)
            }
            Stmt::Print(e) => {
                let e = e.map(&mut |n| self.var(n));
                self.simple(NodeKind::Print(e), preds)
            }
            Stmt::Assert(c) => {
                let c = c.map(&mut |n| self.var(n));
                self.simple(NodeKind::Assert(c), preds)
            }
            Stmt::Skip => self.simple(NodeKind::Skip, preds),
            Stmt::Call(name) => {
                let kind = if let Some(p) = self.proc_names.get(name) {
                    NodeKind::Call(*p)
                } else if self.externs.contains(name) {
                    NodeKind::Extern(name.clone())
                } else {
                    return Err(FrontendError::UnresolvedCall(name.clone()));
                };
                self.simple(kind, preds)
            }
            Stmt::If(c, then, els) => {
                let (t, f) = self.cond(c, preds);
                let mut out = self.block(then, t)?;
                match els {
                    Some(b) => out.extend(self.block(b, f)?),
                    None => out.extend(f),
                }
                out
            }
            Stmt::While(c, body) => {
                let head = self.nodes.len() as NodeId;
                let (t, f) = self.cond(c, preds);
                let back = self.block(body, t)?;
                self.connect(back, head);
                f
            }
            Stmt::Switch(v, cases, default) => {
                let v = self.var(v);
                let ks: Vec<BigInt> = cases.iter().map(|(k, _)| k.clone()).collect();
                let n = self.node(NodeKind::Switch(v, ks));
                self.connect(preds, n);
                let mut out = Vec::new();
                for (i, (k, b)) in cases.iter().enumerate() {
                    out.extend(self.block(b, vec![(n, Label::Case(k.clone()), i)])?);
                }
                out.extend(self.block(default, vec![(n, Label::Default, cases.len())])?);
                out
            }
        })
    }

    /// Short-circuit lowering of a condition; returns (true exits, false exits).
    fn cond(&mut self, c: &BoolExpr<String>, preds: Exits) -> (Exits, Exits) {
        if self.atomic_cond && c.is_compound() {
            let c = c.map(&mut |n| self.var(n));
            return self.branch(Cond::Opaque(c), preds);
        }
        match c {
            BoolExpr::Atom(a) => {
                let a = a.map(&mut |n| self.var(n));
                self.branch(Cond::Cmp(a), preds)
            }
            BoolExpr::And(a, b) => {
                let (ta, mut fa) = self.cond(a, preds);
                let (tb, fb) = self.cond(b, ta);
                fa.extend(fb);
                (tb, fa)
            }
            BoolExpr::Or(a, b) => {
                let (mut ta, fa) = self.cond(a, preds);
                let (tb, fb) = self.cond(b, fa);
                ta.extend(tb);
                (ta, fb)
            }
            BoolExpr::Not(a) => {
                let (t, f) = self.cond(a, preds);
                (f, t)
            }
        }
    }

    fn branch(&mut self, c: Cond, preds: Exits) -> (Exits, Exits) {
        let n = self.node(NodeKind::Branch(c));
        self.connect(preds, n);
        (vec![(n, Label::True, 0)], vec![(n, Label::False, 1)])
    }
}

pub(super) fn lower(source: SourceProgram) -> Result<Program, FrontendError> {
    if source.procs.is_empty() {
        return Err(FrontendError::Invalid("program declares no procedure".into()));
    }
    let mut proc_names = HashMap::new();
    for (i, p) in source.procs.iter().enumerate() {
        if proc_names.insert(p.name.clone(), i).is_some() {
            return Err(FrontendError::Invalid(format!("procedure `{}` declared twice", p.name)));
        }
        if source.externs.contains(&p.name) {
            return Err(FrontendError::Invalid(format!("`{}` is both extern and defined", p.name)));
        }
    }
    let entries: Vec<usize> = source.procs.iter().enumerate().filter(|(_, p)| p.entry).map(|(i, _)| i).collect();
    let entry = match entries.as_slice() {
        [] => 0,
        [e] => *e,
        _ => return Err(FrontendError::Invalid("more than one procedure is marked entry".into())),
    };

    let mut b = Builder {
        nodes: Vec::new(),
        raw: Vec::new(),
        vars: Vec::new(),
        var_index: HashMap::new(),
        proc_names: &proc_names,
        externs: &source.externs,
        atomic_cond: source.atomic_cond,
        cur: 0,
    };
    for g in &source.globals {
        if b.var_index.contains_key(&(None, g.clone())) {
            continue;
        }
        let id = b.vars.len() as VarId;
        b.vars.push(Var { name: g.clone(), proc: None });
        b.var_index.insert((None, g.clone()), id);
    }

    let mut procs = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();
    for (pi, decl) in source.procs.iter().enumerate() {
        b.cur = pi;
        let params: Vec<VarId> = decl.params.iter().map(|n| b.var(n)).collect();
        let first = b.nodes.len() as NodeId;
        let needs_skip = matches!(decl.body.first(), None | Some(Stmt::While(..)));
        let preds = if needs_skip { b.simple(NodeKind::Skip, Vec::new()) } else { Vec::new() };
        let exits = b.block(&decl.body, preds)?;
        let exit = b.node(NodeKind::Exit);
        b.connect(exits, exit);
        let end = b.nodes.len() as NodeId;

        let mut raw: Vec<RawEdge> = std::mem::take(&mut b.raw);
        raw.sort_by_key(|r| (r.src, r.rank));
        let e0 = edges.len() as EdgeId;
        for r in raw {
            let id = edges.len() as EdgeId;
            edges.push(Edge { id, src: r.src, dst: r.dst, label: r.label });
        }
        procs.push(Procedure {
            name: decl.name.clone(),
            params,
            start: first,
            exit,
            nodes: first..end,
            edges: e0..edges.len() as EdgeId,
        });
    }

    let n = b.nodes.len();
    let mut succ = vec![Vec::new(); n];
    let mut pred = vec![Vec::new(); n];
    for e in &edges {
        succ[e.src as usize].push(e.id);
        pred[e.dst as usize].push(e.id);
    }

    for p in &procs {
        let mut seen = vec![false; p.node_count()];
        let mut queue = VecDeque::from([p.start]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &e in &succ[v as usize] {
                let m = edges[e as usize].dst;
                let slot = &mut seen[(m - p.nodes.start) as usize];
                if !*slot {
                    *slot = true;
                    queue.push_back(m);
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(FrontendError::UnreachableNode(p.nodes.start + i as NodeId + 1));
        }
        debug_assert!(pred[p.start as usize].is_empty());
        debug_assert!(succ[p.exit as usize].is_empty());
    }

    Ok(Program {
        procs,
        entry,
        nodes: b.nodes,
        edges,
        vars: b.vars,
        externs: source.externs.clone(),
        atomic_cond: source.atomic_cond,
        succ,
        pred,
        source,
    })
}
