//! Hand-written lexer and recursive-descent parser for MiniIR.

use super::ast::*;
use super::FrontendError;
use num_bigint::BigInt;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Punct(&'static str),
    At,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const PUNCT: [&str; 22] = [
    "==", "!=", "<=", ">=", "&&", "||", "(", ")", "{", "}", ";", ",", ":", "=", "<", ">", "+", "-",
    "*", "/", "!", "@",
];

fn lex(src: &str) -> Result<Vec<Token>, FrontendError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start_col = col;
        if c.is_ascii_digit() {
            let s = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[s..i].iter().collect();
            col += i - s;
            let value = text.parse::<BigInt>().expect("digits parse");
            out.push(Token { tok: Tok::Int(value), line, col: start_col });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let s = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - s;
            out.push(Token { tok: Tok::Ident(chars[s..i].iter().collect()), line, col: start_col });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let Some(p) = PUNCT.iter().find(|p| rest.starts_with(**p)) else {
            return Err(FrontendError::Syntax { line, col, msg: format!("unexpected character {c:?}") });
        };
        i += p.len();
        col += p.len();
        let tok = if *p == "@" { Tok::At } else { Tok::Punct(p) };
        out.push(Token { tok, line, col: start_col });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

const KEYWORDS: [&str; 14] = [
    "proc", "entry", "global", "extern", "read", "print", "assert", "if", "else", "switch", "case",
    "default", "while", "skip",
];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, FrontendError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(FrontendError::Syntax { line: t.line, col: t.col, msg: msg.into() })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.is_punct(p) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{p}`, found {}", describe(self.peek())))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{kw}`, found {}", describe(self.peek())))
        }
    }

    fn name(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            t => self.err(format!("expected a name, found {}", describe(&t))),
        }
    }

    fn name_list(&mut self) -> PResult<Vec<String>> {
        let mut names = vec![self.name()?];
        while self.is_punct(",") {
            self.bump();
            names.push(self.name()?);
        }
        Ok(names)
    }

    fn int(&mut self) -> PResult<BigInt> {
        let neg = if self.is_punct("-") {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Int(k) => {
                self.bump();
                Ok(if neg { -k } else { k })
            }
            t => self.err(format!("expected an integer, found {}", describe(&t))),
        }
    }

    fn program(&mut self) -> PResult<SourceProgram> {
        let mut prog = SourceProgram::default();
        loop {
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::At => {
                    self.bump();
                    let flag = self.name()?;
                    if flag != "atomic_cond" {
                        return self.err(format!("unknown directive @{flag}"));
                    }
                    prog.atomic_cond = true;
                }
                Tok::Ident(s) if s == "global" => {
                    self.bump();
                    prog.globals.extend(self.name_list()?);
                    self.expect_punct(";")?;
                }
                Tok::Ident(s) if s == "extern" => {
                    self.bump();
                    prog.externs.extend(self.name_list()?);
                    self.expect_punct(";")?;
                }
                Tok::Ident(s) if s == "proc" || s == "entry" => prog.procs.push(self.proc_decl()?),
                t => return self.err(format!("expected `proc`, found {}", describe(&t))),
            }
        }
        Ok(prog)
    }

    fn proc_decl(&mut self) -> PResult<ProcDecl> {
        let entry = if self.is_kw("entry") {
            self.bump();
            true
        } else {
            false
        };
        self.expect_kw("proc")?;
        let name = self.name()?;
        self.expect_punct("(")?;
        let params = if self.is_punct(")") { Vec::new() } else { self.name_list()? };
        self.expect_punct(")")?;
        let body = self.block()?;
        Ok(ProcDecl { name, params, entry, body })
    }

    fn block(&mut self) -> PResult<Block> {
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.is_punct("}") {
            if matches!(self.peek(), Tok::Eof) {
                return self.err("unterminated block");
            }
            stmts.push(self.stmt()?);
        }
        self.bump();
        Ok(stmts)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            t => return self.err(format!("expected a statement, found {}", describe(t))),
        };
        let stmt = match kw.as_str() {
            "read" => {
                self.bump();
                let v = self.name()?;
                self.expect_punct(";")?;
                Stmt::Read(v)
            }
            "print" => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(";")?;
                Stmt::Print(e)
            }
            "assert" => {
                self.bump();
                self.expect_punct("(")?;
                let c = self.cond()?;
                self.expect_punct(")")?;
                self.expect_punct(";")?;
                Stmt::Assert(c)
            }
            "skip" => {
                self.bump();
                self.expect_punct(";")?;
                Stmt::Skip
            }
            "if" => {
                self.bump();
                self.expect_punct("(")?;
                let c = self.cond()?;
                self.expect_punct(")")?;
                let then = self.block()?;
                let els = if self.is_kw("else") {
                    self.bump();
                    if self.is_kw("if") {
                        Some(vec![self.stmt()?])
                    } else {
                        Some(self.block()?)
                    }
                } else {
                    None
                };
                Stmt::If(c, then, els)
            }
            "while" => {
                self.bump();
                self.expect_punct("(")?;
                let c = self.cond()?;
                self.expect_punct(")")?;
                Stmt::While(c, self.block()?)
            }
            "switch" => self.switch()?,
            _ => {
                let name = self.name()?;
                if self.is_punct("(") {
                    self.bump();
                    self.expect_punct(")")?;
                    self.expect_punct(";")?;
                    Stmt::Call(name)
                } else {
                    self.expect_punct("=")?;
                    let e = self.expr()?;
                    self.expect_punct(";")?;
                    Stmt::Assign(name, e)
                }
            }
        };
        Ok(stmt)
    }

    fn switch(&mut self) -> PResult<Stmt> {
        self.expect_kw("switch")?;
        self.expect_punct("(")?;
        let var = self.name()?;
        self.expect_punct(")")?;
        self.expect_punct("{")?;
        let mut cases: Vec<(BigInt, Block)> = Vec::new();
        while self.is_kw("case") {
            self.bump();
            let k = self.int()?;
            if cases.iter().any(|(c, _)| *c == k) {
                return self.err(format!("duplicate case {k}"));
            }
            self.expect_punct(":")?;
            cases.push((k, self.block()?));
        }
        if cases.is_empty() {
            return self.err("switch needs at least one case");
        }
        self.expect_kw("default")?;
        self.expect_punct(":")?;
        let default = self.block()?;
        self.expect_punct("}")?;
        Ok(Stmt::Switch(var, cases, default))
    }

    fn cond(&mut self) -> PResult<BoolExpr<String>> {
        let mut lhs = self.cond_and()?;
        while self.is_punct("||") {
            self.bump();
            let rhs = self.cond_and()?;
            lhs = BoolExpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn cond_and(&mut self) -> PResult<BoolExpr<String>> {
        let mut lhs = self.cond_unary()?;
        while self.is_punct("&&") {
            self.bump();
            let rhs = self.cond_unary()?;
            lhs = BoolExpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn cond_unary(&mut self) -> PResult<BoolExpr<String>> {
        if self.is_punct("!") {
            self.bump();
            return Ok(BoolExpr::Not(Box::new(self.cond_unary()?)));
        }
        if self.is_punct("(") {
            self.bump();
            let c = self.cond()?;
            self.expect_punct(")")?;
            return Ok(c);
        }
        self.atom().map(BoolExpr::Atom)
    }

    fn cmp_op(&mut self) -> Option<CmpOp> {
        let op = match self.peek() {
            Tok::Punct("<") => CmpOp::Lt,
            Tok::Punct("<=") => CmpOp::Le,
            Tok::Punct(">") => CmpOp::Gt,
            Tok::Punct(">=") => CmpOp::Ge,
            Tok::Punct("==") => CmpOp::Eq,
            Tok::Punct("!=") => CmpOp::Ne,
            _ => return None,
        };
        self.bump();
        Some(op)
    }

    fn atom(&mut self) -> PResult<Atom<String>> {
        let leading_const = matches!(self.peek(), Tok::Int(_))
            || (self.is_punct("-") && matches!(self.peek_at(1), Tok::Int(_)));
        if leading_const {
            let k = self.int()?;
            let Some(op) = self.cmp_op() else {
                return self.err("expected a comparison operator");
            };
            let var = self.name()?;
            return Ok(Atom { lhs: var, op: op.flip(), rhs: Operand::Const(k), truthy: false });
        }
        let lhs = self.name()?;
        let Some(op) = self.cmp_op() else {
            return Ok(Atom { lhs, op: CmpOp::Ne, rhs: Operand::Const(BigInt::from(0)), truthy: true });
        };
        let rhs = if matches!(self.peek(), Tok::Ident(_)) {
            Operand::Var(self.name()?)
        } else {
            Operand::Const(self.int()?)
        };
        Ok(Atom { lhs, op, rhs, truthy: false })
    }

    fn expr(&mut self) -> PResult<Expr<String>> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.is_punct("+") {
                BinOp::Add
            } else if self.is_punct("-") {
                BinOp::Sub
            } else {
                break;
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> PResult<Expr<String>> {
        let mut lhs = self.factor()?;
        loop {
            let op = if self.is_punct("*") {
                BinOp::Mul
            } else if self.is_punct("/") {
                BinOp::Div
            } else {
                break;
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> PResult<Expr<String>> {
        match self.peek().clone() {
            Tok::Int(k) => {
                self.bump();
                Ok(Expr::Int(k))
            }
            Tok::Punct("-") => {
                self.bump();
                // A literal keeps its sign so `print -1;` round-trips as a constant.
                if let Tok::Int(k) = self.peek().clone() {
                    self.bump();
                    return Ok(Expr::Int(-k));
                }
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(_) => Ok(Expr::Var(self.name()?)),
            t => self.err(format!("expected an expression, found {}", describe(&t))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(k) => format!("`{k}`"),
        Tok::Punct(p) => format!("`{p}`"),
        Tok::At => "`@`".to_string(),
        Tok::Eof => "end of input".to_string(),
    }
}

/// Parses MiniIR text into its surface syntax tree.
pub fn parse_source(src: &str) -> Result<SourceProgram, FrontendError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    p.program()
}
