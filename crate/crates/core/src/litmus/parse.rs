use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{
    BinOp, Expectation, Expr, FenceKind, Instr, LoadMode, Loc, Pid, Process, Program, Reg,
    RmwKind, StoreMode, UnOp, Value,
};
use crate::machine::ModelId;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("undeclared register `{0}`")]
    UndeclaredRegister(String),
    #[error("undeclared location `{0}`")]
    UndeclaredLocation(String),
    #[error("value {0} outside the data domain")]
    ValueOutOfDomain(u64),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("unknown process `{0}`")]
    UnknownProcess(String),
    #[error("duplicate declaration `{0}`")]
    Duplicate(String),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

impl Pos {
    fn err(self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            kind,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    Sym(&'static str),
    Eof,
}

const SYMBOLS: [&str; 24] = [
    "==", "!=", "<=", ">=", "&&", "||", "{", "}", "(", ")", ";", ":", ",", ".", "=", "<", ">",
    "+", "-", "*", "/", "%", "!", "|",
];

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            i += 1;
            col += 1;
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<u64>()
                .map_err(|_| pos.err(ParseErrorKind::ValueOutOfDomain(u64::MAX)))?;
            col += i - start;
            out.push((Tok::Int(v), pos));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
        } else {
            let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let sym = SYMBOLS
                .iter()
                .find(|s| rest.starts_with(**s))
                .ok_or_else(|| pos.err(ParseErrorKind::Syntax(alloc::format!("unexpected `{c}`"))))?;
            i += sym.len();
            col += sym.len();
            out.push((Tok::Sym(sym), pos));
        }
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

#[derive(Clone, Debug)]
enum RawExpr {
    Int(u64),
    Name(String, Pos),
    Qual(String, String, Pos),
    Un(UnOp, Box<RawExpr>),
    Bin(BinOp, Box<RawExpr>, Box<RawExpr>),
}

enum RawBody {
    Load { reg: String, loc: Loc, mode: LoadMode },
    Store { loc: Loc, expr: RawExpr, mode: StoreMode },
    Assign { reg: String, expr: RawExpr },
    Rmw { reg: String, loc: Loc, kind: RawRmw },
    Fence(FenceKind),
    Goto(String, Pos),
    If(RawExpr, String, Pos),
    Choice((String, Pos), (String, Pos)),
    Halt,
}

enum RawRmw {
    Cas(RawExpr, RawExpr),
    Fadd(RawExpr),
}

const KEYWORDS: [&str; 15] = [
    "model", "domain", "locations", "process", "expect", "on", "fence", "goto", "if", "choice", "halt",
    "cas", "fadd", "racing", "acq",
];

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    dmax: Value,
    locations: Vec<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn syntax<T>(&self, msg: &str) -> Result<T, ParseError> {
        let found = match self.peek() {
            Tok::Ident(s) => alloc::format!("`{s}`"),
            Tok::Int(v) => alloc::format!("`{v}`"),
            Tok::Sym(s) => alloc::format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        };
        Err(self
            .pos()
            .err(ParseErrorKind::Syntax(alloc::format!("expected {msg}, found {found}"))))
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn is_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Tok::Sym(s) if *s == sym)
    }

    fn expect_sym(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.is_sym(sym) {
            self.bump();
            Ok(())
        } else {
            self.syntax(&alloc::format!("`{sym}`"))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.syntax(&alloc::format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let p = self.pos();
                self.bump();
                Ok((s, p))
            }
            _ => self.syntax("identifier"),
        }
    }

    fn int(&mut self) -> Result<(u64, Pos), ParseError> {
        match *self.peek() {
            Tok::Int(v) => {
                let p = self.pos();
                self.bump();
                Ok((v, p))
            }
            _ => self.syntax("integer"),
        }
    }

    fn location(&mut self) -> Result<Loc, ParseError> {
        let (name, pos) = self.ident()?;
        self.loc_of(&name)
            .ok_or_else(|| pos.err(ParseErrorKind::UndeclaredLocation(name)))
    }

    fn loc_of(&self, name: &str) -> Option<Loc> {
        self.locations
            .iter()
            .position(|l| l == name)
            .map(|i| Loc(i as u16))
    }

    fn expr(&mut self) -> Result<RawExpr, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.is_sym("||") {
            self.bump();
            let rhs = self.and_expr()?;
            lhs = RawExpr::Bin(BinOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<RawExpr, ParseError> {
        let mut lhs = self.cmp_expr()?;
        while self.is_sym("&&") {
            self.bump();
            let rhs = self.cmp_expr()?;
            lhs = RawExpr::Bin(BinOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self) -> Result<RawExpr, ParseError> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::Sym("==") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.add_expr()?;
        Ok(RawExpr::Bin(op, Box::new(lhs), Box::new(rhs)))
    }

    fn add_expr(&mut self) -> Result<RawExpr, ParseError> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.mul_expr()?;
            lhs = RawExpr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn mul_expr(&mut self) -> Result<RawExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => BinOp::Mul,
                Tok::Sym("/") => BinOp::Div,
                Tok::Sym("%") => BinOp::Mod,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = RawExpr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<RawExpr, ParseError> {
        if self.is_sym("!") {
            self.bump();
            return Ok(RawExpr::Un(UnOp::Not, Box::new(self.unary()?)));
        }
        if self.is_sym("-") {
            self.bump();
            return Ok(RawExpr::Un(UnOp::Neg, Box::new(self.unary()?)));
        }
        if self.is_sym("(") {
            self.bump();
            let e = self.expr()?;
            self.expect_sym(")")?;
            return Ok(e);
        }
        if let Tok::Int(_) = self.peek() {
            let (v, p) = self.int()?;
            if v > self.dmax as u64 {
                return Err(p.err(ParseErrorKind::ValueOutOfDomain(v)));
            }
            return Ok(RawExpr::Int(v));
        }
        let (name, pos) = self.ident()?;
        if self.is_sym(".") {
            self.bump();
            let (reg, _) = self.ident()?;
            return Ok(RawExpr::Qual(name, reg, pos));
        }
        Ok(RawExpr::Name(name, pos))
    }

    fn stmt(&mut self) -> Result<(Option<(String, Pos)>, RawBody), ParseError> {
        let label = if matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek2(), Tok::Sym(":"))
        {
            let l = self.ident()?;
            self.bump();
            Some(l)
        } else {
            None
        };
        let body = if self.is_kw("fence") {
            self.bump();
            let (kind, pos) = match self.peek().clone() {
                Tok::Ident(s) => (s, self.pos()),
                _ => return self.syntax("fence kind"),
            };
            self.bump();
            RawBody::Fence(FenceKind::from_name(&kind).ok_or_else(|| {
                pos.err(ParseErrorKind::Syntax(alloc::format!("unknown fence kind `{kind}`")))
            })?)
        } else if self.is_kw("goto") {
            self.bump();
            let (l, p) = self.ident()?;
            RawBody::Goto(l, p)
        } else if self.is_kw("if") {
            self.bump();
            let cond = self.expr()?;
            self.expect_kw("goto")?;
            let (l, p) = self.ident()?;
            RawBody::If(cond, l, p)
        } else if self.is_kw("choice") {
            self.bump();
            let a = self.ident()?;
            let b = self.ident()?;
            RawBody::Choice(a, b)
        } else if self.is_kw("halt") {
            self.bump();
            RawBody::Halt
        } else {
            let (target, _) = self.ident()?;
            self.expect_sym("=")?;
            if let Some(loc) = self.loc_of(&target) {
                let expr = self.expr()?;
                let mode = if self.is_kw("rel") {
                    self.bump();
                    StoreMode::Release
                } else {
                    StoreMode::Plain
                };
                RawBody::Store { loc, expr, mode }
            } else if self.is_kw("cas") || self.is_kw("fadd") {
                let cas = self.is_kw("cas");
                self.bump();
                self.expect_sym("(")?;
                let loc = self.location()?;
                self.expect_sym(",")?;
                let e1 = self.expr()?;
                let kind = if cas {
                    self.expect_sym(",")?;
                    RawRmw::Cas(e1, self.expr()?)
                } else {
                    RawRmw::Fadd(e1)
                };
                self.expect_sym(")")?;
                RawBody::Rmw {
                    reg: target,
                    loc,
                    kind,
                }
            } else if let (Tok::Ident(name), Tok::Sym(";" | "}") | Tok::Ident(_)) =
                (self.peek().clone(), self.peek2().clone())
            {
                if let Some(loc) = self.loc_of(&name) {
                    self.bump();
                    let mode = if self.is_kw("racing") {
                        self.bump();
                        LoadMode::Racing
                    } else if self.is_kw("acq") {
                        self.bump();
                        LoadMode::Acquire
                    } else {
                        LoadMode::HazardFree
                    };
                    RawBody::Load {
                        reg: target,
                        loc,
                        mode,
                    }
                } else {
                    RawBody::Assign {
                        reg: target,
                        expr: self.expr()?,
                    }
                }
            } else {
                RawBody::Assign {
                    reg: target,
                    expr: self.expr()?,
                }
            }
        };
        Ok((label, body))
    }

    fn process(&mut self) -> Result<Process, ParseError> {
        self.expect_kw("process")?;
        let (name, _) = self.ident()?;
        self.expect_sym("{")?;
        let mut stmts = Vec::new();
        while !self.is_sym("}") {
            stmts.push(self.stmt()?);
            if self.is_sym(";") {
                self.bump();
            } else if !self.is_sym("}") {
                return self.syntax("`;`");
            }
        }
        self.bump();

        let mut regs: Vec<String> = Vec::new();
        let mut labels: Vec<(String, usize)> = Vec::new();
        for (i, (label, body)) in stmts.iter().enumerate() {
            if let Some((l, p)) = label {
                if labels.iter().any(|(x, _)| x == l) {
                    return Err(p.err(ParseErrorKind::DuplicateLabel(l.clone())));
                }
                labels.push((l.clone(), i));
            }
            let defined = match body {
                RawBody::Load { reg, .. } | RawBody::Assign { reg, .. } | RawBody::Rmw { reg, .. } => {
                    Some(reg)
                }
                _ => None,
            };
            if let Some(r) = defined {
                if !regs.contains(r) {
                    regs.push(r.clone());
                }
            }
        }

        let resolve_label = |l: &str, p: Pos| {
            labels
                .iter()
                .find(|(x, _)| x == l)
                .map(|&(_, i)| i)
                .ok_or_else(|| p.err(ParseErrorKind::UnknownLabel(l.to_string())))
        };
        let reg_of = |r: &str| Reg(regs.iter().position(|x| x == r).unwrap() as u16);
        let local = |e: &RawExpr| resolve_local(e, &regs, &self.locations);

        let mut code = Vec::with_capacity(stmts.len() + 1);
        for (_, body) in &stmts {
            code.push(match body {
                RawBody::Load { reg, loc, mode } => Instr::Load {
                    reg: reg_of(reg),
                    loc: *loc,
                    mode: *mode,
                },
                RawBody::Store { loc, expr, mode } => Instr::Store {
                    loc: *loc,
                    expr: local(expr)?,
                    mode: *mode,
                },
                RawBody::Assign { reg, expr } => Instr::Assign {
                    reg: reg_of(reg),
                    expr: local(expr)?,
                },
                RawBody::Rmw { reg, loc, kind } => Instr::Rmw {
                    reg: Some(reg_of(reg)),
                    loc: *loc,
                    kind: match kind {
                        RawRmw::Cas(a, b) => RmwKind::Cas(local(a)?, local(b)?),
                        RawRmw::Fadd(e) => RmwKind::Fadd(local(e)?),
                    },
                },
                RawBody::Fence(k) => Instr::Fence(*k),
                RawBody::Goto(l, p) => Instr::Goto(resolve_label(l, *p)?),
                RawBody::If(c, l, p) => Instr::CondGoto {
                    cond: local(c)?,
                    target: resolve_label(l, *p)?,
                },
                RawBody::Choice((a, pa), (b, pb)) => {
                    Instr::Choice(resolve_label(a, *pa)?, resolve_label(b, *pb)?)
                }
                RawBody::Halt => Instr::Halt,
            });
        }
        if code.last() != Some(&Instr::Halt) {
            code.push(Instr::Halt);
        }
        Ok(Process {
            name,
            code,
            labels,
            regs,
        })
    }
}

fn resolve_local(e: &RawExpr, regs: &[String], locs: &[String]) -> Result<Expr, ParseError> {
    Ok(match e {
        RawExpr::Int(v) => Expr::Const(*v as Value),
        RawExpr::Name(n, p) => match regs.iter().position(|r| r == n) {
            Some(i) => Expr::Reg(Reg(i as u16)),
            None if locs.contains(n) => {
                return Err(p.err(ParseErrorKind::Syntax(alloc::format!(
                    "location `{n}` cannot appear inside an expression"
                ))))
            }
            None => return Err(p.err(ParseErrorKind::UndeclaredRegister(n.clone()))),
        },
        RawExpr::Qual(_, _, p) => {
            return Err(p.err(ParseErrorKind::Syntax(
                "qualified registers are only allowed in expectations".into(),
            )))
        }
        RawExpr::Un(op, inner) => Expr::Un(*op, Box::new(resolve_local(inner, regs, locs)?)),
        RawExpr::Bin(op, l, r) => Expr::bin(
            *op,
            resolve_local(l, regs, locs)?,
            resolve_local(r, regs, locs)?,
        ),
    })
}

fn resolve_final(e: &RawExpr, procs: &[Process]) -> Result<Expr, ParseError> {
    Ok(match e {
        RawExpr::Int(v) => Expr::Const(*v as Value),
        RawExpr::Name(n, p) => {
            return Err(p.err(ParseErrorKind::Syntax(alloc::format!(
                "register `{n}` must be qualified as `process.register`"
            ))))
        }
        RawExpr::Qual(proc, reg, p) => {
            let pid = procs
                .iter()
                .position(|x| &x.name == proc)
                .ok_or_else(|| p.err(ParseErrorKind::UnknownProcess(proc.clone())))?;
            let r = procs[pid]
                .reg(reg)
                .ok_or_else(|| p.err(ParseErrorKind::UndeclaredRegister(alloc::format!("{proc}.{reg}"))))?;
            Expr::Qual(Pid(pid as u16), r)
        }
        RawExpr::Un(op, inner) => Expr::Un(*op, Box::new(resolve_final(inner, procs)?)),
        RawExpr::Bin(op, l, r) => {
            Expr::bin(*op, resolve_final(l, procs)?, resolve_final(r, procs)?)
        }
    })
}

/// Parses the litmus DSL into a source [`Program`] (no fences inserted).
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        dmax: 1,
        locations: Vec::new(),
    };
    let mut model = None;
    let mut saw_domain = false;
    loop {
        if p.is_kw("model") {
            p.bump();
            let pos = p.pos();
            let name = match p.bump().0 {
                Tok::Ident(s) => s,
                _ => return Err(pos.err(ParseErrorKind::Syntax("expected model name".into()))),
            };
            model = Some(
                name.parse::<ModelId>()
                    .map_err(|_| pos.err(ParseErrorKind::UnknownModel(name)))?,
            );
        } else if p.is_kw("domain") {
            p.bump();
            let (v, pos) = p.int()?;
            if saw_domain {
                return Err(pos.err(ParseErrorKind::Duplicate("domain".into())));
            }
            saw_domain = true;
            p.dmax = Value::try_from(v).map_err(|_| pos.err(ParseErrorKind::ValueOutOfDomain(v)))?;
        } else if p.is_kw("locations") {
            p.bump();
            while let Tok::Ident(s) = p.peek().clone() {
                if KEYWORDS.contains(&s.as_str()) {
                    break;
                }
                let pos = p.pos();
                if p.locations.contains(&s) {
                    return Err(pos.err(ParseErrorKind::Duplicate(s)));
                }
                p.locations.push(s);
                p.bump();
            }
        } else {
            break;
        }
    }
    let mut processes: Vec<Process> = Vec::new();
    while p.is_kw("process") {
        let pos = p.pos();
        let proc = p.process()?;
        if processes.iter().any(|q| q.name == proc.name) {
            return Err(pos.err(ParseErrorKind::Duplicate(proc.name)));
        }
        if let Some(r) = proc.regs.iter().find(|r| p.locations.contains(r)) {
            return Err(pos.err(ParseErrorKind::Duplicate(r.clone())));
        }
        processes.push(proc);
    }
    if processes.is_empty() {
        return p.syntax("`process`");
    }
    let mut expects = Vec::new();
    while p.is_kw("expect") {
        p.bump();
        let allowed = if p.is_kw("allowed") || p.is_kw("forbidden") {
            p.is_kw("allowed")
        } else {
            return p.syntax("`allowed` or `forbidden`");
        };
        p.bump();
        let mut models = Vec::new();
        if p.is_kw("on") {
            p.bump();
            while let Tok::Ident(name) = p.peek().clone() {
                let pos = p.pos();
                let m = name
                    .parse::<ModelId>()
                    .map_err(|_| pos.err(ParseErrorKind::UnknownModel(name.clone())))?;
                if !models.contains(&m) {
                    models.push(m);
                }
                p.bump();
            }
        }
        p.expect_sym(":")?;
        let raw = p.expr()?;
        expects.push(Expectation {
            allowed,
            models,
            pred: resolve_final(&raw, &processes)?,
        });
    }
    if *p.peek() != Tok::Eof {
        return p.syntax("end of input");
    }
    Ok(Program {
        model,
        domain_max: p.dmax,
        locations: p.locations,
        processes,
        expects,
    })
}
