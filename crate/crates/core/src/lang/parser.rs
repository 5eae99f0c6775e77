//! Lexer and recursive-descent parser for MiniImp source text.
//!
//! Parsing also resolves names: every variable must be declared before use
//! (block scoped) and names are unique within a function, so later passes can
//! treat variable types as function-wide facts.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::ast::*;
use super::types::{Indexable, TypeTag};
use super::value::{IndexVal, Value};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Float(f64),
    Str(Vec<u8>),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const PUNCTS: [&str; 23] = [
    "&&", "||", "==", "!=", "<=", ">=", "(", ")", "{", "}", ",", ";", "=", "<", ">", "+", "-",
    "*", "/", "%", "!", "@", ":",
];

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, message: String| ParseError { line, col, message };

    while i < bytes.len() {
        let c = bytes[i];
        let (tl, tc) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == b'\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if src[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if src[i..].starts_with("/*") {
            let rest = &src[i + 2..];
            let end = rest
                .find("*/")
                .ok_or_else(|| err(tl, tc, "unterminated block comment".into()))?;
            for ch in rest[..end + 2].bytes() {
                if ch == b'\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            i += end + 4;
            col += 2;
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            col += i - start;
            toks.push(Token { tok: Tok::Ident(src[start..i].to_string()), line: tl, col: tc });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let mut is_float = false;
            if i < bytes.len() && bytes[i] == b'.' {
                is_float = true;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    is_float = true;
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            col += i - start;
            let tok = if is_float {
                Tok::Float(text.parse().map_err(|_| err(tl, tc, format!("bad float `{text}`")))?)
            } else {
                Tok::Int(text.parse().map_err(|_| err(tl, tc, format!("integer `{text}` too large")))?)
            };
            toks.push(Token { tok, line: tl, col: tc });
            continue;
        }
        if c == b'"' {
            i += 1;
            col += 1;
            let mut out = Vec::new();
            loop {
                let b = *bytes
                    .get(i)
                    .ok_or_else(|| err(tl, tc, "unterminated string literal".into()))?;
                match b {
                    b'"' => {
                        i += 1;
                        col += 1;
                        break;
                    }
                    b'\n' => return Err(err(tl, tc, "newline in string literal".into())),
                    b'\\' => {
                        let e = *bytes
                            .get(i + 1)
                            .ok_or_else(|| err(line, col, "dangling escape".into()))?;
                        match e {
                            b'n' => out.push(b'\n'),
                            b't' => out.push(b'\t'),
                            b'\\' => out.push(b'\\'),
                            b'"' => out.push(b'"'),
                            b'x' => {
                                let hex = src
                                    .get(i + 2..i + 4)
                                    .and_then(|h| u8::from_str_radix(h, 16).ok())
                                    .ok_or_else(|| err(line, col, "bad \\x escape".into()))?;
                                out.push(hex);
                                i += 2;
                                col += 2;
                            }
                            other => {
                                return Err(err(line, col, format!("unknown escape `\\{}`", other as char)))
                            }
                        }
                        i += 2;
                        col += 2;
                    }
                    _ => {
                        out.push(b);
                        i += 1;
                        col += 1;
                    }
                }
            }
            toks.push(Token { tok: Tok::Str(out), line: tl, col: tc });
            continue;
        }
        let p = PUNCTS
            .iter()
            .find(|p| src[i..].starts_with(**p))
            .ok_or_else(|| err(tl, tc, format!("unexpected character `{}`", c as char)))?;
        advance(p.len(), &mut i, &mut col);
        toks.push(Token { tok: Tok::Punct(p), line: tl, col: tc });
    }
    toks.push(Token { tok: Tok::Eof, line, col });
    Ok(toks)
}

const KEYWORDS: [&str; 16] = [
    "int", "float", "bool", "str", "idx", "true", "false", "if", "else", "while", "assert",
    "return", "make_symbolic", "delta", "delta_inv", "extern",
];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(ParseError { line: t.line, col: t.col, message: message.into() })
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == word)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.error(format!("expected `{p}`, found {}", describe(self.peek())))
        }
    }

    fn expect_ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                self.bump();
                Ok(name)
            }
            other => self.error(format!("expected identifier, found {}", describe(&other))),
        }
    }

    fn at_type(&self) -> bool {
        matches!(self.peek(), Tok::Ident(w) if matches!(w.as_str(), "int" | "float" | "bool" | "str" | "idx"))
    }

    fn parse_type(&mut self) -> PResult<TypeTag> {
        let name = match self.peek().clone() {
            Tok::Ident(n) => n,
            other => return self.error(format!("expected type, found {}", describe(&other))),
        };
        if name == "idx" {
            self.bump();
            self.expect_punct("<")?;
            let base = self.parse_indexable()?;
            self.expect_punct(">")?;
            return Ok(TypeTag::Index(base));
        }
        match TypeTag::from_name(&name) {
            Some(t) => {
                self.bump();
                Ok(t)
            }
            None => self.error(format!("unknown type name `{name}`")),
        }
    }

    fn parse_indexable(&mut self) -> PResult<Indexable> {
        match self.peek().clone() {
            Tok::Ident(n) => match Indexable::from_name(&n) {
                Some(b) if n != "string" => {
                    self.bump();
                    Ok(b)
                }
                _ => self.error(format!("unknown type name `{n}` in idx<...>")),
            },
            other => self.error(format!("expected type, found {}", describe(&other))),
        }
    }

    fn parse_program(&mut self) -> PResult<Program> {
        let mut externs = Vec::new();
        let mut functions = Vec::new();
        let mut main = None;
        while *self.peek() != Tok::Eof {
            if self.is_ident("extern") {
                self.bump();
                let ret = self.parse_type()?;
                let name = self.expect_ident()?;
                self.expect_punct("(")?;
                let mut params = Vec::new();
                if !self.is_punct(")") {
                    loop {
                        params.push(self.parse_type()?);
                        if !self.eat_punct(",") {
                            break;
                        }
                    }
                }
                self.expect_punct(")")?;
                self.expect_punct(";")?;
                externs.push(ExternDecl { name, params, ret });
                continue;
            }
            let f = self.parse_function()?;
            if f.name == "main" {
                if main.is_some() {
                    return self.error("duplicate declaration of function `main`");
                }
                main = Some(f);
            } else {
                functions.push(f);
            }
        }
        let main = match main {
            Some(m) => m,
            None => return self.error("program has no `main` function"),
        };
        Ok(Program { externs, functions, main })
    }

    fn parse_function(&mut self) -> PResult<FunctionDef> {
        let ret = self.parse_type()?;
        let name = self.expect_ident()?;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.is_punct(")") {
            loop {
                let ty = self.parse_type()?;
                let pname = self.expect_ident()?;
                params.push(Param { name: pname, ty });
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        let body = self.parse_block()?;
        Ok(FunctionDef { name, params, ret, body })
    }

    fn parse_block(&mut self) -> PResult<Block> {
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.is_punct("}") {
            if *self.peek() == Tok::Eof {
                return self.error("unexpected end of input in block");
            }
            stmts.push(self.parse_stmt()?);
        }
        self.bump();
        Ok(stmts)
    }

    fn new_stmt(&mut self, kind: StmtKind) -> Stmt {
        // ids are assigned after parsing in pre-order; see `number`.
        Stmt { id: 0, kind }
    }

    fn parse_stmt(&mut self) -> PResult<Stmt> {
        if self.at_type() {
            let ty = self.parse_type()?;
            let name = self.expect_ident()?;
            let init = if self.eat_punct("=") { Some(self.parse_expr()?) } else { None };
            self.expect_punct(";")?;
            return Ok(self.new_stmt(StmtKind::Decl { name, ty, init }));
        }
        if self.is_ident("if") {
            return self.parse_if();
        }
        if self.is_ident("while") {
            self.bump();
            self.expect_punct("(")?;
            let cond = self.parse_expr()?;
            self.expect_punct(")")?;
            let body = self.parse_block()?;
            return Ok(self.new_stmt(StmtKind::While { branch: 0, cond, body }));
        }
        if self.is_ident("assert") {
            self.bump();
            self.expect_punct("(")?;
            let e = self.parse_expr()?;
            self.expect_punct(")")?;
            self.expect_punct(";")?;
            return Ok(self.new_stmt(StmtKind::Assert(e)));
        }
        if self.is_ident("return") {
            self.bump();
            let e = self.parse_expr()?;
            self.expect_punct(";")?;
            return Ok(self.new_stmt(StmtKind::Return(e)));
        }
        if self.is_ident("make_symbolic") {
            self.bump();
            self.expect_punct("(")?;
            let name = self.expect_ident()?;
            self.expect_punct(")")?;
            self.expect_punct(";")?;
            return Ok(self.new_stmt(StmtKind::MakeSymbolic(name)));
        }
        if let (Tok::Ident(name), Tok::Punct("=")) = (self.peek().clone(), self.peek_at(1).clone()) {
            if !KEYWORDS.contains(&name.as_str()) {
                self.bump();
                self.bump();
                let value = self.parse_expr()?;
                self.expect_punct(";")?;
                return Ok(self.new_stmt(StmtKind::Assign { name, value }));
            }
        }
        let e = self.parse_expr()?;
        self.expect_punct(";")?;
        Ok(self.new_stmt(StmtKind::Expr(e)))
    }

    fn parse_if(&mut self) -> PResult<Stmt> {
        self.bump();
        self.expect_punct("(")?;
        let cond = self.parse_expr()?;
        self.expect_punct(")")?;
        let then_block = self.parse_block()?;
        let else_block = if self.is_ident("else") {
            self.bump();
            if self.is_ident("if") {
                vec![self.parse_if()?]
            } else {
                self.parse_block()?
            }
        } else {
            Vec::new()
        };
        Ok(self.new_stmt(StmtKind::If { branch: 0, cond, then_block, else_block }))
    }

    fn parse_expr(&mut self) -> PResult<Expr> {
        self.parse_binary(1)
    }

    fn peek_binop(&self) -> Option<BinOp> {
        let p = match self.peek() {
            Tok::Punct(p) => *p,
            _ => return None,
        };
        Some(match p {
            "||" => BinOp::Or,
            "&&" => BinOp::And,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Rem,
            _ => return None,
        })
    }

    fn parse_binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.parse_unary()?;
        while let Some(op) = self.peek_binop() {
            if op.precedence() < min_prec {
                break;
            }
            self.bump();
            let rhs = self.parse_binary(op.precedence() + 1)?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> PResult<Expr> {
        if self.eat_punct("!") {
            let e = self.parse_unary()?;
            return Ok(Expr::Unary { op: UnOp::Not, expr: Box::new(e) });
        }
        if self.is_punct("-") {
            self.bump();
            // `-<number>` is a negative literal; anything else is negation.
            match self.peek().clone() {
                Tok::Int(n) => {
                    self.bump();
                    let v = if n == 1u64 << 63 {
                        i64::MIN
                    } else {
                        match i64::try_from(n) {
                            Ok(v) => -v,
                            Err(_) => return self.error("integer literal out of range"),
                        }
                    };
                    return Ok(Expr::Lit(Value::Int(v)));
                }
                Tok::Float(f) => {
                    self.bump();
                    return Ok(Expr::Lit(Value::float(-f)));
                }
                Tok::Ident(w) if w == "inf" => {
                    self.bump();
                    return Ok(Expr::Lit(Value::Float(f64::NEG_INFINITY)));
                }
                _ => {
                    let e = self.parse_unary()?;
                    return Ok(Expr::Unary { op: UnOp::Neg, expr: Box::new(e) });
                }
            }
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                match i64::try_from(n) {
                    Ok(v) => Ok(Expr::Lit(Value::Int(v))),
                    Err(_) => self.error("integer literal out of range"),
                }
            }
            Tok::Float(f) => {
                self.bump();
                Ok(Expr::Lit(Value::float(f)))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Lit(Value::Str(s)))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.parse_expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Punct("@") => {
                self.bump();
                let base = self.parse_indexable()?;
                self.expect_punct("(")?;
                let e = match self.peek().clone() {
                    Tok::Int(n) => {
                        self.bump();
                        let i = u32::try_from(n).or_else(|_| self.error("index literal out of range"))?;
                        Expr::Lit(Value::Index(base, IndexVal::At(i)))
                    }
                    Tok::Ident(w) if w == "bot" => {
                        self.bump();
                        Expr::Bot(base)
                    }
                    other => return self.error(format!("expected index or `bot`, found {}", describe(&other))),
                };
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(word) => {
                match word.as_str() {
                    "true" => {
                        self.bump();
                        return Ok(Expr::Lit(Value::Bool(true)));
                    }
                    "false" => {
                        self.bump();
                        return Ok(Expr::Lit(Value::Bool(false)));
                    }
                    "nan" => {
                        self.bump();
                        return Ok(Expr::Lit(Value::float(f64::NAN)));
                    }
                    "inf" => {
                        self.bump();
                        return Ok(Expr::Lit(Value::Float(f64::INFINITY)));
                    }
                    "delta" | "delta_inv" => {
                        self.bump();
                        self.expect_punct("(")?;
                        let e = self.parse_expr()?;
                        self.expect_punct(")")?;
                        return Ok(if word == "delta" {
                            Expr::Index(Box::new(e))
                        } else {
                            Expr::Unindex(Box::new(e))
                        });
                    }
                    _ => {}
                }
                let name = self.expect_ident()?;
                if self.eat_punct("(") {
                    let mut args = Vec::new();
                    if !self.is_punct(")") {
                        loop {
                            args.push(self.parse_expr()?);
                            if !self.eat_punct(",") {
                                break;
                            }
                        }
                    }
                    self.expect_punct(")")?;
                    Ok(Expr::Call { name, args })
                } else {
                    Ok(Expr::Var(name))
                }
            }
            other => self.error(format!("expected expression, found {}", describe(&other))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(w) => format!("`{w}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Float(f) => format!("`{f}`"),
        Tok::Str(_) => "string literal".into(),
        Tok::Punct(p) => format!("`{p}`"),
        Tok::Eof => "end of input".into(),
    }
}

/// Assigns statement and branch ids in source pre-order: functions in order,
/// then `main`.
pub(crate) fn number(program: &mut Program) {
    fn walk(block: &mut Block, next_stmt: &mut StmtId, next_branch: &mut BranchId) {
        for s in block.iter_mut() {
            s.id = *next_stmt;
            *next_stmt += 1;
            match &mut s.kind {
                StmtKind::If { branch, .. } | StmtKind::While { branch, .. } => {
                    *branch = *next_branch;
                    *next_branch += 1;
                }
                _ => {}
            }
            for b in s.kind.blocks_mut() {
                walk(b, next_stmt, next_branch);
            }
        }
    }
    let (mut s, mut b) = (0, 0);
    for f in program.all_functions_mut() {
        walk(&mut f.body, &mut s, &mut b);
    }
}

/// Name resolution: declared-before-use, no duplicates, known callees.
fn resolve(program: &Program) -> Result<(), ParseError> {
    let fail = |message: String| Err(ParseError { line: 0, col: 0, message });
    let mut fnames = HashSet::new();
    for e in &program.externs {
        if !fnames.insert(e.name.clone()) {
            return fail(format!("duplicate declaration of function `{}`", e.name));
        }
    }
    for f in program.all_functions() {
        if !fnames.insert(f.name.clone()) {
            return fail(format!("duplicate declaration of function `{}`", f.name));
        }
    }
    for f in program.all_functions() {
        let mut declared: HashSet<String> = HashSet::new();
        let mut scope: Vec<HashMap<String, ()>> = vec![HashMap::new()];
        for p in &f.params {
            if !declared.insert(p.name.clone()) {
                return fail(format!("duplicate declaration of `{}` in `{}`", p.name, f.name));
            }
            scope[0].insert(p.name.clone(), ());
        }
        resolve_block(&f.name, &f.body, &mut declared, &mut scope)?;
    }
    Ok(())
}

fn resolve_block(
    fname: &str,
    block: &Block,
    declared: &mut HashSet<String>,
    scope: &mut Vec<HashMap<String, ()>>,
) -> Result<(), ParseError> {
    let fail = |message: String| Err(ParseError { line: 0, col: 0, message });
    let visible = |scope: &Vec<HashMap<String, ()>>, n: &str| scope.iter().any(|s| s.contains_key(n));
    fn check_expr(e: &Expr, scope: &Vec<HashMap<String, ()>>) -> Result<(), String> {
        if let Expr::Var(n) = e {
            if !scope.iter().any(|s| s.contains_key(n)) {
                return Err(format!("undeclared variable `{n}`"));
            }
        }
        for c in e.children() {
            check_expr(c, scope)?;
        }
        Ok(())
    }
    scope.push(HashMap::new());
    for s in block {
        if let Some(e) = s.kind.expr() {
            if let Err(m) = check_expr(e, scope) {
                return fail(format!("{m} in `{fname}`"));
            }
        }
        match &s.kind {
            StmtKind::Decl { name, .. } => {
                if !declared.insert(name.clone()) {
                    return fail(format!("duplicate declaration of `{name}` in `{fname}`"));
                }
                scope.last_mut().expect("scope").insert(name.clone(), ());
            }
            StmtKind::Assign { name, .. } | StmtKind::MakeSymbolic(name) if !visible(scope, name) => {
                return fail(format!("undeclared variable `{name}` in `{fname}`"));
            }
            _ => {}
        }
        for b in s.kind.blocks() {
            resolve_block(fname, b, declared, scope)?;
        }
    }
    scope.pop();
    Ok(())
}

/// Parses MiniImp source into a name-resolved [`Program`].
pub fn parse(source: &str) -> Result<Program, ParseError> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0 };
    let mut program = p.parse_program()?;
    number(&mut program);
    resolve(&program)?;
    Ok(program)
}
