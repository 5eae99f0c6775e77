//! Type checking. Variable names are unique per function (enforced by the
//! parser), so a function-wide name → type table is enough to type every
//! expression on demand.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use super::ast::*;
use super::types::{Signature, TypeTag};
use crate::iot::builtins;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TypeError {
    #[error("in `{func}`: call to unknown function `{name}`")]
    UnknownFunction { func: String, name: String },
    #[error("in `{func}`: `{name}` expects {expected} arguments, got {got}")]
    Arity { func: String, name: String, expected: usize, got: usize },
    #[error("in `{func}`: type mismatch: {message}")]
    Mismatch { func: String, message: String },
    #[error("recursive call chain through `{0}`")]
    Recursion(String),
    #[error("function `{0}` shadows a builtin")]
    ShadowsBuiltin(String),
    #[error("`main` must take no parameters")]
    MainParams,
}

#[derive(Debug, Clone)]
pub struct TypedProgram {
    pub program: Program,
    vars: HashMap<String, HashMap<String, TypeTag>>,
    sigs: HashMap<String, Signature>,
}

impl TypedProgram {
    pub fn var_type(&self, func: &str, var: &str) -> Option<TypeTag> {
        self.vars.get(func)?.get(var).copied()
    }

    /// Every variable of `func` with its declared type, sorted by name.
    pub fn vars_of(&self, func: &str) -> BTreeMap<&str, TypeTag> {
        self.vars
            .get(func)
            .map(|m| m.iter().map(|(k, v)| (k.as_str(), *v)).collect())
            .unwrap_or_default()
    }

    /// Signature of a user function, extern or builtin.
    pub fn signature(&self, name: &str) -> Option<&Signature> {
        self.sigs.get(name)
    }

    /// Type of an expression occurring in `func`. The program is known to be
    /// well typed, so this never fails for expressions taken from it.
    pub fn expr_type(&self, func: &str, e: &Expr) -> TypeTag {
        let env = &self.vars[func];
        match infer(e, env, &self.sigs) {
            Ok(t) => t,
            Err(f) => panic!("expr_type on ill-typed expression: {}", f.into_error(func)),
        }
    }
}

fn signatures(p: &Program) -> Result<HashMap<String, Signature>, TypeError> {
    let mut sigs: HashMap<String, Signature> = builtins::BUILTINS
        .iter()
        .map(|b| (b.name.to_string(), Signature::new(b.name, b.params.to_vec(), b.ret)))
        .collect();
    for e in &p.externs {
        if sigs.contains_key(&e.name) {
            return Err(TypeError::ShadowsBuiltin(e.name.clone()));
        }
        sigs.insert(e.name.clone(), Signature::new(&e.name, e.params.clone(), e.ret));
    }
    for f in p.all_functions() {
        if sigs.contains_key(&f.name) {
            return Err(TypeError::ShadowsBuiltin(f.name.clone()));
        }
        let params = f.params.iter().map(|p| p.ty).collect();
        sigs.insert(f.name.clone(), Signature::new(&f.name, params, f.ret));
    }
    Ok(sigs)
}

enum Fail {
    Unknown(String),
    Arity { name: String, expected: usize, got: usize },
    Msg(String),
}

impl Fail {
    fn into_error(self, func: &str) -> TypeError {
        let func = func.to_string();
        match self {
            Fail::Unknown(name) => TypeError::UnknownFunction { func, name },
            Fail::Arity { name, expected, got } => TypeError::Arity { func, name, expected, got },
            Fail::Msg(message) => TypeError::Mismatch { func, message },
        }
    }
}

impl From<String> for Fail {
    fn from(m: String) -> Self {
        Fail::Msg(m)
    }
}

fn infer(
    e: &Expr,
    env: &HashMap<String, TypeTag>,
    sigs: &HashMap<String, Signature>,
) -> Result<TypeTag, Fail> {
    use TypeTag::*;
    Ok(match e {
        Expr::Lit(v) => v.type_tag(),
        Expr::Bot(t) => Index(*t),
        Expr::Var(n) => *env.get(n).ok_or_else(|| Fail::Msg(format!("undeclared variable `{n}`")))?,
        Expr::Call { name, args } => {
            let sig = sigs.get(name).ok_or_else(|| Fail::Unknown(name.clone()))?;
            if sig.params.len() != args.len() {
                return Err(Fail::Arity { name: name.clone(), expected: sig.params.len(), got: args.len() });
            }
            for (i, (a, want)) in args.iter().zip(&sig.params).enumerate() {
                let got = infer(a, env, sigs)?;
                if got != *want {
                    return Err(format!("argument {} of `{name}` is {got}, expected {want}", i + 1).into());
                }
            }
            sig.ret
        }
        Expr::Binary { op, lhs, rhs } => {
            let (l, r) = (infer(lhs, env, sigs)?, infer(rhs, env, sigs)?);
            let bad = || format!("operator `{}` on {l} and {r}", op.symbol());
            match op {
                BinOp::And | BinOp::Or => Bool,
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => match (l, r) {
                    (Int, Int) => Int,
                    (Float, Float) => Float,
                    _ => return Err(bad().into()),
                },
                BinOp::Rem => match (l, r) {
                    (Int, Int) => Int,
                    _ => return Err(bad().into()),
                },
                BinOp::Eq | BinOp::Ne => match (l, r) {
                    (a, b) if a == b && !a.is_index() => Bool,
                    _ => return Err(bad().into()),
                },
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => match (l, r) {
                    (Int, Int) | (Float, Float) | (Str, Str) => Bool,
                    _ => return Err(bad().into()),
                },
            }
        }
        Expr::Unary { op, expr } => {
            let t = infer(expr, env, sigs)?;
            match op {
                UnOp::Not => Bool,
                UnOp::Neg => match t {
                    Int | Float => t,
                    _ => return Err(format!("negation of {t}").into()),
                },
            }
        }
        Expr::Index(inner) => {
            let t = infer(inner, env, sigs)?;
            match t.indexable() {
                Some(b) => Index(b),
                None => return Err(format!("delta of {t}").into()),
            }
        }
        Expr::Unindex(inner) => match infer(inner, env, sigs)? {
            Index(b) => b.tag(),
            t => return Err(format!("delta_inv of {t}").into()),
        },
    })
}

/// Checks the program and returns it with its typing environment.
pub fn typecheck(p: &Program) -> Result<TypedProgram, TypeError> {
    if !p.main.params.is_empty() {
        return Err(TypeError::MainParams);
    }
    let sigs = signatures(p)?;
    check_call_graph(p)?;
    let mut vars = HashMap::new();
    for f in p.all_functions() {
        let mut env: HashMap<String, TypeTag> = f.params.iter().map(|p| (p.name.clone(), p.ty)).collect();
        collect_decls(&f.body, &mut env);
        check_block(f, &f.body, &env, &sigs)?;
        vars.insert(f.name.clone(), env);
    }
    Ok(TypedProgram { program: p.clone(), vars, sigs })
}

fn collect_decls(block: &Block, env: &mut HashMap<String, TypeTag>) {
    for s in block {
        if let StmtKind::Decl { name, ty, .. } = &s.kind {
            env.insert(name.clone(), *ty);
        }
        for b in s.kind.blocks() {
            collect_decls(b, env);
        }
    }
}

fn check_block(
    f: &FunctionDef,
    block: &Block,
    env: &HashMap<String, TypeTag>,
    sigs: &HashMap<String, Signature>,
) -> Result<(), TypeError> {
    let err = |message: String| TypeError::Mismatch { func: f.name.clone(), message };
    let ty = |e: &Expr| infer(e, env, sigs).map_err(|x| x.into_error(&f.name));
    let assign = |name: &str, want: TypeTag, e: &Expr| {
        let got = ty(e)?;
        if got != want {
            return Err(err(format!("`{name}` is {want} but is assigned {got}")));
        }
        Ok(())
    };
    for s in block {
        match &s.kind {
            StmtKind::Decl { name, ty: want, init: Some(e) } => assign(name, *want, e)?,
            StmtKind::Assign { name, value } => assign(name, env[name], value)?,
            StmtKind::Return(e) => {
                let got = ty(e)?;
                if got != f.ret {
                    return Err(err(format!("returns {got}, declared {}", f.ret)));
                }
            }
            _ => {
                if let Some(e) = s.kind.expr() {
                    ty(e)?;
                }
            }
        }
        for b in s.kind.blocks() {
            check_block(f, b, env, sigs)?;
        }
    }
    Ok(())
}

fn check_call_graph(p: &Program) -> Result<(), TypeError> {
    let user: HashSet<&str> = p.all_functions().map(|f| f.name.as_str()).collect();
    let mut edges: HashMap<&str, Vec<String>> = HashMap::new();
    for f in p.all_functions() {
        let mut callees = Vec::new();
        let mut visit = |s: &Stmt| {
            if let Some(e) = s.kind.expr() {
                e.for_each_call(&mut |n| {
                    if user.contains(n) {
                        callees.push(n.to_string());
                    }
                });
            }
        };
        fn walk(b: &Block, v: &mut impl FnMut(&Stmt)) {
            for s in b {
                v(s);
                for inner in s.kind.blocks() {
                    walk(inner, v);
                }
            }
        }
        walk(&f.body, &mut visit);
        edges.insert(f.name.as_str(), callees);
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: HashMap<&str, u8> = HashMap::new();
    fn dfs<'a>(
        n: &'a str,
        edges: &'a HashMap<&'a str, Vec<String>>,
        state: &mut HashMap<&'a str, u8>,
    ) -> Result<(), TypeError> {
        match state.get(n) {
            Some(1) => return Err(TypeError::Recursion(n.to_string())),
            Some(2) => return Ok(()),
            _ => {}
        }
        state.insert(n, 1);
        for c in &edges[n] {
            dfs(c, edges, state)?;
        }
        state.insert(n, 2);
        Ok(())
    }
    for f in p.all_functions() {
        dfs(f.name.as_str(), &edges, &mut state)?;
    }
    Ok(())
}
