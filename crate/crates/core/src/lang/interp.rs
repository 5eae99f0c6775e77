//! Concrete interpreter. It runs original programs against the builtin
//! semantics and rewritten programs against an [`IndexRuntime`], which is what
//! makes it usable as the oracle for memoization and replay.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::*;
use super::types::{Indexable, TypeTag};
use super::typeck::TypedProgram;
use super::value::{IndexVal, Value};
use crate::iot::builtins;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Ok,
    AssertionFailure,
    EscapedGarden,
    BoundExceeded,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Ok => "ok",
            Verdict::AssertionFailure => "assertion-failure",
            Verdict::EscapedGarden => "escaped-garden",
            Verdict::BoundExceeded => "bound-exceeded",
        }
    }

    pub fn from_name(s: &str) -> Option<Verdict> {
        [Verdict::Ok, Verdict::AssertionFailure, Verdict::EscapedGarden, Verdict::BoundExceeded]
            .into_iter()
            .find(|v| v.name() == s)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterpError {
    #[error("runtime type error: {0}")]
    Type(String),
    #[error("symbolic variable `{0}` has no input binding")]
    Unbound(String),
    #[error("index runtime: {0}")]
    Runtime(String),
}

/// Access to gardens and indexed operator tables for rewritten programs.
pub trait IndexRuntime {
    /// δ⊥: the index of `v`, or ⊥ when it lies outside the garden.
    fn delta(&self, t: Indexable, v: &Value) -> IndexVal;
    /// δ⁻¹ on a valid index; `None` when the index is out of range.
    fn delta_inv(&self, t: Indexable, i: u32) -> Option<Value>;
    /// Looks up `name` (an indexed operator) on concrete arguments. `Ok(None)`
    /// is the ⊥ marker of a raw-result table.
    fn call_indexed(&self, name: &str, args: &[Value]) -> Result<Option<Value>, String>;
}

/// Runtime for programs that contain no indexed constructs.
pub struct NoIndex;

impl IndexRuntime for NoIndex {
    fn delta(&self, _: Indexable, _: &Value) -> IndexVal {
        IndexVal::Bot
    }

    fn delta_inv(&self, _: Indexable, _: u32) -> Option<Value> {
        None
    }

    fn call_indexed(&self, name: &str, _: &[Value]) -> Result<Option<Value>, String> {
        Err(format!("no table for `{name}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterpConfig {
    /// Maximum iterations of one `while` execution.
    pub unroll_bound: u32,
    /// Let ⊥ flow through indexed operators instead of escaping at the call.
    pub bot_propagate: bool,
}

impl Default for InterpConfig {
    fn default() -> Self {
        InterpConfig { unroll_bound: 16, bot_propagate: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpResult {
    pub verdict: Verdict,
    pub return_value: Option<Value>,
    /// Covered branch outcomes `(branch id, taken)`.
    pub branches: BTreeSet<(BranchId, bool)>,
    pub stmts: BTreeSet<StmtId>,
}

/// Key under which a `make_symbolic` variable is bound in an input map.
pub fn input_key(func: &str, var: &str) -> String {
    if func == "main" { var.to_string() } else { format!("{func}.{var}") }
}

enum Stop {
    Verdict(Verdict),
    Error(InterpError),
}

impl From<InterpError> for Stop {
    fn from(e: InterpError) -> Self {
        Stop::Error(e)
    }
}

type R<T> = Result<T, Stop>;

enum Flow {
    Normal,
    Return(Value),
}

struct Machine<'a> {
    tp: &'a TypedProgram,
    inputs: &'a BTreeMap<String, Value>,
    rt: &'a dyn IndexRuntime,
    cfg: InterpConfig,
    branches: BTreeSet<(BranchId, bool)>,
    stmts: BTreeSet<StmtId>,
    made_symbolic: HashSet<String>,
}

/// Runs `main` with `inputs` bound to its `make_symbolic` variables.
pub fn interpret(
    tp: &TypedProgram,
    inputs: &BTreeMap<String, Value>,
    rt: &dyn IndexRuntime,
    cfg: InterpConfig,
) -> Result<InterpResult, InterpError> {
    let mut m = Machine {
        tp,
        inputs,
        rt,
        cfg,
        branches: BTreeSet::new(),
        stmts: BTreeSet::new(),
        made_symbolic: HashSet::new(),
    };
    let (verdict, return_value) = match m.call_user(&tp.program.main, Vec::new()) {
        Ok(v) => (Verdict::Ok, Some(v)),
        Err(Stop::Verdict(v)) => (v, None),
        Err(Stop::Error(e)) => return Err(e),
    };
    Ok(InterpResult { verdict, return_value, branches: m.branches, stmts: m.stmts })
}

/// Calls one function of the program on concrete arguments, outside of
/// `main`. Used to memoize user functions.
pub fn call_function(
    tp: &TypedProgram,
    name: &str,
    args: Vec<Value>,
    rt: &dyn IndexRuntime,
    cfg: InterpConfig,
) -> Result<(Verdict, Option<Value>), InterpError> {
    let f = tp
        .program
        .function(name)
        .ok_or_else(|| InterpError::Type(format!("no function `{name}`")))?;
    let empty = BTreeMap::new();
    let mut m = Machine {
        tp,
        inputs: &empty,
        rt,
        cfg,
        branches: BTreeSet::new(),
        stmts: BTreeSet::new(),
        made_symbolic: HashSet::new(),
    };
    match m.call_user(f, args) {
        Ok(v) => Ok((Verdict::Ok, Some(v))),
        Err(Stop::Verdict(v)) => Ok((v, None)),
        Err(Stop::Error(e)) => Err(e),
    }
}

/// Default value of a declared-but-uninitialized variable. Index variables
/// default to the index of their base type's default.
pub fn default_value(ty: TypeTag, rt: &dyn IndexRuntime) -> Value {
    match ty {
        TypeTag::Index(t) => {
            let raw = Value::default_for(t.tag()).expect("raw default");
            Value::Index(t, rt.delta(t, &raw))
        }
        _ => Value::default_for(ty).expect("raw default"),
    }
}

fn type_err<T>(msg: impl Into<String>) -> R<T> {
    Err(Stop::Error(InterpError::Type(msg.into())))
}

impl<'a> Machine<'a> {
    fn call_user(&mut self, f: &'a FunctionDef, args: Vec<Value>) -> R<Value> {
        if args.len() != f.params.len() {
            return type_err(format!("arity mismatch calling `{}`", f.name));
        }
        let mut env: HashMap<&'a str, Value> = HashMap::new();
        for (p, a) in f.params.iter().zip(args) {
            env.insert(p.name.as_str(), a);
        }
        match self.block(f, &f.body, &mut env)? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Ok(default_value(f.ret, self.rt)),
        }
    }

    fn block(&mut self, f: &'a FunctionDef, b: &'a Block, env: &mut HashMap<&'a str, Value>) -> R<Flow> {
        for s in b {
            if let Flow::Return(v) = self.stmt(f, s, env)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn stmt(&mut self, f: &'a FunctionDef, s: &'a Stmt, env: &mut HashMap<&'a str, Value>) -> R<Flow> {
        self.stmts.insert(s.id);
        match &s.kind {
            StmtKind::Decl { name, ty, init } => {
                let v = match init {
                    Some(e) => self.expr(e, env)?,
                    None => default_value(*ty, self.rt),
                };
                env.insert(name.as_str(), v);
            }
            StmtKind::Assign { name, value } => {
                let v = self.expr(value, env)?;
                env.insert(name.as_str(), v);
            }
            StmtKind::If { branch, cond, then_block, else_block } => {
                let c = self.expr(cond, env)?;
                let taken = self.truth(&c)?;
                self.branches.insert((*branch, taken));
                let b = if taken { then_block } else { else_block };
                return self.block(f, b, env);
            }
            StmtKind::While { branch, cond, body } => {
                let mut iterations = 0u32;
                loop {
                    let c = self.expr(cond, env)?;
                    let taken = self.truth(&c)?;
                    self.branches.insert((*branch, taken));
                    if !taken {
                        break;
                    }
                    if iterations == self.cfg.unroll_bound {
                        return Err(Stop::Verdict(Verdict::BoundExceeded));
                    }
                    iterations += 1;
                    if let Flow::Return(v) = self.block(f, body, env)? {
                        return Ok(Flow::Return(v));
                    }
                }
            }
            StmtKind::Assert(e) => {
                let c = self.expr(e, env)?;
                if !self.truth(&c)? {
                    return Err(Stop::Verdict(Verdict::AssertionFailure));
                }
            }
            StmtKind::Return(e) => {
                let v = self.expr(e, env)?;
                return Ok(Flow::Return(v));
            }
            StmtKind::Expr(e) => {
                self.expr(e, env)?;
            }
            StmtKind::MakeSymbolic(name) => {
                let key = input_key(&f.name, name);
                if !self.made_symbolic.insert(key.clone()) {
                    return type_err(format!("`{key}` made symbolic twice"));
                }
                let ty = self
                    .tp
                    .var_type(&f.name, name)
                    .ok_or_else(|| InterpError::Type(format!("unknown variable `{name}`")))?;
                let input = self.inputs.get(&key).ok_or_else(|| InterpError::Unbound(key.clone()))?;
                let v = match (ty, input) {
                    (TypeTag::Index(t), v) if v.type_tag() == t.tag() => Value::Index(t, self.rt.delta(t, v)),
                    (t, v) if v.type_tag() == t => v.clone(),
                    (t, v) => return type_err(format!("input `{key}` = {v} does not fit {t}")),
                };
                env.insert(name.as_str(), v);
            }
        }
        Ok(Flow::Normal)
    }

    /// Truth value of a condition; ⊥ escapes and index truth is the truth
    /// of the unindexed value.
    fn truth(&self, v: &Value) -> R<bool> {
        match v {
            Value::Index(t, i) => self.unindex(*t, *i)?.truthy().ok_or_else(unreachable_index),
            _ => Ok(v.truthy().expect("raw value has a truth value")),
        }
    }

    fn unindex(&self, t: Indexable, i: IndexVal) -> R<Value> {
        match i {
            IndexVal::Bot => Err(Stop::Verdict(Verdict::EscapedGarden)),
            IndexVal::At(k) => self
                .rt
                .delta_inv(t, k)
                .ok_or_else(|| Stop::Error(InterpError::Runtime(format!("index {k} outside the {t} garden")))),
        }
    }

    fn expr(&mut self, e: &'a Expr, env: &HashMap<&'a str, Value>) -> R<Value> {
        Ok(match e {
            Expr::Lit(v) => v.clone(),
            Expr::Bot(t) => Value::Index(*t, IndexVal::Bot),
            Expr::Var(n) => match env.get(n.as_str()) {
                Some(v) => v.clone(),
                None => return type_err(format!("read of undefined `{n}`")),
            },
            Expr::Index(inner) => {
                let v = self.expr(inner, env)?;
                let t = v
                    .type_tag()
                    .indexable()
                    .ok_or_else(|| InterpError::Type(format!("delta of {v}")))?;
                Value::Index(t, self.rt.delta(t, &v))
            }
            Expr::Unindex(inner) => match self.expr(inner, env)? {
                Value::Index(t, i) => self.unindex(t, i)?,
                v => return type_err(format!("delta_inv of {v}")),
            },
            Expr::Unary { op, expr } => {
                let v = self.expr(expr, env)?;
                match op {
                    UnOp::Not => Value::Bool(!self.truth(&v)?),
                    UnOp::Neg => match v {
                        Value::Int(i) => Value::Int(i.wrapping_neg()),
                        Value::Float(x) => Value::float(-x),
                        v => return type_err(format!("negation of {v}")),
                    },
                }
            }
            Expr::Binary { op: BinOp::And, lhs, rhs } => {
                let l = self.expr(lhs, env)?;
                if !self.truth(&l)? {
                    Value::Bool(false)
                } else {
                    let r = self.expr(rhs, env)?;
                    Value::Bool(self.truth(&r)?)
                }
            }
            Expr::Binary { op: BinOp::Or, lhs, rhs } => {
                let l = self.expr(lhs, env)?;
                if self.truth(&l)? {
                    Value::Bool(true)
                } else {
                    let r = self.expr(rhs, env)?;
                    Value::Bool(self.truth(&r)?)
                }
            }
            Expr::Binary { op, lhs, rhs } => {
                let l = self.expr(lhs, env)?;
                let r = self.expr(rhs, env)?;
                binary(*op, &l, &r).map_err(|m| Stop::Error(InterpError::Type(m)))?
            }
            Expr::Call { name, args } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.expr(a, env)?);
                }
                self.call(name, vals)?
            }
        })
    }

    fn call(&mut self, name: &str, args: Vec<Value>) -> R<Value> {
        if let Some(f) = self.tp.program.functions.iter().find(|f| f.name == name) {
            return self.call_user(f, args);
        }
        if self.tp.program.externs.iter().any(|e| e.name == name) {
            let has_bot = args.iter().any(|a| matches!(a, Value::Index(_, IndexVal::Bot)));
            if has_bot && !self.cfg.bot_propagate {
                return Err(Stop::Verdict(Verdict::EscapedGarden));
            }
            return match self.rt.call_indexed(name, &args) {
                Ok(Some(v)) => Ok(v),
                Ok(None) => Err(Stop::Verdict(Verdict::EscapedGarden)),
                Err(m) => Err(Stop::Error(InterpError::Runtime(m))),
            };
        }
        builtins::eval_builtin(name, &args).map_err(|e| Stop::Error(InterpError::Type(e.to_string())))
    }
}

fn unreachable_index() -> Stop {
    Stop::Error(InterpError::Type("index value has no truth value".into()))
}

/// Concrete semantics of the non-short-circuit binary operators. Integer
/// arithmetic wraps and division by zero yields 0.
pub fn binary(op: BinOp, l: &Value, r: &Value) -> Result<Value, String> {
    use Value::*;
    let bad = || Err(format!("operator `{}` on {l} and {r}", op.symbol()));
    Ok(match (l, r) {
        (Int(a), Int(b)) => {
            let (a, b) = (*a, *b);
            match op {
                BinOp::Add => Int(a.wrapping_add(b)),
                BinOp::Sub => Int(a.wrapping_sub(b)),
                BinOp::Mul => Int(a.wrapping_mul(b)),
                BinOp::Div => Int(if b == 0 { 0 } else { a.wrapping_div(b) }),
                BinOp::Rem => Int(if b == 0 { 0 } else { a.wrapping_rem(b) }),
                BinOp::Eq => Bool(a == b),
                BinOp::Ne => Bool(a != b),
                BinOp::Lt => Bool(a < b),
                BinOp::Le => Bool(a <= b),
                BinOp::Gt => Bool(a > b),
                BinOp::Ge => Bool(a >= b),
                BinOp::And | BinOp::Or => return bad(),
            }
        }
        (Float(a), Float(b)) => {
            let (a, b) = (*a, *b);
            match op {
                BinOp::Add => Value::float(a + b),
                BinOp::Sub => Value::float(a - b),
                BinOp::Mul => Value::float(a * b),
                BinOp::Div => Value::float(a / b),
                BinOp::Eq => Bool(a == b),
                BinOp::Ne => Bool(a != b),
                BinOp::Lt => Bool(a < b),
                BinOp::Le => Bool(a <= b),
                BinOp::Gt => Bool(a > b),
                BinOp::Ge => Bool(a >= b),
                _ => return bad(),
            }
        }
        (Str(a), Str(b)) => match op {
            BinOp::Eq => Bool(a == b),
            BinOp::Ne => Bool(a != b),
            BinOp::Lt => Bool(a < b),
            BinOp::Le => Bool(a <= b),
            BinOp::Gt => Bool(a > b),
            BinOp::Ge => Bool(a >= b),
            _ => return bad(),
        },
        (Bool(a), Bool(b)) => match op {
            BinOp::Eq => Bool(a == b),
            BinOp::Ne => Bool(a != b),
            _ => return bad(),
        },
        _ => return bad(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse, typecheck};

    fn run(src: &str, inputs: &[(&str, Value)]) -> InterpResult {
        let tp = typecheck(&parse(src).unwrap()).unwrap();
        let inputs: BTreeMap<String, Value> = inputs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
        interpret(&tp, &inputs, &NoIndex, InterpConfig::default()).unwrap()
    }

    const SECTION2: &str = r#"
        int main() {
            str Vendor = "NVidia C";
            str Nv11Vendor = "NVidia Corporation";
            make_symbolic(Vendor);
            make_symbolic(Nv11Vendor);
            if (strncmp(Vendor, Nv11Vendor, 4) == 0) {
                assert(strncmp(Vendor, Nv11Vendor, 18) == 0);
            }
            return 0;
        }"#;

    #[test]
    fn vendor_prefix_bug_fails_assertion() {
        let r = run(SECTION2, &[("Vendor", Value::str("NVidia C")), ("Nv11Vendor", Value::str("NVidia Corporation"))]);
        assert_eq!(r.verdict, Verdict::AssertionFailure);
        assert!(r.branches.contains(&(0, true)));
        let ok = run(SECTION2, &[("Vendor", Value::str("AMD")), ("Nv11Vendor", Value::str("NVidia Corporation"))]);
        assert_eq!(ok.verdict, Verdict::Ok);
        assert_eq!(ok.return_value, Some(Value::Int(0)));
    }

    #[test]
    fn constant_program_and_determinism() {
        let r = run("int main(){ return 0; }", &[]);
        assert_eq!(r.return_value, Some(Value::Int(0)));
        assert_eq!(r, run("int main(){ return 0; }", &[]));
    }

    #[test]
    fn strstr_through_wrapper() {
        let r = run(r#"str w(str a, str b) { return strstr(a, b); } int main(){ str r = w("foobar", "oo"); assert(r == "oobar"); return strlen(r); }"#, &[]);
        assert_eq!(r.verdict, Verdict::Ok);
        assert_eq!(r.return_value, Some(Value::Int(5)));
    }

    #[test]
    fn unroll_bound_is_enforced() {
        let r = run("int main(){ int i = 0; while (i < 100) { i = i + 1; } return i; }", &[]);
        assert_eq!(r.verdict, Verdict::BoundExceeded);
        let r = run("int main(){ int i = 0; while (i < 16) { i = i + 1; } return i; }", &[]);
        assert_eq!(r.return_value, Some(Value::Int(16)));
    }

    #[test]
    fn unbound_symbolic_is_an_error() {
        let tp = typecheck(&parse("int main(){ int x; make_symbolic(x); return x; }").unwrap()).unwrap();
        let e = interpret(&tp, &BTreeMap::new(), &NoIndex, InterpConfig::default()).unwrap_err();
        assert_eq!(e, InterpError::Unbound("x".into()));
    }

    #[test]
    fn integer_edge_semantics() {
        let r = run("int main(){ int z = 0; return 7 / z + 7 % z + (-9223372036854775807 - 2); }", &[]);
        assert_eq!(r.return_value, Some(Value::Int(i64::MAX)));
    }
}
