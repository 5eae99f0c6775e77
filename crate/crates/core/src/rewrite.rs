//! The indexing rewrite schema.
//!
//! Every rule is guarded by the *eventual* indexedness of the surrounding
//! position: a variable of an indexed type counts as indexed before its
//! declaration is retyped, and a call to an operator in F₊ counts as its
//! indexed counterpart before it is renamed. Guards therefore never depend on
//! which redexes already fired, which is what makes any redex order reach the
//! same normal form.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::garden::Gardens;
use crate::iot::builtins;
use crate::lang::{
    indexed_name, typecheck, Block, Expr, ExternDecl, FunctionDef, IndexVal, IndexedTypes, Program, Signature,
    StmtId, StmtKind, TypeError, TypeTag, UnOp, Value,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    R3TypeMark,
    R4Literal,
    R5LiteralBot,
    R6CallRename,
    R7WrapArgIndex,
    R8WrapArgUnindex,
    R9WrapReturnIndex,
    R10WrapReturnUnindex,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::R3TypeMark => "R3",
            Rule::R4Literal => "R4",
            Rule::R5LiteralBot => "R5",
            Rule::R6CallRename => "R6",
            Rule::R7WrapArgIndex => "R7",
            Rule::R8WrapArgUnindex => "R8",
            Rule::R9WrapReturnIndex => "R9",
            Rule::R10WrapReturnUnindex => "R10",
        })
    }
}

/// Where a redex sits. Wrapping rules address the slot an expression fills
/// (`Slot`), node rules address the node itself (`Node`), so distinct rules
/// never share a site.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    DeclType(StmtId),
    /// The root expression slot of a statement (assigned or returned value).
    Root(StmtId),
    /// Child `index` of the node at `parent`.
    Slot { stmt: StmtId, parent: Vec<usize>, index: usize },
    Node { stmt: StmtId, path: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Redex {
    pub site: Site,
    pub rule: Rule,
}

#[derive(Debug, Clone)]
pub struct RewriteConfig<'a> {
    pub indexed: IndexedTypes,
    /// Operators to index, by original name, with their signatures.
    pub fplus: BTreeMap<String, Signature>,
    pub gardens: &'a Gardens,
}

impl<'a> RewriteConfig<'a> {
    /// F₊ from builtin names.
    pub fn new(indexed: IndexedTypes, fplus: &[String], gardens: &'a Gardens) -> Result<Self, RewriteError> {
        let mut map = BTreeMap::new();
        for name in fplus {
            let b = builtins::builtin(name).ok_or_else(|| RewriteError::UnknownOperator(name.clone()))?;
            map.insert(name.clone(), Signature::new(b.name, b.params.to_vec(), b.ret));
        }
        Ok(RewriteConfig { indexed, fplus: map, gardens })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewriteError {
    #[error("redex {0:?} no longer applies")]
    Stale(Redex),
    #[error("rewriting did not terminate within {0} steps")]
    NonTermination(usize),
    #[error("rewritten program does not type-check: {0}")]
    IllTyped(TypeError),
    #[error("unknown operator `{0}` in F+")]
    UnknownOperator(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexationResult {
    pub program: Program,
    /// Original operator name → indexed name, for every operator renamed.
    pub renamed: BTreeMap<String, String>,
    pub steps: usize,
    pub applied: BTreeMap<Rule, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Indexed,
    Raw,
    Neutral,
}

struct Scan<'c, 'a> {
    cfg: &'c RewriteConfig<'a>,
    /// Eventual variable types per function.
    vars: HashMap<String, HashMap<String, TypeTag>>,
    sigs: HashMap<String, Signature>,
}

impl<'c, 'a> Scan<'c, 'a> {
    fn new(p: &Program, cfg: &'c RewriteConfig<'a>) -> Self {
        let mut vars = HashMap::new();
        for f in p.all_functions() {
            let mut env: HashMap<String, TypeTag> = f.params.iter().map(|p| (p.name.clone(), p.ty)).collect();
            fn walk(b: &Block, env: &mut HashMap<String, TypeTag>, ix: &IndexedTypes) {
                for s in b {
                    if let StmtKind::Decl { name, ty, .. } = &s.kind {
                        env.insert(name.clone(), ty.indexed_under(ix));
                    }
                    for inner in s.kind.blocks() {
                        walk(inner, env, ix);
                    }
                }
            }
            walk(&f.body, &mut env, &cfg.indexed);
            vars.insert(f.name.clone(), env);
        }
        let mut sigs: HashMap<String, Signature> = builtins::BUILTINS
            .iter()
            .map(|b| (b.name.to_string(), Signature::new(b.name, b.params.to_vec(), b.ret)))
            .collect();
        for e in &p.externs {
            sigs.insert(e.name.clone(), Signature::new(&e.name, e.params.clone(), e.ret));
        }
        for f in p.all_functions() {
            sigs.insert(f.name.clone(), Signature::new(&f.name, f.params.iter().map(|p| p.ty).collect(), f.ret));
        }
        for sig in cfg.fplus.values() {
            let ix = sig.indexed(&cfg.indexed);
            sigs.insert(sig.name.clone(), ix.clone());
            sigs.insert(ix.name.clone(), ix);
        }
        Scan { cfg, vars, sigs }
    }

    fn ctx_of_type(t: TypeTag) -> Ctx {
        if t.is_index() { Ctx::Indexed } else { Ctx::Raw }
    }

    /// δ?: whether the expression will denote an index.
    fn delta_q(&self, func: &str, e: &Expr) -> bool {
        match e {
            Expr::Lit(v) => matches!(v, Value::Index(..)),
            Expr::Bot(_) | Expr::Index(_) => true,
            Expr::Var(n) => self.vars[func].get(n).is_some_and(|t| t.is_index()),
            Expr::Call { name, .. } => self.sigs.get(name).is_some_and(|s| s.ret.is_index()),
            Expr::Binary { .. } | Expr::Unary { .. } | Expr::Unindex(_) => false,
        }
    }

    fn child_ctxs(&self, e: &Expr) -> Vec<Ctx> {
        match e {
            Expr::Call { name, args } => match self.sigs.get(name) {
                Some(sig) => sig.params.iter().map(|t| Self::ctx_of_type(*t)).collect(),
                None => vec![Ctx::Neutral; args.len()],
            },
            Expr::Binary { op, .. } => match op {
                crate::lang::BinOp::And | crate::lang::BinOp::Or => vec![Ctx::Neutral; 2],
                _ => vec![Ctx::Raw; 2],
            },
            Expr::Unary { op: UnOp::Not, .. } => vec![Ctx::Neutral],
            Expr::Unary { op: UnOp::Neg, .. } | Expr::Index(_) => vec![Ctx::Raw],
            Expr::Unindex(_) => vec![Ctx::Indexed],
            Expr::Lit(_) | Expr::Bot(_) | Expr::Var(_) => Vec::new(),
        }
    }

    fn literal_rule(&self, v: &Value) -> Option<Rule> {
        let t = v.type_tag().indexable()?;
        let m = self.cfg.gardens.get(t)?;
        Some(if m.contains(v) { Rule::R4Literal } else { Rule::R5LiteralBot })
    }

    /// Wrapping rule for an expression in a context, if any.
    fn wrap_rule(&self, func: &str, e: &Expr, ctx: Ctx, root: bool) -> Option<Rule> {
        if matches!(e, Expr::Lit(v) if !matches!(v, Value::Index(..))) {
            return None;
        }
        match (ctx, self.delta_q(func, e)) {
            (Ctx::Indexed, false) => Some(if root { Rule::R9WrapReturnIndex } else { Rule::R7WrapArgIndex }),
            (Ctx::Raw, true) => Some(if root { Rule::R10WrapReturnUnindex } else { Rule::R8WrapArgUnindex }),
            _ => None,
        }
    }

    fn root_ctx(&self, f: &FunctionDef, kind: &StmtKind) -> Ctx {
        match kind {
            StmtKind::Decl { ty, .. } => Self::ctx_of_type(ty.indexed_under(&self.cfg.indexed)),
            StmtKind::Assign { name, .. } => Self::ctx_of_type(self.vars[&f.name][name]),
            StmtKind::Return(_) => Self::ctx_of_type(f.ret),
            _ => Ctx::Neutral,
        }
    }

    fn scan_expr(&self, func: &str, stmt: StmtId, e: &Expr, ctx: Ctx, path: &mut Vec<usize>, out: &mut Vec<Redex>) {
        match e {
            Expr::Lit(v) if ctx == Ctx::Indexed && !matches!(v, Value::Index(..)) => {
                if let Some(rule) = self.literal_rule(v) {
                    out.push(Redex { site: Site::Node { stmt, path: path.clone() }, rule });
                }
            }
            Expr::Call { name, .. } if self.cfg.fplus.contains_key(name) => {
                out.push(Redex { site: Site::Node { stmt, path: path.clone() }, rule: Rule::R6CallRename });
            }
            _ => {}
        }
        let ctxs = self.child_ctxs(e);
        for (i, (c, cctx)) in e.children().into_iter().zip(ctxs).enumerate() {
            if let Some(rule) = self.wrap_rule(func, c, cctx, false) {
                out.push(Redex { site: Site::Slot { stmt, parent: path.clone(), index: i }, rule });
            }
            path.push(i);
            self.scan_expr(func, stmt, c, cctx, path, out);
            path.pop();
        }
    }

    fn scan_block(&self, f: &FunctionDef, b: &Block, out: &mut Vec<Redex>) {
        for s in b {
            if let StmtKind::Decl { ty, .. } = &s.kind {
                if self.cfg.indexed.contains_tag(*ty) {
                    out.push(Redex { site: Site::DeclType(s.id), rule: Rule::R3TypeMark });
                }
            }
            if let Some(e) = s.kind.expr() {
                let ctx = self.root_ctx(f, &s.kind);
                let before = out.len();
                self.scan_expr(&f.name, s.id, e, ctx, &mut Vec::new(), out);
                if let Some(rule) = self.wrap_rule(&f.name, e, ctx, true) {
                    // Arguments are wrapped before the value crossing the boundary.
                    let pending_args = out[before..].iter().any(|r| {
                        matches!(&r.site, Site::Slot { parent, .. } if parent.is_empty())
                            && matches!(r.rule, Rule::R7WrapArgIndex | Rule::R8WrapArgUnindex)
                    });
                    if !pending_args {
                        out.push(Redex { site: Site::Root(s.id), rule });
                    }
                }
            }
            for inner in s.kind.blocks() {
                self.scan_block(f, inner, out);
            }
        }
    }
}

/// All redexes of the program, in source order.
pub fn find_redexes(p: &Program, cfg: &RewriteConfig) -> Vec<Redex> {
    let scan = Scan::new(p, cfg);
    let mut out = Vec::new();
    for f in p.all_functions() {
        scan.scan_block(f, &f.body, &mut out);
    }
    out
}

fn stmt_mut(p: &mut Program, id: StmtId) -> Option<&mut StmtKind> {
    fn find(b: &mut Block, id: StmtId) -> Option<&mut StmtKind> {
        for s in b.iter_mut() {
            if s.id == id {
                return Some(&mut s.kind);
            }
            for inner in s.kind.blocks_mut() {
                if let Some(k) = find(inner, id) {
                    return Some(k);
                }
            }
        }
        None
    }
    p.all_functions_mut().find_map(|f| find(&mut f.body, id))
}

fn expr_at<'e>(root: &'e mut Expr, path: &[usize]) -> Option<&'e mut Expr> {
    let mut e = root;
    for i in path {
        e = e.child_mut(*i)?;
    }
    Some(e)
}

fn wrap(e: &mut Expr, index: bool) {
    let inner = std::mem::replace(e, Expr::Bot(crate::lang::Indexable::Str));
    *e = if index { Expr::Index(Box::new(inner)) } else { Expr::Unindex(Box::new(inner)) };
}

/// Applies one redex. The guard is re-checked; a stale redex is rejected.
pub fn apply_rule(p: &Program, r: &Redex, cfg: &RewriteConfig) -> Result<Program, RewriteError> {
    if !find_redexes(p, cfg).contains(r) {
        return Err(RewriteError::Stale(r.clone()));
    }
    let mut out = p.clone();
    apply_unchecked(&mut out, r, cfg);
    Ok(out)
}

fn apply_unchecked(p: &mut Program, r: &Redex, cfg: &RewriteConfig) {
    let stale = || -> ! { panic!("redex {r:?} was just found") };
    match &r.site {
        Site::DeclType(id) => match stmt_mut(p, *id) {
            Some(StmtKind::Decl { ty, .. }) => *ty = ty.indexed_under(&cfg.indexed),
            _ => stale(),
        },
        Site::Root(id) => {
            let e = stmt_mut(p, *id).and_then(StmtKind::expr_mut).unwrap_or_else(|| stale());
            wrap(e, r.rule == Rule::R9WrapReturnIndex);
        }
        Site::Slot { stmt, parent, index } => {
            let root = stmt_mut(p, *stmt).and_then(StmtKind::expr_mut).unwrap_or_else(|| stale());
            let e = expr_at(root, parent).and_then(|e| e.child_mut(*index)).unwrap_or_else(|| stale());
            wrap(e, r.rule == Rule::R7WrapArgIndex);
        }
        Site::Node { stmt, path } => {
            let root = stmt_mut(p, *stmt).and_then(StmtKind::expr_mut).unwrap_or_else(|| stale());
            let e = expr_at(root, path).unwrap_or_else(|| stale());
            match (r.rule, &mut *e) {
                (Rule::R4Literal, Expr::Lit(v)) => {
                    let t = v.type_tag().indexable().unwrap_or_else(|| stale());
                    let i = cfg.gardens.get(t).map(|m| m.delta_bot(v)).unwrap_or(IndexVal::Bot);
                    *e = Expr::Lit(Value::Index(t, i));
                }
                (Rule::R5LiteralBot, Expr::Lit(v)) => {
                    let t = v.type_tag().indexable().unwrap_or_else(|| stale());
                    *e = Expr::Bot(t);
                }
                (Rule::R6CallRename, Expr::Call { name, .. }) => *name = indexed_name(name),
                _ => stale(),
            }
        }
    }
}

/// Redex selection strategy for [`normalize`].
pub enum Strategy<'r> {
    /// Always the first redex in source order.
    First,
    /// A uniformly random redex each step.
    Random(&'r mut dyn rand::RngCore),
}

/// Rewrites until no redex remains, then declares the indexed operators used
/// and checks that the result type-checks.
pub fn normalize(p: &Program, cfg: &RewriteConfig, mut strategy: Strategy) -> Result<IndexationResult, RewriteError> {
    let cap = 10 * p.size().max(1);
    let mut cur = p.clone();
    let mut applied: BTreeMap<Rule, usize> = BTreeMap::new();
    let mut steps = 0;
    loop {
        let redexes = find_redexes(&cur, cfg);
        if redexes.is_empty() {
            break;
        }
        if steps == cap {
            return Err(RewriteError::NonTermination(cap));
        }
        let pick = match &mut strategy {
            Strategy::First => 0,
            Strategy::Random(rng) => rng.gen_range(0..redexes.len()),
        };
        apply_unchecked(&mut cur, &redexes[pick], cfg);
        *applied.entry(redexes[pick].rule).or_default() += 1;
        steps += 1;
    }
    let mut renamed = BTreeMap::new();
    for name in cur.names_called() {
        if let Some(sig) = cfg.fplus.values().find(|s| indexed_name(&s.name) == name) {
            renamed.insert(sig.name.clone(), name.clone());
        }
    }
    let mut externs: BTreeMap<String, ExternDecl> = cur.externs.iter().map(|e| (e.name.clone(), e.clone())).collect();
    for op in renamed.keys() {
        let ix = cfg.fplus[op].indexed(&cfg.indexed);
        externs.entry(ix.name.clone()).or_insert(ExternDecl { name: ix.name, params: ix.params, ret: ix.ret });
    }
    cur.externs = externs.into_values().collect();
    typecheck(&cur).map_err(RewriteError::IllTyped)?;
    Ok(IndexationResult { program: cur, renamed, steps, applied })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfluenceReport {
    pub trials: usize,
    pub all_equal: bool,
    pub distinct_normal_forms: usize,
}

/// Normalizes under `trials` independently seeded random redex orders and
/// counts the distinct normal forms.
pub fn confluence_probe(
    p: &Program,
    cfg: &RewriteConfig,
    trials: usize,
    seed: u64,
) -> Result<ConfluenceReport, RewriteError> {
    let mut forms: BTreeSet<String> = BTreeSet::new();
    let mut first: Option<Program> = None;
    let mut all_equal = true;
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
        let r = normalize(p, cfg, Strategy::Random(&mut rng))?;
        forms.insert(crate::lang::print(&r.program));
        match &first {
            None => first = Some(r.program),
            Some(f) => all_equal &= *f == r.program,
        }
    }
    Ok(ConfluenceReport { trials, all_equal, distinct_normal_forms: forms.len() })
}

/// Source of the rewritten program followed by the operator tables as
/// conditional chains inside a comment.
pub fn indexed_ir(program: &Program, tables: &[&crate::iot::Table]) -> String {
    let mut out = crate::lang::print(program);
    if !tables.is_empty() {
        out.push_str("\n/* indexed operator definitions\n\n");
        for t in tables {
            out.push_str(&t.to_if_chain().replace("*/", "* /"));
            out.push('\n');
        }
        out.push_str("*/\n");
    }
    out
}
