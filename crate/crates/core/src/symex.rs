//! Forking symbolic execution over MiniImp.
//!
//! Paths are explored depth first by re-execution: a path is the list of
//! candidate indices chosen at each fork, and siblings are queued as choice
//! prefixes. Every fork enumerates a partition of the current state into
//! candidates, each a conjunction of atoms; infeasible candidates are dropped
//! after one solver query each.
//!
//! The same engine runs rewritten programs (index variables over gardens,
//! operator tables) and original programs (the baseline). Symbolic strings and
//! floats that are not indexed are *opaque*: they support equality with
//! constants and with each other, and anything else is handled by the
//! [`OpaquePolicy`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::garden::Gardens;
use crate::iot::{builtins, Column, ResultCell, Table, TableRuntime};
use crate::lang::interp::{binary, default_value};
use crate::lang::{
    input_key, interpret, BinOp, BranchId, Block, Expr, FunctionDef, IndexRuntime, IndexVal, Indexable,
    InterpConfig, InterpError, StmtId, StmtKind, TypeTag, TypedProgram, UnOp, Value, Verdict,
};
use crate::solver::{self, Atom, Domain, PathCondition, SolverConfig, VarId};

const INT_DOMAIN: u32 = 256;
const OPAQUE_DOMAIN: u32 = 1 << 24;

/// What happens when an opaque value reaches an operation the solver cannot
/// express.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpaquePolicy {
    /// End the path.
    Abandon,
    /// Fix the value to `""` or `0.0` and continue.
    Concretize,
}

#[derive(Debug, Clone)]
pub struct ExploreConfig {
    pub unroll_bound: u32,
    pub max_paths: usize,
    pub time_budget: Duration,
    pub bot_propagate: bool,
    pub policy: OpaquePolicy,
    pub solver: SolverConfig,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            unroll_bound: 16,
            max_paths: 100_000,
            time_budget: Duration::from_secs(60),
            bot_propagate: false,
            policy: OpaquePolicy::Abandon,
            solver: SolverConfig::default(),
        }
    }
}

impl ExploreConfig {
    fn interp(&self) -> InterpConfig {
        InterpConfig { unroll_bound: self.unroll_bound, bot_propagate: self.bot_propagate }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestCase {
    /// Choice indices along the path, dot separated.
    pub path_id: String,
    /// Raw input values, keyed like [`input_key`].
    pub inputs: BTreeMap<String, Value>,
    pub verdict: Verdict,
    pub branches: BTreeSet<(BranchId, bool)>,
    /// The simplified path condition with variables named by input key.
    pub pc: Vec<String>,
}

impl TestCase {
    /// `name=value` lines preceded by `#` metadata lines.
    pub fn to_file_text(&self) -> String {
        let mut out = format!("# path {}\n# verdict {}\n", self.path_id, self.verdict);
        for (b, taken) in &self.branches {
            let _ = writeln!(out, "# branch {b} {taken}");
        }
        for a in &self.pc {
            let _ = writeln!(out, "# pc {a}");
        }
        for (k, v) in &self.inputs {
            let _ = writeln!(out, "{k}={}", v.to_typed());
        }
        out
    }

    pub fn from_file_text(text: &str) -> Result<TestCase, String> {
        let mut tc = TestCase {
            path_id: String::new(),
            inputs: BTreeMap::new(),
            verdict: Verdict::Ok,
            branches: BTreeSet::new(),
            pc: Vec::new(),
        };
        for (n, line) in text.lines().enumerate() {
            let bad = |m: &str| format!("line {}: {m}", n + 1);
            if let Some(meta) = line.strip_prefix("# ") {
                let (key, rest) = meta.split_once(' ').unwrap_or((meta, ""));
                match key {
                    "path" => tc.path_id = rest.to_string(),
                    "verdict" => tc.verdict = Verdict::from_name(rest).ok_or_else(|| bad("unknown verdict"))?,
                    "branch" => {
                        let (b, t) = rest.split_once(' ').ok_or_else(|| bad("malformed branch"))?;
                        let b = b.parse().map_err(|_| bad("malformed branch id"))?;
                        let t = t.parse().map_err(|_| bad("malformed branch outcome"))?;
                        tc.branches.insert((b, t));
                    }
                    "pc" => tc.pc.push(rest.to_string()),
                    _ => {}
                }
            } else if line.trim().is_empty() || line.starts_with('#') {
                continue;
            } else {
                let (k, v) = line.split_once('=').ok_or_else(|| bad("expected name=value"))?;
                tc.inputs.insert(k.to_string(), Value::parse_typed(v).map_err(|e| bad(&e))?);
            }
        }
        Ok(tc)
    }

    fn to_json(&self) -> serde_json::Value {
        let inputs: serde_json::Map<String, serde_json::Value> =
            self.inputs.iter().map(|(k, v)| (k.clone(), json!(v.to_typed()))).collect();
        json!({
            "kind": "test",
            "path": self.path_id,
            "verdict": self.verdict.name(),
            "inputs": inputs,
            "branches": self.branches.iter().map(|(b, t)| json!([b, t])).collect::<Vec<_>>(),
            "pc": self.pc,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExplorationReport {
    pub mode: String,
    pub test_cases: Vec<TestCase>,
    /// Paths executed to an end, including abandoned ones.
    pub paths: usize,
    pub abandoned: usize,
    pub escaped: usize,
    pub infeasible: usize,
    /// Candidates created at forks, before the feasibility check.
    pub successors_created: usize,
    pub iot_forks: usize,
    pub solver_queries: usize,
    pub solver_unknown: usize,
    /// Atoms the queries would carry without simplification, counting the
    /// whole table encoding at every table fork.
    pub atoms_before: usize,
    /// Atoms actually sent to the solver.
    pub atoms_after: usize,
    pub branches: BTreeSet<(BranchId, bool)>,
    pub branch_sites: usize,
    pub stmts: BTreeSet<StmtId>,
    pub stmt_count: usize,
    pub truncated: bool,
    pub replay_mismatches: usize,
}

impl ExplorationReport {
    /// Branch coverage in percent.
    pub fn bcov(&self) -> f64 {
        if self.branch_sites == 0 {
            100.0
        } else {
            100.0 * self.branches.len() as f64 / (2 * self.branch_sites) as f64
        }
    }

    /// Statement coverage in percent.
    pub fn icov(&self) -> f64 {
        if self.stmt_count == 0 {
            100.0
        } else {
            100.0 * self.stmts.len() as f64 / self.stmt_count as f64
        }
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.test_cases.iter().filter(|t| t.verdict == v).count()
    }

    pub fn summary_json(&self) -> serde_json::Value {
        json!({
            "kind": "summary",
            "mode": self.mode,
            "tests": self.test_cases.len(),
            "assertion_failures": self.count(Verdict::AssertionFailure),
            "paths": self.paths,
            "abandoned": self.abandoned,
            "escaped": self.escaped,
            "infeasible": self.infeasible,
            "successors_created": self.successors_created,
            "iot_forks": self.iot_forks,
            "solver_queries": self.solver_queries,
            "solver_unknown": self.solver_unknown,
            "atoms_before": self.atoms_before,
            "atoms_after": self.atoms_after,
            "bcov": self.bcov(),
            "icov": self.icov(),
            "truncated": self.truncated,
            "replay_mismatches": self.replay_mismatches,
        })
    }

    /// The summary line followed by one line per test case.
    pub fn to_jsonl(&self) -> String {
        let mut out = format!("{}\n", self.summary_json());
        for t in &self.test_cases {
            out.push_str(&t.to_json().to_string());
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "mode {}: {} paths, {} tests ({} assertion failures, {} escaped), {} abandoned, BCov {:.1}%, ICov {:.1}%, \
             {} solver queries, atoms {} -> {}{}",
            self.mode,
            self.paths,
            self.test_cases.len(),
            self.count(Verdict::AssertionFailure),
            self.escaped,
            self.abandoned,
            self.bcov(),
            self.icov(),
            self.solver_queries,
            self.atoms_before,
            self.atoms_after,
            if self.truncated { " (truncated)" } else { "" }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutcome {
    pub verdict: Verdict,
    pub branches: BTreeSet<(BranchId, bool)>,
    /// Whether verdict and covered branches match the test case.
    pub matches: bool,
}

/// Runs the program concretely on the test case's inputs. For rewritten
/// programs `rt` re-indexes inputs and serves the tables.
pub fn replay(
    tp: &TypedProgram,
    rt: &dyn IndexRuntime,
    tc: &TestCase,
    cfg: InterpConfig,
) -> Result<ReplayOutcome, InterpError> {
    let r = interpret(tp, &tc.inputs, rt, cfg)?;
    let matches = r.verdict == tc.verdict && r.branches == tc.branches;
    Ok(ReplayOutcome { verdict: r.verdict, branches: r.branches, matches })
}

/// Explores a rewritten program against its gardens and tables.
pub fn explore(
    tp: &TypedProgram,
    gardens: &Gardens,
    tables: &[Table],
    cfg: &ExploreConfig,
) -> Result<ExplorationReport, InterpError> {
    let mut e = Engine::new(tp, gardens, tables, cfg);
    e.report.mode = "indexed".into();
    e.run()
}

/// Explores an original program: no gardens, so every symbolic string or
/// float is opaque and `policy` decides what happens at intractable uses.
pub fn explore_baseline(
    tp: &TypedProgram,
    policy: OpaquePolicy,
    cfg: &ExploreConfig,
) -> Result<ExplorationReport, InterpError> {
    let cfg = ExploreConfig { policy, ..cfg.clone() };
    let gardens = Gardens::new();
    let mut e = Engine::new(tp, &gardens, &[], &cfg);
    e.report.mode = match policy {
        OpaquePolicy::Abandon => "baseline-abandon".into(),
        OpaquePolicy::Concretize => "baseline-concretize".into(),
    };
    e.run()
}

#[derive(Debug, Clone, PartialEq)]
enum SVal {
    C(Value),
    /// Symbolic index, possibly ⊥.
    Idx(Indexable, VarId),
    /// δ⁻¹ of a symbolic index known not to be ⊥.
    Raw(Indexable, VarId),
    /// Symbolic int or bool over a small domain.
    Int(VarId),
    Opq(TypeTag, VarId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarKind {
    Index(Indexable),
    Int,
    Bool,
    Opaque(TypeTag),
}

enum Stop {
    Verdict(Verdict),
    Abandon,
    Infeasible,
    Limit,
    Error(InterpError),
}

impl From<InterpError> for Stop {
    fn from(e: InterpError) -> Self {
        Stop::Error(e)
    }
}

type R<T> = Result<T, Stop>;

fn escape<T>() -> R<T> {
    Err(Stop::Verdict(Verdict::EscapedGarden))
}

fn type_err<T>(m: impl Into<String>) -> R<T> {
    Err(Stop::Error(InterpError::Type(m.into())))
}

enum Flow {
    Normal,
    Return(SVal),
}

/// Constants compared against opaque values, interned per type. Opaque
/// variables range over the interned ids plus fresh values distinct from all
/// of them.
#[derive(Default)]
struct Pool {
    ids: HashMap<Value, u32>,
    values: BTreeMap<TypeTag, Vec<Value>>,
}

impl Pool {
    fn canonical(v: &Value) -> Value {
        match v {
            Value::Float(f) if *f == 0.0 => Value::Float(0.0),
            v => v.clone(),
        }
    }

    fn intern(&mut self, v: &Value) -> u32 {
        let v = Self::canonical(v);
        if let Some(i) = self.ids.get(&v) {
            return *i;
        }
        let bucket = self.values.entry(v.type_tag()).or_default();
        let i = bucket.len() as u32;
        bucket.push(v.clone());
        self.ids.insert(v, i);
        i
    }

    fn value(&self, ty: TypeTag, id: u32) -> Value {
        let bucket = self.values.get(&ty).map(Vec::as_slice).unwrap_or(&[]);
        if let Some(v) = bucket.get(id as usize) {
            return v.clone();
        }
        let k = id as usize - bucket.len();
        let taken = |v: &Value| bucket.iter().any(|b| match (b, v) {
            (Value::Float(a), Value::Float(c)) => a == c,
            _ => b == v,
        });
        let fresh = (0u64..).map(|n| match ty {
            TypeTag::Float => Value::Float(1000.5 + n as f64),
            _ => Value::str(format!("?{n}")),
        });
        fresh.filter(|v| !taken(v)).nth(k).expect("infinitely many fresh values")
    }
}

#[derive(Clone, Copy)]
enum Truth {
    T,
    F,
    Escape,
}

struct Engine<'a> {
    tp: &'a TypedProgram,
    gardens: &'a Gardens,
    rt: TableRuntime<'a>,
    cfg: &'a ExploreConfig,
    deadline: Instant,
    kinds: Vec<VarKind>,
    keys: Vec<String>,
    by_key: HashMap<String, VarId>,
    pool: Pool,
    pending: Vec<Vec<usize>>,
    report: ExplorationReport,
    prefix: Vec<usize>,
    choices: Vec<usize>,
    pc: PathCondition,
    made: Vec<VarId>,
    branches: BTreeSet<(BranchId, bool)>,
    stmts: BTreeSet<StmtId>,
}

impl<'a> Engine<'a> {
    fn new(tp: &'a TypedProgram, gardens: &'a Gardens, tables: &'a [Table], cfg: &'a ExploreConfig) -> Self {
        Engine {
            tp,
            gardens,
            rt: TableRuntime::new(gardens, tables),
            cfg,
            deadline: Instant::now() + cfg.time_budget,
            kinds: Vec::new(),
            keys: Vec::new(),
            by_key: HashMap::new(),
            pool: Pool::default(),
            pending: Vec::new(),
            report: ExplorationReport {
                branch_sites: tp.program.branch_site_count(),
                stmt_count: tp.program.stmt_count(),
                ..Default::default()
            },
            prefix: Vec::new(),
            choices: Vec::new(),
            pc: PathCondition::new(),
            made: Vec::new(),
            branches: BTreeSet::new(),
            stmts: BTreeSet::new(),
        }
    }

    fn run(mut self) -> Result<ExplorationReport, InterpError> {
        self.pending.push(Vec::new());
        while let Some(prefix) = self.pending.pop() {
            if self.report.paths >= self.cfg.max_paths || Instant::now() > self.deadline {
                self.report.truncated = true;
                break;
            }
            self.prefix = prefix;
            self.choices.clear();
            self.pc = PathCondition::new();
            self.made.clear();
            self.branches.clear();
            self.stmts.clear();
            let main = &self.tp.program.main;
            let res = self.call_user(main, Vec::new());
            self.report.paths += 1;
            self.report.branches.extend(self.branches.iter().copied());
            self.report.stmts.extend(self.stmts.iter().copied());
            let verdict = match res {
                Ok(_) => Verdict::Ok,
                Err(Stop::Verdict(v)) => v,
                Err(Stop::Abandon) => {
                    self.report.abandoned += 1;
                    continue;
                }
                Err(Stop::Infeasible) => {
                    self.report.infeasible += 1;
                    continue;
                }
                Err(Stop::Limit) => {
                    self.report.truncated = true;
                    continue;
                }
                Err(Stop::Error(e)) => return Err(e),
            };
            if verdict == Verdict::EscapedGarden {
                self.report.escaped += 1;
            }
            self.emit(verdict)?;
        }
        Ok(self.report)
    }

    fn emit(&mut self, verdict: Verdict) -> Result<(), InterpError> {
        let model = match solver::solve_with(&self.pc, &self.cfg.solver) {
            solver::Verdict::Sat(m) => m,
            _ => {
                self.report.infeasible += 1;
                return Ok(());
            }
        };
        let mut inputs = BTreeMap::new();
        for &x in &self.made {
            let c = model.get(&x).copied().unwrap_or(IndexVal::At(0));
            inputs.insert(self.keys[x as usize].clone(), self.const_value(x, c));
        }
        let simplified = solver::simplify(&self.pc);
        let pc = simplified.atoms.iter().map(|a| self.render(a)).collect();
        let path_id = self.choices.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(".");
        let tc = TestCase { path_id, inputs, verdict, branches: self.branches.clone(), pc };
        if !replay(self.tp, &self.rt, &tc, self.cfg.interp())?.matches {
            self.report.replay_mismatches += 1;
        }
        self.report.test_cases.push(tc);
        Ok(())
    }

    /// The raw value a variable takes when assigned constant `c`.
    fn const_value(&self, x: VarId, c: IndexVal) -> Value {
        let i = c.index().unwrap_or(0);
        match self.kinds[x as usize] {
            VarKind::Index(t) => self
                .gardens
                .get(t)
                .and_then(|m| m.delta_inv(c).ok().cloned())
                .unwrap_or_else(|| Value::default_for(t.tag()).expect("raw default")),
            VarKind::Int => Value::Int(i64::from(i)),
            VarKind::Bool => Value::Bool(i == 1),
            VarKind::Opaque(ty) => self.pool.value(ty, i),
        }
    }

    fn render(&self, a: &Atom) -> String {
        let name = |x: &VarId| self.keys[*x as usize].clone();
        let cst = |x: &VarId, c: &IndexVal| match (self.kinds[*x as usize], c) {
            (_, IndexVal::Bot) => "bot".to_string(),
            (VarKind::Index(_), IndexVal::At(i)) => i.to_string(),
            (_, IndexVal::At(i)) => self.const_value(*x, IndexVal::At(*i)).to_typed(),
        };
        match a {
            Atom::VarEqConst(x, c) => format!("{} = {}", name(x), cst(x, c)),
            Atom::VarNeqConst(x, c) => format!("{} != {}", name(x), cst(x, c)),
            Atom::VarEqVar(x, y) => format!("{} = {}", name(x), name(y)),
            Atom::VarNeqVar(x, y) => format!("{} != {}", name(x), name(y)),
        }
    }

    // ---- forking ----

    fn check(&mut self, pc: &PathCondition) -> bool {
        self.report.solver_queries += 1;
        self.report.atoms_before += pc.len();
        let s = solver::simplify(pc);
        self.report.atoms_after += s.len();
        match solver::solve_with(&s, &self.cfg.solver) {
            solver::Verdict::Sat(_) => true,
            solver::Verdict::Unsat => false,
            solver::Verdict::Unknown => {
                self.report.solver_unknown += 1;
                false
            }
        }
    }

    /// Picks one candidate: the recorded one when replaying a prefix,
    /// otherwise the first feasible one, queuing the other feasible ones.
    fn fork<T>(&mut self, cands: Vec<(Vec<Atom>, T)>, extra_before: usize) -> R<T> {
        let pos = self.choices.len();
        if pos < self.prefix.len() {
            let i = self.prefix[pos];
            let Some((atoms, out)) = cands.into_iter().nth(i) else {
                return Err(Stop::Error(InterpError::Runtime("replayed fork changed shape".into())));
            };
            self.pc.atoms.extend(atoms);
            self.choices.push(i);
            return Ok(out);
        }
        if Instant::now() > self.deadline {
            return Err(Stop::Limit);
        }
        self.report.successors_created += cands.len();
        self.report.atoms_before += extra_before;
        let mut feasible = Vec::new();
        for (i, (atoms, _)) in cands.iter().enumerate() {
            let mut pc = self.pc.clone();
            pc.atoms.extend(atoms.iter().copied());
            if self.check(&pc) {
                feasible.push(i);
            }
        }
        let Some(&first) = feasible.first() else {
            return Err(Stop::Infeasible);
        };
        for &i in feasible[1..].iter().rev() {
            let mut p = self.choices.clone();
            p.push(i);
            self.pending.push(p);
        }
        let (atoms, out) = cands.into_iter().nth(first).expect("feasible index");
        self.pc.atoms.extend(atoms);
        self.choices.push(first);
        Ok(out)
    }

    fn excluded(&self, x: VarId) -> BTreeSet<IndexVal> {
        self.pc
            .atoms
            .iter()
            .filter_map(|a| match a {
                Atom::VarNeqConst(y, c) if *y == x => Some(*c),
                _ => None,
            })
            .collect()
    }

    fn entails_not_bot(&self, x: VarId) -> bool {
        !self.pc.domain(x).bot || self.excluded(x).contains(&IndexVal::Bot)
    }

    /// Replaces symbolic values whose variable the path condition pins.
    fn norm(&self, v: SVal) -> SVal {
        let (x, mk): (VarId, Box<dyn Fn(IndexVal) -> Value>) = match &v {
            SVal::C(_) => return v,
            SVal::Idx(t, x) => {
                let t = *t;
                (*x, Box::new(move |c| Value::Index(t, c)))
            }
            SVal::Raw(_, x) | SVal::Int(x) | SVal::Opq(_, x) => {
                let x = *x;
                (x, Box::new(move |c| self.const_value(x, c)))
            }
        };
        match self.pc.pinned(x) {
            Some(c) => SVal::C(mk(c)),
            None => v,
        }
    }

    fn opaque(&mut self, ty: TypeTag, x: VarId) -> R<Value> {
        match self.cfg.policy {
            OpaquePolicy::Abandon => Err(Stop::Abandon),
            OpaquePolicy::Concretize => {
                let d = Value::default_for(ty).expect("opaque types have defaults");
                let id = self.pool.intern(&d);
                match self.fork(vec![(vec![Atom::VarEqConst(x, IndexVal::At(id))], d)], 0) {
                    Err(Stop::Infeasible) => Err(Stop::Abandon),
                    r => r,
                }
            }
        }
    }

    /// Forces a concrete value, forking over the variable's domain.
    fn concrete(&mut self, v: SVal) -> R<Value> {
        let v = self.norm(v);
        let (x, with_bot) = match &v {
            SVal::C(c) => return Ok(c.clone()),
            SVal::Opq(ty, x) => return self.opaque(*ty, *x),
            SVal::Idx(_, x) => (*x, true),
            SVal::Raw(_, x) | SVal::Int(x) => (*x, false),
        };
        let dom = self.pc.domain(x);
        let excluded = self.excluded(x);
        let cands: Vec<(Vec<Atom>, Value)> = dom
            .values()
            .filter(|c| (with_bot || !c.is_bot()) && !excluded.contains(c))
            .map(|c| {
                let val = match &v {
                    SVal::Idx(t, _) => Value::Index(*t, c),
                    _ => self.const_value(x, c),
                };
                (vec![Atom::VarEqConst(x, c)], val)
            })
            .collect();
        self.fork(cands, 0)
    }

    // ---- statements ----

    fn call_user(&mut self, f: &'a FunctionDef, args: Vec<SVal>) -> R<SVal> {
        if args.len() != f.params.len() {
            return type_err(format!("arity mismatch calling `{}`", f.name));
        }
        let mut env: HashMap<&'a str, SVal> = f.params.iter().map(|p| p.name.as_str()).zip(args).collect();
        match self.block(f, &f.body, &mut env)? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Ok(SVal::C(default_value(f.ret, &self.rt))),
        }
    }

    fn block(&mut self, f: &'a FunctionDef, b: &'a Block, env: &mut HashMap<&'a str, SVal>) -> R<Flow> {
        for s in b {
            if let Flow::Return(v) = self.stmt(f, s, env)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn stmt(&mut self, f: &'a FunctionDef, s: &'a crate::lang::Stmt, env: &mut HashMap<&'a str, SVal>) -> R<Flow> {
        self.stmts.insert(s.id);
        match &s.kind {
            StmtKind::Decl { name, ty, init } => {
                let v = match init {
                    Some(e) => self.expr(e, env)?,
                    None => SVal::C(default_value(*ty, &self.rt)),
                };
                env.insert(name.as_str(), v);
            }
            StmtKind::Assign { name, value } => {
                let v = self.expr(value, env)?;
                env.insert(name.as_str(), v);
            }
            StmtKind::If { branch, cond, then_block, else_block } => {
                let c = self.expr(cond, env)?;
                let taken = self.truth(c)?;
                self.branches.insert((*branch, taken));
                return self.block(f, if taken { then_block } else { else_block }, env);
            }
            StmtKind::While { branch, cond, body } => {
                let mut iterations = 0u32;
                loop {
                    let c = self.expr(cond, env)?;
                    let taken = self.truth(c)?;
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
                if !self.truth(c)? {
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
                let v = self.make_symbolic(&f.name, name)?;
                env.insert(name.as_str(), v);
            }
        }
        Ok(Flow::Normal)
    }

    fn make_symbolic(&mut self, func: &str, name: &str) -> R<SVal> {
        let key = input_key(func, name);
        let ty = self
            .tp
            .var_type(func, name)
            .ok_or_else(|| InterpError::Type(format!("unknown variable `{name}`")))?;
        let (kind, dom) = match ty {
            TypeTag::Index(t) => (VarKind::Index(t), self.gardens.get(t).map_or(0, |m| m.len() as u32)),
            TypeTag::Int => (VarKind::Int, INT_DOMAIN),
            TypeTag::Bool => (VarKind::Bool, 2),
            TypeTag::Str | TypeTag::Float => (VarKind::Opaque(ty), OPAQUE_DOMAIN),
        };
        let x = match self.by_key.get(&key) {
            Some(x) => *x,
            None => {
                let x = self.kinds.len() as VarId;
                self.kinds.push(kind);
                self.keys.push(key.clone());
                self.by_key.insert(key.clone(), x);
                x
            }
        };
        if self.made.contains(&x) {
            return type_err(format!("`{key}` made symbolic twice"));
        }
        self.made.push(x);
        self.pc.declare(x, Domain::new(dom, false));
        Ok(match kind {
            VarKind::Index(t) => SVal::Idx(t, x),
            VarKind::Int | VarKind::Bool => SVal::Int(x),
            VarKind::Opaque(ty) => SVal::Opq(ty, x),
        })
    }

    // ---- expressions ----

    fn truth(&mut self, v: SVal) -> R<bool> {
        let v = self.norm(v);
        let (x, falsy, bot) = match &v {
            SVal::C(Value::Index(t, i)) => {
                let raw = self.unindex_const(*t, *i)?;
                return Ok(raw.truthy().expect("raw value has a truth value"));
            }
            SVal::C(c) => return Ok(c.truthy().expect("raw value has a truth value")),
            SVal::Idx(t, x) | SVal::Raw(t, x) => {
                let falsy: Vec<IndexVal> =
                    self.gardens.get(*t).map_or(Vec::new(), |m| m.falsy_indices()).into_iter().map(IndexVal::At).collect();
                (*x, falsy, matches!(v, SVal::Idx(..)) && !self.entails_not_bot(*x))
            }
            SVal::Int(x) => (*x, vec![IndexVal::At(0)], false),
            SVal::Opq(ty, x) => {
                let zero = Value::default_for(*ty).expect("opaque types have defaults");
                (*x, vec![IndexVal::At(self.pool.intern(&zero))], false)
            }
        };
        let mut cands = Vec::new();
        let mut t_atoms: Vec<Atom> = falsy.iter().map(|f| Atom::VarNeqConst(x, *f)).collect();
        if bot {
            t_atoms.push(Atom::VarNeqConst(x, IndexVal::Bot));
        }
        cands.push((t_atoms, Truth::T));
        for f in falsy {
            cands.push((vec![Atom::VarEqConst(x, f)], Truth::F));
        }
        if bot {
            cands.push((vec![Atom::VarEqConst(x, IndexVal::Bot)], Truth::Escape));
        }
        match self.fork(cands, 0)? {
            Truth::T => Ok(true),
            Truth::F => Ok(false),
            Truth::Escape => escape(),
        }
    }

    fn unindex_const(&self, t: Indexable, i: IndexVal) -> R<Value> {
        match i {
            IndexVal::Bot => escape(),
            IndexVal::At(k) => self
                .rt
                .delta_inv(t, k)
                .ok_or_else(|| Stop::Error(InterpError::Runtime(format!("index {k} outside the {t} garden")))),
        }
    }

    fn expr(&mut self, e: &'a Expr, env: &HashMap<&'a str, SVal>) -> R<SVal> {
        Ok(match e {
            Expr::Lit(v) => SVal::C(v.clone()),
            Expr::Bot(t) => SVal::C(Value::Index(*t, IndexVal::Bot)),
            Expr::Var(n) => match env.get(n.as_str()) {
                Some(v) => v.clone(),
                None => return type_err(format!("read of undefined `{n}`")),
            },
            Expr::Index(inner) => {
                let v = self.expr(inner, env)?;
                match self.norm(v) {
                    SVal::Raw(t, x) => SVal::Idx(t, x),
                    v => {
                        let c = self.concrete(v)?;
                        let Some(t) = c.type_tag().indexable() else {
                            return type_err(format!("delta of {c}"));
                        };
                        SVal::C(Value::Index(t, self.rt.delta(t, &c)))
                    }
                }
            }
            Expr::Unindex(inner) => {
                let v = self.expr(inner, env)?;
                match self.norm(v) {
                    SVal::C(Value::Index(t, i)) => SVal::C(self.unindex_const(t, i)?),
                    SVal::Idx(t, x) if self.entails_not_bot(x) => SVal::Raw(t, x),
                    SVal::Idx(t, x) => {
                        let cands = vec![
                            (vec![Atom::VarNeqConst(x, IndexVal::Bot)], true),
                            (vec![Atom::VarEqConst(x, IndexVal::Bot)], false),
                        ];
                        if self.fork(cands, 0)? {
                            SVal::Raw(t, x)
                        } else {
                            return escape();
                        }
                    }
                    v => return type_err(format!("delta_inv of {v:?}")),
                }
            }
            Expr::Unary { op: UnOp::Not, expr } => {
                let v = self.expr(expr, env)?;
                SVal::C(Value::Bool(!self.truth(v)?))
            }
            Expr::Unary { op: UnOp::Neg, expr } => {
                let v = self.expr(expr, env)?;
                match self.concrete(v)? {
                    Value::Int(i) => SVal::C(Value::Int(i.wrapping_neg())),
                    Value::Float(f) => SVal::C(Value::float(-f)),
                    v => return type_err(format!("negation of {v}")),
                }
            }
            Expr::Binary { op: BinOp::And, lhs, rhs } => {
                let l = self.expr(lhs, env)?;
                if !self.truth(l)? {
                    SVal::C(Value::Bool(false))
                } else {
                    let r = self.expr(rhs, env)?;
                    SVal::C(Value::Bool(self.truth(r)?))
                }
            }
            Expr::Binary { op: BinOp::Or, lhs, rhs } => {
                let l = self.expr(lhs, env)?;
                if self.truth(l)? {
                    SVal::C(Value::Bool(true))
                } else {
                    let r = self.expr(rhs, env)?;
                    SVal::C(Value::Bool(self.truth(r)?))
                }
            }
            Expr::Binary { op, lhs, rhs } => {
                let l = self.expr(lhs, env)?;
                let r = self.expr(rhs, env)?;
                self.binary(*op, l, r)?
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

    fn eq_fork(&mut self, op: BinOp, eq: Atom, ne: Atom) -> R<SVal> {
        let cands = if op == BinOp::Eq {
            vec![(vec![eq], true), (vec![ne], false)]
        } else {
            vec![(vec![ne], true), (vec![eq], false)]
        };
        Ok(SVal::C(Value::Bool(self.fork(cands, 0)?)))
    }

    /// Position of a constant in a symbolic variable's domain, if it has one.
    fn const_id(&mut self, x: VarId, c: &Value) -> Option<IndexVal> {
        match (self.kinds[x as usize], c) {
            (VarKind::Int, Value::Int(i)) => u32::try_from(*i).ok().filter(|i| *i < INT_DOMAIN).map(IndexVal::At),
            (VarKind::Bool, Value::Bool(b)) => Some(IndexVal::At(u32::from(*b))),
            (VarKind::Index(t), c) if t == Indexable::Str => {
                self.gardens.get(t).map(|m| m.delta_bot(c)).filter(|i| !i.is_bot())
            }
            (VarKind::Opaque(_), Value::Float(f)) if f.is_nan() => None,
            (VarKind::Opaque(_), c) => Some(IndexVal::At(self.pool.intern(c))),
            _ => None,
        }
    }

    fn binary(&mut self, op: BinOp, l: SVal, r: SVal) -> R<SVal> {
        let (l, r) = (self.norm(l), self.norm(r));
        if let (SVal::C(a), SVal::C(b)) = (&l, &r) {
            return binary(op, a, b).map(SVal::C).map_err(|m| Stop::Error(InterpError::Type(m)));
        }
        let sym = |v: &SVal| match v {
            SVal::Int(x) | SVal::Opq(_, x) => Some(*x),
            SVal::Raw(Indexable::Str, x) => Some(*x),
            _ => None,
        };
        if matches!(op, BinOp::Eq | BinOp::Ne) {
            match (sym(&l), sym(&r), &l, &r) {
                (Some(x), Some(y), ..) => return self.eq_fork(op, Atom::VarEqVar(x, y), Atom::VarNeqVar(x, y)),
                (Some(x), None, _, SVal::C(c)) | (None, Some(x), SVal::C(c), _) => {
                    return match self.const_id(x, c) {
                        Some(id) => self.eq_fork(op, Atom::VarEqConst(x, id), Atom::VarNeqConst(x, id)),
                        None => Ok(SVal::C(Value::Bool(op == BinOp::Ne))),
                    };
                }
                _ => {}
            }
        }
        if let Some(flip) = relational(op) {
            match (&l, &r) {
                (SVal::Int(x), SVal::C(Value::Int(c))) => return self.int_relation(op, *x, *c),
                (SVal::C(Value::Int(c)), SVal::Int(x)) => return self.int_relation(flip, *x, *c),
                _ => {}
            }
        }
        let a = self.concrete(l)?;
        let b = self.concrete(r)?;
        binary(op, &a, &b).map(SVal::C).map_err(|m| Stop::Error(InterpError::Type(m)))
    }

    /// `x op c` for a symbolic int: each outcome excludes the values of the
    /// other one.
    fn int_relation(&mut self, op: BinOp, x: VarId, c: i64) -> R<SVal> {
        let dom = self.pc.domain(x).size;
        let holds = |v: u32| binary(op, &Value::Int(i64::from(v)), &Value::Int(c)) == Ok(Value::Bool(true));
        let (yes, no): (Vec<u32>, Vec<u32>) = (0..dom).partition(|v| holds(*v));
        if yes.is_empty() || no.is_empty() {
            return Ok(SVal::C(Value::Bool(no.is_empty())));
        }
        let excluding = |vs: &[u32]| vs.iter().map(|v| Atom::VarNeqConst(x, IndexVal::At(*v))).collect::<Vec<_>>();
        let cands = vec![(excluding(&no), true), (excluding(&yes), false)];
        Ok(SVal::C(Value::Bool(self.fork(cands, 0)?)))
    }

    fn call(&mut self, name: &str, args: Vec<SVal>) -> R<SVal> {
        if let Some(f) = self.tp.program.functions.iter().find(|f| f.name == name) {
            return self.call_user(f, args);
        }
        if self.tp.program.externs.iter().any(|e| e.name == name) {
            return self.call_indexed(name, args);
        }
        if name == "puts" {
            return Ok(SVal::C(Value::Int(0)));
        }
        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            vals.push(self.concrete(a)?);
        }
        builtins::eval_builtin(name, &vals).map(SVal::C).map_err(|e| Stop::Error(InterpError::Type(e.to_string())))
    }

    fn call_indexed(&mut self, name: &str, args: Vec<SVal>) -> R<SVal> {
        let rt = &self.rt;
        let table = rt.table(name).ok_or_else(|| InterpError::Runtime(format!("no table for `{name}`")))?;
        let args: Vec<SVal> = args.into_iter().map(|a| self.norm(a)).collect();
        let concrete_bot = args.iter().any(|a| matches!(a, SVal::C(Value::Index(_, IndexVal::Bot))));
        if concrete_bot && !self.cfg.bot_propagate {
            return escape();
        }
        let mut pos = Vec::with_capacity(args.len());
        for (c, a) in args.into_iter().enumerate() {
            pos.push(match (a, &table.columns[c]) {
                (SVal::C(v), _) => Pos::Fixed(table.position(c, &v)),
                (SVal::Idx(_, x), Column::Indexed(_)) => Pos::Sym(x),
                (SVal::Int(x), Column::Raw(dom)) => Pos::Fixed(self.raw_position(x, dom)?),
                (a, _) => {
                    let v = self.concrete(a)?;
                    Pos::Fixed(table.position(c, &v))
                }
            });
        }
        if pos.iter().all(|p| matches!(p, Pos::Fixed(_))) {
            let tuple: Vec<IndexVal> = pos.iter().map(|p| if let Pos::Fixed(i) = p { *i } else { unreachable!() }).collect();
            return cell_result(table, &table.lookup(&tuple));
        }
        let pins = |x: VarId| self.excluded(x);
        let cands = iot_candidates(table, &pos, &|c| self.gardens.get(c).map_or(0, |m| m.len() as u32), &pins, self.cfg.bot_propagate);
        if self.choices.len() >= self.prefix.len() {
            self.report.iot_forks += 1;
        }
        let extra = table.row_count() * table.arity();
        match self.fork(cands, extra)? {
            Some(cell) => cell_result(table, &cell),
            None => escape(),
        }
    }

    /// Forks a symbolic int over the values of a raw table column.
    fn raw_position(&mut self, x: VarId, dom: &[Value]) -> R<IndexVal> {
        let mut cands = Vec::new();
        let mut outside = Vec::new();
        for (p, v) in dom.iter().enumerate() {
            if let Some(id) = self.const_id(x, v) {
                cands.push((vec![Atom::VarEqConst(x, id)], IndexVal::At(p as u32)));
                outside.push(Atom::VarNeqConst(x, id));
            }
        }
        cands.push((outside, IndexVal::Bot));
        self.fork(cands, 0)
    }
}

fn relational(op: BinOp) -> Option<BinOp> {
    Some(match op {
        BinOp::Lt => BinOp::Gt,
        BinOp::Le => BinOp::Ge,
        BinOp::Gt => BinOp::Lt,
        BinOp::Ge => BinOp::Le,
        BinOp::Eq => BinOp::Eq,
        BinOp::Ne => BinOp::Ne,
        _ => return None,
    })
}

fn cell_result(table: &Table, cell: &ResultCell) -> R<SVal> {
    match table.cell_value(cell) {
        Some(v) => Ok(SVal::C(v)),
        None => escape(),
    }
}

/// A table argument: a fixed column position or a symbolic index variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pos {
    Fixed(IndexVal),
    Sym(VarId),
}

/// The candidates of a table call with symbolic arguments: one per row
/// consistent with the fixed positions and the excluded values, sorted by
/// result (⊥ last) then tuple, followed by one candidate per symbolic
/// variable `x_j` covering `x_j = ⊥` with all earlier variables non-⊥.
/// `None` means the call escapes.
pub fn iot_candidates(
    table: &Table,
    pos: &[Pos],
    garden_len: &dyn Fn(Indexable) -> u32,
    excluded: &dyn Fn(VarId) -> BTreeSet<IndexVal>,
    bot_propagate: bool,
) -> Vec<(Vec<Atom>, Option<ResultCell>)> {
    let mut syms: Vec<(VarId, Vec<u32>)> = Vec::new();
    for (c, p) in pos.iter().enumerate() {
        if let Pos::Sym(x) = p {
            if syms.iter().any(|(y, _)| y == x) {
                continue;
            }
            let n = match &table.columns[c] {
                Column::Indexed(t) => garden_len(*t),
                Column::Raw(d) => d.len() as u32,
            };
            let ex = excluded(*x);
            syms.push((*x, (0..n).filter(|i| !ex.contains(&IndexVal::At(*i))).collect()));
        }
    }
    let mut rows: Vec<(ResultCell, Vec<IndexVal>, Vec<Atom>)> = Vec::new();
    if syms.iter().all(|(_, vals)| !vals.is_empty()) {
        let mut odo = vec![0usize; syms.len()];
        'rows: loop {
            let assign: BTreeMap<VarId, u32> = syms.iter().zip(&odo).map(|((x, vals), i)| (*x, vals[*i])).collect();
            let tuple: Vec<IndexVal> = pos
                .iter()
                .map(|p| match p {
                    Pos::Fixed(i) => *i,
                    Pos::Sym(x) => IndexVal::At(assign[x]),
                })
                .collect();
            let atoms = assign.iter().map(|(x, v)| Atom::VarEqConst(*x, IndexVal::At(*v))).collect();
            rows.push((table.lookup(&tuple), tuple, atoms));
            let mut k = syms.len();
            loop {
                if k == 0 {
                    break 'rows;
                }
                k -= 1;
                odo[k] += 1;
                if odo[k] < syms[k].1.len() {
                    break;
                }
                odo[k] = 0;
            }
        }
    }
    rows.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
    let mut out: Vec<(Vec<Atom>, Option<ResultCell>)> = rows.into_iter().map(|(c, _, a)| (a, Some(c))).collect();
    for j in 0..syms.len() {
        let mut atoms: Vec<Atom> = syms[..j].iter().map(|(x, _)| Atom::VarNeqConst(*x, IndexVal::Bot)).collect();
        atoms.push(Atom::VarEqConst(syms[j].0, IndexVal::Bot));
        out.push((atoms, bot_propagate.then_some(ResultCell::Bot)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::garden::{build_garden, BuilderConfig, SeedSet};
    use crate::iot::{memoise, Operator};
    use crate::lang::{parse, typecheck, IndexedTypes, NoIndex};
    use crate::rewrite::{normalize, RewriteConfig, Strategy};

    fn foobar_garden() -> Gardens {
        Gardens::parse("0\tstr\tfoobar\n1\tstr\toobar\n2\tstr\tbar\n3\tstr\too\n4\tstr\t\n").unwrap()
    }

    fn indexed(src: &str, g: &Gardens, ops: &[&str]) -> (TypedProgram, Vec<Table>) {
        let ops_s: Vec<String> = ops.iter().map(|s| s.to_string()).collect();
        let cfg = RewriteConfig::new(g.types(), &ops_s, g).unwrap();
        let r = normalize(&parse(src).unwrap(), &cfg, Strategy::First).unwrap();
        let ints = crate::garden::raw_int_domain(&r.program, 8);
        let tables = ops.iter().map(|o| memoise(g, &Operator::builtin(o).unwrap(), &ints).unwrap()).collect();
        (typecheck(&r.program).unwrap(), tables)
    }

    const STRSTR_GUARD: &str = r#"
        int main() {
            str S1;
            make_symbolic(S1);
            puts(S1);
            if (strstr(S1, "bar")) {
                return 1;
            } else {
                return 0;
            }
        }"#;

    #[test]
    fn strstr_guard_paths() {
        let g = foobar_garden();
        let (tp, tables) = indexed(STRSTR_GUARD, &g, &["strstr"]);
        let r = explore(&tp, &g, &tables, &ExploreConfig::default()).unwrap();
        assert_eq!(r.replay_mismatches, 0);
        assert_eq!(r.branches, [(0, true), (0, false)].into());
        assert_eq!(r.bcov(), 100.0);
        // One candidate per row with second argument δ("bar"), plus ⊥.
        assert_eq!(r.successors_created, 5 + 1);
        assert_eq!(r.iot_forks, 1);
        let taken: BTreeSet<String> = r
            .test_cases
            .iter()
            .filter(|t| t.branches.contains(&(0, true)))
            .map(|t| String::from_utf8(t.inputs["S1"].as_str().unwrap().to_vec()).unwrap())
            .collect();
        assert_eq!(taken, ["foobar", "oobar", "bar"].iter().map(|s| s.to_string()).collect());

        let base = explore_baseline(&typecheck(&parse(STRSTR_GUARD).unwrap()).unwrap(), OpaquePolicy::Abandon, &Default::default())
            .unwrap();
        assert!(base.branches.is_empty());
        assert_eq!(base.abandoned, 1);
        assert!(base.test_cases.is_empty());
    }

    #[test]
    fn concrete_program_single_path() {
        let tp = typecheck(&parse("int main(){ int x = 3; if (x > 2) { return 1; } return 0; }").unwrap()).unwrap();
        let r = explore(&tp, &Gardens::new(), &[], &ExploreConfig::default()).unwrap();
        assert_eq!(r.paths, 1);
        assert_eq!(r.test_cases.len(), 1);
        assert_eq!(r.solver_queries, 0);
        assert_eq!(r.test_cases[0].verdict, Verdict::Ok);
    }

    const INTS: &str = r#"
        int main() {
            int x;
            make_symbolic(x);
            if (x > 200) {
                if (x == 231) { assert(false); }
                return 2;
            }
            if (x < 3) { return 1; }
            return 0;
        }"#;

    #[test]
    fn integer_controls_agree_across_modes() {
        let tp = typecheck(&parse(INTS).unwrap()).unwrap();
        let a = explore(&tp, &Gardens::new(), &[], &ExploreConfig::default()).unwrap();
        let b = explore_baseline(&tp, OpaquePolicy::Abandon, &ExploreConfig::default()).unwrap();
        assert_eq!(a.test_cases, b.test_cases);
        assert_eq!(a.bcov(), 100.0);
        assert_eq!(a.count(Verdict::AssertionFailure), 1);
        let fail = a.test_cases.iter().find(|t| t.verdict == Verdict::AssertionFailure).unwrap();
        assert_eq!(fail.inputs["x"], Value::Int(231));
        assert_eq!(a.replay_mismatches, 0);
    }

    #[test]
    fn exploration_is_deterministic() {
        let g = foobar_garden();
        let (tp, tables) = indexed(STRSTR_GUARD, &g, &["strstr"]);
        let a = explore(&tp, &g, &tables, &Default::default()).unwrap();
        let b = explore(&tp, &g, &tables, &Default::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn opaque_equality_in_baseline() {
        let src = r#"int main(){ str s; make_symbolic(s); if (s == "go") { return 1; } if (s) { return 2; } return 0; }"#;
        let tp = typecheck(&parse(src).unwrap()).unwrap();
        let r = explore_baseline(&tp, OpaquePolicy::Abandon, &Default::default()).unwrap();
        assert_eq!(r.bcov(), 100.0);
        assert_eq!(r.test_cases.len(), 3);
        assert_eq!(r.replay_mismatches, 0);
        let rs: Vec<Value> = r.test_cases.iter().map(|t| t.inputs["s"].clone()).collect();
        assert!(rs.contains(&Value::str("go")) && rs.contains(&Value::str("")));
    }

    #[test]
    fn concretize_policy_binds_defaults() {
        let src = r#"int main(){ str s; make_symbolic(s); if (strlen(s) > 0) { return 1; } return 0; }"#;
        let tp = typecheck(&parse(src).unwrap()).unwrap();
        let a = explore_baseline(&tp, OpaquePolicy::Abandon, &Default::default()).unwrap();
        assert_eq!((a.abandoned, a.test_cases.len()), (1, 0));
        let c = explore_baseline(&tp, OpaquePolicy::Concretize, &Default::default()).unwrap();
        assert_eq!(c.test_cases.len(), 1);
        assert_eq!(c.test_cases[0].inputs["s"], Value::str(""));
        assert_eq!(c.branches, [(0, false)].into());
    }

    #[test]
    fn escapes_and_bot_propagation() {
        // The garden lacks strcat results, so the lookup yields ⊥ and the
        // escape happens only when the value is consumed.
        let g = Gardens::parse("0\tstr\t\n1\tstr\tab\n").unwrap();
        let src = r#"int main(){ str s; make_symbolic(s); str t = strcat(s, s); if (s) { puts(t); } return 0; }"#;
        let (tp, tables) = indexed(src, &g, &["strcat"]);
        let r = explore(&tp, &g, &tables, &Default::default()).unwrap();
        let verdicts: Vec<Verdict> = r.test_cases.iter().map(|t| t.verdict).collect();
        assert_eq!(verdicts, vec![Verdict::Ok, Verdict::EscapedGarden]);
        assert_eq!(r.escaped, 1);
        assert_eq!(r.replay_mismatches, 0);
    }

    #[test]
    fn symbolic_count_argument_of_raw_column() {
        let g = Gardens::parse("0\tstr\t\n1\tstr\tab\n2\tstr\tac\n").unwrap();
        let src = r#"int main(){ str a = "ab"; str b = "ac"; int n; make_symbolic(n);
                     if (strncmp(a, b, n) == 0) { return 1; } return 0; }"#;
        let (tp, tables) = indexed(src, &g, &["strncmp"]);
        let r = explore(&tp, &g, &tables, &Default::default()).unwrap();
        assert_eq!(r.replay_mismatches, 0);
        assert_eq!(r.bcov(), 100.0);
        assert!(r.test_cases.iter().any(|t| t.verdict == Verdict::EscapedGarden));
    }

    #[test]
    fn candidates_partition_the_domain() {
        let g = foobar_garden();
        let t = memoise(&g, &Operator::builtin("strstr").unwrap(), &[]).unwrap();
        let n = 5u32;
        for pos in [vec![Pos::Sym(0), Pos::Fixed(IndexVal::At(2))], vec![Pos::Sym(0), Pos::Sym(1)], vec![Pos::Sym(0), Pos::Sym(0)]] {
            for bp in [false, true] {
                let cands = iot_candidates(&t, &pos, &|_| n, &|_| BTreeSet::new(), bp);
                let vals: Vec<IndexVal> = (0..n).map(IndexVal::At).chain([IndexVal::Bot]).collect();
                for a in &vals {
                    for b in &vals {
                        let m: solver::Model = [(0, *a), (1, *b)].into();
                        let hits: Vec<_> = cands.iter().filter(|(atoms, _)| atoms.iter().all(|x| x.holds(&m))).collect();
                        assert_eq!(hits.len(), 1, "{pos:?} {a} {b}");
                        let tuple: Vec<IndexVal> = pos
                            .iter()
                            .map(|p| match p {
                                Pos::Fixed(i) => *i,
                                Pos::Sym(0) => *a,
                                Pos::Sym(_) => *b,
                            })
                            .collect();
                        let expected = if tuple.contains(&IndexVal::Bot) && !bp { None } else { Some(t.lookup(&tuple)) };
                        assert_eq!(hits[0].1, expected);
                    }
                }
            }
        }
    }

    #[test]
    fn test_case_file_round_trip() {
        let tc = TestCase {
            path_id: "0.2".into(),
            inputs: [("a".to_string(), Value::str("x=y\n")), ("f.n".to_string(), Value::Int(-3))].into(),
            verdict: Verdict::AssertionFailure,
            branches: [(0, true), (3, false)].into(),
            pc: vec!["a = 1".into()],
        };
        assert_eq!(TestCase::from_file_text(&tc.to_file_text()).unwrap(), tc);
        assert!(TestCase::from_file_text("nonsense").is_err());
    }

    #[test]
    fn vendor_bug_found_only_when_indexed() {
        let src = r#"
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
        let p = parse(src).unwrap();
        let seeds = crate::garden::harvest_seeds(&p, IndexedTypes::STR);
        let (g, _) = build_garden(&seeds, &[], &BuilderConfig::default()).unwrap();
        let (tp, tables) = indexed(src, &g, &["strncmp"]);
        let r = explore(&tp, &g, &tables, &Default::default()).unwrap();
        assert_eq!(r.replay_mismatches, 0);
        let fail = r.test_cases.iter().find(|t| t.verdict == Verdict::AssertionFailure).expect("bug found");
        assert!(fail.pc.iter().any(|a| a.starts_with("Vendor = ")));
        assert!(fail.pc.iter().any(|a| a.starts_with("Nv11Vendor = ")));
        let out = interpret(&typecheck(&p).unwrap(), &fail.inputs, &NoIndex, InterpConfig::default()).unwrap();
        assert_eq!(out.verdict, Verdict::AssertionFailure);

        let tp0 = typecheck(&p).unwrap();
        for policy in [OpaquePolicy::Abandon, OpaquePolicy::Concretize] {
            let b = explore_baseline(&tp0, policy, &Default::default()).unwrap();
            assert_eq!(b.count(Verdict::AssertionFailure), 0, "{policy:?}");
        }
        let _ = SeedSet::new(IndexedTypes::STR);
    }
}
