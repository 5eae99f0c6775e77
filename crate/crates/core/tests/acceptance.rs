//! The acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line prints even when an
//! earlier criterion fails; the process exits nonzero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use indexify::bench::{default_corpus_dir, load_corpus, Category, CorpusEntry};
use indexify::cli::{indexify, run_baseline, run_indexed, IndexConfig, Indexation};
use indexify::garden::{build_garden, BuilderConfig, Gardens, SeedSet};
use indexify::iot::{memoise, Column, Operator, ResultCell, ResultKind, Table};
use indexify::lang::{
    interpret, input_key, IndexVal, Indexable, IndexedTypes, InterpConfig, NoIndex, Program, StmtKind, TypeTag,
    Value, Verdict,
};
use indexify::rewrite::{confluence_probe, normalize, RewriteConfig, Strategy};
use indexify::solver::{self, Atom, Domain, PathCondition};
use indexify::symex::{iot_candidates, ExploreConfig, OpaquePolicy, Pos};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)*));
        }
    };
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    if t > limit {
        Err(format!("took {:.2?}, limit {:.0?}", t, limit))
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Oracles, written without reference to the library's implementations.

fn oracle_find(hay: &[u8], needle: &[u8]) -> Option<usize> {
    let mut i = 0;
    while i + needle.len() <= hay.len() {
        if &hay[i..i + needle.len()] == needle {
            return Some(i);
        }
        i += 1;
    }
    None
}

/// C `strncmp` on NUL-padded byte strings, sign only.
fn oracle_strncmp(a: &[u8], b: &[u8], n: i64) -> i64 {
    let n = n.max(0) as usize;
    let mut k = 0;
    while k < n {
        let x = if k < a.len() { a[k] } else { 0 };
        let y = if k < b.len() { b[k] } else { 0 };
        if x < y {
            return -1;
        }
        if x > y {
            return 1;
        }
        if x == 0 {
            return 0;
        }
        k += 1;
    }
    0
}

fn oracle_eval(op: &str, args: &[Value]) -> Value {
    let s = |i: usize| args[i].as_str().unwrap();
    let n = |i: usize| args[i].as_int().unwrap();
    let f = |i: usize| args[i].as_float().unwrap();
    match op {
        "strcat" => Value::Str([s(0), s(1)].concat()),
        "strstr" => {
            if s(1).is_empty() {
                Value::Str(s(0).to_vec())
            } else {
                Value::Str(oracle_find(s(0), s(1)).map_or(Vec::new(), |p| s(0)[p..].to_vec()))
            }
        }
        "strncmp" => Value::Int(oracle_strncmp(s(0), s(1), n(2))),
        "strcmp" => Value::Int(oracle_strncmp(s(0), s(1), i64::MAX)),
        "strlen" => Value::Int(s(0).iter().take_while(|b| **b != 0).count() as i64),
        "substr" => {
            let b = s(0);
            let start = (n(1).max(0) as usize).min(b.len());
            let end = start.saturating_add(n(2).max(0) as usize).min(b.len());
            Value::Str(b[start..end].to_vec())
        }
        "fadd" => Value::Float(f(0) + f(1)),
        "fsub" => Value::Float(f(0) - f(1)),
        "fmul" => Value::Float(f(0) * f(1)),
        "fdiv" => Value::Float(f(0) / f(1)),
        "sqrt" => Value::Float(f(0).sqrt()),
        "fabs" => Value::Float(f(0).abs()),
        "fmin" => Value::Float(f(0).min(f(1))),
        "fmax" => Value::Float(f(0).max(f(1))),
        _ => panic!("no oracle for {op}"),
    }
}

/// Identity of values as garden members: bitwise for floats with every NaN
/// the same.
fn same(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Float(x), Value::Float(y)) => (x.is_nan() && y.is_nan()) || x.to_bits() == y.to_bits(),
        _ => a == b,
    }
}

fn oracle_delta(garden: &[Value], v: &Value) -> Option<u32> {
    garden.iter().position(|g| same(g, v)).map(|p| p as u32)
}

// ---------------------------------------------------------------------------

fn c1_garden_golden() -> Outcome {
    let t = Instant::now();
    let mut seeds = SeedSet::new(IndexedTypes::STR);
    seeds.push(Value::str("a"));
    seeds.push(Value::str("b"));
    let ops = [Operator::builtin("strcat").unwrap(), Operator::builtin("strstr").unwrap()];
    let cfg = BuilderConfig { k: 2, max_str_len: 2, ..BuilderConfig::default() };
    let (g, _) = build_garden(&seeds, &ops, &cfg).map_err(|e| e.to_string())?;
    let got: BTreeSet<String> = g
        .get(Indexable::Str)
        .unwrap()
        .values()
        .iter()
        .map(|v| String::from_utf8(v.as_str().unwrap().to_vec()).unwrap())
        .collect();
    let want: BTreeSet<String> = ["", "a", "b", "aa", "bb", "ab", "ba"].iter().map(|s| s.to_string()).collect();
    ensure!(got == want, "garden {got:?}");
    within(t, Duration::from_secs(1))?;
    Ok(format!("{} values in {:.2?}", got.len(), t.elapsed()))
}

fn random_config(rng: &mut ChaCha8Rng) -> (SeedSet, Vec<&'static str>, BuilderConfig, Indexable) {
    let k = rng.gen_range(1..=3);
    if rng.gen_bool(0.6) {
        let mut seeds = SeedSet::new(IndexedTypes::STR);
        for _ in 0..rng.gen_range(1..=3) {
            let len = rng.gen_range(1..=3);
            let s: Vec<u8> = (0..len).map(|_| *b"abc".choose(rng).unwrap()).collect();
            seeds.push(Value::Str(s));
        }
        let mut builders: Vec<&str> = ["strcat", "strstr", "substr"].into_iter().filter(|_| rng.gen_bool(0.5)).collect();
        if builders.is_empty() {
            builders.push("strcat");
        }
        let max_len = rng.gen_range(2..=4);
        let cfg = BuilderConfig { k, max_str_len: max_len, int_domain: (0..=max_len as i64).collect(), ..Default::default() };
        (seeds, builders, cfg, Indexable::Str)
    } else {
        let mut seeds = SeedSet::new(IndexedTypes::FLOAT);
        for _ in 0..rng.gen_range(1..=3) {
            seeds.push(Value::float(*[0.0, 0.5, 1.0, 2.0, -1.0, 4.0, -0.0].choose(rng).unwrap()));
        }
        let pool = ["fadd", "fsub", "fmul", "fdiv", "sqrt", "fabs", "fmin", "fmax"];
        let count = rng.gen_range(1..=2);
        let builders: Vec<&str> = pool.choose_multiple(rng, count).copied().collect();
        (seeds, builders, BuilderConfig { k, ..Default::default() }, Indexable::Float)
    }
}

fn check_table(g: &Gardens, t: &Table) -> Result<usize, String> {
    let mut rows = 0;
    for (tuple, cell) in t.rows() {
        let args: Vec<Value> = tuple
            .iter()
            .zip(&t.columns)
            .map(|(p, c)| match c {
                Column::Indexed(ty) => g.get(*ty).unwrap().values()[*p as usize].clone(),
                Column::Raw(d) => d[*p as usize].clone(),
            })
            .collect();
        let want_value = oracle_eval(&t.op, &args);
        let ok = match (t.result, cell) {
            (ResultKind::Indexed(ty), ResultCell::Index(i)) => {
                oracle_delta(g.get(ty).unwrap().values(), &want_value) == Some(*i)
            }
            (ResultKind::Indexed(ty), ResultCell::Bot) => oracle_delta(g.get(ty).unwrap().values(), &want_value).is_none(),
            (ResultKind::Raw(_), ResultCell::Raw(v)) => same(&v.0, &want_value),
            _ => false,
        };
        ensure!(ok, "{}{:?} -> {:?}, oracle {:?}", t.op, args, cell, want_value);
        rows += 1;
    }
    Ok(rows)
}

fn c2_memoization_oracle() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut configs, mut rows, mut rejected) = (0, 0usize, 0);
    while configs < 100 {
        let (seeds, builders, cfg, ty) = random_config(&mut rng);
        let ops: Vec<Operator> = builders.iter().map(|b| Operator::builtin(b).unwrap()).collect();
        let (g, _) = build_garden(&seeds, &ops, &cfg).map_err(|e| e.to_string())?;
        if g.total_len() > 64 {
            rejected += 1;
            continue;
        }
        configs += 1;
        for b in indexify::iot::builtins::library(ty) {
            let table = memoise(&g, &Operator::builtin(b.name).unwrap(), &cfg.int_domain).map_err(|e| e.to_string())?;
            ensure!(
                table.row_count() == table.columns.iter().map(|c| match c {
                    Column::Indexed(t) => g.get(*t).unwrap().len(),
                    Column::Raw(d) => d.len(),
                }).product::<usize>(),
                "{} is not complete",
                b.name
            );
            rows += check_table(&g, &table)?;
        }
    }
    within(t, Duration::from_secs(60))?;
    Ok(format!("{configs} configurations ({rejected} over 64 values redrawn), {rows} rows, 0 mismatches in {:.2?}", t.elapsed()))
}

fn c3_pinned_rows() -> Outcome {
    let g = Gardens::parse("0\tstr\tfoobar\n1\tstr\toobar\n2\tstr\tbar\n3\tstr\too\n").map_err(|e| e.to_string())?;
    let t = memoise(&g, &Operator::builtin("strstr").unwrap(), &[]).map_err(|e| e.to_string())?;
    let a = t.lookup(&[IndexVal::At(0), IndexVal::At(2)]);
    let b = t.lookup(&[IndexVal::At(0), IndexVal::At(3)]);
    ensure!(a == ResultCell::Index(2), "(0,2) -> {a:?}");
    ensure!(b == ResultCell::Index(1), "(0,3) -> {b:?}");
    Ok("i_strstr (0,2) -> 2, (0,3) -> 1".into())
}

fn corpus() -> Result<Vec<CorpusEntry>, String> {
    load_corpus(&default_corpus_dir()).map_err(|e| e.to_string())
}

fn c4_confluence(entries: &[CorpusEntry]) -> Outcome {
    let t = Instant::now();
    let seed: u64 = std::env::var("INDEXIFY_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(4);
    for e in entries {
        let ix = indexify(&e.program, &e.config).map_err(|err| format!("{}: {err}", e.name))?;
        let cfg = RewriteConfig::new(e.config.types, &ix.fplus, &ix.gardens).map_err(|err| err.to_string())?;
        let first = normalize(&e.program, &cfg, Strategy::First).map_err(|err| err.to_string())?;
        let r = confluence_probe(&e.program, &cfg, 1000, seed).map_err(|err| format!("{}: {err}", e.name))?;
        ensure!(r.distinct_normal_forms == 1 && r.all_equal, "{}: {} normal forms", e.name, r.distinct_normal_forms);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let one = normalize(&e.program, &cfg, Strategy::Random(&mut rng)).map_err(|err| err.to_string())?;
        ensure!(one.program == first.program, "{}: random order differs from first-redex order", e.name);
    }
    within(t, Duration::from_secs(120))?;
    Ok(format!("{} programs x 1000 orders, one normal form each, {:.2?}", entries.len(), t.elapsed()))
}

/// `(input key, declared type)` of every `make_symbolic` in the program.
fn symbolic_inputs(p: &Program) -> Vec<(String, TypeTag)> {
    let mut decls: BTreeMap<(String, String), TypeTag> = BTreeMap::new();
    let mut out = Vec::new();
    p.for_each_stmt(&mut |f, s| {
        if let StmtKind::Decl { name, ty, .. } = &s.kind {
            decls.insert((f.name.clone(), name.clone()), *ty);
        }
    });
    for f in p.all_functions() {
        for prm in &f.params {
            decls.insert((f.name.clone(), prm.name.clone()), prm.ty);
        }
    }
    p.for_each_stmt(&mut |f, s| {
        if let StmtKind::MakeSymbolic(v) = &s.kind {
            out.push((input_key(&f.name, v), decls[&(f.name.clone(), v.clone())]));
        }
    });
    out
}

fn random_input(rng: &mut ChaCha8Rng, ix: &Indexation, ty: TypeTag) -> Value {
    match ty.indexable().and_then(|t| ix.gardens.get(t)) {
        Some(g) if !g.is_empty() => g.values().choose(rng).unwrap().clone(),
        _ => match ty {
            TypeTag::Int => Value::Int(rng.gen_range(0..256)),
            TypeTag::Bool => Value::Bool(rng.gen()),
            TypeTag::Float => Value::float(rng.gen_range(-4.0..4.0)),
            _ => Value::str(""),
        },
    }
}

fn c5_homomorphism(entries: &[CorpusEntry]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut compared, mut escaped) = (0, 0);
    let icfg = InterpConfig::default();
    for e in entries {
        let ix = indexify(&e.program, &e.config).map_err(|err| format!("{}: {err}", e.name))?;
        let rt = ix.runtime();
        let inputs_of = symbolic_inputs(&e.program);
        for _ in 0..200 {
            let inputs: BTreeMap<String, Value> =
                inputs_of.iter().map(|(k, ty)| (k.clone(), random_input(&mut rng, &ix, *ty))).collect();
            let got = interpret(&ix.indexed, &inputs, &rt, icfg).map_err(|err| format!("{}: {err}", e.name))?;
            if got.verdict == Verdict::EscapedGarden {
                escaped += 1;
                continue;
            }
            let want = interpret(&ix.original, &inputs, &NoIndex, icfg).map_err(|err| format!("{}: {err}", e.name))?;
            let got_value = match (&got.return_value, ix.gardens.iter().next()) {
                (Some(Value::Index(t, i)), _) => match i.index() {
                    Some(i) => Some(ix.gardens.get(*t).unwrap().values()[i as usize].clone()),
                    None => {
                        escaped += 1;
                        continue;
                    }
                },
                (v, _) => v.clone(),
            };
            ensure!(
                got.verdict == want.verdict && got_value == want.return_value,
                "{}: inputs {inputs:?}: indexed {:?}/{:?}, original {:?}/{:?}",
                e.name,
                got.verdict,
                got_value,
                want.verdict,
                want.return_value
            );
            compared += 1;
        }
    }
    Ok(format!("{compared} runs agree, {escaped} escaped runs skipped"))
}

fn brute_force(vars: &[Domain], atoms: &[Atom]) -> bool {
    let choices: Vec<Vec<IndexVal>> = vars
        .iter()
        .map(|d| {
            let mut v: Vec<IndexVal> = (0..d.size).map(IndexVal::At).collect();
            if d.bot {
                v.push(IndexVal::Bot);
            }
            v
        })
        .collect();
    let mut idx = vec![0usize; vars.len()];
    if choices.iter().any(Vec::is_empty) {
        return false;
    }
    loop {
        let val = |x: u32| choices[x as usize][idx[x as usize]];
        if atoms.iter().all(|a| holds(a, &val)) {
            return true;
        }
        let mut k = vars.len();
        loop {
            if k == 0 {
                return false;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn holds(a: &Atom, val: &dyn Fn(u32) -> IndexVal) -> bool {
    match *a {
        Atom::VarEqConst(x, c) => val(x) == c,
        Atom::VarNeqConst(x, c) => val(x) != c,
        Atom::VarEqVar(x, y) => val(x) == val(y),
        Atom::VarNeqVar(x, y) => val(x) != val(y),
    }
}

fn c6_solver_oracle() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut sat, mut unsat) = (0, 0);
    for case in 0..10_000 {
        let nvars = rng.gen_range(1..=4u32);
        let doms: Vec<Domain> = (0..nvars).map(|_| Domain::new(rng.gen_range(1..=8), rng.gen_bool(0.5))).collect();
        let mut pc = PathCondition::new();
        for (x, d) in doms.iter().enumerate() {
            pc.declare(x as u32, *d);
        }
        let mut atoms = Vec::new();
        for _ in 0..rng.gen_range(0..=8) {
            let x = rng.gen_range(0..nvars);
            let y = rng.gen_range(0..nvars);
            let c = if rng.gen_bool(0.15) { IndexVal::Bot } else { IndexVal::At(rng.gen_range(0..9)) };
            let a = match rng.gen_range(0..4) {
                0 => Atom::VarEqConst(x, c),
                1 => Atom::VarNeqConst(x, c),
                2 => Atom::VarEqVar(x, y),
                _ => Atom::VarNeqVar(x, y),
            };
            pc.push(a);
            atoms.push(a);
        }
        let expect = brute_force(&doms, &atoms);
        match solver::solve(&pc) {
            solver::Verdict::Sat(m) => {
                ensure!(expect, "case {case}: solver SAT, brute force UNSAT: {atoms:?} over {doms:?}");
                for (x, d) in doms.iter().enumerate() {
                    let v = m.get(&(x as u32)).copied();
                    ensure!(v.is_some_and(|v| d.contains(v)), "case {case}: model value {v:?} outside {d:?}");
                }
                ensure!(atoms.iter().all(|a| holds(a, &|x| m[&x])), "case {case}: model {m:?} violates {atoms:?}");
                sat += 1;
            }
            solver::Verdict::Unsat => {
                ensure!(!expect, "case {case}: solver UNSAT, brute force SAT: {atoms:?} over {doms:?}");
                unsat += 1;
            }
            solver::Verdict::Unknown => return Err(format!("case {case}: unknown")),
        }
    }
    within(t, Duration::from_secs(60))?;
    Ok(format!("10000 conditions ({sat} sat, {unsat} unsat) agree with enumeration, {:.2?}", t.elapsed()))
}

fn c7_vendor_bug(entries: &[CorpusEntry]) -> Outcome {
    let e = entries.iter().find(|e| e.name == "vendor_prefix").ok_or("vendor_prefix missing from corpus")?;
    let ecfg = ExploreConfig { time_budget: Duration::from_secs(60), ..ExploreConfig::default() };
    let (ix, r) = run_indexed(&e.program, &e.config, &ecfg).map_err(|err| err.to_string())?;
    let fail = r
        .test_cases
        .iter()
        .find(|t| t.verdict == Verdict::AssertionFailure)
        .ok_or("indexed mode found no assertion failure")?;
    let pinned = |var: &str| {
        fail.pc.iter().any(|a| a.strip_prefix(var).and_then(|r| r.strip_prefix(" = ")).is_some_and(|n| n.parse::<u32>().is_ok()))
    };
    ensure!(pinned("Vendor") && pinned("Nv11Vendor"), "pc lacks the two pins: {:?}", fail.pc);
    let replayed = interpret(&ix.original, &fail.inputs, &NoIndex, InterpConfig::default()).map_err(|err| err.to_string())?;
    ensure!(replayed.verdict == Verdict::AssertionFailure, "replay on the original program: {:?}", replayed.verdict);
    for policy in [OpaquePolicy::Abandon, OpaquePolicy::Concretize] {
        let t = Instant::now();
        let b = run_baseline(&e.program, policy, &ecfg).map_err(|err| err.to_string())?;
        ensure!(b.count(Verdict::AssertionFailure) == 0, "{} found the bug", b.mode);
        within(t, Duration::from_secs(60))?;
    }
    Ok(format!("pc [{}], replay fails the assertion, baselines report none", fail.pc.join(", ")))
}

fn c8_relevant_rows() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let src = r#"int main() { str S1; make_symbolic(S1); if (strstr(S1, "bar")) { return 1; } return 0; }"#;
    let program = indexify::lang::parse(src).map_err(|e| e.to_string())?;
    let mut sizes = Vec::new();
    for n in [4usize, 5, 9, 17, 33] {
        // "bar" at index 2, random fillers elsewhere.
        let mut values: Vec<String> = vec!["foobar".into(), "oobar".into(), "bar".into(), "oo".into()];
        while values.len() < n {
            let len = rng.gen_range(0..=5);
            let s: String = (0..len).map(|_| *['a', 'b', 'r', 'o', 'f'].choose(&mut rng).unwrap()).collect();
            if !values.contains(&s) {
                values.push(s);
            }
        }
        let text: String = values.iter().enumerate().map(|(i, v)| format!("{i}\tstr\t{v}\n")).collect();
        let g = Gardens::parse(&text).map_err(|e| e.to_string())?;
        let table = memoise(&g, &Operator::builtin("strstr").unwrap(), &[]).map_err(|e| e.to_string())?;
        let cands = iot_candidates(&table, &[Pos::Sym(0), Pos::Fixed(IndexVal::At(2))], &|_| n as u32, &|_| BTreeSet::new(), false);
        let rows_with_2 = table.rows().filter(|(t, _)| t[1] == 2).count();
        ensure!(rows_with_2 == n, "table has {rows_with_2} rows with second argument 2");
        ensure!(cands.len() == n + 1, "n = {n}: {} candidates", cands.len());
        ensure!(cands.iter().filter(|(_, c)| c.is_none()).count() == 1, "n = {n}: not exactly one bottom candidate");

        let cfg = IndexConfig {
            garden: Some(g.clone()),
            fplus: Some(vec!["strstr".into()]),
            ..IndexConfig::default()
        };
        let (_, r) = run_indexed(&program, &cfg, &ExploreConfig::default()).map_err(|e| e.to_string())?;
        ensure!(r.successors_created == n + 1, "n = {n}: explorer created {} successors", r.successors_created);
        ensure!(r.successors_created < n * n || n < 2, "n = {n}: quadratic successors");
        sizes.push(format!("n={n}: {}", r.successors_created));
    }
    Ok(sizes.join(", "))
}

struct CorpusRun {
    name: String,
    category: Category,
    ix: Indexation,
    reports: Vec<indexify::symex::ExplorationReport>,
}

fn run_all(entries: &[CorpusEntry]) -> Result<Vec<CorpusRun>, String> {
    let ecfg = ExploreConfig::default();
    entries
        .iter()
        .map(|e| {
            let (ix, r) = run_indexed(&e.program, &e.config, &ecfg).map_err(|err| format!("{}: {err}", e.name))?;
            let a = run_baseline(&e.program, OpaquePolicy::Abandon, &ecfg).map_err(|err| err.to_string())?;
            let c = run_baseline(&e.program, OpaquePolicy::Concretize, &ecfg).map_err(|err| err.to_string())?;
            Ok(CorpusRun { name: e.name.clone(), category: e.category, ix, reports: vec![r, a, c] })
        })
        .collect()
}

fn c9_coverage(runs: &[CorpusRun]) -> Outcome {
    let mut lines = Vec::new();
    for r in runs {
        let (i, a) = (&r.reports[0], &r.reports[1]);
        match r.category {
            Category::StringHeavy => {
                ensure!(i.bcov() > a.bcov(), "{}: indexed {:.1}% vs abandon {:.1}%", r.name, i.bcov(), a.bcov());
                lines.push(format!("{} {:.0}>{:.0}", r.name, i.bcov(), a.bcov()));
            }
            Category::Control => {
                ensure!(
                    i.branches == a.branches && i.bcov() == r.reports[2].bcov(),
                    "{}: control coverage differs",
                    r.name
                );
                lines.push(format!("{} {:.0}={:.0}", r.name, i.bcov(), a.bcov()));
            }
            _ => {}
        }
    }
    Ok(lines.join(", "))
}

fn c10_replay(runs: &[CorpusRun]) -> Outcome {
    let icfg = InterpConfig::default();
    let mut total = 0;
    for r in runs {
        let rt = r.ix.runtime();
        for rep in &r.reports {
            for tc in &rep.test_cases {
                let out = if rep.mode == "indexed" {
                    interpret(&r.ix.indexed, &tc.inputs, &rt, icfg)
                } else {
                    interpret(&r.ix.original, &tc.inputs, &NoIndex, icfg)
                }
                .map_err(|e| format!("{} {}: {e}", r.name, rep.mode))?;
                ensure!(
                    out.verdict == tc.verdict && out.branches == tc.branches,
                    "{} {} path {}: replayed {:?}, recorded {:?}",
                    r.name,
                    rep.mode,
                    tc.path_id,
                    out.verdict,
                    tc.verdict
                );
                total += 1;
            }
        }
    }
    ensure!(total > 0, "no test cases");
    Ok(format!("{total}/{total} test cases replay"))
}

fn main() {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let corpus = corpus();
    let runs = std::cell::OnceCell::new();
    let with_corpus = |f: &dyn Fn(&[CorpusEntry]) -> Outcome| -> Outcome {
        match &corpus {
            Ok(c) => f(c),
            Err(e) => Err(e.clone()),
        }
    };
    let with_runs = |f: &dyn Fn(&[CorpusRun]) -> Outcome| -> Outcome {
        let r = runs.get_or_init(|| corpus.as_ref().map_err(Clone::clone).and_then(|c| run_all(c)));
        match r {
            Ok(r) => f(r),
            Err(e) => Err(e.clone()),
        }
    };
    let criteria: Vec<Criterion> = vec![
        ("1 garden golden set", Box::new(c1_garden_golden)),
        ("2 memoization oracle", Box::new(c2_memoization_oracle)),
        ("3 pinned strstr rows", Box::new(c3_pinned_rows)),
        ("4 confluence fuzz", Box::new(|| with_corpus(&c4_confluence))),
        ("5 homomorphism differential", Box::new(|| with_corpus(&c5_homomorphism))),
        ("6 solver oracle", Box::new(c6_solver_oracle)),
        ("7 vendor prefix bug end to end", Box::new(|| with_corpus(&c7_vendor_bug))),
        ("8 relevant-row successors", Box::new(c8_relevant_rows)),
        ("9 coverage direction", Box::new(|| with_runs(&c9_coverage))),
        ("10 test replay soundness", Box::new(|| with_runs(&c10_replay))),
    ];
    let mut failed = 0;
    for (name, f) in &criteria {
        if filter.as_ref().is_some_and(|flt| !name.contains(flt.as_str())) {
            continue;
        }
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match out {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
