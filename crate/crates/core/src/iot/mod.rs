//! Indexed operator tables: complete memoizations of an operator over the
//! gardens, looked up by index tuple.

pub mod builtins;

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::garden::{for_each_tuple, hex16, Gardens};
use crate::lang::{indexed_name, IndexRuntime, IndexVal, Indexable, Signature, TypeTag, Value};

type EvalBox = Arc<dyn Fn(&[Value]) -> Result<Value, String> + Send + Sync>;

/// An operator with concrete semantics: a builder or a member of F₊.
#[derive(Clone)]
pub struct Operator {
    pub sig: Signature,
    eval: EvalBox,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Operator").field("sig", &self.sig).finish()
    }
}

impl Operator {
    pub fn new(sig: Signature, eval: impl Fn(&[Value]) -> Result<Value, String> + Send + Sync + 'static) -> Self {
        Operator { sig, eval: Arc::new(eval) }
    }

    pub fn builtin(name: &str) -> Option<Operator> {
        let b = builtins::builtin(name)?;
        let sig = Signature::new(b.name, b.params.to_vec(), b.ret);
        let f = b.eval;
        Some(Operator::new(sig, move |args| f(args).map_err(|e| e.to_string())))
    }

    pub fn eval(&self, args: &[Value]) -> Result<Value, String> {
        (self.eval)(args)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IotError {
    #[error("table line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("table for `{op}` was built on garden {expected}, current garden is {found}")]
    GardenMismatch { op: String, expected: String, found: String },
    #[error("`{op}`: {message}")]
    Unsupported { op: String, message: String },
}

/// One argument position of a table.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    /// Ranges over the whole garden of the type.
    Indexed(Indexable),
    /// Ranges over a fixed list of raw values; tuple entries are positions in
    /// that list.
    Raw(Vec<Value>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResultKind {
    Indexed(Indexable),
    Raw(TypeTag),
}

impl fmt::Display for ResultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResultKind::Indexed(t) => write!(f, "index:{t}"),
            ResultKind::Raw(t) => write!(f, "raw:{t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResultCell {
    Index(u32),
    Raw(RawCell),
    Bot,
}

/// Raw result wrapper with a total order (ints numerically, others by text).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RawCell(pub Value);

impl PartialOrd for RawCell {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RawCell {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (&self.0, &other.0) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Float(a), Value::Float(b)) => a.total_cmp(b),
            (a, b) => a.to_typed().cmp(&b.to_typed()),
        }
    }
}

impl ResultCell {
    pub fn is_bot(&self) -> bool {
        matches!(self, ResultCell::Bot)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// The original operator name; the table implements `i_<op>`.
    pub op: String,
    pub columns: Vec<Column>,
    pub result: ResultKind,
    radices: Vec<usize>,
    rows: Vec<ResultCell>,
    garden_hash: String,
    /// Tuples whose evaluation failed and were stored as ⊥.
    pub eval_failures: usize,
}

impl Table {
    pub fn name(&self) -> String {
        indexed_name(&self.op)
    }

    pub fn arity(&self) -> usize {
        self.columns.len()
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn garden_hash(&self) -> &str {
        &self.garden_hash
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    /// Dense row number of a tuple; `None` when any entry is out of range.
    pub fn row_index(&self, tuple: &[u32]) -> Option<usize> {
        if tuple.len() != self.radices.len() {
            return None;
        }
        let mut r = 0usize;
        for (t, radix) in tuple.iter().zip(&self.radices) {
            let t = *t as usize;
            if t >= *radix {
                return None;
            }
            r = r * radix + t;
        }
        Some(r)
    }

    pub fn tuple_of(&self, mut row: usize) -> Vec<u32> {
        let mut t = vec![0u32; self.radices.len()];
        for (slot, radix) in t.iter_mut().zip(&self.radices).rev() {
            *slot = (row % radix) as u32;
            row /= radix;
        }
        t
    }

    pub fn cell(&self, row: usize) -> &ResultCell {
        &self.rows[row]
    }

    /// Stored cell for a tuple of positions; ⊥ for any ⊥ or out-of-range entry.
    pub fn lookup(&self, tuple: &[IndexVal]) -> ResultCell {
        let mut pos = Vec::with_capacity(tuple.len());
        for t in tuple {
            match t {
                IndexVal::At(i) => pos.push(*i),
                IndexVal::Bot => return ResultCell::Bot,
            }
        }
        self.row_index(&pos).map_or(ResultCell::Bot, |r| self.rows[r].clone())
    }

    /// Position of a concrete argument in its column, or ⊥.
    pub fn position(&self, col: usize, arg: &Value) -> IndexVal {
        match (&self.columns[col], arg) {
            (Column::Indexed(t), Value::Index(u, i)) if t == u => *i,
            (Column::Raw(dom), v) => dom
                .iter()
                .position(|d| d == v)
                .map_or(IndexVal::Bot, |p| IndexVal::At(p as u32)),
            _ => IndexVal::Bot,
        }
    }

    /// Looks up concrete arguments (index values and raw values).
    pub fn lookup_values(&self, args: &[Value]) -> ResultCell {
        if args.len() != self.arity() {
            return ResultCell::Bot;
        }
        let pos: Vec<IndexVal> = args.iter().enumerate().map(|(c, a)| self.position(c, a)).collect();
        self.lookup(&pos)
    }

    /// The cell as a runtime value; `None` is the ⊥ marker of a raw table.
    pub fn cell_value(&self, c: &ResultCell) -> Option<Value> {
        match (c, self.result) {
            (ResultCell::Index(i), ResultKind::Indexed(t)) => Some(Value::Index(t, IndexVal::At(*i))),
            (ResultCell::Bot, ResultKind::Indexed(t)) => Some(Value::Index(t, IndexVal::Bot)),
            (ResultCell::Raw(v), ResultKind::Raw(_)) => Some(v.0.clone()),
            _ => None,
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = (Vec<u32>, &ResultCell)> + '_ {
        self.rows.iter().enumerate().map(|(r, c)| (self.tuple_of(r), c))
    }

    fn column_token(&self, col: usize, pos: u32) -> String {
        match &self.columns[col] {
            Column::Indexed(_) => pos.to_string(),
            Column::Raw(dom) => dom[pos as usize].to_typed(),
        }
    }

    /// Text form: a header line, then `<args> -> <result|BOT>` per row.
    pub fn serialize(&self) -> String {
        let mut out = format!("iot {} {} {} garden:{}\n", self.op, self.arity(), self.result, self.garden_hash);
        for (r, cell) in self.rows.iter().enumerate() {
            let tuple = self.tuple_of(r);
            let args: Vec<String> = tuple.iter().enumerate().map(|(c, p)| self.column_token(c, *p)).collect();
            let res = match cell {
                ResultCell::Index(i) => i.to_string(),
                ResultCell::Raw(v) => v.0.to_typed(),
                ResultCell::Bot => "BOT".into(),
            };
            let _ = writeln!(out, "{} -> {res}", args.join(" "));
        }
        out
    }

    /// The table as the chain of conditionals an indexed operator compiles to.
    pub fn to_if_chain(&self) -> String {
        let params: Vec<String> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| match c {
                Column::Indexed(t) => format!("idx<{t}> a{i}"),
                Column::Raw(d) => format!("{} a{i}", d.first().map_or(TypeTag::Int, Value::type_tag)),
            })
            .collect();
        let ret = match self.result {
            ResultKind::Indexed(t) => format!("idx<{t}>"),
            ResultKind::Raw(t) => t.to_string(),
        };
        let mut out = format!("{ret} {}({}) {{\n", self.name(), params.join(", "));
        for (r, cell) in self.rows.iter().enumerate() {
            if cell.is_bot() {
                continue;
            }
            let conds: Vec<String> = self
                .tuple_of(r)
                .iter()
                .enumerate()
                .map(|(c, p)| match &self.columns[c] {
                    Column::Indexed(_) => format!("a{c} == {p}"),
                    Column::Raw(d) => format!("a{c} == {}", d[*p as usize]),
                })
                .collect();
            let res = match cell {
                ResultCell::Index(i) => i.to_string(),
                ResultCell::Raw(v) => v.0.to_string(),
                ResultCell::Bot => unreachable!(),
            };
            let _ = writeln!(out, "    if ({}) return {res};", conds.join(" && "));
        }
        out.push_str("    return bot;\n}\n");
        out
    }
}

/// Hash of everything a table's rows depend on: the gardens of its indexed
/// columns and result, and its raw domains.
fn domain_hash(gardens: &Gardens, columns: &[Column], result: ResultKind) -> String {
    let mut h = Sha256::new();
    let garden = |h: &mut Sha256, t: Indexable| {
        h.update(b"garden:");
        h.update(gardens.get(t).map(Gardens::hash_of).unwrap_or_default().as_bytes());
    };
    for c in columns {
        match c {
            Column::Indexed(t) => garden(&mut h, *t),
            Column::Raw(d) => {
                h.update(b"raw:");
                for v in d {
                    h.update(v.to_typed().as_bytes());
                    h.update(b",");
                }
            }
        }
        h.update(b";");
    }
    match result {
        ResultKind::Indexed(t) => garden(&mut h, t),
        ResultKind::Raw(t) => h.update(format!("raw:{t}").as_bytes()),
    }
    hex16(&h.finalize())
}

/// Column layout of an operator over the gardens: parameters whose type has
/// a garden are indexed, `int` parameters range over `ints`.
pub fn layout(gardens: &Gardens, sig: &Signature, ints: &[i64]) -> Result<(Vec<Column>, ResultKind), IotError> {
    let unsupported = |message: String| IotError::Unsupported { op: sig.name.clone(), message };
    if sig.params.is_empty() {
        return Err(unsupported("nullary operators are not indexed".into()));
    }
    let mut cols = Vec::new();
    for t in &sig.params {
        match t.indexable().filter(|b| gardens.get(*b).is_some()) {
            Some(b) => cols.push(Column::Indexed(b)),
            None if *t == TypeTag::Int => cols.push(Column::Raw(ints.iter().map(|i| Value::Int(*i)).collect())),
            None if *t == TypeTag::Bool => cols.push(Column::Raw(vec![Value::Bool(false), Value::Bool(true)])),
            None => return Err(unsupported(format!("parameter type {t} has neither a garden nor a raw domain"))),
        }
    }
    if !cols.iter().any(|c| matches!(c, Column::Indexed(_))) {
        return Err(unsupported("no parameter of an indexed type".into()));
    }
    let result = match sig.ret.indexable().filter(|b| gardens.get(*b).is_some()) {
        Some(b) => ResultKind::Indexed(b),
        None => ResultKind::Raw(sig.ret),
    };
    Ok((cols, result))
}

/// Builds the complete table of `f`: every tuple over the gardens maps to
/// δ⊥(f(values)) for indexed results, or to f(values) for raw ones.
pub fn memoise(gardens: &Gardens, f: &Operator, ints: &[i64]) -> Result<Table, IotError> {
    let (columns, result) = layout(gardens, &f.sig, ints)?;
    let values: Vec<Vec<Value>> = columns
        .iter()
        .map(|c| match c {
            Column::Indexed(t) => gardens.get(*t).expect("layout checked").values().to_vec(),
            Column::Raw(d) => d.clone(),
        })
        .collect();
    let radices: Vec<usize> = values.iter().map(Vec::len).collect();
    let mut rows = Vec::with_capacity(radices.iter().product());
    let mut failures = 0;
    for_each_tuple(&values, |args| {
        let cell = match f.eval(args) {
            Ok(v) => match result {
                ResultKind::Indexed(t) => match gardens.get(t).expect("layout checked").delta_bot(&v) {
                    IndexVal::At(i) => ResultCell::Index(i),
                    IndexVal::Bot => ResultCell::Bot,
                },
                ResultKind::Raw(_) => ResultCell::Raw(RawCell(v)),
            },
            Err(_) => {
                failures += 1;
                ResultCell::Bot
            }
        };
        rows.push(cell);
    });
    let garden_hash = domain_hash(gardens, &columns, result);
    Ok(Table { op: f.sig.name.clone(), columns, result, radices, rows, garden_hash, eval_failures: failures })
}

/// Parses one or more concatenated tables. Column kinds come from the builtin
/// registry, raw domains from the rows, and the recorded hash must match the
/// given gardens.
pub fn parse_tables(text: &str, gardens: &Gardens) -> Result<Vec<Table>, IotError> {
    let mut out = Vec::new();
    let lines: Vec<&str> = text.lines().collect();
    let mut i = 0;
    while i < lines.len() {
        if lines[i].trim().is_empty() {
            i += 1;
            continue;
        }
        let start = i;
        i += 1;
        while i < lines.len() && !lines[i].starts_with("iot ") {
            i += 1;
        }
        out.push(parse_one(&lines[start..i], start, gardens)?);
    }
    Ok(out)
}

fn parse_one(lines: &[&str], offset: usize, gardens: &Gardens) -> Result<Table, IotError> {
    let err = |line: usize, message: String| IotError::Parse { line: offset + line + 1, message };
    let head: Vec<&str> = lines[0].split_whitespace().collect();
    let [tag, op, arity, kind, hash] = head.as_slice() else {
        return Err(err(0, "expected `iot <op> <arity> <resultKind> garden:<hash>`".into()));
    };
    if *tag != "iot" {
        return Err(err(0, format!("expected `iot`, found `{tag}`")));
    }
    let arity: usize = arity.parse().map_err(|_| err(0, format!("bad arity `{arity}`")))?;
    let hash = hash.strip_prefix("garden:").ok_or_else(|| err(0, "missing garden hash".into()))?;
    let b = builtins::builtin(op).ok_or_else(|| err(0, format!("unknown operator `{op}`")))?;
    if b.params.len() != arity {
        return Err(err(0, format!("`{op}` has arity {}, header says {arity}", b.params.len())));
    }
    let sig = Signature::new(b.name, b.params.to_vec(), b.ret);
    // Raw domains are recovered from the rows in order of first appearance.
    let mut raw_domains: BTreeMap<usize, Vec<Value>> = BTreeMap::new();
    let mut parsed_rows = Vec::new();
    for (n, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let (lhs, rhs) = line.split_once("->").ok_or_else(|| err(n, "expected `->`".into()))?;
        let toks: Vec<&str> = lhs.split_whitespace().collect();
        if toks.len() != arity {
            return Err(err(n, format!("expected {arity} arguments")));
        }
        let mut tuple = Vec::new();
        for (c, t) in toks.iter().enumerate() {
            if t.contains(':') {
                let v = Value::parse_typed(t).map_err(|m| err(n, m))?;
                let dom = raw_domains.entry(c).or_default();
                let p = dom.iter().position(|d| *d == v).unwrap_or_else(|| {
                    dom.push(v);
                    dom.len() - 1
                });
                tuple.push(p as u32);
            } else {
                tuple.push(t.parse::<u32>().map_err(|_| err(n, format!("bad index `{t}`")))?);
            }
        }
        let rhs = rhs.trim();
        let cell = if rhs == "BOT" {
            ResultCell::Bot
        } else if rhs.contains(':') {
            ResultCell::Raw(RawCell(Value::parse_typed(rhs).map_err(|m| err(n, m))?))
        } else {
            ResultCell::Index(rhs.parse().map_err(|_| err(n, format!("bad result `{rhs}`")))?)
        };
        parsed_rows.push((n, tuple, cell));
    }
    let ints: Vec<i64> = raw_domains
        .values()
        .next()
        .map(|d| d.iter().filter_map(Value::as_int).collect())
        .unwrap_or_default();
    let (mut columns, result) = layout(gardens, &sig, &ints).map_err(|e| err(0, e.to_string()))?;
    for (c, col) in columns.iter_mut().enumerate() {
        if let Column::Raw(d) = col {
            *d = raw_domains.get(&c).cloned().unwrap_or_default();
        }
    }
    if result.to_string() != *kind {
        return Err(err(0, format!("result kind `{kind}` does not match `{result}`")));
    }
    let found = domain_hash(gardens, &columns, result);
    if found != hash {
        return Err(IotError::GardenMismatch { op: op.to_string(), expected: hash.to_string(), found });
    }
    let radices: Vec<usize> = columns
        .iter()
        .map(|c| match c {
            Column::Indexed(t) => gardens.get(*t).map_or(0, |m| m.len()),
            Column::Raw(d) => d.len(),
        })
        .collect();
    let total: usize = radices.iter().product();
    let mut table = Table {
        op: op.to_string(),
        columns,
        result,
        radices,
        rows: vec![ResultCell::Bot; total],
        garden_hash: hash.to_string(),
        eval_failures: 0,
    };
    let mut seen = vec![false; total];
    for (n, tuple, cell) in parsed_rows {
        let r = table.row_index(&tuple).ok_or_else(|| err(n, "tuple outside the garden".into()))?;
        if std::mem::replace(&mut seen[r], true) {
            return Err(err(n, "duplicate row".into()));
        }
        if let (ResultCell::Index(i), ResultKind::Indexed(t)) = (&cell, result) {
            if *i as usize >= gardens.get(t).map_or(0, |m| m.len()) {
                return Err(err(n, format!("result index {i} outside the garden")));
            }
        }
        table.rows[r] = cell;
    }
    if seen.iter().any(|s| !s) {
        return Err(err(0, format!("table `{op}` is incomplete")));
    }
    Ok(table)
}

/// Concrete runtime for rewritten programs: gardens plus tables by indexed name.
pub struct TableRuntime<'a> {
    pub gardens: &'a Gardens,
    tables: BTreeMap<String, &'a Table>,
}

impl<'a> TableRuntime<'a> {
    pub fn new(gardens: &'a Gardens, tables: impl IntoIterator<Item = &'a Table>) -> Self {
        TableRuntime { gardens, tables: tables.into_iter().map(|t| (t.name(), t)).collect() }
    }

    pub fn table(&self, name: &str) -> Option<&'a Table> {
        self.tables.get(name).copied()
    }
}

impl IndexRuntime for TableRuntime<'_> {
    fn delta(&self, t: Indexable, v: &Value) -> IndexVal {
        self.gardens.get(t).map_or(IndexVal::Bot, |m| m.delta_bot(v))
    }

    fn delta_inv(&self, t: Indexable, i: u32) -> Option<Value> {
        self.gardens.get(t)?.delta_inv(IndexVal::At(i)).ok().cloned()
    }

    fn call_indexed(&self, name: &str, args: &[Value]) -> Result<Option<Value>, String> {
        let t = self.table(name).ok_or_else(|| format!("no table for `{name}`"))?;
        Ok(t.cell_value(&t.lookup_values(args)))
    }
}
