//! Gardens: finite value sets grown from seeds by bounded builder application,
//! each with its value ↔ index bijection.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::iot::Operator;
use crate::lang::{
    escape_bytes, format_float, parse_float, unescape_bytes, IndexVal, Indexable, IndexedTypes, Program,
    TypeTag, Value,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GardenError {
    #[error("garden file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("builder `{0}`: {1}")]
    Builder(String, String),
    #[error("index {index} outside the {ty} garden of size {size}")]
    OutOfRange { ty: Indexable, index: u32, size: usize },
    #[error("escaped the garden: delta_inv of bot")]
    Escaped,
}

/// δ₀ for one indexed type: a dense bijection between garden values and
/// `0..len`. ⊥ is never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexMap {
    ty: Indexable,
    values: Vec<Value>,
    index: HashMap<Value, u32>,
    generation: Vec<u32>,
}

impl IndexMap {
    pub fn new(ty: Indexable) -> Self {
        IndexMap { ty, values: Vec::new(), index: HashMap::new(), generation: Vec::new() }
    }

    pub fn ty(&self) -> Indexable {
        self.ty
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.index.contains_key(v)
    }

    /// Round in which the value at `i` was admitted (0 for seeds).
    pub fn generation_of(&self, i: u32) -> Option<u32> {
        self.generation.get(i as usize).copied()
    }

    /// Admits `v` under the next index unless already present.
    pub fn insert(&mut self, v: Value, generation: u32) -> Option<u32> {
        assert_eq!(v.type_tag(), self.ty.tag(), "value {v} in the {} garden", self.ty);
        let v = match v {
            Value::Float(f) => Value::float(f),
            other => other,
        };
        if self.index.contains_key(&v) {
            return None;
        }
        let i = u32::try_from(self.values.len()).expect("garden exceeds u32 indices");
        self.index.insert(v.clone(), i);
        self.values.push(v);
        self.generation.push(generation);
        Some(i)
    }

    /// δ⊥: index of `v`, ⊥ outside the garden.
    pub fn delta_bot(&self, v: &Value) -> IndexVal {
        let key;
        let v = match v {
            Value::Float(f) if f.is_nan() => {
                key = Value::float(*f);
                &key
            }
            _ => v,
        };
        self.index.get(v).map_or(IndexVal::Bot, |i| IndexVal::At(*i))
    }

    /// δ⊥⁻¹. ⊥ signals an escape; an index past the end is an invariant
    /// violation.
    pub fn delta_inv(&self, i: IndexVal) -> Result<&Value, GardenError> {
        match i {
            IndexVal::Bot => Err(GardenError::Escaped),
            IndexVal::At(k) => self.values.get(k as usize).ok_or(GardenError::OutOfRange {
                ty: self.ty,
                index: k,
                size: self.values.len(),
            }),
        }
    }

    /// Index of the value that is falsy as a condition (`""`, `0.0`, `-0.0`).
    pub fn falsy_indices(&self) -> Vec<u32> {
        (0..self.values.len() as u32)
            .filter(|i| self.values[*i as usize].truthy() == Some(false))
            .collect()
    }
}

/// One garden per indexed type.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Gardens {
    maps: BTreeMap<Indexable, IndexMap>,
}

impl Gardens {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, t: Indexable) -> Option<&IndexMap> {
        self.maps.get(&t)
    }

    pub fn get_mut(&mut self, t: Indexable) -> Option<&mut IndexMap> {
        self.maps.get_mut(&t)
    }

    pub fn insert(&mut self, m: IndexMap) {
        self.maps.insert(m.ty, m);
    }

    pub fn iter(&self) -> impl Iterator<Item = &IndexMap> {
        self.maps.values()
    }

    pub fn types(&self) -> IndexedTypes {
        let mut t = IndexedTypes::NONE;
        for k in self.maps.keys() {
            match k {
                Indexable::Str => t.str = true,
                Indexable::Float => t.float = true,
            }
        }
        t
    }

    pub fn total_len(&self) -> usize {
        self.maps.values().map(IndexMap::len).sum()
    }

    /// Garden file text: `<index>\t<type>\t<escaped literal>` per line.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for m in self.maps.values() {
            for (i, v) in m.values.iter().enumerate() {
                let _ = writeln!(out, "{i}\t{}\t{}", m.ty, literal_text(v));
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Gardens, GardenError> {
        let mut entries: BTreeMap<Indexable, BTreeMap<u32, Value>> = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let err = |message: String| GardenError::Parse { line: n + 1, message };
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.splitn(3, '\t');
            let (Some(idx), Some(ty), Some(lit)) = (parts.next(), parts.next(), parts.next()) else {
                return Err(err("expected `<index>\\t<type>\\t<literal>`".into()));
            };
            let idx: u32 = idx.trim().parse().map_err(|_| err(format!("bad index `{idx}`")))?;
            let ty = match ty.trim() {
                "str" | "string" => Indexable::Str,
                "float" => Indexable::Float,
                other => return Err(err(format!("unknown type name `{other}`"))),
            };
            let v = parse_literal(ty, lit).map_err(err)?;
            if entries.entry(ty).or_default().insert(idx, v).is_some() {
                return Err(err(format!("index {idx} assigned twice")));
            }
        }
        let mut g = Gardens::new();
        for (ty, rows) in entries {
            let mut m = IndexMap::new(ty);
            for (expect, (idx, v)) in rows.into_iter().enumerate() {
                if idx as usize != expect {
                    return Err(GardenError::Parse {
                        line: 0,
                        message: format!("{ty} indices are not dense: missing {expect}"),
                    });
                }
                if m.insert(v.clone(), 0).is_none() {
                    return Err(GardenError::Parse { line: 0, message: format!("duplicate value {v}") });
                }
            }
            g.insert(m);
        }
        Ok(g)
    }

    /// Short content hash binding tables to the garden they were built on.
    pub fn hash_of(m: &IndexMap) -> String {
        let mut h = Sha256::new();
        h.update(m.ty.name().as_bytes());
        for v in &m.values {
            h.update(b"\n");
            h.update(literal_text(v).as_bytes());
        }
        hex16(&h.finalize())
    }
}

pub(crate) fn hex16(bytes: &[u8]) -> String {
    bytes[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn literal_text(v: &Value) -> String {
    match v {
        Value::Str(s) => escape_bytes(s, false),
        Value::Float(f) => format_float(*f),
        other => other.to_string(),
    }
}

fn parse_literal(ty: Indexable, text: &str) -> Result<Value, String> {
    match ty {
        Indexable::Str => unescape_bytes(text).map(Value::Str),
        Indexable::Float => parse_float(text).map(Value::float).ok_or_else(|| format!("bad float `{text}`")),
    }
}

/// Ordered, duplicate-free seed values per indexed type.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SeedSet {
    buckets: BTreeMap<Indexable, Vec<Value>>,
}

impl SeedSet {
    pub fn new(types: IndexedTypes) -> Self {
        let mut s = SeedSet::default();
        for t in types.iter() {
            s.buckets.insert(t, Vec::new());
            if t == Indexable::Str {
                s.push(Value::str(""));
            }
        }
        s
    }

    /// Adds `v` to its bucket if the bucket exists and lacks it.
    pub fn push(&mut self, v: Value) -> bool {
        let Some(t) = v.type_tag().indexable() else { return false };
        let Some(b) = self.buckets.get_mut(&t) else { return false };
        let v = match v {
            Value::Float(f) => Value::float(f),
            other => other,
        };
        if b.contains(&v) {
            return false;
        }
        b.push(v);
        true
    }

    pub fn bucket(&self, t: Indexable) -> &[Value] {
        self.buckets.get(&t).map_or(&[], Vec::as_slice)
    }

    pub fn types(&self) -> impl Iterator<Item = Indexable> + '_ {
        self.buckets.keys().copied()
    }

    /// Seeds file: one typed literal per line (`str:...`, `float:...`).
    /// Blank lines and `#` comments are skipped.
    pub fn extend_from_file_text(&mut self, text: &str) -> Result<(), GardenError> {
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let v = Value::parse_typed(line).map_err(|message| GardenError::Parse { line: n + 1, message })?;
            self.push(v);
        }
        Ok(())
    }
}

/// Constants of the indexed types in source order, after the forced empty
/// string.
pub fn harvest_seeds(p: &Program, types: IndexedTypes) -> SeedSet {
    let mut s = SeedSet::new(types);
    p.for_each_literal(&mut |v| {
        s.push(v.clone());
    });
    s
}

/// Raw integer domain for non-indexed builder and table parameters: the
/// program's int literals in source order, then `0..=max_len`.
pub fn raw_int_domain(p: &Program, max_len: usize) -> Vec<i64> {
    let mut out: Vec<i64> = Vec::new();
    p.for_each_literal(&mut |v| {
        if let Value::Int(i) = v {
            if !out.contains(i) {
                out.push(*i);
            }
        }
    });
    for i in 0..=max_len as i64 {
        if !out.contains(&i) {
            out.push(i);
        }
    }
    out
}

/// Program literals of indexed types that lie outside `g` (R5 sites).
pub fn literals_outside(p: &Program, g: &Gardens) -> Vec<Value> {
    let mut out = Vec::new();
    p.for_each_literal(&mut |v| {
        if let Some(m) = v.type_tag().indexable().and_then(|t| g.get(t)) {
            if !m.contains(v) {
                out.push(v.clone());
            }
        }
    });
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GardenMode {
    /// Apply the builders round by round.
    #[default]
    ProgramOps,
    /// Strings are all concatenations of at most `k` seeds; other types still
    /// use the builders.
    Kleene,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuilderConfig {
    pub k: u32,
    pub max_str_len: usize,
    pub mode: GardenMode,
    /// Values for raw `int` parameters of builders.
    pub int_domain: Vec<i64>,
}

impl Default for BuilderConfig {
    fn default() -> Self {
        BuilderConfig { k: 3, max_str_len: 8, mode: GardenMode::ProgramOps, int_domain: (0..=8).collect() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExtendStats {
    pub tuples: u64,
    pub added: u64,
    pub skipped: u64,
    pub too_long: u64,
}

/// Values of one argument column: a prefix of a garden or a raw domain.
fn column_values(
    g: &Gardens,
    ty: TypeTag,
    snapshot: &BTreeMap<Indexable, usize>,
    ints: &[i64],
) -> Result<Vec<Value>, String> {
    if let Some(t) = ty.indexable() {
        if let Some(m) = g.get(t) {
            let n = snapshot.get(&t).copied().unwrap_or(m.len());
            return Ok(m.values[..n].to_vec());
        }
    }
    match ty {
        TypeTag::Int => Ok(ints.iter().map(|i| Value::Int(*i)).collect()),
        TypeTag::Bool => Ok(vec![Value::Bool(false), Value::Bool(true)]),
        other => Err(format!("no garden or raw domain for parameter type {other}")),
    }
}

/// Applies `f` to every tuple over the snapshot (lexicographic order, first
/// argument most significant) and admits fresh, short-enough results.
pub fn extend(
    g: &mut Gardens,
    f: &Operator,
    cfg: &BuilderConfig,
    snapshot: &BTreeMap<Indexable, usize>,
    generation: u32,
) -> Result<ExtendStats, GardenError> {
    let ret = f
        .sig
        .ret
        .indexable()
        .filter(|t| g.get(*t).is_some())
        .ok_or_else(|| GardenError::Builder(f.sig.name.clone(), format!("returns {}, which has no garden", f.sig.ret)))?;
    let cols: Vec<Vec<Value>> = f
        .sig
        .params
        .iter()
        .map(|t| column_values(g, *t, snapshot, &cfg.int_domain))
        .collect::<Result<_, _>>()
        .map_err(|m| GardenError::Builder(f.sig.name.clone(), m))?;
    if f.sig.params.is_empty() {
        return Err(GardenError::Builder(f.sig.name.clone(), "builders must not be nullary".into()));
    }
    let mut stats = ExtendStats::default();
    for_each_tuple(&cols, |args| {
        stats.tuples += 1;
        match f.eval(args) {
            Ok(v) => {
                if matches!(&v, Value::Str(s) if s.len() > cfg.max_str_len) {
                    stats.too_long += 1;
                } else if v.type_tag() == ret.tag() {
                    if g.get_mut(ret).expect("checked").insert(v, generation).is_some() {
                        stats.added += 1;
                    }
                } else {
                    stats.skipped += 1;
                }
            }
            Err(_) => stats.skipped += 1,
        }
    });
    Ok(stats)
}

/// Visits every tuple of the Cartesian product in lexicographic order.
pub(crate) fn for_each_tuple(cols: &[Vec<Value>], mut f: impl FnMut(&[Value])) {
    if cols.iter().any(Vec::is_empty) {
        return;
    }
    let mut pos = vec![0usize; cols.len()];
    let mut args: Vec<Value> = cols.iter().map(|c| c[0].clone()).collect();
    loop {
        f(&args);
        let mut d = cols.len();
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            pos[d] += 1;
            if pos[d] < cols[d].len() {
                args[d] = cols[d][pos[d]].clone();
                break;
            }
            pos[d] = 0;
            args[d] = cols[d][0].clone();
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub rounds: u32,
    pub per_round: Vec<ExtendStats>,
}

/// Grows the gardens: seeds first in order, then round by round, builder by
/// builder, each round reading only values present when it began.
pub fn build_garden(
    seeds: &SeedSet,
    builders: &[Operator],
    cfg: &BuilderConfig,
) -> Result<(Gardens, BuildStats), GardenError> {
    let mut g = Gardens::new();
    for t in seeds.types() {
        let mut m = IndexMap::new(t);
        for v in seeds.bucket(t) {
            m.insert(v.clone(), 0);
        }
        g.insert(m);
    }
    let mut stats = BuildStats::default();
    if cfg.mode == GardenMode::Kleene {
        if let Some(m) = g.get_mut(Indexable::Str) {
            kleene(m, seeds.bucket(Indexable::Str), cfg);
        }
    }
    let builders: Vec<&Operator> = builders
        .iter()
        .filter(|b| cfg.mode == GardenMode::ProgramOps || b.sig.ret.indexable() != Some(Indexable::Str))
        .filter(|b| b.sig.ret.indexable().is_some_and(|t| g.get(t).is_some()))
        .collect();
    for round in 1..=cfg.k {
        let snapshot: BTreeMap<Indexable, usize> = g.iter().map(|m| (m.ty, m.len())).collect();
        let mut round_stats = ExtendStats::default();
        for b in &builders {
            let s = extend(&mut g, b, cfg, &snapshot, round)?;
            round_stats.tuples += s.tuples;
            round_stats.added += s.added;
            round_stats.skipped += s.skipped;
            round_stats.too_long += s.too_long;
        }
        stats.rounds = round;
        stats.per_round.push(round_stats);
        if round_stats.added == 0 {
            break;
        }
    }
    Ok((g, stats))
}

/// Concatenations of 2..=k non-empty seeds, shortest factor count first, each
/// count in lexicographic seed-tuple order.
fn kleene(m: &mut IndexMap, seeds: &[Value], cfg: &BuilderConfig) {
    let letters: Vec<&[u8]> = seeds.iter().filter_map(|v| v.as_str()).filter(|s| !s.is_empty()).collect();
    let mut layer: Vec<Vec<u8>> = letters.iter().map(|s| s.to_vec()).collect();
    for factors in 2..=cfg.k {
        let mut next = Vec::new();
        for w in &layer {
            for l in &letters {
                let mut word = w.clone();
                word.extend_from_slice(l);
                if word.len() <= cfg.max_str_len {
                    next.push(word);
                }
            }
        }
        for w in &next {
            m.insert(Value::Str(w.clone()), factors - 1);
        }
        layer = next;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrowthPrediction {
    /// The closed-form growth value under the all-results-fresh assumption
    /// (unordered argument selections).
    pub formula: u64,
    /// Number of distinct free terms of depth ≤ k (ordered argument tuples).
    pub free_terms: u64,
    pub overflow: bool,
}

fn binom(n: u64, k: u32, overflow: &mut bool) -> u64 {
    let k = u64::from(k);
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            *overflow = true;
            return u64::MAX;
        }
    }
    acc as u64
}

/// Predicted garden size when every builder application yields a fresh value.
pub fn predict_free_growth(seed_count: u64, arities: &[u32], k: u32) -> GrowthPrediction {
    let mut overflow = false;
    // g_j = g_{j-1} + Σ_f [C(g_{j-1}, a) − C(g_{j-2}, a)]
    let (mut prev, mut cur) = (0u64, seed_count);
    for _ in 0..k {
        let mut next = cur;
        for &a in arities {
            let fresh = binom(cur, a, &mut overflow).saturating_sub(binom(prev, a, &mut overflow));
            next = next.checked_add(fresh).unwrap_or_else(|| {
                overflow = true;
                u64::MAX
            });
        }
        prev = cur;
        cur = next;
    }
    // t_j = s + Σ_f t_{j-1}^a
    let mut t = seed_count;
    for _ in 0..k {
        let mut next = seed_count;
        for &a in arities {
            let p = t.checked_pow(a).unwrap_or_else(|| {
                overflow = true;
                u64::MAX
            });
            next = next.checked_add(p).unwrap_or_else(|| {
                overflow = true;
                u64::MAX
            });
        }
        t = next;
    }
    GrowthPrediction { formula: cur, free_terms: t, overflow }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iot::Operator;
    use crate::lang::parse;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn ops(names: &[&str]) -> Vec<Operator> {
        names.iter().map(|n| Operator::builtin(n).unwrap()).collect()
    }

    fn str_seeds(words: &[&str]) -> SeedSet {
        let mut s = SeedSet::new(IndexedTypes::STR);
        for w in words {
            s.push(Value::str(w));
        }
        s
    }

    fn set_of(m: &IndexMap) -> BTreeSet<Vec<u8>> {
        m.values().iter().map(|v| v.as_str().unwrap().to_vec()).collect()
    }

    #[test]
    fn strcat_round_adds_pairs() {
        let mut g = build_garden(&str_seeds(&["a", "b"]), &[], &BuilderConfig::default()).unwrap().0;
        let snap = g.iter().map(|m| (m.ty, m.len())).collect();
        let s = extend(&mut g, &Operator::builtin("strcat").unwrap(), &BuilderConfig::default(), &snap, 1).unwrap();
        assert_eq!(s.added, 4);
        assert_eq!(s.tuples, 9);
        let m = g.get(Indexable::Str).unwrap();
        let tail: Vec<_> = m.values()[3..].iter().map(|v| v.to_string()).collect();
        assert_eq!(tail, ["\"aa\"", "\"ab\"", "\"ba\"", "\"bb\""]);
    }

    #[test]
    fn empty_builders_and_k0_keep_seeds() {
        let cfg = BuilderConfig { k: 0, ..BuilderConfig::default() };
        let (g, _) = build_garden(&str_seeds(&["x", "y"]), &ops(&["strcat"]), &cfg).unwrap();
        assert_eq!(g.get(Indexable::Str).unwrap().len(), 3);
        let mut empty = Gardens::new();
        empty.insert(IndexMap::new(Indexable::Str));
        let s = extend(&mut empty, &Operator::builtin("strcat").unwrap(), &cfg, &BTreeMap::new(), 1).unwrap();
        assert_eq!(s.tuples, 0);
    }

    #[test]
    fn strstr_adds_suffix() {
        let mut g = Gardens::new();
        let mut m = IndexMap::new(Indexable::Str);
        m.insert(Value::str("foobar"), 0);
        m.insert(Value::str("oo"), 0);
        g.insert(m);
        let snap = g.iter().map(|m| (m.ty, m.len())).collect();
        extend(&mut g, &Operator::builtin("strstr").unwrap(), &BuilderConfig::default(), &snap, 1).unwrap();
        let m = g.get(Indexable::Str).unwrap();
        assert!(m.contains(&Value::str("oobar")));
        assert!(m.contains(&Value::str("")));
    }

    #[test]
    fn strstr_on_single_seed_adds_nothing_new() {
        let (g, _) = build_garden(&str_seeds(&["foobar"]), &ops(&["strstr"]), &BuilderConfig {
            k: 1,
            ..BuilderConfig::default()
        })
        .unwrap();
        assert_eq!(set_of(g.get(Indexable::Str).unwrap()), [b"".to_vec(), b"foobar".to_vec()].into());
    }

    #[test]
    fn kleene_with_two_factors() {
        let cfg = BuilderConfig { k: 2, mode: GardenMode::Kleene, ..BuilderConfig::default() };
        let (g, _) = build_garden(&str_seeds(&["a", "b"]), &ops(&["strcat", "strstr"]), &cfg).unwrap();
        let want: BTreeSet<Vec<u8>> = ["", "a", "b", "aa", "bb", "ab", "ba"].iter().map(|s| s.as_bytes().to_vec()).collect();
        assert_eq!(set_of(g.get(Indexable::Str).unwrap()), want);
    }

    #[test]
    fn harvest_is_source_ordered_with_forced_empty() {
        let p = parse(r#"int main(){ str s; make_symbolic(s); puts(s); str t = strcat("a", "foo"); if (strstr(s, "bar")) { return 1; } return strlen("a"); }"#).unwrap();
        let s = harvest_seeds(&p, IndexedTypes::STR);
        let got: Vec<String> = s.bucket(Indexable::Str).iter().map(|v| v.to_string()).collect();
        assert_eq!(got, ["\"\"", "\"a\"", "\"foo\"", "\"bar\""]);
        let none = harvest_seeds(&parse("int main(){ return 1; }").unwrap(), IndexedTypes::STR);
        assert_eq!(none.bucket(Indexable::Str), &[Value::str("")]);
    }

    #[test]
    fn delta_round_trip_and_bot() {
        let g = Gardens::parse("0\tstr\tfoobar\n1\tstr\toobar\n2\tstr\tbar\n3\tstr\too\n").unwrap();
        let m = g.get(Indexable::Str).unwrap();
        assert_eq!(m.delta_bot(&Value::str("bar")), IndexVal::At(2));
        assert_eq!(m.delta_bot(&Value::str("oobar")), IndexVal::At(1));
        assert_eq!(m.delta_bot(&Value::str("zzz")), IndexVal::Bot);
        assert_eq!(m.delta_inv(IndexVal::At(2)).unwrap(), &Value::str("bar"));
        assert_eq!(m.delta_inv(IndexVal::Bot), Err(GardenError::Escaped));
        assert!(matches!(m.delta_inv(IndexVal::At(4)), Err(GardenError::OutOfRange { .. })));
    }

    #[test]
    fn garden_file_rejects_bad_input() {
        assert!(Gardens::parse("0\tstring\ta\n1\tstr\ta\n").is_err());
        assert!(Gardens::parse("0\tstr\ta\n2\tstr\tb\n").is_err());
        assert!(Gardens::parse("0\tchar\ta\n").is_err());
        let g = Gardens::parse("1\tfloat\tnan\n0\tfloat\t-0.0\n").unwrap();
        assert_eq!(g.get(Indexable::Float).unwrap().values()[1], Value::float(f64::NAN));
    }

    #[test]
    fn growth_prediction_small_cases() {
        assert_eq!(predict_free_growth(5, &[2], 0).free_terms, 5);
        assert_eq!(predict_free_growth(5, &[2], 0).formula, 5);
        assert_eq!(predict_free_growth(2, &[2], 1).free_terms, 6);
        assert_eq!(predict_free_growth(2, &[2], 2).free_terms, 38);
        assert!(predict_free_growth(1000, &[3, 3], 6).overflow);
    }

    /// Free terms as actual trees, to check the counting recurrence.
    #[test]
    fn free_terms_match_enumeration() {
        #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        enum T {
            Seed(u8),
            App(u8, Vec<T>),
        }
        for (s, arities, k) in [(2u64, vec![2u32], 2u32), (3, vec![1, 2], 2), (1, vec![2, 2], 3)] {
            let seeds: Vec<T> = (0..s as u8).map(T::Seed).collect();
            let mut layer: BTreeSet<T> = seeds.iter().cloned().collect();
            for _ in 0..k {
                let prev: Vec<T> = layer.iter().cloned().collect();
                let mut next: BTreeSet<T> = seeds.iter().cloned().collect();
                for (fi, a) in arities.iter().enumerate() {
                    let cols: Vec<Vec<Value>> =
                        (0..*a).map(|_| (0..prev.len() as i64).map(Value::Int).collect()).collect();
                    for_each_tuple(&cols, |tuple| {
                        let args = tuple.iter().map(|v| prev[v.as_int().unwrap() as usize].clone()).collect();
                        next.insert(T::App(fi as u8, args));
                    });
                }
                layer = next;
            }
            assert_eq!(predict_free_growth(s, &arities, k).free_terms, layer.len() as u64);
        }
    }

    proptest! {
        #[test]
        fn builds_are_monotone_deterministic_and_bijective(
            words in proptest::collection::vec("[ab]{1,3}", 1..4),
            k in 0u32..3,
        ) {
            let refs: Vec<&str> = words.iter().map(String::as_str).collect();
            let seeds = str_seeds(&refs);
            let builders = ops(&["strcat", "strstr", "substr"]);
            let cfg = |k| BuilderConfig { k, max_str_len: 4, int_domain: vec![0, 1, 2], ..BuilderConfig::default() };
            let (a, _) = build_garden(&seeds, &builders, &cfg(k)).unwrap();
            let (b, _) = build_garden(&seeds, &builders, &cfg(k)).unwrap();
            let (c, _) = build_garden(&seeds, &builders, &cfg(k + 1)).unwrap();
            prop_assert_eq!(a.serialize(), b.serialize());
            let (ma, mc) = (a.get(Indexable::Str).unwrap(), c.get(Indexable::Str).unwrap());
            prop_assert_eq!(&mc.values()[..ma.len()], ma.values());
            let distinct: BTreeSet<_> = ma.values().iter().map(|v| v.to_string()).collect();
            prop_assert_eq!(distinct.len(), ma.len());
            for (i, v) in ma.values().iter().enumerate() {
                prop_assert_eq!(ma.delta_bot(v), IndexVal::At(i as u32));
                prop_assert_eq!(ma.delta_inv(IndexVal::At(i as u32)).unwrap(), v);
            }
            prop_assert_eq!(Gardens::parse(&a.serialize()).unwrap().serialize(), a.serialize());
        }

        /// Every value of generation j is one builder application over
        /// values of generation < j.
        #[test]
        fn closure_bound_holds(words in proptest::collection::vec("[abc]{1,2}", 1..3), k in 1u32..3) {
            let refs: Vec<&str> = words.iter().map(String::as_str).collect();
            let builders = ops(&["strcat", "strstr"]);
            let cfg = BuilderConfig { k, max_str_len: 6, ..BuilderConfig::default() };
            let (g, _) = build_garden(&str_seeds(&refs), &builders, &cfg).unwrap();
            let m = g.get(Indexable::Str).unwrap();
            for i in 0..m.len() as u32 {
                let gen = m.generation_of(i).unwrap();
                prop_assert!(gen <= k);
                if gen == 0 {
                    continue;
                }
                let older: Vec<&Value> = (0..m.len() as u32)
                    .filter(|j| m.generation_of(*j).unwrap() < gen)
                    .map(|j| &m.values()[j as usize])
                    .collect();
                let target = &m.values()[i as usize];
                let found = builders.iter().any(|b| {
                    older.iter().any(|x| older.iter().any(|y| b.eval(&[(*x).clone(), (*y).clone()]).as_ref() == Ok(target)))
                });
                prop_assert!(found, "{} not reproducible", target);
            }
        }
    }
}
