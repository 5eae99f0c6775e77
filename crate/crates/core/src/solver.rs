//! Conjunctive equality logic over finite index domains.
//!
//! Variables range over `[0, size)` plus, optionally, ⊥. Equalities are merged
//! with union-find; the remaining classes are assigned by first-fit search in
//! ascending value order with ⊥ tried last, so the model returned is the
//! lexicographically smallest one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::{Duration, Instant};

use crate::lang::IndexVal;

pub type VarId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Domain {
    pub size: u32,
    pub bot: bool,
}

impl Domain {
    pub fn new(size: u32, bot: bool) -> Self {
        Domain { size, bot }
    }

    pub fn contains(&self, v: IndexVal) -> bool {
        match v {
            IndexVal::At(i) => i < self.size,
            IndexVal::Bot => self.bot,
        }
    }

    fn meet(self, o: Domain) -> Domain {
        Domain { size: self.size.min(o.size), bot: self.bot && o.bot }
    }

    /// Values in model-selection order.
    pub fn values(self) -> impl Iterator<Item = IndexVal> {
        (0..self.size).map(IndexVal::At).chain(self.bot.then_some(IndexVal::Bot))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    VarEqConst(VarId, IndexVal),
    VarNeqConst(VarId, IndexVal),
    VarEqVar(VarId, VarId),
    VarNeqVar(VarId, VarId),
}

impl Atom {
    pub fn holds(&self, m: &Model) -> bool {
        let v = |x: &VarId| m.get(x).copied();
        match self {
            Atom::VarEqConst(x, c) => v(x) == Some(*c),
            Atom::VarNeqConst(x, c) => v(x).is_some_and(|a| a != *c),
            Atom::VarEqVar(x, y) => v(x).is_some() && v(x) == v(y),
            Atom::VarNeqVar(x, y) => v(x).is_some() && v(y).is_some() && v(x) != v(y),
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> {
        let (a, b) = match *self {
            Atom::VarEqConst(x, _) | Atom::VarNeqConst(x, _) => (x, None),
            Atom::VarEqVar(x, y) | Atom::VarNeqVar(x, y) => (x, Some(y)),
        };
        std::iter::once(a).chain(b)
    }

    fn normalized(self) -> Atom {
        match self {
            Atom::VarEqVar(x, y) if y < x => Atom::VarEqVar(y, x),
            Atom::VarNeqVar(x, y) if y < x => Atom::VarNeqVar(y, x),
            a => a,
        }
    }
}

fn fmt_const(c: IndexVal) -> String {
    match c {
        IndexVal::At(i) => i.to_string(),
        IndexVal::Bot => "bot".to_string(),
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::VarEqConst(x, c) => write!(f, "v{x} = {}", fmt_const(*c)),
            Atom::VarNeqConst(x, c) => write!(f, "v{x} != {}", fmt_const(*c)),
            Atom::VarEqVar(x, y) => write!(f, "v{x} = v{y}"),
            Atom::VarNeqVar(x, y) => write!(f, "v{x} != v{y}"),
        }
    }
}

pub type Model = BTreeMap<VarId, IndexVal>;

/// A conjunction of atoms together with the domain of every variable.
/// Variables used in atoms but never declared have the empty domain.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PathCondition {
    pub domains: BTreeMap<VarId, Domain>,
    pub atoms: Vec<Atom>,
}

impl PathCondition {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, x: VarId, d: Domain) {
        self.domains.insert(x, d);
    }

    pub fn push(&mut self, a: Atom) {
        self.atoms.push(a);
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn domain(&self, x: VarId) -> Domain {
        self.domains.get(&x).copied().unwrap_or(Domain::new(0, false))
    }

    /// Whether `m` assigns every declared variable inside its domain and
    /// satisfies every atom.
    pub fn satisfied_by(&self, m: &Model) -> bool {
        self.domains.iter().all(|(x, d)| m.get(x).is_some_and(|v| d.contains(*v)))
            && self.atoms.iter().all(|a| a.holds(m))
    }

    /// The pin of `x` entailed by the equalities, if any.
    pub fn pinned(&self, x: VarId) -> Option<IndexVal> {
        let mut uf = UnionFind::default();
        for a in &self.atoms {
            if let Atom::VarEqVar(p, q) = a {
                uf.union(*p, *q);
            }
        }
        let root = uf.find(x);
        self.atoms.iter().find_map(|a| match a {
            Atom::VarEqConst(y, c) if uf.find(*y) == root => Some(*c),
            _ => None,
        })
    }

    /// One line per atom, `<var> (=|!=) <const|var>`.
    pub fn dump(&self) -> String {
        self.atoms.iter().map(|a| format!("{a}\n")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Sat(Model),
    Unsat,
    /// The budget ran out before a decision.
    Unknown,
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat(_))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub budget: Duration,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { budget: Duration::from_secs(30) }
    }
}

#[derive(Default)]
struct UnionFind {
    parent: BTreeMap<VarId, VarId>,
}

impl UnionFind {
    fn find(&mut self, x: VarId) -> VarId {
        let p = *self.parent.entry(x).or_insert(x);
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.parent.insert(x, r);
        r
    }

    /// Merges the classes, keeping the smaller root. Returns false if they
    /// were already one class.
    fn union(&mut self, a: VarId, b: VarId) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent.insert(hi, lo);
        true
    }
}

pub fn solve(pc: &PathCondition) -> Verdict {
    solve_with(pc, &SolverConfig::default())
}

pub fn solve_with(pc: &PathCondition, cfg: &SolverConfig) -> Verdict {
    let deadline = Instant::now() + cfg.budget;
    let mut uf = UnionFind::default();
    let mut vars: BTreeSet<VarId> = pc.domains.keys().copied().collect();
    for a in &pc.atoms {
        vars.extend(a.vars());
        if let Atom::VarEqVar(x, y) = a {
            uf.union(*x, *y);
        }
    }
    struct Class {
        dom: Domain,
        pin: Option<IndexVal>,
        excluded: BTreeSet<IndexVal>,
        neighbours: BTreeSet<VarId>,
    }
    let mut classes: BTreeMap<VarId, Class> = BTreeMap::new();
    for &x in &vars {
        let r = uf.find(x);
        let d = pc.domain(x);
        classes
            .entry(r)
            .and_modify(|c| c.dom = c.dom.meet(d))
            .or_insert(Class { dom: d, pin: None, excluded: BTreeSet::new(), neighbours: BTreeSet::new() });
    }
    for a in &pc.atoms {
        match *a {
            Atom::VarEqConst(x, c) => {
                let cl = classes.get_mut(&uf.find(x)).expect("class");
                match cl.pin {
                    Some(p) if p != c => return Verdict::Unsat,
                    _ => cl.pin = Some(c),
                }
            }
            Atom::VarNeqConst(x, c) => {
                classes.get_mut(&uf.find(x)).expect("class").excluded.insert(c);
            }
            Atom::VarNeqVar(x, y) => {
                let (rx, ry) = (uf.find(x), uf.find(y));
                if rx == ry {
                    return Verdict::Unsat;
                }
                classes.get_mut(&rx).expect("class").neighbours.insert(ry);
                classes.get_mut(&ry).expect("class").neighbours.insert(rx);
            }
            Atom::VarEqVar(..) => {}
        }
    }
    for c in classes.values() {
        if let Some(p) = c.pin {
            if !c.dom.contains(p) || c.excluded.contains(&p) {
                return Verdict::Unsat;
            }
        }
    }

    // Pinned classes are fixed first, then the rest are searched in order.
    let mut assign: BTreeMap<VarId, IndexVal> = classes.iter().filter_map(|(r, c)| c.pin.map(|p| (*r, p))).collect();
    for c in classes.values() {
        if let Some(p) = c.pin {
            if c.neighbours.iter().any(|n| assign.get(n) == Some(&p)) {
                return Verdict::Unsat;
            }
        }
    }
    let free: Vec<VarId> = classes.iter().filter(|(_, c)| c.pin.is_none()).map(|(r, _)| *r).collect();
    // Values no atom mentions are interchangeable, so beyond the mentioned
    // constants each class only needs the first |free| unmentioned ones.
    let mentioned: BTreeSet<IndexVal> = pc
        .atoms
        .iter()
        .filter_map(|a| match a {
            Atom::VarEqConst(_, c) | Atom::VarNeqConst(_, c) => Some(*c),
            _ => None,
        })
        .collect();
    let base: BTreeMap<VarId, Vec<IndexVal>> = free
        .iter()
        .map(|r| {
            let c = &classes[r];
            let last_mentioned = mentioned.iter().rev().find_map(|v| v.index()).unwrap_or(0);
            let mut vals = Vec::new();
            let mut fresh = 0;
            for i in 0..c.dom.size {
                let v = IndexVal::At(i);
                if mentioned.contains(&v) {
                    vals.push(v);
                } else if fresh < free.len() {
                    fresh += 1;
                    vals.push(v);
                } else if i > last_mentioned {
                    break;
                }
            }
            if c.dom.bot {
                vals.push(IndexVal::Bot);
            }
            vals.retain(|v| !c.excluded.contains(v));
            (*r, vals)
        })
        .collect();
    let candidates = |r: VarId, assign: &BTreeMap<VarId, IndexVal>| -> Vec<IndexVal> {
        let taken: BTreeSet<IndexVal> = classes[&r].neighbours.iter().filter_map(|n| assign.get(n).copied()).collect();
        base[&r].iter().filter(|v| !taken.contains(v)).copied().collect()
    };

    let mut stack: Vec<(Vec<IndexVal>, usize)> = Vec::new();
    let mut steps: u64 = 0;
    let mut depth = 0;
    while depth < free.len() {
        if depth == stack.len() {
            stack.push((candidates(free[depth], &assign), 0));
        }
        steps += 1;
        if steps.is_multiple_of(1024) && Instant::now() > deadline {
            return Verdict::Unknown;
        }
        let (cands, next) = stack.last_mut().expect("frame");
        if let Some(v) = cands.get(*next).copied() {
            *next += 1;
            assign.insert(free[depth], v);
            depth += 1;
        } else {
            stack.pop();
            if depth == 0 {
                return Verdict::Unsat;
            }
            depth -= 1;
            assign.remove(&free[depth]);
        }
    }
    Verdict::Sat(vars.iter().map(|x| (*x, assign[&uf.find(*x)])).collect())
}

/// Drops atoms entailed by the ones kept: duplicates, redundant equalities,
/// disequalities with out-of-domain constants or between differently pinned
/// classes. The result is equisatisfiable and every model of it is a model of
/// the input.
pub fn simplify(pc: &PathCondition) -> PathCondition {
    let mut seen = BTreeSet::new();
    let atoms: Vec<Atom> = pc.atoms.iter().map(|a| a.normalized()).filter(|a| seen.insert(*a)).collect();

    let mut uf = UnionFind::default();
    let mut pins: BTreeMap<VarId, IndexVal> = BTreeMap::new();
    let mut keep = vec![true; atoms.len()];
    for (i, a) in atoms.iter().enumerate() {
        match *a {
            Atom::VarEqConst(x, c) => {
                let r = uf.find(x);
                match pins.get(&r) {
                    Some(p) if *p == c => keep[i] = false,
                    Some(_) => return PathCondition { domains: pc.domains.clone(), atoms },
                    None => {
                        pins.insert(r, c);
                    }
                }
            }
            Atom::VarEqVar(x, y) => {
                let (rx, ry) = (uf.find(x), uf.find(y));
                if rx == ry {
                    keep[i] = false;
                    continue;
                }
                let (px, py) = (pins.get(&rx).copied(), pins.get(&ry).copied());
                match (px, py) {
                    (Some(a), Some(b)) if a != b => return PathCondition { domains: pc.domains.clone(), atoms },
                    (Some(_), Some(_)) => keep[i] = false,
                    _ => {}
                }
                uf.union(x, y);
                let r = uf.find(x);
                if let Some(p) = px.or(py) {
                    pins.insert(r, p);
                }
            }
            _ => {}
        }
    }
    for (i, a) in atoms.iter().enumerate() {
        match *a {
            Atom::VarNeqConst(x, c) => {
                let out_of_domain = !pc.domain(x).contains(c);
                let pinned_elsewhere = pins.get(&uf.find(x)).is_some_and(|p| *p != c);
                if out_of_domain || pinned_elsewhere {
                    keep[i] = false;
                }
            }
            Atom::VarNeqVar(x, y) => {
                let (px, py) = (pins.get(&uf.find(x)), pins.get(&uf.find(y)));
                if matches!((px, py), (Some(a), Some(b)) if a != b) {
                    keep[i] = false;
                }
            }
            _ => {}
        }
    }
    PathCondition {
        domains: pc.domains.clone(),
        atoms: atoms.into_iter().zip(keep).filter(|(_, k)| *k).map(|(a, _)| a).collect(),
    }
}
