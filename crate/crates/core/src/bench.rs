//! The shipped corpus and the harness that runs it in every mode.
//!
//! Each corpus file starts with `//` header lines:
//!
//! ```text
//! // category: string-heavy
//! // config: type=string k=3 maxlen=8 builders=strcat fplus=strcat,strstr kleene
//! // witness: indexed-only-assertion coverage-gain atoms-reduced
//! ```
//!
//! `config` keys are optional and default like the CLI. `builders=none` gives
//! a garden of seeds only.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::cli::{run_baseline, run_indexed, IndexConfig};
use crate::error::{read_file, Error};
use crate::lang::{parse, IndexedTypes, Program, Verdict};
use crate::symex::{ExplorationReport, ExploreConfig, OpaquePolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Category {
    StringHeavy,
    FloatHeavy,
    Mixed,
    Control,
}

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::StringHeavy => "string-heavy",
            Category::FloatHeavy => "float-heavy",
            Category::Mixed => "mixed",
            Category::Control => "control",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Category::StringHeavy, Category::FloatHeavy, Category::Mixed, Category::Control]
            .into_iter()
            .find(|c| c.name() == s)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An expected outcome checked on every corpus run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Witness {
    /// Indexed mode reports an assertion failure; neither baseline does.
    IndexedOnlyAssertion,
    /// Indexed branch coverage is strictly above baseline-abandon.
    CoverageGain,
    /// All modes reach the same branch coverage.
    CoverageEqual,
    /// Simplification sends fewer atoms than the unsimplified encoding.
    AtomsReduced,
}

impl Witness {
    pub fn name(self) -> &'static str {
        match self {
            Witness::IndexedOnlyAssertion => "indexed-only-assertion",
            Witness::CoverageGain => "coverage-gain",
            Witness::CoverageEqual => "coverage-equal",
            Witness::AtomsReduced => "atoms-reduced",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Witness::IndexedOnlyAssertion, Witness::CoverageGain, Witness::CoverageEqual, Witness::AtomsReduced]
            .into_iter()
            .find(|w| w.name() == s)
    }
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub path: PathBuf,
    pub category: Category,
    pub source: String,
    pub program: Program,
    pub config: IndexConfig,
    pub witnesses: Vec<Witness>,
}

/// The corpus shipped with the crate.
pub fn default_corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn bad(name: &str, msg: impl fmt::Display) -> Error {
    Error::Usage(format!("corpus entry {name}: {msg}"))
}

/// Parses the header and the program of one corpus file.
pub fn parse_entry(name: &str, path: PathBuf, source: String) -> Result<CorpusEntry, Error> {
    let mut category = None;
    let mut config = IndexConfig::default();
    let mut witnesses = Vec::new();
    for line in source.lines() {
        let Some(rest) = line.trim().strip_prefix("//") else { break };
        let Some((key, value)) = rest.trim().split_once(':') else { continue };
        let value = value.trim();
        match key.trim() {
            "category" => category = Some(Category::from_name(value).ok_or_else(|| bad(name, "unknown category"))?),
            "witness" => {
                for w in value.split_whitespace() {
                    witnesses.push(Witness::from_name(w).ok_or_else(|| bad(name, format!("unknown witness {w}")))?);
                }
            }
            "config" => {
                for kv in value.split_whitespace() {
                    let (k, v) = kv.split_once('=').unwrap_or((kv, ""));
                    let list = || -> Vec<String> {
                        if v == "none" {
                            Vec::new()
                        } else {
                            v.split(',').map(str::to_string).collect()
                        }
                    };
                    match k {
                        "type" => {
                            config.types = IndexedTypes::from_flag(v).ok_or_else(|| bad(name, "unknown type"))?
                        }
                        "k" => config.k = v.parse().map_err(|_| bad(name, "bad k"))?,
                        "maxlen" => config.max_len = v.parse().map_err(|_| bad(name, "bad maxlen"))?,
                        "builders" => config.builders = Some(list()),
                        "fplus" => config.fplus = Some(list()),
                        "kleene" => config.kleene = true,
                        _ => return Err(bad(name, format!("unknown config key {k}"))),
                    }
                }
            }
            _ => {}
        }
    }
    let category = category.ok_or_else(|| bad(name, "missing category"))?;
    let program = parse(&source)?;
    Ok(CorpusEntry { name: name.to_string(), path, category, source, program, config, witnesses })
}

/// Every `.mi` file in `dir`, sorted by name.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, Error> {
    let rd = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "mi"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let src = read_file(&p)?;
            parse_entry(&name, p, src)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ModeResult {
    pub report: ExplorationReport,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct EntryResult {
    pub name: String,
    pub category: Category,
    pub indexed: ModeResult,
    pub abandon: ModeResult,
    pub concretize: ModeResult,
    pub garden_size: usize,
    pub table_rows: usize,
    /// Descriptions of failed witnesses.
    pub violations: Vec<String>,
}

impl EntryResult {
    pub fn modes(&self) -> [&ModeResult; 3] {
        [&self.indexed, &self.abandon, &self.concretize]
    }
}

fn timed(f: impl FnOnce() -> Result<ExplorationReport, Error>) -> Result<ModeResult, Error> {
    let t = Instant::now();
    let report = f()?;
    Ok(ModeResult { report, elapsed: t.elapsed() })
}

/// Runs one entry in every mode and checks its witnesses. Replay soundness
/// is always checked.
pub fn run_entry(e: &CorpusEntry, ecfg: &ExploreConfig) -> Result<EntryResult, Error> {
    let t = Instant::now();
    let (ix, report) = run_indexed(&e.program, &e.config, ecfg)?;
    let indexed = ModeResult { report, elapsed: t.elapsed() };
    let abandon = timed(|| run_baseline(&e.program, OpaquePolicy::Abandon, ecfg))?;
    let concretize = timed(|| run_baseline(&e.program, OpaquePolicy::Concretize, ecfg))?;

    let mut violations = Vec::new();
    let (i, a, c) = (&indexed.report, &abandon.report, &concretize.report);
    for w in &e.witnesses {
        let ok = match w {
            Witness::IndexedOnlyAssertion => {
                i.count(Verdict::AssertionFailure) > 0
                    && a.count(Verdict::AssertionFailure) == 0
                    && c.count(Verdict::AssertionFailure) == 0
            }
            Witness::CoverageGain => i.bcov() > a.bcov(),
            Witness::CoverageEqual => i.branches == a.branches && a.branches == c.branches,
            Witness::AtomsReduced => i.atoms_after < i.atoms_before,
        };
        if !ok {
            violations.push(format!("{}: {}", e.name, w.name()));
        }
    }
    for r in [i, a, c] {
        if r.replay_mismatches > 0 {
            violations.push(format!("{}: {} replay mismatches in {}", e.name, r.replay_mismatches, r.mode));
        }
    }
    Ok(EntryResult {
        name: e.name.clone(),
        category: e.category,
        garden_size: ix.gardens.total_len(),
        table_rows: ix.tables.iter().map(|t| t.row_count()).sum(),
        indexed,
        abandon,
        concretize,
        violations,
    })
}

#[derive(Debug, Clone, Default)]
pub struct CorpusReport {
    /// Sorted by entry name.
    pub entries: Vec<EntryResult>,
}

/// Per-mode means over a set of entries.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Means {
    pub bcov: f64,
    pub icov: f64,
    pub solver_queries: f64,
    pub atoms_before: f64,
    pub atoms_after: f64,
    /// Escaped paths over all paths.
    pub escaped_rate: f64,
    pub seconds: f64,
}

pub fn run_corpus(entries: &[CorpusEntry], ecfg: &ExploreConfig) -> Result<CorpusReport, Error> {
    let mut out: Vec<EntryResult> = entries.iter().map(|e| run_entry(e, ecfg)).collect::<Result<_, _>>()?;
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(CorpusReport { entries: out })
}

const MODES: [&str; 3] = ["indexed", "baseline-abandon", "baseline-concretize"];

impl CorpusReport {
    /// Means of mode `m` (0 indexed, 1 abandon, 2 concretize) over the
    /// entries accepted by `filter`.
    pub fn means(&self, m: usize, filter: impl Fn(&EntryResult) -> bool) -> Means {
        let rows: Vec<&ModeResult> = self.entries.iter().filter(|e| filter(e)).map(|e| e.modes()[m]).collect();
        if rows.is_empty() {
            return Means::default();
        }
        let n = rows.len() as f64;
        let mean = |f: &dyn Fn(&ModeResult) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
        Means {
            bcov: mean(&|r| r.report.bcov()),
            icov: mean(&|r| r.report.icov()),
            solver_queries: mean(&|r| r.report.solver_queries as f64),
            atoms_before: mean(&|r| r.report.atoms_before as f64),
            atoms_after: mean(&|r| r.report.atoms_after as f64),
            escaped_rate: mean(&|r| {
                if r.report.paths == 0 {
                    0.0
                } else {
                    r.report.escaped as f64 / r.report.paths as f64
                }
            }),
            seconds: mean(&|r| r.elapsed.as_secs_f64()),
        }
    }

    pub fn violations(&self) -> Vec<String> {
        self.entries.iter().flat_map(|e| e.violations.iter().cloned()).collect()
    }

    /// One row per entry and mode. Without `times` the output is
    /// reproducible byte for byte.
    pub fn to_tsv(&self, times: bool) -> String {
        let mut out = String::from(
            "entry\tcategory\tmode\ttests\tassertion_failures\tpaths\tabandoned\tescaped\tbcov\ticov\tsolver_queries\tatoms_before\tatoms_after",
        );
        out.push_str(if times { "\ttime_ms\n" } else { "\n" });
        for e in &self.entries {
            for m in e.modes() {
                let r = &m.report;
                let _ = write!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.2}\t{:.2}\t{}\t{}\t{}",
                    e.name,
                    e.category,
                    r.mode,
                    r.test_cases.len(),
                    r.count(Verdict::AssertionFailure),
                    r.paths,
                    r.abandoned,
                    r.escaped,
                    r.bcov(),
                    r.icov(),
                    r.solver_queries,
                    r.atoms_before,
                    r.atoms_after
                );
                if times {
                    let _ = write!(out, "\t{}", m.elapsed.as_millis());
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = format!("{} entries\n", self.entries.len());
        for (m, name) in MODES.iter().enumerate() {
            let all = self.means(m, |_| true);
            let _ = writeln!(
                out,
                "{name:<20} mean BCov {:6.2}%  ICov {:6.2}%  queries {:8.1}  atoms {:.1} -> {:.1}  escaped {:.3}",
                all.bcov, all.icov, all.solver_queries, all.atoms_before, all.atoms_after, all.escaped_rate
            );
        }
        let v = self.violations().len();
        let _ = write!(out, "{v} witness violation(s)");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_parses() {
        let src = "// category: mixed\n// config: type=both k=2 maxlen=4 builders=none fplus=strlen,fadd kleene\n\
                   // witness: coverage-gain atoms-reduced\nint main() { return 0; }\n";
        let e = parse_entry("x", PathBuf::from("x.mi"), src.into()).unwrap();
        assert_eq!(e.category, Category::Mixed);
        assert_eq!(e.config.types, IndexedTypes::BOTH);
        assert_eq!((e.config.k, e.config.max_len, e.config.kleene), (2, 4, true));
        assert_eq!(e.config.builders, Some(vec![]));
        assert_eq!(e.config.fplus, Some(vec!["strlen".to_string(), "fadd".to_string()]));
        assert_eq!(e.witnesses, [Witness::CoverageGain, Witness::AtomsReduced]);
    }

    #[test]
    fn header_errors() {
        for src in [
            "int main() { return 0; }",
            "// category: huge\nint main() { return 0; }",
            "// category: control\n// witness: nope\nint main() { return 0; }",
            "// category: control\n// config: depth=3\nint main() { return 0; }",
        ] {
            assert!(parse_entry("x", PathBuf::from("x.mi"), src.into()).is_err(), "{src}");
        }
    }

    #[test]
    fn shipped_corpus_loads() {
        let c = load_corpus(&default_corpus_dir()).unwrap();
        assert_eq!(c.len(), 12);
        for e in &c {
            crate::lang::typecheck(&e.program).unwrap();
        }
        assert!(c.iter().any(|e| e.category == Category::FloatHeavy));
        assert!(c.iter().filter(|e| e.category == Category::Control).count() >= 2);
    }
}
