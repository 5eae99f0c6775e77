//! The `indexify` command line and the pipeline behind it:
//! harvest → build → memoise → rewrite → explore.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench;
use crate::error::{read_file, write_file, Error};
use crate::garden::{build_garden, harvest_seeds, raw_int_domain, BuildStats, BuilderConfig, GardenMode, Gardens, SeedSet};
use crate::iot::{builtins, memoise, parse_tables, Operator, Table, TableRuntime};
use crate::lang::{parse, typecheck, IndexedTypes, NoIndex, Program, TypedProgram, Verdict};
use crate::rewrite::{confluence_probe, indexed_ir, normalize, IndexationResult, RewriteConfig, Strategy};
use crate::symex::{explore, explore_baseline, replay, ExplorationReport, ExploreConfig, OpaquePolicy, TestCase};

/// Inputs of [`indexify`] that are not the program itself.
#[derive(Debug, Clone)]
pub struct IndexConfig {
    pub types: IndexedTypes,
    /// Seed file text; replaces harvesting when present.
    pub seeds: Option<String>,
    /// Seed file text added to the harvested (or given) seeds.
    pub add_seeds: Option<String>,
    /// Used verbatim instead of building a garden.
    pub garden: Option<Gardens>,
    /// Precomputed tables; any operator without one is memoised.
    pub tables: Vec<Table>,
    /// Operators to index. `None` means the whole library of every indexed type.
    pub fplus: Option<Vec<String>>,
    /// Garden builders. `None` means the operators of F₊ that return an
    /// indexed type and are called by the program.
    pub builders: Option<Vec<String>>,
    pub k: u32,
    pub max_len: usize,
    pub kleene: bool,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            types: IndexedTypes::STR,
            seeds: None,
            add_seeds: None,
            garden: None,
            tables: Vec::new(),
            fplus: None,
            builders: None,
            k: 3,
            max_len: 8,
            kleene: false,
        }
    }
}

/// Everything produced by indexifying one program.
#[derive(Debug, Clone)]
pub struct Indexation {
    pub original: TypedProgram,
    pub gardens: Gardens,
    /// `None` when the garden was loaded from a file.
    pub build: Option<BuildStats>,
    pub fplus: Vec<String>,
    pub builders: Vec<String>,
    pub int_domain: Vec<i64>,
    /// One table per renamed operator, ordered by operator name.
    pub tables: Vec<Table>,
    pub rewrite: IndexationResult,
    pub indexed: TypedProgram,
}

impl Indexation {
    pub fn runtime(&self) -> TableRuntime<'_> {
        TableRuntime::new(&self.gardens, &self.tables)
    }

    pub fn ir(&self) -> String {
        let tables: Vec<&Table> = self.tables.iter().collect();
        indexed_ir(&self.rewrite.program, &tables)
    }

    pub fn iot_text(&self) -> String {
        self.tables.iter().map(Table::serialize).collect()
    }
}

fn library(types: IndexedTypes) -> Vec<String> {
    types.iter().flat_map(builtins::library).map(|b| b.name.to_string()).collect()
}

fn check_operators(names: &[String], what: &str, allowed: &[String]) -> Result<(), Error> {
    for n in names {
        if !allowed.contains(n) {
            return Err(Error::Usage(format!("{what}: `{n}` is not a library operator of the indexed types")));
        }
    }
    Ok(())
}

/// Runs the indexing pipeline on `p`.
pub fn indexify(p: &Program, cfg: &IndexConfig) -> Result<Indexation, Error> {
    let original = typecheck(p)?;
    let types = cfg.types;
    if types == IndexedTypes::NONE {
        return Err(Error::Usage("no type selected for indexing".into()));
    }
    let lib = library(types);
    let fplus = match &cfg.fplus {
        Some(list) => {
            check_operators(list, "F+", &lib)?;
            list.clone()
        }
        None => lib.clone(),
    };
    let called = p.names_called();
    let int_domain = raw_int_domain(p, cfg.max_len);

    let (gardens, build, builders) = match &cfg.garden {
        Some(g) => {
            for t in types.iter() {
                if g.get(t).is_none() {
                    return Err(Error::Usage(format!("the garden file has no {t} values")));
                }
            }
            (g.clone(), None, Vec::new())
        }
        None => {
            let builders: Vec<String> = match &cfg.builders {
                Some(list) => {
                    check_operators(list, "builders", &lib)?;
                    list.clone()
                }
                None => fplus
                    .iter()
                    .filter(|op| {
                        let b = builtins::builtin(op).expect("checked against the library");
                        types.contains_tag(b.ret) && called.contains(op)
                    })
                    .cloned()
                    .collect(),
            };
            let mut seeds = match &cfg.seeds {
                Some(text) => {
                    let mut s = SeedSet::new(types);
                    s.extend_from_file_text(text)?;
                    s
                }
                None => harvest_seeds(p, types),
            };
            if let Some(text) = &cfg.add_seeds {
                seeds.extend_from_file_text(text)?;
            }
            let ops: Vec<Operator> = builders
                .iter()
                .map(|b| Operator::builtin(b).expect("checked against the library"))
                .collect();
            let bc = BuilderConfig {
                k: cfg.k,
                max_str_len: cfg.max_len,
                mode: if cfg.kleene { GardenMode::Kleene } else { GardenMode::ProgramOps },
                int_domain: int_domain.clone(),
            };
            let (g, stats) = build_garden(&seeds, &ops, &bc)?;
            (g, Some(stats), builders)
        }
    };

    let rcfg = RewriteConfig::new(types, &fplus, &gardens)?;
    let rewrite = normalize(p, &rcfg, Strategy::First)?;
    let mut tables = Vec::new();
    for op in rewrite.renamed.keys() {
        match cfg.tables.iter().find(|t| &t.op == op) {
            Some(t) => tables.push(t.clone()),
            None => {
                let f = Operator::builtin(op).ok_or_else(|| Error::Usage(format!("no builtin `{op}`")))?;
                tables.push(memoise(&gardens, &f, &int_domain)?);
            }
        }
    }
    let indexed = typecheck(&rewrite.program)?;
    Ok(Indexation { original, gardens, build, fplus, builders, int_domain, tables, rewrite, indexed })
}

/// Indexifies and explores `p` in indexed mode.
pub fn run_indexed(p: &Program, cfg: &IndexConfig, ecfg: &ExploreConfig) -> Result<(Indexation, ExplorationReport), Error> {
    let ix = indexify(p, cfg)?;
    let report = explore(&ix.indexed, &ix.gardens, &ix.tables, ecfg)?;
    Ok((ix, report))
}

/// Explores the original program with the given opaque-value policy.
pub fn run_baseline(p: &Program, policy: OpaquePolicy, ecfg: &ExploreConfig) -> Result<ExplorationReport, Error> {
    let tp = typecheck(p)?;
    Ok(explore_baseline(&tp, policy, ecfg)?)
}

// ---------------------------------------------------------------------------
// Command line

#[derive(Debug, Parser)]
#[command(
    name = "indexify",
    version,
    about = "Index string and float operators into memoized tables, then symbolically execute",
    args_conflicts_with_subcommands = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the indexed engine and both baselines side by side.
    Compare(RunArgs),
    /// Run the corpus and check every entry's expected witnesses.
    Bench(BenchArgs),
    /// Replay a test case file against the program.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TypeFlag {
    String,
    Float,
    Both,
}

impl TypeFlag {
    fn types(self) -> IndexedTypes {
        match self {
            TypeFlag::String => IndexedTypes::STR,
            TypeFlag::Float => IndexedTypes::FLOAT,
            TypeFlag::Both => IndexedTypes::BOTH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineFlag {
    Abandon,
    Concretize,
}

impl BaselineFlag {
    fn policy(self) -> OpaquePolicy {
        match self {
            BaselineFlag::Abandon => OpaquePolicy::Abandon,
            BaselineFlag::Concretize => OpaquePolicy::Concretize,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// MiniImp source file.
    pub input: Option<PathBuf>,
    /// Types to index.
    #[arg(long = "type", value_enum, default_value = "string")]
    pub ty: TypeFlag,
    /// Seed file (`str:` / `float:` lines); disables constant harvesting.
    #[arg(long, value_name = "FILE")]
    pub seeds: Option<PathBuf>,
    /// Seed file added to the harvested constants.
    #[arg(long = "addSeeds", value_name = "FILE")]
    pub add_seeds: Option<PathBuf>,
    /// Garden file; its indices are used verbatim.
    #[arg(long, value_name = "FILE")]
    pub garden: Option<PathBuf>,
    /// Precomputed operator tables.
    #[arg(long = "indexOpDefs", value_name = "FILE")]
    pub index_op_defs: Option<PathBuf>,
    /// Operators to index, one per line.
    #[arg(long = "F+", visible_alias = "fplus", value_name = "FILE")]
    pub fplus: Option<PathBuf>,
    /// Garden builders, one per line.
    #[arg(long, value_name = "FILE")]
    pub builders: Option<PathBuf>,
    /// Builder rounds.
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    /// Longest string admitted to the garden (seeds are exempt).
    #[arg(long, default_value_t = 8)]
    pub maxlen: usize,
    /// Strings are all concatenations of at most k seeds.
    #[arg(long)]
    pub kleene: bool,
    /// Run the original program with the baseline engine instead.
    #[arg(long, value_enum)]
    pub baseline: Option<BaselineFlag>,
    /// Write the rewritten program and table definitions to `<input>.indexed.mi`.
    #[arg(long = "outputIndexedIR")]
    pub output_indexed_ir: bool,
    /// Let ⊥ flow through indexed operators; paths escape only at branches.
    #[arg(long)]
    pub bot_propagate: bool,
    /// Loop unroll bound.
    #[arg(long, default_value_t = 16)]
    pub unroll: u32,
    #[arg(long, default_value_t = 100_000)]
    pub max_paths: usize,
    /// Exploration budget in seconds.
    #[arg(long, default_value_t = 60)]
    pub timeout: u64,
    /// Artifact directory.
    #[arg(long, value_name = "DIR", default_value = "indexify-out")]
    pub out: PathBuf,
    /// Normalize under N random redex orders (seeded by INDEXIFY_SEED) and report the normal forms.
    #[arg(long, value_name = "N")]
    pub confluence: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Corpus directory.
    #[arg(long, value_name = "DIR")]
    pub corpus: Option<PathBuf>,
    /// Write the per-entry table here.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Include wall-clock columns (not reproducible).
    #[arg(long)]
    pub times: bool,
    /// Exploration budget per entry and mode, in seconds.
    #[arg(long, default_value_t = 60)]
    pub timeout: u64,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Test case file.
    #[arg(long, value_name = "FILE")]
    pub test: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
}

impl RunArgs {
    fn input(&self) -> Result<&Path, Error> {
        self.input.as_deref().ok_or_else(|| Error::Usage("no input file given".into()))
    }

    fn program(&self) -> Result<Program, Error> {
        Ok(parse(&read_file(self.input()?)?)?)
    }

    pub fn explore_config(&self) -> ExploreConfig {
        ExploreConfig {
            unroll_bound: self.unroll,
            max_paths: self.max_paths,
            time_budget: Duration::from_secs(self.timeout),
            bot_propagate: self.bot_propagate,
            ..ExploreConfig::default()
        }
    }

    pub fn index_config(&self) -> Result<IndexConfig, Error> {
        let opt_read = |p: &Option<PathBuf>| p.as_deref().map(read_file).transpose();
        let garden = match &self.garden {
            Some(path) => Some(Gardens::parse(&read_file(path)?)?),
            None => None,
        };
        let tables = match &self.index_op_defs {
            Some(path) => {
                let g = garden.as_ref().ok_or_else(|| {
                    Error::Usage("--indexOpDefs needs the garden the tables were built on (--garden)".into())
                })?;
                parse_tables(&read_file(path)?, g)?
            }
            None => Vec::new(),
        };
        Ok(IndexConfig {
            types: self.ty.types(),
            seeds: opt_read(&self.seeds)?,
            add_seeds: opt_read(&self.add_seeds)?,
            garden,
            tables,
            fplus: opt_read(&self.fplus)?.map(|t| name_list(&t)),
            builders: opt_read(&self.builders)?.map(|t| name_list(&t)),
            k: self.k,
            max_len: self.maxlen,
            kleene: self.kleene,
        })
    }
}

/// One name per line; blank lines and `#` comments are skipped.
pub fn name_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("indexify: {e}");
            ExitCode::from(2)
        }
    }
}

pub fn dispatch(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        None => cmd_run(&cli.run),
        Some(Command::Compare(a)) => cmd_compare(&a),
        Some(Command::Bench(a)) => cmd_bench(&a),
        Some(Command::Replay(a)) => cmd_replay(&a),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "program".into(), |s| s.to_string_lossy().into_owned())
}

fn verdict_code(r: &ExplorationReport) -> ExitCode {
    if r.count(Verdict::AssertionFailure) > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn write_report(dir: &Path, r: &ExplorationReport) -> Result<(), Error> {
    write_file(&dir.join("report.jsonl"), &r.to_jsonl())?;
    write_file(&dir.join("summary.txt"), &format!("{}\n", r.summary()))?;
    let tests = dir.join("tests");
    if tests.exists() {
        std::fs::remove_dir_all(&tests).map_err(|e| Error::io(&tests, e))?;
    }
    for (n, t) in r.test_cases.iter().enumerate() {
        write_file(&tests.join(format!("test{:06}.txt", n + 1)), &t.to_file_text())?;
    }
    Ok(())
}

fn confluence_seed() -> u64 {
    std::env::var("INDEXIFY_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0)
}

fn cmd_run(a: &RunArgs) -> Result<ExitCode, Error> {
    let input = a.input()?;
    let p = a.program()?;
    let ecfg = a.explore_config();
    if let Some(b) = a.baseline {
        let r = run_baseline(&p, b.policy(), &ecfg)?;
        write_report(&a.out, &r)?;
        println!("{}", r.summary());
        return Ok(verdict_code(&r));
    }
    let cfg = a.index_config()?;
    let ix = indexify(&p, &cfg)?;
    write_file(&a.out.join("garden.txt"), &ix.gardens.serialize())?;
    write_file(&a.out.join("iot.txt"), &ix.iot_text())?;
    if a.output_indexed_ir {
        let path = input.with_file_name(format!("{}.indexed.mi", stem(input)));
        write_file(&path, &ix.ir())?;
        println!("indexed IR written to {}", path.display());
    }
    if let Some(n) = a.confluence {
        let rcfg = RewriteConfig::new(cfg.types, &ix.fplus, &ix.gardens)?;
        let c = confluence_probe(&p, &rcfg, n, confluence_seed())?;
        println!("confluence: {} trials, {} distinct normal form(s)", c.trials, c.distinct_normal_forms);
    }
    let gsize: Vec<String> = ix.gardens.iter().map(|m| format!("|G_{}| = {}", m.ty(), m.len())).collect();
    println!(
        "garden {}; {} table(s), {} rows; {} rewrite steps",
        gsize.join(", "),
        ix.tables.len(),
        ix.tables.iter().map(Table::row_count).sum::<usize>(),
        ix.rewrite.steps
    );
    let r = explore(&ix.indexed, &ix.gardens, &ix.tables, &ecfg)?;
    write_report(&a.out, &r)?;
    println!("{}", r.summary());
    Ok(verdict_code(&r))
}

/// One row of a side-by-side comparison.
#[derive(Debug, Clone)]
pub struct CompareRow {
    pub report: ExplorationReport,
    pub elapsed: Duration,
}

pub const COMPARE_HEADER: &str =
    "mode\ttests\tassertion_failures\tpaths\tabandoned\tescaped\tbcov\ticov\tsolver_queries\tatoms_before\tatoms_after\ttime_ms";

impl CompareRow {
    pub fn tsv(&self) -> String {
        let r = &self.report;
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{:.2}\t{:.2}\t{}\t{}\t{}\t{}",
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
            r.atoms_after,
            self.elapsed.as_millis()
        )
    }
}

/// Indexed mode and both baselines on the same program.
pub fn compare(p: &Program, cfg: &IndexConfig, ecfg: &ExploreConfig) -> Result<Vec<CompareRow>, Error> {
    let t = Instant::now();
    let (_, r) = run_indexed(p, cfg, ecfg)?;
    let mut rows = vec![CompareRow { report: r, elapsed: t.elapsed() }];
    for policy in [OpaquePolicy::Abandon, OpaquePolicy::Concretize] {
        let t = Instant::now();
        let r = run_baseline(p, policy, ecfg)?;
        rows.push(CompareRow { report: r, elapsed: t.elapsed() });
    }
    Ok(rows)
}

fn cmd_compare(a: &RunArgs) -> Result<ExitCode, Error> {
    let p = a.program()?;
    let rows = compare(&p, &a.index_config()?, &a.explore_config())?;
    let mut tsv = format!("{COMPARE_HEADER}\n");
    println!("{:<20} {:>6} {:>9} {:>6} {:>9} {:>8} {:>7} {:>7} {:>8} {:>9}", "mode", "tests", "failures", "paths", "abandoned", "escaped", "BCov%", "ICov%", "queries", "ms");
    for row in &rows {
        let r = &row.report;
        tsv.push_str(&row.tsv());
        tsv.push('\n');
        println!(
            "{:<20} {:>6} {:>9} {:>6} {:>9} {:>8} {:>7.1} {:>7.1} {:>8} {:>9}",
            r.mode,
            r.test_cases.len(),
            r.count(Verdict::AssertionFailure),
            r.paths,
            r.abandoned,
            r.escaped,
            r.bcov(),
            r.icov(),
            r.solver_queries,
            row.elapsed.as_millis()
        );
    }
    write_file(&a.out.join("compare.tsv"), &tsv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(a: &BenchArgs) -> Result<ExitCode, Error> {
    let dir = a.corpus.clone().unwrap_or_else(bench::default_corpus_dir);
    let entries = bench::load_corpus(&dir)?;
    let ecfg = ExploreConfig { time_budget: Duration::from_secs(a.timeout), ..ExploreConfig::default() };
    let report = bench::run_corpus(&entries, &ecfg)?;
    let tsv = report.to_tsv(a.times);
    match &a.out {
        Some(path) => write_file(path, &tsv)?,
        None => print!("{tsv}"),
    }
    println!("{}", report.summary());
    let violations = report.violations();
    for v in &violations {
        eprintln!("witness violated: {v}");
    }
    Ok(if violations.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_replay(a: &ReplayArgs) -> Result<ExitCode, Error> {
    let p = a.run.program()?;
    let tc = TestCase::from_file_text(&read_file(&a.test)?)
        .map_err(|m| Error::Usage(format!("{}: {m}", a.test.display())))?;
    let icfg = crate::lang::InterpConfig { unroll_bound: a.run.unroll, bot_propagate: a.run.bot_propagate };
    let out = if a.run.baseline.is_some() {
        replay(&typecheck(&p)?, &NoIndex, &tc, icfg)?
    } else {
        let ix = indexify(&p, &a.run.index_config()?)?;
        replay(&ix.indexed, &ix.runtime(), &tc, icfg)?
    };
    println!("verdict {} (recorded {}){}", out.verdict, tc.verdict, if out.matches { "" } else { ": MISMATCH" });
    let missing: BTreeSet<_> = tc.branches.symmetric_difference(&out.branches).collect();
    if !missing.is_empty() {
        println!("branch outcomes differing: {}", missing.len());
    }
    Ok(if out.matches { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{input_key, interpret, Value};

    const STRSTR_GUARD: &str = r#"
        int main() {
            str S1;
            str S2;
            make_symbolic(S1);
            puts(S1);
            S2 = strcat("a", "foo");
            if (strstr(S1, "bar")) {
                return 1;
            } else {
                return 0;
            }
        }"#;

    #[test]
    fn default_builders_are_the_called_indexed_builders() {
        let p = parse(STRSTR_GUARD).unwrap();
        let ix = indexify(&p, &IndexConfig::default()).unwrap();
        assert_eq!(ix.builders, ["strcat", "strstr"]);
        assert_eq!(ix.fplus, ["strcat", "strstr", "strncmp", "strcmp", "strlen", "substr"]);
        let ops: Vec<&str> = ix.tables.iter().map(|t| t.op.as_str()).collect();
        assert_eq!(ops, ["strcat", "strstr"]);
        let g = ix.gardens.get(crate::lang::Indexable::Str).unwrap();
        for s in ["", "a", "foo", "bar", "afoo", "foobar"] {
            assert!(g.contains(&Value::Str(s.into())), "{s} missing");
        }
    }

    #[test]
    fn pipeline_is_reproducible() {
        let p = parse(STRSTR_GUARD).unwrap();
        let a = indexify(&p, &IndexConfig::default()).unwrap();
        let b = indexify(&p, &IndexConfig::default()).unwrap();
        assert_eq!(a.gardens.serialize(), b.gardens.serialize());
        assert_eq!(a.iot_text(), b.iot_text());
        assert_eq!(a.ir(), b.ir());
    }

    #[test]
    fn seeds_file_replaces_harvest_and_add_seeds_augments() {
        let p = parse(STRSTR_GUARD).unwrap();
        let only = IndexConfig { seeds: Some("str:x\n".into()), k: 1, ..IndexConfig::default() };
        let g = indexify(&p, &only).unwrap().gardens;
        let g = g.get(crate::lang::Indexable::Str).unwrap();
        assert!(g.contains(&Value::Str("xx".into())));
        assert!(!g.contains(&Value::Str("bar".into())));

        let add = IndexConfig { add_seeds: Some("# extra\nstr:zz\n".into()), k: 1, ..IndexConfig::default() };
        let g = indexify(&p, &add).unwrap().gardens;
        let g = g.get(crate::lang::Indexable::Str).unwrap();
        assert!(g.contains(&Value::Str("zz".into())));
        assert!(g.contains(&Value::Str("bar".into())));
    }

    #[test]
    fn unknown_operator_in_fplus_is_a_usage_error() {
        let p = parse(STRSTR_GUARD).unwrap();
        let cfg = IndexConfig { fplus: Some(vec!["sqrt".into()]), ..IndexConfig::default() };
        assert!(matches!(indexify(&p, &cfg), Err(Error::Usage(_))));
    }

    #[test]
    fn rewritten_program_agrees_with_original_on_garden_inputs() {
        let p = parse(STRSTR_GUARD).unwrap();
        let ix = indexify(&p, &IndexConfig::default()).unwrap();
        let rt = ix.runtime();
        for s in ["foobar", "bar", "a", ""] {
            let inputs = [(input_key("main", "S1"), Value::Str(s.into()))].into_iter().collect();
            let o = interpret(&ix.original, &inputs, &NoIndex, Default::default()).unwrap();
            let r = interpret(&ix.indexed, &inputs, &rt, Default::default()).unwrap();
            assert_eq!(o.return_value, r.return_value, "input {s:?}");
        }
    }

    #[test]
    fn compare_finds_the_strstr_branch_only_when_indexed() {
        let p = parse(STRSTR_GUARD).unwrap();
        let rows = compare(&p, &IndexConfig::default(), &ExploreConfig::default()).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].report.bcov() > rows[1].report.bcov());
        assert_eq!(rows[0].report.replay_mismatches, 0);
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from(["indexify", "--type", "float", "--F+", "ops.txt", "p.mi"]).unwrap();
        assert!(cli.command.is_none());
        assert_eq!(cli.run.ty, TypeFlag::Float);
        assert_eq!(cli.run.fplus.as_deref(), Some(Path::new("ops.txt")));
        assert_eq!(cli.run.k, 3);
        assert_eq!(cli.run.maxlen, 8);
        let cli = Cli::try_parse_from(["indexify", "replay", "--test", "t.txt", "p.mi", "--baseline", "abandon"]).unwrap();
        assert!(matches!(cli.command, Some(Command::Replay(_))));
        assert!(Cli::try_parse_from(["indexify", "--type", "bogus", "p.mi"]).is_err());
    }
}
