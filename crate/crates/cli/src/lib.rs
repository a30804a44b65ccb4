//! Command-line front end: run relations against an engine, persist suites,
//! and explain failures with lexicographic trees.

pub mod external;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use mm1040_core::generator::{ClockMode, GenError};
use mm1040_core::relation::{listing, DomainBounds};
use mm1040_core::report::{self, Explanation, TreeSummary};
use mm1040_core::suite::SuiteError;
use mm1040_core::tree::{ordering_violations, TreeError};
use mm1040_core::{
    catalog, fit, relation, run_relations, Engine, FeatureFrame, GeneratorConfig, Label, MetamorphicRelation,
    Money, MutantId, RunSummary, Suite, Sut, SutError, TaxReturnInput, TreeParams, Verdict,
};

use external::{check_executable, ExternalSut};

pub mod exit {
    pub const PASSED: i32 = 0;
    pub const FALSIFIED: i32 = 1;
    pub const INCONCLUSIVE: i32 = 2;
    pub const USAGE: i32 = 64;
    pub const DATA: i32 = 65;
    pub const SOFTWARE: i32 = 70;
    pub const IO: i32 = 74;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("engine protocol error: {0}")]
    Protocol(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Data(_) => exit::DATA,
            CliError::Protocol(_) => exit::SOFTWARE,
            CliError::Io(_) => exit::IO,
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Engine selection: `builtin`, `mutant:M1` or `external:PATH`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SutSelector {
    Builtin,
    Mutant(MutantId),
    External(PathBuf),
}

impl FromStr for SutSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "builtin" {
            return Ok(SutSelector::Builtin);
        }
        if let Some(m) = s.strip_prefix("mutant:") {
            return m.parse().map(SutSelector::Mutant).map_err(|e| e.to_string());
        }
        if let Some(p) = s.strip_prefix("external:") {
            if p.is_empty() {
                return Err("external: needs a program path".into());
            }
            return Ok(SutSelector::External(PathBuf::from(p)));
        }
        Err(format!("unknown engine {s:?}; expected builtin, mutant:<id> or external:<path>"))
    }
}

impl std::fmt::Display for SutSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SutSelector::Builtin => f.write_str("builtin"),
            SutSelector::Mutant(m) => write!(f, "mutant:{}", m.short()),
            SutSelector::External(p) => write!(f, "external:{}", p.display()),
        }
    }
}

/// The engine a worker owns.
pub enum AnySut {
    Engine(Engine),
    External(ExternalSut),
}

impl Sut for AnySut {
    fn federal_tax_return(&mut self, r: &TaxReturnInput) -> Result<Money, SutError> {
        match self {
            AnySut::Engine(e) => Ok(Engine::federal_tax_return(e, r)),
            AnySut::External(x) => x.federal_tax_return(r),
        }
    }
}

impl SutSelector {
    pub fn build(&self) -> Result<AnySut, SutError> {
        Ok(match self {
            SutSelector::Builtin => AnySut::Engine(Engine::reference()),
            SutSelector::Mutant(m) => AnySut::Engine(Engine::mutant(*m)),
            SutSelector::External(p) => {
                let mut x = ExternalSut::new(p);
                x.start()?;
                AnySut::External(x)
            }
        })
    }
}

/// Parses `all`, or a comma list of ids and inclusive ranges such as `1-4,8`.
pub fn parse_relations(spec: &str) -> Result<Vec<MetamorphicRelation>, String> {
    if spec.trim() == "all" {
        return Ok(catalog());
    }
    let mut ids = Vec::new();
    for part in spec.split(',').map(str::trim) {
        let num = |s: &str| s.trim().parse::<u32>().map_err(|_| format!("bad relation id {s:?}"));
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    return Err(format!("empty relation range {part}"));
                }
                ids.extend(a..=b);
            }
            None => ids.push(num(part)?),
        }
    }
    ids.sort_unstable();
    ids.dedup();
    ids.into_iter().map(|id| relation(id).map_err(|e| e.to_string())).collect()
}

fn parse_clock(s: &str) -> Result<ClockMode, String> {
    match s {
        "wall" => Ok(ClockMode::Wall),
        "virtual" => Ok(ClockMode::Virtual { tick_us: 10 }),
        _ => match s.strip_prefix("virtual:").map(str::parse::<u64>) {
            Some(Ok(tick_us)) if tick_us > 0 => Ok(ClockMode::Virtual { tick_us }),
            _ => Err(format!("clock must be wall, virtual or virtual:<µs per evaluation>, got {s:?}")),
        },
    }
}

fn parse_money(s: &str) -> Result<Money, String> {
    s.parse::<Money>().map_err(|e| e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "mm1040", version, about = "Metamorphic testing of Form 1040 tax engines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate and label cases for a set of relations.
    Run(RunArgs),
    /// Explain a saved suite by its premise or a lexicographic tree.
    Explain(ExplainArgs),
    /// List the relation catalog.
    Relations,
}

#[derive(Args, Debug, Clone)]
struct TreeArgs {
    #[arg(long, env = "MM1040_MAX_DEPTH", default_value_t = 12)]
    max_depth: usize,
    #[arg(long, env = "MM1040_MIN_SAMPLES_LEAF", default_value_t = 20)]
    min_samples_leaf: usize,
    /// Association threshold for early follow-up splits; 0 disables the ordering constraint.
    #[arg(long, env = "MM1040_RHO", default_value_t = 0.1)]
    rho: f64,
}

impl TreeArgs {
    fn params(&self) -> Result<TreeParams, CliError> {
        let p = TreeParams { max_depth: self.max_depth, min_samples_leaf: self.min_samples_leaf, rho: self.rho };
        p.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(p)
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    /// `all`, or ids and ranges such as `1-4,8,13`.
    #[arg(long, env = "MM1040_RELATIONS", default_value = "all")]
    relations: String,
    /// `builtin`, `mutant:M1`..`mutant:M5`, or `external:PATH`.
    #[arg(long, env = "MM1040_SUT", default_value = "builtin")]
    sut: SutSelector,
    #[arg(long, env = "MM1040_SEED", default_value_t = 42)]
    seed: u64,
    /// Seconds per relation.
    #[arg(long, env = "MM1040_TIMEOUT", default_value_t = 600.0)]
    timeout: f64,
    #[arg(long, env = "MM1040_BAYES_FACTOR", default_value_t = 100.0)]
    bayes_factor: f64,
    #[arg(long, env = "MM1040_THETA", default_value_t = 0.95)]
    theta: f64,
    /// Deviance in dollars above which a case fails.
    #[arg(long, env = "MM1040_DELTA", default_value = "0.95", value_parser = parse_money)]
    delta: Money,
    /// Cap on cases per relation.
    #[arg(long, env = "MM1040_MAX_CASES", default_value_t = 100_000)]
    max_cases: u64,
    /// `wall`, or `virtual[:µs]` for runs that are reproducible down to timestamps.
    #[arg(long, env = "MM1040_CLOCK", default_value = "wall", value_parser = parse_clock)]
    clock: ClockMode,
    /// Upper bound of sampled credit claims, in dollars.
    #[arg(long, env = "MM1040_MAX_CREDIT", value_parser = parse_money)]
    max_credit: Option<Money>,
    /// Upper bound of sampled AGI, in dollars.
    #[arg(long, env = "MM1040_AGI_MAX", value_parser = parse_money)]
    agi_max: Option<Money>,
    /// Parallel workers; defaults to the CPU count.
    #[arg(long, env = "MM1040_WORKERS")]
    workers: Option<usize>,
    #[arg(long, env = "MM1040_OUT", default_value = "mm1040-out")]
    out: PathBuf,
    /// Skip fitting explanation trees.
    #[arg(long)]
    no_explain: bool,
    #[command(flatten)]
    tree: TreeArgs,
}

#[derive(Args, Debug)]
struct ExplainArgs {
    suite: PathBuf,
    /// Directory for tree files; defaults to the suite's directory.
    #[arg(long, env = "MM1040_OUT")]
    out: Option<PathBuf>,
    #[command(flatten)]
    tree: TreeArgs,
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::PASSED };
        }
    };
    let out = match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Explain(a) => cmd_explain(&a).map(|_| exit::PASSED),
        Command::Relations => {
            print!("{}", listing());
            Ok(exit::PASSED)
        }
    };
    out.unwrap_or_else(|e| {
        eprintln!("mm1040: {e}");
        e.code()
    })
}

fn run_config(a: &RunArgs) -> Result<GeneratorConfig, CliError> {
    let timeout = Duration::try_from_secs_f64(a.timeout)
        .ok()
        .filter(|t| !t.is_zero())
        .ok_or_else(|| CliError::Usage(format!("timeout {} must be a positive number of seconds", a.timeout)))?;
    let mut bounds = DomainBounds::default();
    if let Some(m) = a.max_credit {
        bounds.max_credit = m;
    }
    if let Some(m) = a.agi_max {
        bounds.agi_max = m;
    }
    let cfg = GeneratorConfig {
        bayes_factor: a.bayes_factor,
        theta: a.theta,
        delta: a.delta,
        timeout,
        seed: a.seed,
        max_cases: a.max_cases,
        clock: a.clock,
        bounds,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if cfg.max_cases == 0 {
        return Err(CliError::Usage("max-cases must be positive".into()));
    }
    Ok(cfg)
}

/// Writes tree artifacts next to `stem`; returns the tree summary.
fn write_tree_files(suite: &Suite, params: &TreeParams, dir: &Path, stem: &str) -> Result<TreeSummary, CliError> {
    let rel = suite.relation();
    let frame = FeatureFrame::flatten(&suite.cases, &rel).map_err(|e| CliError::Data(e.to_string()))?;
    let tree = fit(&frame, params).map_err(|e| CliError::Data(e.to_string()))?;
    debug_assert!(ordering_violations(&tree, &frame).is_empty());
    let json = serde_json::to_string_pretty(&tree.to_json()).expect("tree serializes");
    for (ext, body) in [("dot", tree.to_dot()), ("tree.json", json + "\n"), ("paths.txt", tree.predicates_text())] {
        let path = dir.join(format!("{stem}.{ext}"));
        std::fs::write(&path, body).map_err(|e| io_err(&path, e))?;
    }
    Ok(TreeSummary { accuracy: tree.accuracy(&frame), height: tree.height(), leaves: tree.leaves() })
}

fn premise_explanation(suite: &Suite) -> String {
    let rel = suite.relation();
    let label = if suite.count(Label::Failed) > 0 { "failed" } else { "passed" };
    format!(
        "relation {}: all {} cases {label}; the premise explains them:\n  {}\n",
        rel.id,
        suite.cases.len(),
        rel.premise_text()
    )
}

/// Explains one suite; `None` when it is single-label and the premise stands in for a tree.
fn explain_suite(suite: &Suite, params: &TreeParams, dir: &Path, stem: &str) -> Result<Option<TreeSummary>, CliError> {
    match FeatureFrame::flatten(&suite.cases, &suite.relation()) {
        Err(TreeError::Degenerate(_)) | Err(TreeError::Empty) => Ok(None),
        Err(e) => Err(CliError::Data(e.to_string())),
        Ok(_) => write_tree_files(suite, params, dir, stem).map(Some),
    }
}

fn cmd_run(a: &RunArgs) -> Result<i32, CliError> {
    let rels = parse_relations(&a.relations).map_err(CliError::Usage)?;
    let cfg = run_config(a)?;
    let params = a.tree.params()?;
    if let SutSelector::External(p) = &a.sut {
        check_executable(p).map_err(CliError::Usage)?;
    }
    std::fs::create_dir_all(&a.out).map_err(|e| io_err(&a.out, e))?;
    let workers = a
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(CliError::Usage("workers must be positive".into()));
    }

    let sut_name = a.sut.to_string();
    let results = run_relations(&rels, &cfg, workers, || a.sut.build());
    let mut rows = Vec::new();
    let mut protocol: Option<String> = None;
    for (id, res) in results {
        let res = match res {
            Ok(r) => r,
            Err(GenError::Sut { relation, consecutive, last }) => {
                let msg = format!("relation {relation}: {consecutive} consecutive failures, last: {last}");
                eprintln!("mm1040: engine protocol error: {msg}");
                protocol.get_or_insert(msg);
                continue;
            }
            Err(e) => return Err(CliError::Usage(format!("relation {id}: {e}"))),
        };
        let suite = Suite::from_run(&res, &sut_name);
        let stem = format!("rel{id:02}");
        let path = a.out.join(format!("{stem}.jsonl"));
        suite.save(&path).map_err(|e| io_err(&path, e))?;
        let mut row = RunSummary::new(&res, &sut_name);
        if !a.no_explain {
            row.tree = explain_suite(&suite, &params, &a.out, &stem)?;
            row.explanation = Some(if row.tree.is_some() { Explanation::Tree } else { Explanation::Premise });
        }
        rows.push(row);
    }

    let json = serde_json::to_string_pretty(&rows).expect("summary serializes") + "\n";
    let table = report::table(&rows);
    for (name, body) in [("summary.json", json), ("summary.txt", table.clone())] {
        let path = a.out.join(name);
        std::fs::write(&path, body).map_err(|e| io_err(&path, e))?;
    }
    print!("{table}");
    if let Some(msg) = protocol {
        return Err(CliError::Protocol(msg));
    }
    let code = if rows.iter().any(|r| r.verdict == Verdict::Falsified) {
        exit::FALSIFIED
    } else if rows.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        exit::INCONCLUSIVE
    } else {
        exit::PASSED
    };
    Ok(code)
}

fn cmd_explain(a: &ExplainArgs) -> Result<(), CliError> {
    let params = a.tree.params()?;
    let suite = Suite::load(&a.suite).map_err(|e| match e {
        SuiteError::Io(io) => io_err(&a.suite, io),
        other => CliError::Data(format!("{}: {other}", a.suite.display())),
    })?;
    let dir = a
        .out
        .clone()
        .unwrap_or_else(|| a.suite.parent().map(Path::to_path_buf).unwrap_or_default());
    let dir = if dir.as_os_str().is_empty() { PathBuf::from(".") } else { dir };
    std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let stem = a
        .suite
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "suite".into());
    match explain_suite(&suite, &params, &dir, &stem)? {
        None => print!("{}", premise_explanation(&suite)),
        Some(t) => {
            println!(
                "relation {}: tree with {} leaves, height {}, training accuracy {:.1}%",
                suite.header.relation,
                t.leaves,
                t.height,
                t.accuracy * 100.0
            );
            let paths = dir.join(format!("{stem}.paths.txt"));
            let text = std::fs::read_to_string(&paths).map_err(|e| io_err(&paths, e))?;
            print!("{text}");
            println!("wrote {}", dir.join(format!("{stem}.dot")).display());
        }
    }
    Ok(())
}
