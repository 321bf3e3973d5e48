//! The `ptlog` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::catalog::{self, CatalogEntry};
use crate::cost::preset::apply_conditions;
use crate::cost::{simplify_poly, Analysis, Report};
use crate::decompose::DomainInfo;
use crate::eval::{check_size_bounding, evaluate, Database, EvalOptions, TermPolicy, Verdict};
use crate::frontend::{extract_facts, parse_toy, Flavor};
use crate::ir::{parse_program, validate, Program};
use crate::stats::{compute_count_bound, profile_for, StatsProfile};

#[derive(Parser, Debug)]
#[command(name = "ptlog", version, about = "Datalog engine and complexity analyzer for pointer analyses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Rules file (`.dl`).
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// Shipped analysis name, see `ptlog catalog list`.
    #[arg(long)]
    pub catalog: Option<String>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the binary (at most two positive hypotheses) form of a program.
    Decompose {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a program over a directory of `<pred>.facts` files.
    Eval {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        facts: PathBuf,
        /// Directory for derived `.facts` files and `trace.json`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Evaluate the rules as written instead of their binary form.
        #[arg(long)]
        no_decompose: bool,
        /// Run programs that fail the size-bounding check, under a term-size cap.
        #[arg(long)]
        force: bool,
        #[arg(long)]
        max_term_size: Option<u32>,
        /// Abort after this many rule firings.
        #[arg(long)]
        max_steps: Option<u64>,
        /// Write the statistics every cost expression needs.
        #[arg(long)]
        stats_out: Option<PathBuf>,
        /// Include wall-clock time in the trace.
        #[arg(long)]
        timing: bool,
    },
    /// Per-rule time bounds and their total.
    Cost {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        worst_case: bool,
        /// Sparse-program assumptions instead of the plain worst case.
        #[arg(long)]
        k_sparse: bool,
        /// Conditions such as `C1,C2`; implies `--worst-case`.
        #[arg(long, value_delimiter = ',')]
        conditions: Vec<String>,
        /// Measured statistics (JSON) to instantiate each bound with.
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Turn a toy IR file into `.facts` files.
    Extract {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Give statement relations a leading program-point column.
        #[arg(long)]
        flow: bool,
    },
    /// Shipped analyses.
    Catalog {
        #[command(subcommand)]
        command: CatalogCommand,
    },
    /// Validate a program and report whether its function symbols stay bounded.
    Check {
        #[command(flatten)]
        source: Source,
    },
}

#[derive(Subcommand, Debug)]
pub enum CatalogCommand {
    List,
    Show { name: String },
}

/// Exit status 1 for diagnostics about the inputs, 2 for misuse.
#[derive(Debug)]
enum Failure {
    Diagnostics(String),
    Usage(String),
}

fn diag<E: std::fmt::Display>(context: &str) -> impl Fn(E) -> Failure + '_ {
    move |e| Failure::Diagnostics(format!("{context}: {e}"))
}

struct Loaded {
    program: Program,
    domain: DomainInfo,
    entry: Option<CatalogEntry>,
}

impl Loaded {
    fn analysis(&self) -> Result<Analysis, Failure> {
        match &self.entry {
            Some(e) => Ok(Analysis::of_entry(e)),
            None => Analysis::new(&self.program, &self.domain).map_err(diag("cost")),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    if !path.exists() {
        return Err(Failure::Usage(format!("{}: no such file", path.display())));
    }
    std::fs::read_to_string(path).map_err(diag(&path.display().to_string()))
}

fn load(source: &Source) -> Result<Loaded, Failure> {
    let loaded = if let Some(name) = &source.catalog {
        let entry = catalog::get_entry(name).map_err(|e| Failure::Usage(e.to_string()))?;
        Loaded { program: entry.program(), domain: entry.domain_info(), entry: Some(entry) }
    } else {
        let path = source.rules.as_ref().expect("clap enforces one source");
        let program =
            parse_program(&read(path)?).map_err(|e| Failure::Diagnostics(format!("{}:{e}", path.display())))?;
        Loaded { program, domain: DomainInfo::default(), entry: None }
    };
    let problems = validate(&loaded.program);
    if !problems.is_empty() {
        let text: Vec<String> = problems.iter().map(|d| d.to_string()).collect();
        return Err(Failure::Diagnostics(text.join("\n")));
    }
    Ok(loaded)
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(diag(&dir.display().to_string()))?;
    }
    std::fs::write(path, text).map_err(diag(&path.display().to_string()))
}

fn decompose_cmd(source: &Source, out: Option<&Path>, stdout: &mut String) -> Result<(), Failure> {
    let binary = load(source)?.analysis()?.binary;
    let text = binary.to_string();
    match out {
        Some(p) => write_file(p, &text),
        None => {
            stdout.push_str(&text);
            Ok(())
        }
    }
}

struct EvalArgs<'a> {
    facts: &'a Path,
    out: Option<&'a Path>,
    no_decompose: bool,
    force: bool,
    max_term_size: Option<u32>,
    max_steps: Option<u64>,
    stats_out: Option<&'a Path>,
    timing: bool,
}

fn eval_cmd(source: &Source, a: EvalArgs, stdout: &mut String) -> Result<(), Failure> {
    let loaded = load(source)?;
    let unbounded: Vec<String> = check_size_bounding(&loaded.program)
        .into_iter()
        .filter_map(|(f, v)| match v {
            Verdict::Unbounded { rule, term } => Some(format!("{f}: {term} in {rule} may grow without bound")),
            Verdict::Bounded => None,
        })
        .collect();
    if !unbounded.is_empty() && !a.force {
        return Err(Failure::Diagnostics(format!(
            "{}\n(use --force to run under a term-size cap)",
            unbounded.join("\n")
        )));
    }
    let term_policy = match (a.max_term_size, a.force && !unbounded.is_empty()) {
        (Some(n), _) => TermPolicy::HardCap(n),
        (None, true) => TermPolicy::HardCap(64),
        (None, false) => TermPolicy::RejectOnGrowth,
    };
    let analysis = loaded.analysis()?;
    let program = if a.no_decompose { loaded.program.clone() } else { analysis.binary.clone() };
    if !a.facts.is_dir() {
        return Err(Failure::Usage(format!("{}: not a directory", a.facts.display())));
    }
    let mut db = Database::new();
    db.load_dir(a.facts, &program.predicates()).map_err(diag("facts"))?;
    let options = EvalOptions { term_policy, max_firings: a.max_steps };
    let result = evaluate(&program, db, &options).map_err(diag("eval"))?;
    let derived: Vec<String> = loaded.program.idb_predicates().into_iter().collect();
    for p in &derived {
        let _ = writeln!(stdout, "{p}\t{}", result.db.len(p));
    }
    if let Some(dir) = a.out {
        result.db.write_dir(dir, &derived).map_err(diag("output"))?;
        let mut trace = serde_json::to_value(&result.trace).expect("trace serializes");
        if !a.timing {
            trace.as_object_mut().unwrap().remove("wall_time_ms");
        }
        write_file(&dir.join("trace.json"), &format!("{}\n", serde_json::to_string_pretty(&trace).unwrap()))?;
    }
    if let Some(path) = a.stats_out {
        if a.no_decompose {
            return Err(Failure::Usage("--stats-out needs the binary program".into()));
        }
        let exprs: Vec<_> = analysis.table.rows.iter().map(|r| &r.expr).chain([&analysis.table.total]).collect();
        let profile = profile_for(&result.db, &exprs).map_err(diag("stats"))?;
        write_file(path, &format!("{}\n", serde_json::to_string_pretty(&profile.to_json()).unwrap()))?;
    }
    Ok(())
}

struct CostArgs<'a> {
    worst_case: bool,
    k_sparse: bool,
    conditions: &'a [String],
    stats: Option<&'a Path>,
    format: Format,
}

fn cost_cmd(source: &Source, a: CostArgs, stdout: &mut String) -> Result<(), Failure> {
    let analysis = load(source)?.analysis()?;
    let profile =
        a.stats.map(|p| StatsProfile::from_json(&read(p)?).map_err(diag(&p.display().to_string()))).transpose()?;
    let mut conditions: Vec<&str> = a.conditions.iter().map(String::as_str).collect();
    if let Some(p) = &profile {
        conditions.extend(p.conditions.iter().map(String::as_str));
    }
    let simplified = if a.worst_case || a.k_sparse || !conditions.is_empty() {
        let mut assumptions = if a.k_sparse { analysis.k_sparse() } else { analysis.worst_case() };
        apply_conditions(&mut assumptions, &conditions).map_err(Failure::Usage)?;
        Some(simplify_poly(&analysis.table.total, &assumptions))
    } else {
        None
    };
    let maps = profile.as_ref().map(|p| (p.stat_map(), p.param_bounds.clone()));
    let report = Report::new(&analysis.table, maps.as_ref().map(|(s, p)| (s, p)), simplified).map_err(diag("stats"))?;
    match a.format {
        Format::Text => stdout.push_str(&report.to_text()),
        Format::Json => {
            let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&report.to_json()).unwrap());
        }
    }
    Ok(())
}

fn extract_cmd(input: &Path, out: &Path, flow: bool, stdout: &mut String) -> Result<(), Failure> {
    let name = input.display().to_string();
    let prog = parse_toy(&read(input)?).map_err(diag(&name))?;
    let flavor = if flow { Flavor::FlowSensitive } else { Flavor::Insensitive };
    let facts = extract_facts(&prog, flavor).map_err(diag(&name))?;
    facts.write_dir(out).map_err(diag(&out.display().to_string()))?;
    for (pred, rows) in &facts.relations {
        let _ = writeln!(stdout, "{pred}\t{}", rows.len());
    }
    Ok(())
}

fn catalog_cmd(cmd: &CatalogCommand, stdout: &mut String) -> Result<(), Failure> {
    match cmd {
        CatalogCommand::List => {
            for e in catalog::entries() {
                let _ = writeln!(stdout, "{}\t{}", e.name, e.title);
            }
        }
        CatalogCommand::Show { name } => {
            let e = catalog::get_entry(name).map_err(|e| Failure::Usage(e.to_string()))?;
            let _ = writeln!(stdout, "// {}\n", e.title);
            stdout.push_str(e.source.trim_end());
            stdout.push_str("\n\n// schema\n");
            for (pred, cols) in &e.schema {
                let _ = writeln!(stdout, "//   {pred}({})", cols.join(", "));
            }
            if let Some(s) = &e.summary {
                let _ = writeln!(stdout, "// worst case: O({})", s.worst_case);
                for (conds, bound) in &s.conditional {
                    let _ = writeln!(stdout, "// under {}: O({bound})", conds.join(", "));
                }
            }
        }
    }
    Ok(())
}

fn check_cmd(source: &Source, stdout: &mut String) -> Result<(), Failure> {
    let loaded = load(source)?;
    let counts = compute_count_bound(&loaded.program);
    let mut bad = Vec::new();
    for (f, v) in check_size_bounding(&loaded.program) {
        match v {
            Verdict::Bounded => {
                let count = counts.get(&f).map(|c| c.to_string()).unwrap_or_else(|| "?".into());
                let _ = writeln!(stdout, "{f}: bounded, count({f}) <= {count}");
            }
            Verdict::Unbounded { rule, term } => bad.push(format!("{f}: unbounded, {term} in {rule}")),
        }
    }
    if bad.is_empty() {
        let _ = writeln!(stdout, "ok");
        Ok(())
    } else {
        Err(Failure::Diagnostics(bad.join("\n")))
    }
}

fn dispatch(cli: &Cli, stdout: &mut String) -> Result<(), Failure> {
    match &cli.command {
        Command::Decompose { source, out } => decompose_cmd(source, out.as_deref(), stdout),
        Command::Eval { source, facts, out, no_decompose, force, max_term_size, max_steps, stats_out, timing } => {
            let args = EvalArgs {
                facts,
                out: out.as_deref(),
                no_decompose: *no_decompose,
                force: *force,
                max_term_size: *max_term_size,
                max_steps: *max_steps,
                stats_out: stats_out.as_deref(),
                timing: *timing,
            };
            eval_cmd(source, args, stdout)
        }
        Command::Cost { source, worst_case, k_sparse, conditions, stats, format } => {
            let args = CostArgs {
                worst_case: *worst_case,
                k_sparse: *k_sparse,
                conditions,
                stats: stats.as_deref(),
                format: *format,
            };
            cost_cmd(source, args, stdout)
        }
        Command::Extract { input, out, flow } => extract_cmd(input, out, *flow, stdout),
        Command::Catalog { command } => catalog_cmd(command, stdout),
        Command::Check { source } => check_cmd(source, stdout),
    }
}

/// Runs one invocation and returns its exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut out = String::new();
    let status = dispatch(&cli, &mut out);
    let _ = stdout.write_all(out.as_bytes());
    match status {
        Ok(()) => 0,
        Err(Failure::Diagnostics(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            1
        }
        Err(Failure::Usage(m)) => {
            let _ = writeln!(stderr, "usage error: {m}");
            2
        }
    }
}
