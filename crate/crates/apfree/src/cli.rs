//! The `apfree` command line.
//!
//! Results go to stdout, diagnostics to stderr as one JSON object
//! `{"error", "message", "exit_code"}`. Exit codes: 0 success, 1 bad
//! arguments, 2 budget exceeded (partial output is printed first where one
//! is defined). Word-valued results print the bare digit string.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use apfree_core::density::{self, default_min_window, IntSeq};
use apfree_core::dyadic::{add_mod1, multiply, sr_decompose, OneSource};
use apfree_core::enumeration::{
    count_low_weight, entropy_bound, entropy_log2_bound, floor_eps_n, log2_big, max_ones_k_ap_free, CountRow,
};
use apfree_core::grid::{self, MaskSpec, DEFAULT_MAX_DEPTH};
use apfree_core::vdw::union_ap_bound_check;
use apfree_core::word::{is_subsequence, longest_ap, parse_word, shift_word, subsequence_shift};
use apfree_core::{BinaryWord, DyadicGrid, VdwOutcome, DEFAULT_NODE_BUDGET};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_rational::Ratio;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::formats::{parse_int_seq, parse_ratio, ratio_string, read_grid, GridFile};
use crate::parallel;

#[derive(Debug, Parser)]
#[command(name = "apfree", version, about = "Exact finite-depth computations on AP-free binary expansions")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct RunConfig {
    /// Output format; CSV is only available for tabular results
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Maximum search nodes (also caps scanned pairs)
    #[arg(long, global = true, env = "APFREE_NODE_BUDGET", default_value_t = DEFAULT_NODE_BUDGET)]
    pub node_budget: u64,
    /// Maximum grid depth
    #[arg(long, global = true, env = "APFREE_DEPTH_BUDGET", default_value_t = DEFAULT_MAX_DEPTH)]
    pub depth_budget: u32,
    /// Worker threads; 0 uses every core. Never changes the output
    #[arg(long, global = true, env = "APFREE_THREADS", default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Progressions, shifts and subsequences of single words
    #[command(subcommand)]
    Word(WordCmd),
    /// Count k-AP-free words of length N
    Count(CountArgs),
    /// Addition mod 1 and its OR/AND carry decomposition
    #[command(subcommand)]
    Sum(SumCmd),
    /// Exact products and the product progression search
    #[command(subcommand)]
    Product(ProductCmd),
    /// Dyadic cell grids: construction, sums, products, runs
    #[command(subcommand)]
    Grid(GridCmd),
    /// Mixed van der Waerden numbers and colorings
    #[command(subcommand)]
    Vdw(VdwCmd),
    /// Density estimates and window-concatenation reductions
    #[command(subcommand)]
    Density(DensityCmd),
}

#[derive(Debug, Subcommand)]
pub enum WordCmd {
    /// Longest progression of digit-1 positions
    LongestAp { word: String },
    /// Whether Y is a binary subsequence of X (smallest shift unless --shift)
    Subsequence {
        y: String,
        x: String,
        #[arg(long)]
        shift: Option<usize>,
    },
    /// Drop the first T digits (multiply by 2^T mod 1)
    Shift {
        word: String,
        #[arg(long)]
        t: usize,
    },
}

#[derive(Debug, Args)]
#[command(args_conflicts_with_subcommands = true)]
pub struct CountArgs {
    #[command(subcommand)]
    pub table: Option<CountTableCmd>,
    /// Forbidden progression length
    #[arg(long)]
    pub k: Option<usize>,
    /// Word length
    #[arg(long)]
    pub n: Option<usize>,
    /// Also report the largest number of ones and its first maximiser
    #[arg(long)]
    pub max_ones: bool,
}

#[derive(Debug, Subcommand)]
pub enum CountTableCmd {
    /// Table of log2(count)/N over several lengths
    BoxDim {
        #[arg(long)]
        k: usize,
        /// Comma-separated lengths
        #[arg(long, value_delimiter = ',', required = true)]
        ns: Vec<usize>,
    },
    /// Number of length-N words with at most M ones
    LowWeight {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    /// Low-weight counts against the binary entropy bound
    Entropy {
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
        ns: Vec<usize>,
        /// Comma-separated eps values in (0, 1/2]
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5")]
        eps: Vec<String>,
    },
}

/// Two words, positionally or with --x/--y.
#[derive(Debug, Args)]
pub struct WordPair {
    #[arg(num_args = 0..=2)]
    pub words: Vec<String>,
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long)]
    pub y: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum SumCmd {
    /// x + y mod 1 at the common length
    Add(WordPair),
    /// s = x OR y, r = x AND y and the source of every one of the sum
    Decompose(WordPair),
    /// Longest progression over all sums of i-AP-free and j-AP-free words
    EmpiricalW {
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        depth: usize,
        /// Also report the mixed van der Waerden number for lengths (i, j, i)
        #[arg(long)]
        with_vdw: bool,
        #[arg(long, default_value_t = 40)]
        vdw_cap: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum ProductCmd {
    /// Exact product as a word of twice the length
    Multiply(WordPair),
    /// Longest progression over products of k-AP-free words
    Search {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        depth: usize,
    },
}

/// Grid sources: `F:<k>` (needs --depth), `mask:<pattern>`, `file:<path>`.
#[derive(Debug, Subcommand)]
pub enum GridCmd {
    /// Cells meeting the k-AP-free set at depth N
    OfF {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: u32,
    },
    /// Cells of the set whose digits may be 1 only where the pattern is
    OfMask {
        #[arg(long)]
        pattern: String,
        /// Repeat the pattern this many times
        #[arg(long, default_value_t = 1)]
        times: usize,
    },
    /// A + B mod 1, or in the reals with --real
    Sumset {
        a: String,
        b: String,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        real: bool,
    },
    /// Coverage of A, A+A, ... mod 1
    Iterate {
        a: String,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        terms: usize,
    },
    /// A + xB for one scale word, or a table over k-AP-free scales
    ScaledSum {
        a: String,
        b: String,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long, conflicts_with_all = ["scan_k", "scan_len"], required_unless_present = "scan_k")]
        x: Option<String>,
        #[arg(long, requires = "scan_len")]
        scan_k: Option<usize>,
        #[arg(long, requires = "scan_k")]
        scan_len: Option<usize>,
    },
    /// Cells meeting {ab} at twice the depth
    ProductGrid {
        a: String,
        b: String,
        #[arg(long)]
        depth: Option<u32>,
    },
    /// Maximal runs of member cells
    Runs {
        a: String,
        #[arg(long)]
        depth: Option<u32>,
    },
    /// F + F*F for the k-AP-free set at depth N, over [0, 2)
    EPlusEe {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: u32,
    },
}

#[derive(Debug, Subcommand)]
pub enum VdwCmd {
    /// Smallest n with no valid coloring, plus a certificate at n - 1
    Number {
        /// Comma-separated progression lengths, one per color
        #[arg(long, value_delimiter = ',', required = true)]
        lengths: Vec<usize>,
        #[arg(long, default_value_t = 40)]
        cap: usize,
    },
    /// Lexicographically least valid coloring of [1, n]
    Coloring {
        #[arg(long, value_delimiter = ',', required = true)]
        lengths: Vec<usize>,
        #[arg(long)]
        n: usize,
    },
    /// Check a union of AP-free sets for a long progression
    UnionCheck {
        #[arg(long, value_delimiter = ',', required = true)]
        lengths: Vec<usize>,
        /// Sets separated by ';', elements by ',' (e.g. "1,2;3")
        #[arg(long)]
        sets: String,
        /// Progression length to look for; defaults to the vdW number
        #[arg(long)]
        terms: Option<usize>,
        #[arg(long, default_value_t = 40)]
        cap: usize,
    },
}

/// Sequence source: --input FILE or --builtin NAME.
#[derive(Debug, Args)]
pub struct SeqSource {
    /// Newline-separated integers or b-file rows
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    pub input: Option<PathBuf>,
    /// burst:H, evens:H, block:L:H, periodic:PATTERN:H or arithmetic:A:D:H
    #[arg(long)]
    pub builtin: Option<String>,
    /// Observation horizon for --input (default: largest element)
    #[arg(long)]
    pub horizon: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum DensityCmd {
    /// Upper, lower and Banach density estimates
    Report {
        #[command(flatten)]
        source: SeqSource,
        /// Default: ceil(sqrt(H))
        #[arg(long)]
        tail_start: Option<u64>,
    },
    /// Concatenate dense windows of growing length (Banach to upper density)
    ReduceBanach {
        #[command(flatten)]
        source: SeqSource,
        /// Fraction in (0, 1) of the best window density that chosen windows must reach
        #[arg(long)]
        rho: String,
        /// Growth factor M > 1
        #[arg(long, default_value = "2")]
        growth: String,
        /// Shortest window considered, also the least N_1 [default: ceil(sqrt(H))]
        #[arg(long)]
        min_window: Option<u64>,
        /// Write the constructed sequence here, one element per line
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Concatenate doubling dense intervals (upper to lower density)
    ReduceUpper {
        #[command(flatten)]
        source: SeqSource,
        /// Fraction in (0, 1) of the upper density that chosen intervals must reach
        #[arg(long)]
        rho: String,
        /// Least N_1 [default: ceil(sqrt(H))]
        #[arg(long)]
        min_window: Option<u64>,
        /// Write the constructed sequence here, one element per line
        #[arg(long)]
        emit: Option<PathBuf>,
    },
}

/// A successful result.
#[derive(Debug)]
pub enum Output {
    Bare(String),
    Object(Value),
    Table(Vec<Map<String, Value>>),
}

#[derive(Debug)]
pub enum CliError {
    BadArgs(String),
    Budget { message: String, partial: Option<Output> },
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::BadArgs(_) => 1,
            CliError::Budget { .. } => 2,
        }
    }
}

fn bad(e: impl std::fmt::Display) -> CliError {
    CliError::BadArgs(e.to_string())
}

type Res = Result<Output, CliError>;

fn word(text: &str) -> Result<BinaryWord, CliError> {
    parse_word(text).map_err(|e| bad(format!("{text:?}: {e}")))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("expected a JSON object"),
    }
}

fn check_k(k: usize) -> Result<(), CliError> {
    if k < 2 {
        return Err(bad(format!("k={k}: progression length must be at least 2")));
    }
    Ok(())
}

impl WordPair {
    fn resolve(&self) -> Result<(BinaryWord, BinaryWord), CliError> {
        let (x, y) = match (&self.x, &self.y, self.words.as_slice()) {
            (Some(x), Some(y), []) => (x.as_str(), y.as_str()),
            (None, None, [x, y]) => (x.as_str(), y.as_str()),
            (Some(x), None, [y]) => (x.as_str(), y.as_str()),
            (None, Some(y), [x]) => (x.as_str(), y.as_str()),
            _ => return Err(bad("expected two words: X Y or --x X --y Y")),
        };
        let (x, y) = (word(x)?, word(y)?);
        if x.len() != y.len() {
            return Err(bad(format!("word lengths differ: {} vs {}", x.len(), y.len())));
        }
        Ok((x, y))
    }
}

/// Parses `argv` and runs the command; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = write!(out, "{e}");
            return 0;
        }
        Err(e) => return report(err, &CliError::BadArgs(e.to_string().trim_end().to_string())),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.config.threads).build() {
        Ok(p) => p,
        Err(e) => return report(err, &bad(e)),
    };
    let result = pool.install(|| execute(&cli));
    let fmt = cli.config.format;
    match result {
        Ok(output) => match emit(out, &output, fmt) {
            Ok(()) => 0,
            Err(e) => report(err, &e),
        },
        Err(CliError::Budget { message, partial: Some(p) }) => {
            if let Err(e) = emit(out, &p, fmt) {
                return report(err, &e);
            }
            report(err, &CliError::Budget { message, partial: None })
        }
        Err(e) => report(err, &e),
    }
}

fn report(err: &mut dyn Write, e: &CliError) -> i32 {
    let (kind, message) = match e {
        CliError::BadArgs(m) => ("bad_arguments", m.as_str()),
        CliError::Budget { message, .. } => ("budget_exceeded", message.as_str()),
    };
    let body = json!({ "error": kind, "message": message, "exit_code": e.exit_code() });
    let _ = writeln!(err, "{body}");
    e.exit_code()
}

fn emit(out: &mut dyn Write, output: &Output, fmt: Format) -> Result<(), CliError> {
    let io = |e: std::io::Error| bad(e);
    match (output, fmt) {
        (Output::Bare(s), _) => writeln!(out, "{s}").map_err(io),
        (Output::Object(v), Format::Json) => writeln!(out, "{v}").map_err(io),
        (Output::Object(_), Format::Csv) => Err(bad("csv output is only available for tabular results")),
        (Output::Table(rows), Format::Json) => {
            for r in rows {
                writeln!(out, "{}", Value::Object(r.clone())).map_err(io)?;
            }
            Ok(())
        }
        (Output::Table(rows), Format::Csv) => write_table_csv(out, rows).map_err(bad),
    }
}

fn write_table_csv(out: &mut dyn Write, rows: &[Map<String, Value>]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(first) = rows.first() {
        w.write_record(first.keys())?;
    }
    for r in rows {
        w.write_record(r.values().map(|v| match v {
            Value::String(s) => s.clone(),
            Value::Null => String::new(),
            other => other.to_string(),
        }))?;
    }
    w.flush()?;
    Ok(())
}

pub fn execute(cli: &Cli) -> Res {
    let cfg = &cli.config;
    match &cli.command {
        Command::Word(c) => word_cmd(c),
        Command::Count(c) => count_cmd(c, cfg),
        Command::Sum(c) => sum_cmd(c, cfg),
        Command::Product(c) => product_cmd(c, cfg),
        Command::Grid(c) => grid_cmd(c, cfg),
        Command::Vdw(c) => vdw_cmd(c),
        Command::Density(c) => density_cmd(c),
    }
}

fn word_cmd(c: &WordCmd) -> Res {
    match c {
        WordCmd::LongestAp { word: w } => {
            let w = word(w)?;
            let ap = longest_ap(&w);
            Ok(Output::Object(json!({ "word": w, "len": ap.len, "witness": ap.witness })))
        }
        WordCmd::Subsequence { y, x, shift } => {
            let (y, x) = (word(y)?, word(x)?);
            let found = match shift {
                Some(s) => is_subsequence(&y, &x, *s).then_some(*s),
                None => subsequence_shift(&y, &x),
            };
            Ok(Output::Object(json!({
                "y": y, "x": x, "is_subsequence": found.is_some(), "shift": found,
            })))
        }
        WordCmd::Shift { word: w, t } => {
            let w = word(w)?;
            Ok(Output::Bare(shift_word(&w, *t).map_err(bad)?.to_string()))
        }
    }
}

fn count_row(n: usize, k: usize, count: u64, nodes: u64) -> Map<String, Value> {
    let row = CountRow::new(n, BigUint::from(count));
    let mut m = Map::new();
    m.insert("N".into(), json!(n));
    m.insert("k".into(), json!(k));
    m.insert("count".into(), json!(count.to_string()));
    m.insert("log2_count_over_N".into(), json!(row.log2_count_over_n));
    m.insert("nodes".into(), json!(nodes));
    m
}

fn budget_error(e: impl std::fmt::Display, partial: Option<Output>) -> CliError {
    CliError::Budget { message: e.to_string(), partial }
}

fn count_cmd(c: &CountArgs, cfg: &RunConfig) -> Res {
    let budget = cfg.node_budget;
    match &c.table {
        Some(CountTableCmd::BoxDim { k, ns }) => {
            check_k(*k)?;
            let mut depths = ns.clone();
            depths.sort_unstable();
            depths.dedup();
            if depths.contains(&0) {
                return Err(bad("lengths must be at least 1"));
            }
            let mut rows = Vec::new();
            for n in depths {
                match parallel::count(n, *k, budget) {
                    Ok(o) => rows.push(count_row(n, *k, o.count, o.nodes)),
                    Err(e) => {
                        return Err(budget_error(
                            format!("count table aborted at N={n}: {e}"),
                            Some(Output::Table(rows)),
                        ))
                    }
                }
            }
            Ok(Output::Table(rows))
        }
        Some(CountTableCmd::LowWeight { n, m }) => {
            let count = count_low_weight(*n, *m);
            Ok(Output::Table(vec![object(json!({
                "N": n, "m": m, "count": count.to_string(), "log2_count": log2_big(&count),
            }))]))
        }
        Some(CountTableCmd::Entropy { ns, eps }) => {
            let eps: Vec<Ratio<u64>> = eps.iter().map(|e| parse_ratio(e).map_err(bad)).collect::<Result<_, _>>()?;
            let mut rows = Vec::new();
            for &n in ns {
                for &e in &eps {
                    let bound = entropy_bound(n, e).map_err(bad)?;
                    let m = floor_eps_n(n, e);
                    let count = count_low_weight(n, m);
                    let holds = log2_big(&count) <= entropy_log2_bound(n, e).map_err(bad)?;
                    rows.push(object(json!({
                        "N": n, "eps": ratio_string(&e), "m": m, "count": count.to_string(),
                        "bound": bound, "holds": holds,
                    })));
                }
            }
            Ok(Output::Table(rows))
        }
        None => {
            let (Some(k), Some(n)) = (c.k, c.n) else {
                return Err(bad("count needs --k and --n (or a table subcommand)"));
            };
            check_k(k)?;
            if n == 0 {
                return Err(bad("--n must be at least 1"));
            }
            let o = match parallel::count(n, k, budget) {
                Ok(o) => o,
                Err(e) => {
                    let partial = object(json!({
                        "N": n, "k": k, "partial_count": e.partial_count.to_string(), "nodes": e.nodes, "budget": e.budget,
                    }));
                    return Err(budget_error(e, Some(Output::Table(vec![partial]))));
                }
            };
            let mut row = count_row(n, k, o.count, o.nodes);
            if c.max_ones {
                let (ones, w) = max_ones_k_ap_free(n, k, budget).map_err(|e| budget_error(e, None))?;
                row.insert("max_ones".into(), json!(ones));
                row.insert("maximizer".into(), json!(w));
            }
            Ok(Output::Table(vec![row]))
        }
    }
}

fn vdw_outcome_json(lengths: &[usize], cap: usize) -> Result<Value, CliError> {
    let outcome = parallel::vdw_number(lengths, cap).map_err(bad)?;
    Ok(match outcome {
        VdwOutcome::Exact { n } => {
            let cert = parallel::find_coloring(lengths, n - 1).map_err(bad)?;
            json!({ "lengths": lengths, "n": n, "certificate": cert.map(|c| c.to_string()) })
        }
        VdwOutcome::ExceedsCap { cap } => {
            let cert = parallel::find_coloring(lengths, cap).map_err(bad)?;
            json!({ "lengths": lengths, "exceeds_cap": cap, "certificate": cert.map(|c| c.to_string()) })
        }
    })
}

fn sum_cmd(c: &SumCmd, cfg: &RunConfig) -> Res {
    match c {
        SumCmd::Add(p) => {
            let (x, y) = p.resolve()?;
            Ok(Output::Bare(add_mod1(&x, &y).map_err(bad)?.to_string()))
        }
        SumCmd::Decompose(p) => {
            let (x, y) = p.resolve()?;
            let d = sr_decompose(&x, &y).map_err(bad)?;
            let check = match d.check() {
                Ok(()) => Value::String("ok".into()),
                Err(v) => Value::String(format!("{v:?}")),
            };
            let sources: Vec<Value> = d
                .classify_sum_ones()
                .into_iter()
                .map(|(pos, kind)| json!({ "position": pos, "source": kind.map(source_name) }))
                .collect();
            let block_local = d.block_local_sum() == d.sum;
            let mut m = object(to_value(&d));
            m.insert("check".into(), check);
            m.insert("block_local".into(), json!(block_local));
            m.insert("sources".into(), json!(sources));
            Ok(Output::Object(Value::Object(m)))
        }
        SumCmd::EmpiricalW { i, j, depth, with_vdw, vdw_cap } => {
            check_k(*i)?;
            check_k(*j)?;
            if *depth == 0 {
                return Err(bad("--depth must be at least 1"));
            }
            let cert = parallel::empirical_w(*i, *j, *depth, cfg.node_budget);
            let mut m = object(to_value(&cert));
            if *with_vdw {
                m.insert("vdw_bound".into(), vdw_outcome_json(&[*i, *j, *i], *vdw_cap)?);
            }
            let out = Output::Object(Value::Object(m));
            if !cert.exhaustive {
                return Err(budget_error("node budget exhausted before the scan completed", Some(out)));
            }
            Ok(out)
        }
    }
}

fn source_name(s: OneSource) -> &'static str {
    match s {
        OneSource::FromS => "from_s",
        OneSource::FromR => "from_r",
        OneSource::CarryLeftOfBlock => "carry_left_of_block",
    }
}

fn product_cmd(c: &ProductCmd, cfg: &RunConfig) -> Res {
    match c {
        ProductCmd::Multiply(p) => {
            let (x, y) = p.resolve()?;
            Ok(Output::Bare(multiply(&x, &y).map_err(bad)?.to_string()))
        }
        ProductCmd::Search { k, depth } => {
            check_k(*k)?;
            if *depth == 0 {
                return Err(bad("--depth must be at least 1"));
            }
            let report = parallel::product_search(*k, *depth, cfg.node_budget);
            let out = Output::Object(to_value(&report));
            if !report.exhaustive {
                return Err(budget_error("node budget exhausted before the scan completed", Some(out)));
            }
            Ok(out)
        }
    }
}

fn grid_error(e: grid::GridError) -> CliError {
    match e {
        grid::GridError::Budget(b) => budget_error(b, None),
        grid::GridError::DepthBudget { .. } => budget_error(e, None),
        other => bad(other),
    }
}

fn load_grid(source: &str, depth: Option<u32>, cfg: &RunConfig) -> Result<DyadicGrid, CliError> {
    let (kind, rest) = source
        .split_once(':')
        .ok_or_else(|| bad(format!("grid source {source:?}: expected F:<k>, mask:<pattern> or file:<path>")))?;
    match kind {
        "F" | "f" => {
            let k: usize = rest.parse().map_err(|_| bad(format!("grid source {source:?}: bad k")))?;
            let n = depth.ok_or_else(|| bad("F:<k> grid sources need --depth"))?;
            grid::grid_of_f(k, n, cfg.depth_budget, cfg.node_budget).map_err(grid_error)
        }
        "mask" => {
            let pattern = word(rest)?;
            if depth.is_some_and(|d| d as usize != pattern.len()) {
                return Err(bad("mask length differs from --depth"));
            }
            grid::grid_of_mask(&MaskSpec { pattern }, cfg.depth_budget).map_err(grid_error)
        }
        "file" => {
            let text = std::fs::read_to_string(rest).map_err(|e| bad(format!("{rest}: {e}")))?;
            let g = read_grid(&text, cfg.depth_budget).map_err(|e| bad(format!("{rest}: {e}")))?;
            if depth.is_some_and(|d| d != g.depth()) {
                return Err(bad("grid file depth differs from --depth"));
            }
            Ok(g)
        }
        _ => Err(bad(format!("grid source {source:?}: unknown kind {kind:?}"))),
    }
}

fn grid_json(g: &DyadicGrid) -> Output {
    let mut m = object(to_value(&GridFile::from_grid(g)));
    let log2 = if g.count() == 0 { Value::Null } else { json!((g.count() as f64).log2() / f64::from(g.depth())) };
    m.insert("log2_count_over_depth".into(), log2);
    Output::Object(Value::Object(m))
}

fn coverage_row(label: &str, value: Value, g: &DyadicGrid) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert(label.into(), value);
    m.insert("count".into(), json!(g.count()));
    m.insert("coverage".into(), json!(g.coverage()));
    m.insert("longest_run".into(), json!(grid::longest_full_run(g).0));
    m
}

fn grid_cmd(c: &GridCmd, cfg: &RunConfig) -> Res {
    match c {
        GridCmd::OfF { k, n } => {
            Ok(grid_json(&grid::grid_of_f(*k, *n, cfg.depth_budget, cfg.node_budget).map_err(grid_error)?))
        }
        GridCmd::OfMask { pattern, times } => {
            if *times == 0 {
                return Err(bad("--times must be at least 1"));
            }
            let mask = MaskSpec::periodic(&word(pattern)?, *times);
            Ok(grid_json(&grid::grid_of_mask(&mask, cfg.depth_budget).map_err(grid_error)?))
        }
        GridCmd::Sumset { a, b, depth, real } => {
            let (a, b) = (load_grid(a, *depth, cfg)?, load_grid(b, *depth, cfg)?);
            let s = if *real { grid::sumset_real(&a, &b) } else { grid::sumset_mod1(&a, &b) };
            Ok(grid_json(&s.map_err(grid_error)?))
        }
        GridCmd::Iterate { a, depth, terms } => {
            let a = load_grid(a, *depth, cfg)?;
            let rows = grid::iterate_sum(&a, *terms)
                .map_err(grid_error)?
                .iter()
                .map(|(t, g)| coverage_row("t", json!(t), g))
                .collect();
            Ok(Output::Table(rows))
        }
        GridCmd::ScaledSum { a, b, depth, x, scan_k, scan_len } => {
            let (a, b) = (load_grid(a, *depth, cfg)?, load_grid(b, *depth, cfg)?);
            if let Some(x) = x {
                return Ok(grid_json(&grid::scaled_sum(&a, &word(x)?, &b).map_err(grid_error)?));
            }
            let (k, len) = (scan_k.expect("clap requires scan_k"), scan_len.expect("clap requires scan_len"));
            check_k(k)?;
            if len == 0 || len > 64 {
                return Err(bad("--scan-len must lie in [1, 64]"));
            }
            let (scales, complete) = apfree_core::dyadic::free_word_list(len, k, cfg.node_budget);
            let rows = scales
                .iter()
                .map(|x| grid::scaled_sum(&a, x, &b).map(|g| coverage_row("e", json!(x), &g)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(grid_error)?;
            if !complete {
                return Err(budget_error("node budget exhausted while listing scales", Some(Output::Table(rows))));
            }
            Ok(Output::Table(rows))
        }
        GridCmd::ProductGrid { a, b, depth } => {
            let (a, b) = (load_grid(a, *depth, cfg)?, load_grid(b, *depth, cfg)?);
            Ok(grid_json(&grid::product_grid(&a, &b, cfg.depth_budget / 2).map_err(grid_error)?))
        }
        GridCmd::Runs { a, depth } => {
            let a = load_grid(a, *depth, cfg)?;
            let rows = a
                .runs()
                .into_iter()
                .map(|r| object(json!({ "start": r.start, "end": r.end, "length": r.len() })))
                .collect();
            Ok(Output::Table(rows))
        }
        GridCmd::EPlusEe { k, n } => {
            Ok(grid_json(&grid::e_plus_ee(*k, *n, cfg.depth_budget / 2, cfg.node_budget).map_err(grid_error)?))
        }
    }
}

fn parse_sets(text: &str) -> Result<Vec<Vec<usize>>, CliError> {
    text.split(';')
        .map(|set| {
            set.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>().map_err(|_| bad(format!("set element {s:?} is not an integer"))))
                .collect()
        })
        .collect()
}

fn vdw_cmd(c: &VdwCmd) -> Res {
    match c {
        VdwCmd::Number { lengths, cap } => Ok(Output::Object(vdw_outcome_json(lengths, *cap)?)),
        VdwCmd::Coloring { lengths, n } => {
            let found = parallel::find_coloring(lengths, *n).map_err(bad)?;
            Ok(Output::Object(json!({
                "lengths": lengths, "n": n, "coloring": found.map(|c| c.to_string()),
            })))
        }
        VdwCmd::UnionCheck { lengths, sets, terms, cap } => {
            let sets = parse_sets(sets)?;
            let terms = match terms {
                Some(t) => *t,
                None => match parallel::vdw_number(lengths, *cap).map_err(bad)? {
                    VdwOutcome::Exact { n } => n,
                    VdwOutcome::ExceedsCap { cap } => {
                        return Err(bad(format!("vdW number exceeds cap {cap}; pass --terms or raise --cap")))
                    }
                },
            };
            let r = union_ap_bound_check(&sets, lengths, terms).map_err(bad)?;
            Ok(Output::Object(json!({
                "lengths": lengths, "terms": terms, "holds": r.holds, "witness": r.witness,
            })))
        }
    }
}

fn load_seq(src: &SeqSource) -> Result<IntSeq, CliError> {
    if let Some(path) = &src.input {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        return parse_int_seq(&text, src.horizon).map_err(|e| bad(format!("{}: {e}", path.display())));
    }
    let name = src.builtin.as_deref().expect("clap requires a source");
    crate::builtin_seq(name).map_err(bad)
}

fn min_window(a: &IntSeq, given: Option<u64>) -> u64 {
    given.unwrap_or_else(|| default_min_window(a.horizon()))
}

/// `p/q` rendering of a signed rational.
fn signed(r: &Ratio<i128>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn to_signed(r: Ratio<u64>) -> Ratio<i128> {
    Ratio::new(i128::from(*r.numer()), i128::from(*r.denom()))
}

fn write_seq(path: &PathBuf, b: &IntSeq) -> Result<(), CliError> {
    let mut text = String::with_capacity(b.len() * 8);
    for e in b.elements() {
        text.push_str(&e.to_string());
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| bad(format!("{}: {e}", path.display())))
}

fn density_cmd(c: &DensityCmd) -> Res {
    match c {
        DensityCmd::Report { source, tail_start } => {
            let a = load_seq(source)?;
            if a.horizon() == 0 {
                return Err(bad("sequence horizon is 0"));
            }
            let t = min_window(&a, *tail_start);
            let report = density::density_report(&a, t).map_err(bad)?;
            let mut m = object(to_value(&report));
            m.insert("longest_ap".into(), to_value(&density::longest_ap_of_seq(&a)));
            Ok(Output::Object(Value::Object(m)))
        }
        DensityCmd::ReduceBanach { source, rho, growth, min_window: mw, emit } => {
            let a = load_seq(source)?;
            let (rho, growth) = (parse_ratio(rho).map_err(bad)?, parse_ratio(growth).map_err(bad)?);
            let (b, log) = density::banach_to_upper_transform(&a, rho, growth, min_window(&a, *mw)).map_err(bad)?;
            let n1 = log.n1();
            let upper = density::density_report(&b, n1).map_err(bad)?.upper_est;
            let g = to_signed(growth);
            let bound = to_signed(rho) * (g - 1) / g * to_signed(log.alpha_hat) - Ratio::new(1, i128::from(n1));
            if let Some(path) = emit {
                write_seq(path, &b)?;
            }
            Ok(Output::Object(json!({
                "log": log,
                "b": { "count": b.len(), "horizon": b.horizon() },
                "measured": {
                    "n1": n1,
                    "upper_est": ratio_string(&upper),
                    "bound": signed(&(bound)),
                    "holds": to_signed(upper) >= bound,
                },
            })))
        }
        DensityCmd::ReduceUpper { source, rho, min_window: mw, emit } => {
            let a = load_seq(source)?;
            let rho = parse_ratio(rho).map_err(bad)?;
            let (b, log) = density::upper_to_lower_transform(&a, rho, min_window(&a, *mw)).map_err(bad)?;
            let n1 = log.n1();
            let lower = density::density_report(&b, n1).map_err(bad)?.lower_est;
            let bound = to_signed(rho) * to_signed(log.c_hat) / 3 - Ratio::new(1, i128::from(n1));
            if let Some(path) = emit {
                write_seq(path, &b)?;
            }
            Ok(Output::Object(json!({
                "log": log,
                "b": { "count": b.len(), "horizon": b.horizon() },
                "measured": {
                    "n1": n1,
                    "lower_est": ratio_string(&lower),
                    "bound": signed(&bound),
                    "holds": to_signed(lower) >= bound,
                },
            })))
        }
    }
}
