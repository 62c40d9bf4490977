//! `skipalign` command-line driver: `align`, `verify` and `stats`.
//!
//! Exit codes: 0 ok, 1 input error, 2 some trace failed, 3 a search or oracle
//! budget was exceeded, 4 the search and the oracle disagree.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use thiserror::Error;

use skipalign_core::io::{
    self as sio, AlignmentRecord, DocumentError, LogError, LogFormat, MoveKind, ParseModelError, ResultDocument,
    TraceResult, Variant,
};
use skipalign_core::oracle::{self, OracleBudget, OracleError};
use skipalign_core::search::{self, Heuristic, SearchError, SearchLimits};
use skipalign_core::{Model, SkipAlignment};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "skipalign",
    version,
    about = "Optimal skip alignments of event logs against process trees"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute all optimal skip alignments in normal form for every trace variant.
    Align(RunConfig),
    /// Cross-check the search against the brute-force oracle.
    Verify(RunConfig),
    /// Summarize a results document.
    Stats(StatsConfig),
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// File holding the process tree in text form, e.g. `->(a,X(b,c),d)`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub log: PathBuf,
    /// Log format; inferred from the file extension when omitted.
    #[arg(long)]
    pub format: Option<LogFormat>,
    #[arg(long, default_value = "model-remainder")]
    pub heuristic: Heuristic,
    /// Per-trace limit on expanded search states.
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_states: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
    /// Drop one normal form from every search result before comparing.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

impl RunConfig {
    pub fn new(model: impl Into<PathBuf>, log: impl Into<PathBuf>) -> RunConfig {
        RunConfig {
            model: model.into(),
            log: log.into(),
            format: None,
            heuristic: Heuristic::default(),
            max_states: SearchLimits::default().max_states,
            out: None,
            workers: None,
            inject_fault: false,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct StatsConfig {
    /// Results document written by `align`.
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Model { path: PathBuf, source: ParseModelError },
    #[error("{}: {source}", path.display())]
    Log { path: PathBuf, source: LogError },
    #[error("{}: cannot infer the log format, pass --format", path.display())]
    UnknownFormat { path: PathBuf },
    #[error("{}: {source}", path.display())]
    Results { path: PathBuf, source: DocumentError },
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match &cli.command {
        Command::Align(cfg) => cmd_align(cfg),
        Command::Verify(cfg) => cmd_verify(cfg),
        Command::Stats(cfg) => cmd_stats(cfg),
    }
}

fn report(err: CliError) -> i32 {
    eprintln!("error: {err}");
    EXIT_INPUT
}

pub fn load_model(path: &Path) -> Result<Model, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    sio::parse_model(text.trim()).map_err(|source| CliError::Model {
        path: path.to_owned(),
        source,
    })
}

pub fn load_variants(path: &Path, format: Option<LogFormat>) -> Result<Vec<Variant>, CliError> {
    let format = format
        .or_else(|| LogFormat::from_path(path))
        .ok_or_else(|| CliError::UnknownFormat { path: path.to_owned() })?;
    let cases = sio::parse_log(path, format).map_err(|source| CliError::Log {
        path: path.to_owned(),
        source,
    })?;
    Ok(sio::group_variants(&cases))
}

fn pool(workers: Option<u64>) -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n as usize);
    }
    Ok(builder.build()?)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Write {
            path: path.to_owned(),
            source,
        }),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Write {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn trace_id(i: usize) -> String {
    format!("variant-{}", i + 1)
}

// --- align ---------------------------------------------------------------

fn align_variant(model: &Model, cfg: &RunConfig, i: usize, v: &Variant) -> TraceResult {
    let limits = SearchLimits {
        max_states: cfg.max_states,
    };
    let mut result = TraceResult {
        trace_id: trace_id(i),
        cases: v.case_ids.clone(),
        multiplicity: v.case_ids.len(),
        events: v.trace.clone(),
        cost: None,
        alignments: Vec::new(),
        error: None,
    };
    match search::enumerate_all_optimal_with(model, &v.trace, cfg.heuristic, limits) {
        Ok(out) => {
            result.cost = Some(out.cost);
            result.alignments = out
                .alignments
                .iter()
                .map(|d| AlignmentRecord::from_moves(model, d.moves()))
                .collect();
        }
        Err(e) => result.error = Some(e.to_string()),
    }
    result
}

/// Aligns every variant of the log; the flag is set when some trace failed.
pub fn align_document(cfg: &RunConfig) -> Result<(ResultDocument, bool), CliError> {
    let model = load_model(&cfg.model)?;
    let variants = load_variants(&cfg.log, cfg.format)?;
    let traces: Vec<TraceResult> = pool(cfg.workers)?.install(|| {
        variants
            .par_iter()
            .enumerate()
            .map(|(i, v)| align_variant(&model, cfg, i, v))
            .collect()
    });
    let failed = traces.iter().any(|t| t.error.is_some());
    Ok((
        ResultDocument {
            traces,
            ..ResultDocument::default()
        },
        failed,
    ))
}

pub fn cmd_align(cfg: &RunConfig) -> i32 {
    let (doc, failed) = match align_document(cfg) {
        Ok(r) => r,
        Err(e) => return report(e),
    };
    for t in doc.traces.iter().filter(|t| t.error.is_some()) {
        eprintln!(
            "{} {}: {}",
            t.trace_id,
            sio::trace_to_text(&t.events),
            t.error.as_deref().unwrap_or("")
        );
    }
    if let Err(e) = write_output(cfg.out.as_deref(), &sio::write_results_pretty(&doc)) {
        return report(e);
    }
    if failed {
        EXIT_PARTIAL
    } else {
        EXIT_OK
    }
}

// --- verify --------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Agree {
        cost: u32,
        count: usize,
    },
    CostMismatch {
        search: u32,
        oracle: u32,
    },
    SetMismatch {
        only_search: Vec<SkipAlignment>,
        only_oracle: Vec<SkipAlignment>,
    },
    Budget(String),
    Failed(String),
}

impl Verdict {
    fn exit_code(&self) -> i32 {
        match self {
            Verdict::Agree { .. } => EXIT_OK,
            Verdict::CostMismatch { .. } | Verdict::SetMismatch { .. } => EXIT_MISMATCH,
            Verdict::Budget(_) => EXIT_BUDGET,
            Verdict::Failed(_) => EXIT_PARTIAL,
        }
    }
}

/// Compares the search result for `trace` with the oracle's coinciding normal forms.
pub fn verify_trace(model: &Model, trace: &[String], cfg: &RunConfig) -> Verdict {
    let limits = SearchLimits {
        max_states: cfg.max_states,
    };
    let found = match search::enumerate_all_optimal_with(model, trace, cfg.heuristic, limits) {
        Ok(out) => out,
        Err(e @ SearchError::MaxStatesExceeded(_)) => return Verdict::Budget(e.to_string()),
        Err(e) => return Verdict::Failed(e.to_string()),
    };
    let (oracle_cost, pairs) = match oracle::coinciding_map(model, trace, &OracleBudget::default()) {
        Ok(r) => r,
        Err(e @ OracleError::BudgetExceeded(_)) => return Verdict::Budget(e.to_string()),
        Err(e) => return Verdict::Failed(e.to_string()),
    };
    if found.cost != oracle_cost {
        return Verdict::CostMismatch {
            search: found.cost,
            oracle: oracle_cost,
        };
    }
    let mut ours = found.alignments;
    if cfg.inject_fault {
        ours.pop_first();
    }
    let theirs: BTreeSet<SkipAlignment> = pairs.into_iter().map(|(_, d)| d).collect();
    if ours == theirs {
        return Verdict::Agree {
            cost: found.cost,
            count: ours.len(),
        };
    }
    Verdict::SetMismatch {
        only_search: ours.difference(&theirs).cloned().collect(),
        only_oracle: theirs.difference(&ours).cloned().collect(),
    }
}

fn render_verdict(out: &mut String, id: &str, trace: &[String], verdict: &Verdict) {
    let trace = sio::trace_to_text(trace);
    let _ = match verdict {
        Verdict::Agree { cost, count } => writeln!(out, "{id} {trace}: ok, cost {cost}, {count} normal form(s)"),
        Verdict::CostMismatch { search, oracle } => {
            writeln!(
                out,
                "{id} {trace}: MISMATCH, search cost {search}, oracle cost {oracle}"
            )
        }
        Verdict::SetMismatch {
            only_search,
            only_oracle,
        } => {
            let _ = writeln!(out, "{id} {trace}: MISMATCH");
            for d in only_search {
                let _ = writeln!(out, "  - search only: {d}");
            }
            for d in only_oracle {
                let _ = writeln!(out, "  + oracle only: {d}");
            }
            Ok(())
        }
        Verdict::Budget(msg) => writeln!(out, "{id} {trace}: budget, {msg}"),
        Verdict::Failed(msg) => writeln!(out, "{id} {trace}: failed, {msg}"),
    };
}

pub fn cmd_verify(cfg: &RunConfig) -> i32 {
    let loaded = load_model(&cfg.model).and_then(|m| Ok((m, load_variants(&cfg.log, cfg.format)?)));
    let (model, variants) = match loaded {
        Ok(r) => r,
        Err(e) => return report(e),
    };
    let verdicts: Vec<Verdict> = match pool(cfg.workers) {
        Ok(p) => p.install(|| {
            variants
                .par_iter()
                .map(|v| verify_trace(&model, &v.trace, cfg))
                .collect()
        }),
        Err(e) => return report(e),
    };
    let mut text = String::new();
    for (i, (v, verdict)) in variants.iter().zip(&verdicts).enumerate() {
        render_verdict(&mut text, &trace_id(i), &v.trace, verdict);
    }
    if let Err(e) = write_output(cfg.out.as_deref(), &text) {
        return report(e);
    }
    // mismatches outrank budget overruns, which outrank other failures
    let codes: BTreeSet<i32> = verdicts.iter().map(Verdict::exit_code).collect();
    [EXIT_MISMATCH, EXIT_BUDGET, EXIT_PARTIAL]
        .into_iter()
        .find(|c| codes.contains(c))
        .unwrap_or(EXIT_OK)
}

// --- stats ---------------------------------------------------------------

/// Aggregates over a results document. Move counts sum over all reported
/// normal forms of a trace, weighted by the trace's multiplicity.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    pub traces: usize,
    pub cases: usize,
    pub failed: usize,
    /// activity -> (log moves, synchronous moves)
    pub activities: BTreeMap<String, (usize, usize)>,
    /// block id -> skip moves
    pub skips: BTreeMap<String, usize>,
    /// optimal cost -> (traces, cases)
    pub costs: BTreeMap<u32, (usize, usize)>,
    /// trace id -> number of normal forms
    pub normal_forms: Vec<(String, usize)>,
}

pub fn collect_stats(doc: &ResultDocument) -> Stats {
    let mut st = Stats {
        traces: doc.traces.len(),
        ..Stats::default()
    };
    for t in &doc.traces {
        st.cases += t.multiplicity;
        if t.error.is_some() {
            st.failed += 1;
        }
        if let Some(c) = t.cost {
            let e = st.costs.entry(c).or_default();
            e.0 += 1;
            e.1 += t.multiplicity;
        }
        st.normal_forms.push((t.trace_id.clone(), t.alignments.len()));
        for mv in t.alignments.iter().flat_map(|a| &a.moves) {
            match mv.kind {
                MoveKind::Log => {
                    st.activities.entry(mv.label.clone().unwrap_or_default()).or_default().0 += t.multiplicity
                }
                MoveKind::Sync => {
                    st.activities.entry(mv.label.clone().unwrap_or_default()).or_default().1 += t.multiplicity
                }
                MoveKind::Skip => *st.skips.entry(mv.block.clone().unwrap_or_default()).or_default() += t.multiplicity,
                MoveKind::Model => {}
            }
        }
    }
    st
}

fn block_order(id: &str) -> (u64, &str) {
    (id.trim_start_matches('B').parse().unwrap_or(u64::MAX), id)
}

pub fn render_stats(st: &Stats) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "traces {}  cases {}  failed {}", st.traces, st.cases, st.failed);
    let _ = writeln!(out, "\nactivity\tlog\tsync");
    for (a, (log, sync)) in &st.activities {
        let _ = writeln!(out, "{a}\t{log}\t{sync}");
    }
    let _ = writeln!(out, "\nblock\tskips");
    let mut blocks: Vec<_> = st.skips.iter().collect();
    blocks.sort_by(|a, b| block_order(a.0).cmp(&block_order(b.0)));
    for (b, n) in blocks {
        let _ = writeln!(out, "{b}\t{n}");
    }
    let _ = writeln!(out, "\ncost\ttraces\tcases");
    for (c, (traces, cases)) in &st.costs {
        let _ = writeln!(out, "{c}\t{traces}\t{cases}");
    }
    let _ = writeln!(out, "\ntrace\tnormal_forms");
    for (id, n) in &st.normal_forms {
        let _ = writeln!(out, "{id}\t{n}");
    }
    out
}

pub fn load_results(path: &Path) -> Result<ResultDocument, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    sio::read_results(&text).map_err(|source| CliError::Results {
        path: path.to_owned(),
        source,
    })
}

pub fn cmd_stats(cfg: &StatsConfig) -> i32 {
    let doc = match load_results(&cfg.results) {
        Ok(d) => d,
        Err(e) => return report(e),
    };
    match write_output(cfg.out.as_deref(), &render_stats(&collect_stats(&doc))) {
        Ok(()) => EXIT_OK,
        Err(e) => report(e),
    }
}
