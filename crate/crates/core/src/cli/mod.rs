//! Command implementations behind the `cito` binary: input loading, the
//! analyze, order, compare and gen commands, and their reports.

pub mod report;
pub mod synth;
pub mod wilcoxon;

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use thiserror::Error;

use crate::cfg::{extract_statements, statement_probability, CfgError};
use crate::coupling::{ocplx, CouplingError, Weights};
use crate::eord::{build_eord, build_ord, relationship_stats, Eord, DEFAULT_MAX_CHAIN_LEN};
use crate::frontend::{compile, FrontendError, SourceUnit};
use crate::model::{load_pmif, save_pmif, PmifError, ProgramModel};
use crate::orders::{
    graph_based, multilevel_feedback, ria_traced, GraphConfig, OrderError, RiaConfig, Strategy,
    DEFAULT_CYCLE_CAP,
};

pub use report::{
    render_analyze_table, render_run_table, AnalyzeReport, ChainOut, Histogram, MeanCost, Metric,
    OperationOut, PairTest, RunReport, StatementOut, StrategyRun, StrategySummary,
};
pub use synth::{generate_synthetic, generate_synthetic_ast, SynthSpec};
pub use wilcoxon::{wilcoxon_signed_rank, Decision, WilcoxonOutcome, WilcoxonResult, ALPHA};

/// Longest chain length any command accepts.
pub const MAX_CHAIN_LEN: usize = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error("cannot load {path}")]
    Pmif {
        path: PathBuf,
        #[source]
        source: PmifError,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    /// 1 for bad input, 2 for analysis failures, 3 for internal errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. }
            | CliError::Frontend(_)
            | CliError::Pmif { .. }
            | CliError::Usage(_) => 1,
            CliError::Order(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl From<CouplingError> for CliError {
    fn from(e: CouplingError) -> Self {
        CliError::Invariant(e.to_string())
    }
}

impl From<CfgError> for CliError {
    fn from(e: CfgError) -> Self {
        CliError::Invariant(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Pmif,
    Minij,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pmif" => Ok(InputFormat::Pmif),
            "minij" => Ok(InputFormat::Minij),
            _ => Err(format!("unknown format `{s}` (expected pmif or minij)")),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("model")
        .to_string()
}

/// Loads a PMIF file, a `.minij` file, or every `.minij` file in a directory.
/// Without an explicit format, files are told apart by extension.
pub fn load_input(path: &Path, format: Option<InputFormat>) -> Result<ProgramModel, CliError> {
    let meta = fs::metadata(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if meta.is_dir() {
        if format == Some(InputFormat::Pmif) {
            return Err(CliError::Usage(format!(
                "{}: PMIF input must be a file",
                path.display()
            )));
        }
        let entries = fs::read_dir(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut files: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "minij"))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(CliError::Usage(format!(
                "{}: no .minij files found",
                path.display()
            )));
        }
        let units = files
            .iter()
            .map(|f| Ok(SourceUnit::new(f.display().to_string(), read(f)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let name = path
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or("model")
            .to_string();
        return Ok(compile(&name, &units)?);
    }
    let format = match format {
        Some(f) => f,
        None => match path.extension().and_then(|x| x.to_str()) {
            Some("minij") => InputFormat::Minij,
            Some("json") | Some("pmif") => InputFormat::Pmif,
            _ => {
                return Err(CliError::Usage(format!(
                    "{}: cannot tell the format from the extension; pass --format",
                    path.display()
                )))
            }
        },
    };
    let text = read(path)?;
    match format {
        InputFormat::Minij => Ok(compile(
            &stem(path),
            &[SourceUnit::new(path.display().to_string(), text)],
        )?),
        InputFormat::Pmif => load_pmif(text.as_bytes()).map_err(|source| CliError::Pmif {
            path: path.to_path_buf(),
            source,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub max_chain_len: usize,
    /// `false` runs on the direct graph only.
    pub transitive: bool,
    pub weights: Weights,
    pub break_any: bool,
    pub cycle_cap: usize,
    /// RIA seed; repeated runs use `seed + k`.
    pub seed: u64,
    pub iterations: u64,
    pub sa_temp: Option<f64>,
    /// Omit wall-clock fields so reports are reproducible byte for byte.
    pub no_timestamp: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            max_chain_len: DEFAULT_MAX_CHAIN_LEN,
            transitive: true,
            weights: Weights::default(),
            break_any: false,
            cycle_cap: DEFAULT_CYCLE_CAP,
            seed: 0,
            iterations: 1000,
            sa_temp: None,
            no_timestamp: false,
        }
    }
}

impl RunOptions {
    fn check(&self) -> Result<(), CliError> {
        if !(3..=MAX_CHAIN_LEN).contains(&self.max_chain_len) {
            return Err(CliError::Usage(format!(
                "chain length must be 3, 4 or 5, got {}",
                self.max_chain_len
            )));
        }
        if self.sa_temp.is_some_and(|t| !(t.is_finite() && t > 0.0)) {
            return Err(CliError::Usage(
                "annealing temperature must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// The graph a command works on, per the transitive flag.
pub fn build_graph(model: &ProgramModel, opts: &RunOptions) -> Eord {
    if opts.transitive {
        build_eord(model, opts.max_chain_len)
    } else {
        build_ord(model)
    }
}

/// Builds the graph and runs one strategy on it, timing both.
pub fn run_strategy(
    model: &ProgramModel,
    strategy: Strategy,
    opts: &RunOptions,
    seed: u64,
) -> Result<(StrategyRun, Eord), CliError> {
    let start = Instant::now();
    let eord = build_graph(model, opts);
    let order = match strategy {
        Strategy::Graph => graph_based(
            &eord,
            &opts.weights,
            &GraphConfig {
                break_any: opts.break_any,
                cycle_cap: opts.cycle_cap,
            },
        )?,
        Strategy::Feedback => multilevel_feedback(&eord, &opts.weights),
        Strategy::Ria => {
            ria_traced(
                &eord,
                &opts.weights,
                &RiaConfig {
                    seed,
                    iterations: opts.iterations,
                    sa_temp: opts.sa_temp,
                },
            )
            .order
        }
    };
    let elapsed = start.elapsed();
    let cost = ocplx(&eord, &order.classes, &opts.weights)?;
    let run = StrategyRun {
        order: order.classes,
        cost,
        meta: order.meta,
        runtime_ms: (!opts.no_timestamp).then(|| millis(elapsed)),
    };
    Ok((run, eord))
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn timestamp(opts: &RunOptions) -> Option<u64> {
    if opts.no_timestamp {
        return None;
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .ok()
        .map(|d| d.as_secs())
}

fn summarize(strategy: Strategy, runs: Vec<StrategyRun>) -> StrategySummary {
    let costs: Vec<_> = runs.iter().map(|r| r.cost).collect();
    let times: Option<Vec<f64>> = runs.iter().map(|r| r.runtime_ms).collect();
    StrategySummary {
        strategy,
        mean: MeanCost::of(&costs),
        mean_runtime_ms: times.map(|t| t.iter().sum::<f64>() / t.len().max(1) as f64),
        runs,
        rt: None,
    }
}

/// Fills in RT against the first summary of strategy `base`, which gets
/// exactly 1.
fn assign_rt(summaries: &mut [StrategySummary], base: Strategy) {
    let Some(base_idx) = summaries.iter().position(|s| s.strategy == base) else {
        return;
    };
    let Some(base_time) = summaries[base_idx].mean_runtime_ms else {
        return;
    };
    for (i, s) in summaries.iter_mut().enumerate() {
        s.rt = if i == base_idx {
            Some(1.0)
        } else {
            s.mean_runtime_ms
                .filter(|_| base_time > 0.0)
                .map(|t| t / base_time)
        };
    }
}

fn check_report(report: &RunReport, eord: &Eord) -> Result<(), CliError> {
    for s in &report.strategies {
        for r in &s.runs {
            let recomputed = ocplx(eord, &r.order, &report.weights)?;
            if recomputed != r.cost {
                return Err(CliError::Invariant(format!(
                    "{} order cost {} does not match recomputation {}",
                    s.strategy, r.cost.ocplx, recomputed.ocplx
                )));
            }
        }
    }
    let base = report
        .strategies
        .iter()
        .find(|s| s.strategy == report.rt_base);
    if base.is_some_and(|b| b.mean_runtime_ms.is_some() && b.rt != Some(1.0)) {
        return Err(CliError::Invariant("reference strategy RT is not 1".into()));
    }
    Ok(())
}

/// Runs one strategy once.
pub fn cmd_order(
    model: &ProgramModel,
    strategy: Strategy,
    opts: &RunOptions,
) -> Result<RunReport, CliError> {
    opts.check()?;
    let (run, eord) = run_strategy(model, strategy, opts, opts.seed)?;
    let mut strategies = vec![summarize(strategy, vec![run])];
    assign_rt(&mut strategies, Strategy::Feedback);
    let report = RunReport {
        model: model.name.clone(),
        classes: eord.nodes.len(),
        edges: eord.edges.len(),
        transitive: opts.transitive,
        max_chain_len: opts.max_chain_len,
        weights: opts.weights,
        rt_base: Strategy::Feedback,
        repeats: 1,
        timestamp: timestamp(opts),
        strategies,
        wilcoxon: Vec::new(),
    };
    check_report(&report, &eord)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    /// Strategies in report order; may repeat.
    pub strategies: Vec<Strategy>,
    pub repeats: usize,
    /// Denominator of RT; added to the run list when missing.
    pub rt_base: Strategy,
    /// Run strategies one after another instead of on parallel threads.
    pub serial: bool,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            strategies: Strategy::ALL.to_vec(),
            repeats: 30,
            rt_base: Strategy::Feedback,
            serial: false,
        }
    }
}

fn repeat_runs(
    model: &ProgramModel,
    strategy: Strategy,
    opts: &RunOptions,
    repeats: usize,
) -> Result<Vec<StrategyRun>, CliError> {
    (0..repeats)
        .map(|k| {
            let seed = opts.seed.wrapping_add(k as u64);
            run_strategy(model, strategy, opts, seed).map(|(run, _)| run)
        })
        .collect()
}

/// Runs every strategy `repeats` times and tests each pair for differences.
pub fn cmd_compare(
    model: &ProgramModel,
    opts: &RunOptions,
    cmp: &CompareOptions,
) -> Result<RunReport, CliError> {
    opts.check()?;
    if cmp.repeats == 0 {
        return Err(CliError::Usage("repeats must be at least 1".into()));
    }
    if cmp.strategies.is_empty() {
        return Err(CliError::Usage("no strategies to compare".into()));
    }
    let mut list = cmp.strategies.clone();
    if !opts.no_timestamp && !list.contains(&cmp.rt_base) {
        list.push(cmp.rt_base);
    }
    let results: Vec<Result<Vec<StrategyRun>, CliError>> = if cmp.serial {
        list.iter()
            .map(|&s| repeat_runs(model, s, opts, cmp.repeats))
            .collect()
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = list
                .iter()
                .map(|&s| scope.spawn(move || repeat_runs(model, s, opts, cmp.repeats)))
                .collect();
            handles
                .into_iter()
                .map(|h| {
                    h.join()
                        .unwrap_or_else(|_| Err(CliError::Invariant("worker panicked".into())))
                })
                .collect()
        })
    };
    let mut strategies = Vec::with_capacity(list.len());
    for (s, runs) in list.iter().zip(results) {
        strategies.push(summarize(*s, runs?));
    }
    assign_rt(&mut strategies, cmp.rt_base);

    let mut tests = Vec::new();
    for a in 0..strategies.len() {
        for b in a + 1..strategies.len() {
            let (ra, rb) = (&strategies[a].runs, &strategies[b].runs);
            let pairs: Vec<(f64, f64)> = ra
                .iter()
                .zip(rb)
                .map(|(x, y)| (x.cost.ocplx, y.cost.ocplx))
                .collect();
            tests.push(PairTest {
                a,
                b,
                metric: Metric::Ocplx,
                result: wilcoxon_signed_rank(&pairs),
            });
            let times: Option<Vec<(f64, f64)>> = ra
                .iter()
                .zip(rb)
                .map(|(x, y)| Some((x.runtime_ms?, y.runtime_ms?)))
                .collect();
            if let Some(pairs) = times {
                tests.push(PairTest {
                    a,
                    b,
                    metric: Metric::Runtime,
                    result: wilcoxon_signed_rank(&pairs),
                });
            }
        }
    }

    let eord = build_graph(model, opts);
    let report = RunReport {
        model: model.name.clone(),
        classes: eord.nodes.len(),
        edges: eord.edges.len(),
        transitive: opts.transitive,
        max_chain_len: opts.max_chain_len,
        weights: opts.weights,
        rt_base: cmp.rt_base,
        repeats: cmp.repeats,
        timestamp: timestamp(opts),
        strategies,
        wilcoxon: tests,
    };
    check_report(&report, &eord)?;
    Ok(report)
}

/// Relationship statistics, chain counts per length limit, and the
/// chain-probability histogram. `explain` adds the statements behind each
/// call operation with their path conditions.
pub fn cmd_analyze(
    model: &ProgramModel,
    max_chain_len: usize,
    explain: bool,
) -> Result<AnalyzeReport, CliError> {
    RunOptions {
        max_chain_len,
        ..RunOptions::default()
    }
    .check()?;
    let longest = build_eord(model, MAX_CHAIN_LEN);
    let chains_up_to = (3..=MAX_CHAIN_LEN)
        .map(|k| (k, longest.chains.iter().filter(|c| c.len() <= k).count()))
        .collect();
    let eord = if max_chain_len == MAX_CHAIN_LEN {
        longest
    } else {
        build_eord(model, max_chain_len)
    };
    let mut histogram = Histogram::default();
    let mut chains = Vec::with_capacity(eord.chains.len());
    for c in &eord.chains {
        histogram.add(c.chain_probability);
        let mut operations = Vec::with_capacity(c.call_ops.len());
        for (op, &p) in c.call_ops.iter().zip(&c.op_probabilities) {
            let mut statements = Vec::new();
            if explain {
                for id in extract_statements(model, op)? {
                    let sp = statement_probability(model, &id)?;
                    statements.push(StatementOut {
                        line: model.statement(&id).map_or(0, |s| s.line),
                        class: id.class,
                        method: id.method,
                        path_condition: sp.path_condition.to_string(),
                        probability: sp.probability,
                    });
                }
            }
            operations.push(OperationOut {
                operation: format!(
                    "{} -> {}.{}",
                    op.source_class, op.target_class, op.target_member
                ),
                probability: p,
                statements,
            });
        }
        chains.push(ChainOut {
            path: c.member_path.iter().map(|m| m.to_string()).collect(),
            probability: c.chain_probability,
            operations,
        });
    }
    Ok(AnalyzeReport {
        model: model.name.clone(),
        classes: model.classes.len(),
        max_chain_len,
        stats: relationship_stats(&eord),
        chains_up_to,
        histogram,
        chains,
    })
}

/// Synthetic program as `.minij` source or PMIF JSON.
pub fn cmd_gen(spec: &SynthSpec, format: InputFormat) -> Result<String, CliError> {
    spec.validate().map_err(CliError::Usage)?;
    Ok(match format {
        InputFormat::Minij => crate::frontend::print(&generate_synthetic_ast(spec)),
        InputFormat::Pmif => {
            String::from_utf8(save_pmif(&generate_synthetic(spec))).expect("PMIF is UTF-8")
        }
    })
}
