use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use cito_core::cli::{
    cmd_analyze, cmd_compare, cmd_gen, cmd_order, load_input, render_analyze_table,
    render_run_table, CliError, CompareOptions, InputFormat, RunOptions, SynthSpec,
};
use cito_core::coupling::Weights;
use cito_core::orders::{Strategy, DEFAULT_CYCLE_CAP};

/// Class integration test orders from coupling analysis.
#[derive(Parser)]
#[command(name = "cito", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report direct, transitive and combined relationships and chains.
    Analyze(AnalyzeArgs),
    /// Generate one test order.
    Order(OrderArgs),
    /// Run several strategies repeatedly and compare them.
    Compare(CompareArgs),
    /// Write a synthetic program.
    Gen(GenArgs),
}

#[derive(Args)]
struct InputArgs {
    /// PMIF file, .minij file, or directory of .minij files.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_format)]
    format: Option<InputFormat>,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, conflicts_with = "table")]
    json: bool,
    /// Aligned text table (the default).
    #[arg(long)]
    table: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Longest transitive chain, in members.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(3..=5))]
    max_chain_len: u8,
    /// Stubbing-cost weights `wa,wm,wt`; must sum to 1.
    #[arg(long)]
    weights: Option<Weights>,
    /// Use direct relationships only.
    #[arg(long)]
    no_transitive: bool,
    /// Let the graph strategy remove inheritance and aggregation edges.
    #[arg(long)]
    break_any: bool,
    #[arg(long, default_value_t = DEFAULT_CYCLE_CAP)]
    cycle_cap: usize,
    /// Seed of the random iterative search.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iterations of the random iterative search.
    #[arg(long, default_value_t = 1000)]
    iterations: u64,
    /// Initial annealing temperature for the random iterative search.
    #[arg(long)]
    sa_temp: Option<f64>,
    /// Leave out timestamps and runtimes so output is reproducible.
    #[arg(long)]
    no_timestamp: bool,
}

impl RunArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            max_chain_len: usize::from(self.max_chain_len),
            transitive: !self.no_transitive,
            weights: self.weights.unwrap_or_default(),
            break_any: self.break_any,
            cycle_cap: self.cycle_cap,
            seed: self.seed,
            iterations: self.iterations,
            sa_temp: self.sa_temp,
            no_timestamp: self.no_timestamp,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(3..=5))]
    max_chain_len: u8,
    /// Show the statements and path conditions behind each chain.
    #[arg(long)]
    explain: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OrderArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "feedback")]
    strategy: Strategy,
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Strategy to include; repeat the flag for several. Defaults to all.
    #[arg(long)]
    strategy: Vec<Strategy>,
    #[arg(long, default_value_t = 30)]
    repeats: usize,
    /// Strategy whose runtime is the RT denominator.
    #[arg(long, default_value = "feedback")]
    rt_base: Strategy,
    /// Run strategies one at a time for cleaner timings.
    #[arg(long)]
    serial: bool,
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 10)]
    classes: usize,
    /// Fraction of ordered class pairs with a direct dependency.
    #[arg(long, default_value_t = 0.2)]
    density: f64,
    /// Probability that a call sits under a branch.
    #[arg(long, default_value_t = 0.5)]
    branch_density: f64,
    /// Probability that a call targets a method that makes calls itself.
    #[arg(long, default_value_t = 0.5)]
    chain_fraction: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_parser = parse_format, default_value = "minij")]
    format: InputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<InputFormat, String> {
    s.parse()
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn render<T: serde::Serialize>(
    report: &T,
    output: &OutputArgs,
    table: impl Fn(&T) -> String,
) -> Result<()> {
    let text = if output.json {
        let mut s = serde_json::to_string_pretty(report)?;
        s.push('\n');
        s
    } else {
        table(report)
    };
    emit(&text, output.out.as_deref())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze(a) => {
            let model = load_input(&a.input.input, a.input.format)?;
            let report = cmd_analyze(&model, usize::from(a.max_chain_len), a.explain)?;
            render(&report, &a.output, render_analyze_table)
        }
        Command::Order(a) => {
            let model = load_input(&a.input.input, a.input.format)?;
            let report = cmd_order(&model, a.strategy, &a.run.options())?;
            render(&report, &a.output, render_run_table)
        }
        Command::Compare(a) => {
            let model = load_input(&a.input.input, a.input.format)?;
            let strategies = if a.strategy.is_empty() {
                Strategy::ALL.to_vec()
            } else {
                a.strategy
            };
            let report = cmd_compare(
                &model,
                &a.run.options(),
                &CompareOptions {
                    strategies,
                    repeats: a.repeats,
                    rt_base: a.rt_base,
                    serial: a.serial,
                },
            )?;
            render(&report, &a.output, render_run_table)
        }
        Command::Gen(a) => {
            let spec = SynthSpec {
                classes: a.classes,
                edge_density: a.density,
                branch_density: a.branch_density,
                chain_fraction: a.chain_fraction,
                seed: a.seed,
            };
            emit(&cmd_gen(&spec, a.format)?, a.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .downcast_ref::<CliError>()
                .map_or(1, CliError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
