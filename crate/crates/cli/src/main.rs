//! `conduit-scan`: withholding-tax network analysis from the command line.
//!
//! Exit codes: 0 success, 1 domain error (rejected matrix, unknown code,
//! degenerate query), 2 I/O or parse error.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use conduit_core::{default_thresholds, AffinityMode, CentralityKind, IncomeType, Rate};

use crate::commands::ProfileArg;
use crate::config::{parse_thresholds, Format, RunConfig};
use crate::error::CliError;

const THREADS_ENV: &str = "CONDUIT_SCAN_THREADS";

#[derive(Debug, Parser)]
#[command(name = "conduit-scan", version, about = "Treaty-shopping routes, conduit centrality and rate communities")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Jurisdiction registry CSV (`code,name`); defaults to the built-in list.
    #[arg(long, global = true)]
    registry: Option<PathBuf>,
    #[arg(long, global = true, value_name = "CSV")]
    matrix_dividends: Option<PathBuf>,
    #[arg(long, global = true, value_name = "CSV")]
    matrix_interest: Option<PathBuf>,
    #[arg(long, global = true, value_name = "CSV")]
    matrix_royalties: Option<PathBuf>,
    /// Comma-separated rate ceilings in percent.
    // spelled out so clap takes the whole list as one value
    #[arg(long, global = true, value_parser = parse_thresholds, default_value = "35,30,25,20,15,10,5,0")]
    thresholds: std::vec::Vec<Rate>,
    /// Community affinity: `unweighted` or `rate`.
    #[arg(long, global = true, default_value = "unweighted")]
    mode: AffinityMode,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::All)]
    format: Format,
    /// Also print route weights including the per-hop sanction.
    #[arg(long, global = true)]
    show_sanction: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the registry and rate matrices.
    Validate {
        #[arg(long)]
        income: Option<IncomeType>,
    },
    /// Rank jurisdictions by load (or betweenness) centrality.
    Centrality {
        #[arg(long)]
        income: Option<IncomeType>,
        #[arg(long)]
        threshold: Option<Rate>,
        #[arg(long, default_value = "load")]
        kind: CentralityKind,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Same as `centrality --kind betweenness`.
    Betweenness {
        #[arg(long)]
        income: Option<IncomeType>,
        #[arg(long)]
        threshold: Option<Rate>,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Louvain communities at one threshold (default: the most modular one).
    Communities {
        #[arg(long)]
        income: Option<IncomeType>,
        #[arg(long)]
        threshold: Option<Rate>,
    },
    /// Centrality and modularity across the threshold ladder.
    Sweep {
        #[arg(long)]
        income: Option<IncomeType>,
        #[arg(long, default_value = "load")]
        kind: CentralityKind,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        emit_curve: bool,
    },
    /// Cheapest routes between two jurisdictions.
    Route {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        income: Option<IncomeType>,
        #[arg(long)]
        threshold: Option<Rate>,
    },
    /// Write directed and undirected graphs as GraphML and JSON.
    Export {
        #[arg(long)]
        income: Option<IncomeType>,
        #[arg(long)]
        threshold: Option<Rate>,
    },
    /// Generate a registry and three rate matrices.
    Synth {
        /// Vertex count with synthetic codes; defaults to the registry in use.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = ProfileArg::Uniform)]
        profile: ProfileArg,
        #[arg(long, default_value_t = 3)]
        blocks: usize,
    },
}

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Input(format!("{THREADS_ENV}={value} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let g = cli.global;
    let thresholds = if g.thresholds.is_empty() { default_thresholds() } else { g.thresholds };
    let config = RunConfig {
        registry: g.registry,
        dividends: g.matrix_dividends,
        interest: g.matrix_interest,
        royalties: g.matrix_royalties,
        thresholds,
        show_sanction: g.show_sanction,
        mode: g.mode,
        seed: g.seed,
        out: g.out,
        format: g.format,
    };
    match cli.command {
        Command::Validate { income } => commands::cmd_validate(&config, income),
        Command::Centrality { income, threshold, kind, top } => {
            commands::cmd_centrality(&config, income, threshold, kind, top)
        }
        Command::Betweenness { income, threshold, top } => {
            commands::cmd_centrality(&config, income, threshold, CentralityKind::Betweenness, top)
        }
        Command::Communities { income, threshold } => commands::cmd_communities(&config, income, threshold),
        Command::Sweep { income, kind, emit_curve } => commands::cmd_sweep(&config, income, kind, emit_curve),
        Command::Route { from, to, income, threshold } => commands::cmd_route(&config, &from, &to, income, threshold),
        Command::Export { income, threshold } => commands::cmd_export(&config, income, threshold),
        Command::Synth { n, profile, blocks } => commands::cmd_synth(&config, n, profile, blocks),
    }
}

fn main() -> ExitCode {
    // clap's own usage errors already exit with 2
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
