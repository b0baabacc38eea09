//! Command-line front end: probability tables, simulations, advice on saved
//! game states, figure data and the advisor service.

pub mod commands;
pub mod error;
pub mod output;

use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;

use blindseq_core::{BinWidth, GameState, GridState, Ranking, StrategyKind};
use blindseq_service::ServiceConfig;
use clap::{Parser, Subcommand, ValueEnum};

pub use error::CliError;
pub use output::{Format, OutputDocument, SCHEMA_VERSION};

#[derive(Debug, Parser)]
#[command(name = "blindseq", version, about = "Blind number sequencing tables, simulations and advice")]
pub struct Cli {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Print shortest round-trip floats instead of 6 significant digits
    #[arg(long, global = true)]
    pub full_precision: bool,
    /// Worker threads for simulation and grid sampling
    #[arg(long, env = "BLINDSEQ_WORKERS", global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Boundaries and win probabilities for n = 1..=n_max
    Tables {
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = TablesStrategy::Both)]
        strategy: TablesStrategy,
    },
    /// Monte Carlo play of list games
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::Rt)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 100_000)]
        games: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rank the feasible slots of a saved list game for the next draw
    Advise {
        /// Game state JSON file, or - for stdin
        state: PathBuf,
        /// Next raw draw, 0..=999
        #[arg(long, allow_negative_numbers = true)]
        next: i64,
        #[arg(long, value_enum, default_value_t = StrategyArg::Rt)]
        strategy: StrategyArg,
        /// Override the strategy's own ranking rule
        #[arg(long, value_enum)]
        ranking: Option<RankingArg>,
        /// Bin width convention for the correct-so-far product
        #[arg(long, value_enum, default_value_t = WidthArg::Continuous)]
        width: WidthArg,
    },
    /// Estimate placement probabilities for every cell of a saved grid game
    GridAdvise {
        /// Grid state JSON file, or - for stdin
        state: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        next: i64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Data series behind figures 2 to 5
    Figures {
        #[arg(value_parser = clap::value_parser!(u8).range(2..=5))]
        which: u8,
        /// List length, or the largest n for figures 2 and 3
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        games: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the HTTP advisor service
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        /// Monte Carlo samples per grid recommendation
        #[arg(long, default_value_t = 100_000)]
        grid_samples: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Es,
    Rt,
}

impl From<StrategyArg> for StrategyKind {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Es => StrategyKind::EqualSpacing,
            StrategyArg::Rt => StrategyKind::RiskTolerant,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TablesStrategy {
    Es,
    Rt,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RankingArg {
    WinProb,
    CorrectSoFar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WidthArg {
    Continuous,
    /// Integer draws, each value owning 1/1000 of the unit interval
    Inclusive,
}

pub fn run<W: Write>(cli: Cli, out: &mut W) -> Result<(), CliError> {
    let workers = match cli.workers {
        Some(0) => return Err(CliError::Usage("workers must be at least 1".into())),
        Some(w) => w,
        None => blindseq_core::par::default_workers(),
    };
    let (format, full) = (cli.format, cli.full_precision);
    match cli.command {
        Command::Tables { n_max, strategy } => {
            let (es, rt) = match strategy {
                TablesStrategy::Es => (true, false),
                TablesStrategy::Rt => (false, true),
                TablesStrategy::Both => (true, true),
            };
            output::emit(out, "tables", &commands::tables(n_max, es, rt)?, format, full)
        }
        Command::Simulate { n, strategy, games, seed } => {
            let payload = commands::simulate(n, strategy.into(), games, seed, workers)?;
            output::emit(out, "simulate", &payload, format, full)
        }
        Command::Advise { state, next, strategy, ranking, width } => {
            let game: GameState = commands::read_state(&state)?;
            let ranking = ranking.map(|r| match r {
                RankingArg::WinProb => Ranking::WinProb,
                RankingArg::CorrectSoFar => Ranking::CorrectSoFar,
            });
            let width = match width {
                WidthArg::Continuous => BinWidth::Continuous,
                WidthArg::Inclusive => BinWidth::Inclusive { resolution: 1000 },
            };
            let payload = commands::advise(&game, next, strategy.into(), ranking, width)?;
            output::emit(out, "advise", &payload, format, full)
        }
        Command::GridAdvise { state, next, samples, seed } => {
            let grid: GridState = commands::read_state(&state)?;
            let payload = commands::grid_advise_cmd(&grid, next, samples, seed, workers)?;
            output::emit(out, "grid-advise", &payload, format, full)
        }
        Command::Figures { which, n, games, seed } => {
            let params = commands::FigureParams { n, games, seed, workers };
            output::emit(out, "figures", &commands::figure(which, &params)?, format, full)
        }
        Command::Serve { port, bind, grid_samples } => {
            let config = ServiceConfig { grid_samples, workers, ..Default::default() };
            serve(SocketAddr::new(bind, port), config, out)
        }
    }
}

fn serve<W: Write>(addr: SocketAddr, config: ServiceConfig, out: &mut W) -> Result<(), CliError> {
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = blindseq_service::bind(addr)
            .await
            .map_err(|e| CliError::Runtime(format!("cannot bind {addr}: {e}")))?;
        let local = listener.local_addr()?;
        writeln!(out, "listening on http://{local}")?;
        out.flush()?;
        blindseq_service::serve(listener, config).await?;
        Ok(())
    })
}
