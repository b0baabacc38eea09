//! Payload types and the computations behind each subcommand.

use std::io::Read;
use std::path::Path;

use blindseq_core::grid::heatmap;
use blindseq_core::sim::{self, SimConfig};
use blindseq_core::{
    equal_spacing_table, grid_advise, normalize_draw, risk_tolerant_table, tables_for, win_prob_table, AdviseOptions,
    BinWidth, Execution, GameState, GridState, Ranking, Sampling, SlotRecommendation, StrategyKind, N_MAX_CAP,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output::Tabular;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TablesPayload {
    pub n_max: usize,
    pub strategies: Vec<String>,
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRow {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_es: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_rt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub es_boundaries: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rt_boundaries: Option<Vec<f64>>,
}

impl Tabular for TablesPayload {
    type Row = TableRow;
    fn rows(&self) -> Vec<TableRow> {
        self.rows.clone()
    }
}

pub fn tables(n_max: usize, es: bool, rt: bool) -> Result<TablesPayload, CliError> {
    check_n_max(n_max)?;
    let es_tables = if es {
        let s = equal_spacing_table(n_max)?;
        let p = win_prob_table(&s);
        Some((s, p))
    } else {
        None
    };
    let rt_tables = if rt { Some(risk_tolerant_table(n_max)?) } else { None };
    let rows = (1..=n_max)
        .map(|n| {
            let p_es = es_tables.as_ref().map(|(_, p)| p.get(n));
            let p_rt = rt_tables.as_ref().map(|(_, p)| p.get(n));
            TableRow {
                n,
                p_es,
                p_rt,
                factor: p_es.zip(p_rt).map(|(e, r)| r / e),
                es_boundaries: es_tables.as_ref().map(|(s, _)| s.row(n).to_vec()),
                rt_boundaries: rt_tables.as_ref().map(|(s, _)| s.row(n).to_vec()),
            }
        })
        .collect();
    let strategies = [(es, "es"), (rt, "rt")]
        .into_iter()
        .filter(|(on, _)| *on)
        .map(|(_, name)| name.to_string())
        .collect();
    Ok(TablesPayload { n_max, strategies, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulatePayload {
    pub n: usize,
    pub strategy: String,
    pub games: u64,
    pub seed: u64,
    pub wins: u64,
    pub win_rate: f64,
    pub exact_win_prob: f64,
    pub standard_error: f64,
    pub mean_draws_per_game: f64,
    pub mean_elimination_turn: Option<f64>,
    pub expected_draws_to_win: Option<f64>,
    pub histogram: Vec<HistogramRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramRow {
    pub turn: usize,
    pub count: u64,
    pub fraction: f64,
}

impl Tabular for SimulatePayload {
    type Row = HistogramRow;
    fn rows(&self) -> Vec<HistogramRow> {
        self.histogram.clone()
    }
}

pub fn simulate(n: usize, kind: StrategyKind, games: u64, seed: u64, workers: usize) -> Result<SimulatePayload, CliError> {
    check_n_max(n)?;
    let (strategy, probs) = tables_for(kind, n)?;
    let result = sim::run(&SimConfig::new(n, strategy, games, seed).with_workers(workers))?;
    let exact = probs.get(n);
    let mean = result.mean_elimination_turn().ok();
    let histogram = result
        .elimination_histogram
        .iter()
        .zip(result.elimination_distribution())
        .enumerate()
        .map(|(i, (&count, fraction))| HistogramRow { turn: i + 1, count, fraction })
        .collect();
    Ok(SimulatePayload {
        n,
        strategy: kind.short_name().to_string(),
        games,
        seed,
        wins: result.wins,
        win_rate: result.win_rate(),
        exact_win_prob: exact,
        standard_error: result.standard_error(exact),
        mean_draws_per_game: result.total_draws as f64 / result.games.max(1) as f64,
        mean_elimination_turn: mean,
        expected_draws_to_win: mean.map(|m| sim::expected_draws_to_win(exact, m, n)),
        histogram,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdvisePayload {
    pub n: usize,
    pub next: i64,
    pub normalized: f64,
    pub strategy: String,
    pub ranking: Ranking,
    pub width: BinWidth,
    pub eliminated: bool,
    pub feasible_slots: Vec<usize>,
    pub strategy_slot: Option<usize>,
    pub recommendations: Vec<SlotRecommendation>,
}

impl Tabular for AdvisePayload {
    type Row = SlotRecommendation;
    fn rows(&self) -> Vec<SlotRecommendation> {
        self.recommendations.clone()
    }
}

pub fn advise(
    state: &GameState,
    next: i64,
    kind: StrategyKind,
    ranking: Option<Ranking>,
    width: BinWidth,
) -> Result<AdvisePayload, CliError> {
    let x = normalize_draw(next)?;
    let n = state.len();
    check_n_max(n)?;
    let (strategy, probs) = tables_for(kind, n)?;
    let ranking = ranking.unwrap_or(Ranking::natural_for(kind));
    let recommendations = state.advise_with(x, &probs, AdviseOptions { ranking, width })?;
    Ok(AdvisePayload {
        n,
        next,
        normalized: x,
        strategy: kind.short_name().to_string(),
        ranking,
        width,
        eliminated: recommendations.is_empty(),
        feasible_slots: state.feasible_slots(x),
        strategy_slot: state.strategy_slot(x, &strategy),
        recommendations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAdvisePayload {
    pub m: usize,
    pub next: i64,
    pub normalized: f64,
    pub samples: u64,
    pub seed: u64,
    pub eliminated: bool,
    pub recommendations: Vec<GridRow>,
    pub heatmap: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRow {
    pub row: usize,
    pub col: usize,
    pub probability: f64,
    pub rank: usize,
}

impl Tabular for GridAdvisePayload {
    type Row = GridRow;
    fn rows(&self) -> Vec<GridRow> {
        self.recommendations.clone()
    }
}

pub fn grid_advise_cmd(state: &GridState, next: i64, samples: u64, seed: u64, workers: usize) -> Result<GridAdvisePayload, CliError> {
    let x = normalize_draw(next)?;
    if samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let sampling = Sampling::new(samples, seed).with_exec(Execution::from_workers(workers));
    let recs = grid_advise(state, x, sampling);
    Ok(GridAdvisePayload {
        m: state.side(),
        next,
        normalized: x,
        samples,
        seed,
        eliminated: recs.is_empty(),
        heatmap: heatmap(state, &recs),
        recommendations: recs
            .iter()
            .map(|r| GridRow { row: r.cell.row, col: r.cell.col, probability: r.probability, rank: r.rank })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigurePayload {
    pub figure: u8,
    pub series: FigureSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FigureSeries {
    WinProbabilities { n_max: usize, rows: Vec<WinProbRow> },
    BoundaryTicks { n_max: usize, rows: Vec<TickRow> },
    RelativeBinSizes { n: usize, rows: Vec<BinSizeRow> },
    EliminationHistograms {
        n: usize,
        games: u64,
        seed: u64,
        es_mean: Option<f64>,
        rt_mean: Option<f64>,
        rows: Vec<EliminationRow>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WinProbRow {
    pub n: usize,
    pub log10_p_es: f64,
    pub log10_p_rt: f64,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TickRow {
    pub strategy: String,
    pub n: usize,
    pub ticks: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinSizeRow {
    pub k: usize,
    pub es: f64,
    pub rt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EliminationRow {
    pub turn: usize,
    pub es: f64,
    pub rt: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum FigureRow {
    WinProb(WinProbRow),
    Tick(TickRow),
    BinSize(BinSizeRow),
    Elimination(EliminationRow),
}

impl Tabular for FigurePayload {
    type Row = FigureRow;
    fn rows(&self) -> Vec<FigureRow> {
        match &self.series {
            FigureSeries::WinProbabilities { rows, .. } => rows.iter().cloned().map(FigureRow::WinProb).collect(),
            FigureSeries::BoundaryTicks { rows, .. } => rows.iter().cloned().map(FigureRow::Tick).collect(),
            FigureSeries::RelativeBinSizes { rows, .. } => rows.iter().cloned().map(FigureRow::BinSize).collect(),
            FigureSeries::EliminationHistograms { rows, .. } => rows.iter().cloned().map(FigureRow::Elimination).collect(),
        }
    }
}

pub struct FigureParams {
    pub n: Option<usize>,
    pub games: u64,
    pub seed: u64,
    pub workers: usize,
}

pub fn figure(which: u8, params: &FigureParams) -> Result<FigurePayload, CliError> {
    let series = match which {
        2 => {
            let n_max = params.n.unwrap_or(40);
            check_n_max(n_max)?;
            let es = win_prob_table(&equal_spacing_table(n_max)?);
            let (_, rt) = risk_tolerant_table(n_max)?;
            let rows = (1..=n_max)
                .map(|n| WinProbRow {
                    n,
                    log10_p_es: es.get(n).log10(),
                    log10_p_rt: rt.get(n).log10(),
                    factor: rt.get(n) / es.get(n),
                })
                .collect();
            FigureSeries::WinProbabilities { n_max, rows }
        }
        3 => {
            let n_max = params.n.unwrap_or(20);
            check_n_max(n_max)?;
            let es = equal_spacing_table(n_max)?;
            let (rt, _) = risk_tolerant_table(n_max)?;
            let mut rows = Vec::new();
            for (name, table) in [("es", &es), ("rt", &rt)] {
                for n in 2..=n_max {
                    rows.push(TickRow { strategy: name.to_string(), n, ticks: table.row(n).to_vec() });
                }
            }
            FigureSeries::BoundaryTicks { n_max, rows }
        }
        4 => {
            let n = params.n.unwrap_or(40);
            check_n_max(n)?;
            let (rt, _) = risk_tolerant_table(n)?;
            let row = rt.row(n);
            let rows = (1..=n)
                .map(|k| BinSizeRow { k, es: 1.0, rt: n as f64 * (row[k] - row[k - 1]) })
                .collect();
            FigureSeries::RelativeBinSizes { n, rows }
        }
        5 => {
            let n = params.n.unwrap_or(20);
            let es = simulate(n, StrategyKind::EqualSpacing, params.games, params.seed, params.workers)?;
            let rt = simulate(n, StrategyKind::RiskTolerant, params.games, params.seed, params.workers)?;
            let rows = es
                .histogram
                .iter()
                .zip(&rt.histogram)
                .map(|(e, r)| EliminationRow { turn: e.turn, es: e.fraction, rt: r.fraction })
                .collect();
            FigureSeries::EliminationHistograms {
                n,
                games: params.games,
                seed: params.seed,
                es_mean: es.mean_elimination_turn,
                rt_mean: rt.mean_elimination_turn,
                rows,
            }
        }
        other => return Err(CliError::Usage(format!("unknown figure {other}; expected 2, 3, 4 or 5"))),
    };
    Ok(FigurePayload { figure: which, series })
}

fn check_n_max(n: usize) -> Result<(), CliError> {
    if n == 0 || n > N_MAX_CAP {
        return Err(CliError::Usage(format!("n must be between 1 and {N_MAX_CAP}, got {n}")));
    }
    Ok(())
}

/// Reads and validates a JSON state document from a path, or stdin for `-`.
pub fn read_state<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        buf
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("malformed state {}: {e}", path.display())))
}
