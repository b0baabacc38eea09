//! Session state machine for one live list or grid game.

use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use blindseq_core::grid::{grid_advise, heatmap, Cell, GridRecommendation, GridState, Sampling};
use blindseq_core::{
    normalize_draw, AdviseOptions, GameState, Ranking, SlotRecommendation, StrategyKind, StrategyTable,
    WinProbTable,
};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::error::ApiError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    List,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    InProgress,
    Won,
    Eliminated,
}

#[derive(Debug, Clone)]
pub struct Tables {
    pub strategy: StrategyTable,
    pub probs: WinProbTable,
}

#[derive(Debug, Clone)]
pub enum Board {
    List { game: GameState, tables: Arc<Tables> },
    Grid { grid: GridState },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendingDraw {
    pub raw: i64,
    pub normalized: f64,
}

#[derive(Debug)]
pub struct Session {
    pub id: Uuid,
    pub created_at: SystemTime,
    pub last_access: Instant,
    pub board: Board,
    pub strategy_kind: Option<StrategyKind>,
    pub status: Status,
    pub pending: Option<PendingDraw>,
    /// Raw values of every draw, including one that eliminated the game.
    pub draws: Vec<i64>,
}

/// Per-draw advice, shaped by variant.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Advice {
    List {
        feasible_slots: Vec<usize>,
        recommendations: Vec<SlotRecommendation>,
    },
    Grid {
        feasible_cells: Vec<Cell>,
        recommendations: Vec<GridRecommendation>,
        heatmap: Vec<Vec<Option<f64>>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DrawResponse {
    pub raw: i64,
    pub normalized: f64,
    #[serde(flatten)]
    pub advice: Advice,
    pub eliminated: bool,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub autoplaced: Option<Placement>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Placement {
    Slot { slot: usize },
    Cell { row: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionDocument {
    pub id: Uuid,
    pub variant: Variant,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<&'static str>,
    pub status: Status,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub game: Option<GameState>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridState>,
    pub draws: Vec<i64>,
    pub pending_draw: Option<PendingDraw>,
    /// Win probability from the current list state under the session's
    /// strategy; zero once eliminated. Absent for grids.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub win_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correct_so_far: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundaries: Option<Vec<f64>>,
}

impl Session {
    pub fn new(board: Board, strategy_kind: Option<StrategyKind>) -> Self {
        Session {
            id: Uuid::new_v4(),
            created_at: SystemTime::now(),
            last_access: Instant::now(),
            board,
            strategy_kind,
            status: Status::InProgress,
            pending: None,
            draws: Vec::new(),
        }
    }

    pub fn variant(&self) -> Variant {
        match self.board {
            Board::List { .. } => Variant::List,
            Board::Grid { .. } => Variant::Grid,
        }
    }

    fn ensure_in_progress(&self) -> Result<(), ApiError> {
        match self.status {
            Status::InProgress => Ok(()),
            s => Err(ApiError::Conflict(format!("session already finished ({s:?})"))),
        }
    }

    pub fn check_draw(&self, raw: i64) -> Result<f64, ApiError> {
        self.ensure_in_progress()?;
        if self.pending.is_some() {
            return Err(ApiError::Conflict("the previous draw has not been placed yet".into()));
        }
        Ok(normalize_draw(raw)?)
    }

    /// Records a draw whose advice has been computed.
    pub fn accept_draw(&mut self, raw: i64, normalized: f64, advice: Advice, autoplace: bool) -> Result<DrawResponse, ApiError> {
        self.ensure_in_progress()?;
        self.draws.push(raw);
        let top = match &advice {
            Advice::List { recommendations, .. } => {
                recommendations.first().map(|r| Placement::Slot { slot: r.slot })
            }
            Advice::Grid { recommendations, .. } => recommendations
                .first()
                .map(|r| Placement::Cell { row: r.cell.row, col: r.cell.col }),
        };
        let eliminated = top.is_none();
        let mut autoplaced = None;
        if eliminated {
            self.status = Status::Eliminated;
        } else {
            self.pending = Some(PendingDraw { raw, normalized });
            if autoplace {
                let placement = top.expect("feasible draw has a top recommendation");
                self.commit(placement)?;
                autoplaced = Some(placement);
            }
        }
        Ok(DrawResponse {
            raw,
            normalized,
            advice,
            eliminated,
            status: self.status,
            autoplaced,
        })
    }

    pub fn commit(&mut self, placement: Placement) -> Result<(), ApiError> {
        self.ensure_in_progress()?;
        let pending = self
            .pending
            .ok_or_else(|| ApiError::Conflict("no draw is awaiting placement".into()))?;
        let x = pending.normalized;
        let complete = match (&mut self.board, placement) {
            (Board::List { game, .. }, Placement::Slot { slot }) => {
                game.place(slot, x).map_err(|e| ApiError::Conflict(e.to_string()))?;
                game.is_complete()
            }
            (Board::Grid { grid }, Placement::Cell { row, col }) => {
                grid.place(Cell::new(row, col), x)
                    .map_err(|e| ApiError::Conflict(e.to_string()))?;
                grid.is_complete()
            }
            (Board::List { .. }, _) => return Err(ApiError::BadRequest("list games take a slot".into())),
            (Board::Grid { .. }, _) => return Err(ApiError::BadRequest("grid games take a row and col".into())),
        };
        self.pending = None;
        if complete {
            self.status = Status::Won;
        }
        Ok(())
    }

    pub fn document(&self) -> SessionDocument {
        let created_at = self.created_at.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let mut doc = SessionDocument {
            id: self.id,
            variant: self.variant(),
            strategy: self.strategy_kind.map(StrategyKind::short_name),
            status: self.status,
            created_at,
            game: None,
            grid: None,
            draws: self.draws.clone(),
            pending_draw: self.pending,
            win_prob: None,
            correct_so_far: None,
            boundaries: None,
        };
        match &self.board {
            Board::List { game, tables } => {
                let alive = self.status != Status::Eliminated;
                doc.win_prob = Some(if alive { game.win_prob(&tables.probs).unwrap_or(0.0) } else { 0.0 });
                doc.correct_so_far = Some(if alive { game.correct_so_far() } else { 0.0 });
                doc.boundaries = Some(tables.strategy.row(game.len()).to_vec());
                doc.game = Some(game.clone());
            }
            Board::Grid { grid } => doc.grid = Some(grid.clone()),
        }
        doc
    }
}

/// Advice for `x` on `board`. List games are ranked by the rule of their
/// declared strategy; grids by the greedy feasibility metric.
pub fn advise_board(board: &Board, x: f64, sampling: Sampling) -> Result<Advice, ApiError> {
    Ok(match board {
        Board::List { game, tables } => {
            let options = AdviseOptions {
                ranking: Ranking::natural_for(tables.strategy.kind()),
                ..Default::default()
            };
            Advice::List {
                feasible_slots: game.feasible_slots(x),
                recommendations: game.advise_with(x, &tables.probs, options)?,
            }
        }
        Board::Grid { grid } => {
            let recs = grid_advise(grid, x, sampling);
            Advice::Grid {
                feasible_cells: grid.feasible_cells(x),
                heatmap: heatmap(grid, &recs),
                recommendations: recs,
            }
        }
    })
}
