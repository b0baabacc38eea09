//! The square-grid variant: draws go into an `m x m` grid whose rows and
//! columns must both ascend.
//!
//! Grid positions are 1-based `(row, col)` throughout the public API.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::IntervalMatcher;
use crate::par::{map_reduce, Execution};

pub const GRID_MAX_SIDE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellBound {
    pub cell: Cell,
    pub lower: f64,
    pub upper: f64,
}

impl CellBound {
    pub fn admits(&self, x: f64) -> bool {
        self.lower < x && x < self.upper
    }
}

/// Induced interval for every empty cell, in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellBounds {
    pub cells: Vec<CellBound>,
}

impl CellBounds {
    pub fn get(&self, cell: Cell) -> Option<&CellBound> {
        self.cells.iter().find(|b| b.cell == cell)
    }

    pub fn intervals(&self) -> Vec<(f64, f64)> {
        self.cells.iter().map(|b| (b.lower, b.upper)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct GridState {
    m: usize,
    cells: Vec<Vec<Option<f64>>>,
}

#[derive(Deserialize)]
struct RawGrid {
    m: usize,
    cells: Vec<Vec<Option<f64>>>,
}

impl TryFrom<RawGrid> for GridState {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        GridState::from_cells(raw.m, raw.cells)
    }
}

impl GridState {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 || m > GRID_MAX_SIDE {
            return Err(Error::InvalidState(format!("grid side {m} outside 1..={GRID_MAX_SIDE}")));
        }
        Ok(GridState {
            m,
            cells: vec![vec![None; m]; m],
        })
    }

    pub fn from_cells(m: usize, cells: Vec<Vec<Option<f64>>>) -> Result<Self> {
        GridState::new(m)?;
        if cells.len() != m || cells.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidState(format!("cells are not {m} x {m}")));
        }
        let state = GridState { m, cells };
        for i in 0..m {
            for j in 0..m {
                let Some(v) = state.cells[i][j] else { continue };
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidState(format!("cell ({}, {}) holds {v}", i + 1, j + 1)));
                }
                let row_prev = (0..j).rev().find_map(|jj| state.cells[i][jj]);
                let col_prev = (0..i).rev().find_map(|ii| state.cells[ii][j]);
                if row_prev.is_some_and(|p| p >= v) || col_prev.is_some_and(|p| p >= v) {
                    return Err(Error::InvalidState(format!(
                        "cell ({}, {}) breaks ascending order",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(state)
    }

    pub fn side(&self) -> usize {
        self.m
    }

    pub fn cells(&self) -> &[Vec<Option<f64>>] {
        &self.cells
    }

    pub fn get(&self, cell: Cell) -> Option<f64> {
        self.cells.get(cell.row.wrapping_sub(1))?.get(cell.col.wrapping_sub(1)).copied().flatten()
    }

    fn in_range(&self, cell: Cell) -> bool {
        (1..=self.m).contains(&cell.row) && (1..=self.m).contains(&cell.col)
    }

    pub fn empty_cells(&self) -> usize {
        self.cells.iter().flatten().filter(|c| c.is_none()).count()
    }

    pub fn filled(&self) -> usize {
        self.m * self.m - self.empty_cells()
    }

    pub fn is_complete(&self) -> bool {
        self.empty_cells() == 0
    }

    /// Interval each empty cell is confined to by the filled cells: above the
    /// largest value weakly above-left of it and below the smallest value
    /// weakly below-right.
    pub fn induced_bounds(&self) -> CellBounds {
        let m = self.m;
        // lower[i][j] = max filled value in [0..=i] x [0..=j]; upper mirrored.
        let mut lower = vec![vec![0.0f64; m]; m];
        let mut upper = vec![vec![1.0f64; m]; m];
        for i in 0..m {
            for j in 0..m {
                let mut v = self.cells[i][j].unwrap_or(0.0);
                if i > 0 {
                    v = v.max(lower[i - 1][j]);
                }
                if j > 0 {
                    v = v.max(lower[i][j - 1]);
                }
                lower[i][j] = v;
            }
        }
        for i in (0..m).rev() {
            for j in (0..m).rev() {
                let mut v = self.cells[i][j].unwrap_or(1.0);
                if i + 1 < m {
                    v = v.min(upper[i + 1][j]);
                }
                if j + 1 < m {
                    v = v.min(upper[i][j + 1]);
                }
                upper[i][j] = v;
            }
        }
        let cells = (0..m)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .filter(|&(i, j)| self.cells[i][j].is_none())
            .map(|(i, j)| CellBound {
                cell: Cell::new(i + 1, j + 1),
                lower: lower[i][j],
                upper: upper[i][j],
            })
            .collect();
        CellBounds { cells }
    }

    /// Places `x` in an empty cell whose induced interval contains it.
    pub fn place(&mut self, cell: Cell, x: f64) -> Result<()> {
        if !self.in_range(cell) {
            return Err(Error::Infeasible(format!("cell ({}, {}) is off the grid", cell.row, cell.col)));
        }
        let bound = self.induced_bounds().get(cell).copied();
        match bound {
            None => Err(Error::Infeasible(format!("cell ({}, {}) is filled", cell.row, cell.col))),
            Some(b) if !b.admits(x) => Err(Error::Infeasible(format!(
                "{x} is outside ({}, {}) at cell ({}, {})",
                b.lower, b.upper, cell.row, cell.col
            ))),
            Some(_) => {
                self.cells[cell.row - 1][cell.col - 1] = Some(x);
                Ok(())
            }
        }
    }

    /// Empty cells whose induced interval admits `x`, row-major.
    pub fn feasible_cells(&self, x: f64) -> Vec<Cell> {
        self.induced_bounds()
            .cells
            .into_iter()
            .filter(|b| b.admits(x))
            .map(|b| b.cell)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRecommendation {
    pub cell: Cell,
    pub probability: f64,
    pub rank: usize,
}

/// Monte Carlo knobs shared by the grid estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampling {
    pub samples: u64,
    pub seed: u64,
    pub exec: Execution,
}

impl Sampling {
    pub fn new(samples: u64, seed: u64) -> Self {
        Sampling {
            samples,
            seed,
            exec: Execution::from_workers(crate::par::default_workers()),
        }
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }
}

/// Estimated probability that, after putting `x` in `cell`, the remaining
/// uniform draws can each be matched to a distinct empty cell whose induced
/// interval contains it. Zero when the placement itself is infeasible.
///
/// Sample `i` draws from stream `i` of the seed, so every cell of one grid is
/// scored against the same random fills.
pub fn placement_probability(state: &GridState, cell: Cell, x: f64, sampling: Sampling) -> f64 {
    let mut next = state.clone();
    if next.place(cell, x).is_err() {
        return 0.0;
    }
    let bounds = next.induced_bounds().intervals();
    if bounds.is_empty() {
        return 1.0;
    }
    if bounds.iter().any(|&(lo, hi)| lo >= hi) || sampling.samples == 0 {
        return 0.0;
    }
    let remaining = bounds.len();
    let base = ChaCha8Rng::seed_from_u64(sampling.seed);
    let hits = map_reduce(
        sampling.samples,
        1024,
        sampling.exec,
        |range| {
            let mut matcher = IntervalMatcher::new(&bounds);
            let mut values = vec![0.0f64; remaining];
            range
                .filter(|&s| {
                    let mut rng = base.clone();
                    rng.set_stream(s);
                    values.iter_mut().for_each(|v| *v = rng.random());
                    values.sort_unstable_by(f64::total_cmp);
                    matcher.matches_sorted(&values)
                })
                .count() as u64
        },
        |a, b| a + b,
    )
    .unwrap_or(0);
    hits as f64 / sampling.samples as f64
}

/// Scores every cell that admits `x`, best first; ties keep row-major order.
/// An empty list means `x` cannot be placed.
pub fn grid_advise(state: &GridState, x: f64, sampling: Sampling) -> Vec<GridRecommendation> {
    let mut recs: Vec<GridRecommendation> = state
        .feasible_cells(x)
        .into_iter()
        .map(|cell| GridRecommendation {
            cell,
            probability: placement_probability(state, cell, x, sampling),
            rank: 0,
        })
        .collect();
    recs.sort_by(|a, b| b.probability.total_cmp(&a.probability));
    for (i, r) in recs.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    recs
}

/// `m x m` table of placement probabilities, `None` where `x` cannot go.
pub fn heatmap(state: &GridState, recs: &[GridRecommendation]) -> Vec<Vec<Option<f64>>> {
    let mut out = vec![vec![None; state.m]; state.m];
    for r in recs {
        out[r.cell.row - 1][r.cell.col - 1] = Some(r.probability);
    }
    out
}
