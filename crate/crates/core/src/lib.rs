//! Strategy engine for blind number sequencing.
//!
//! Draws arrive one at a time and must be committed to an empty slot of a
//! list (or cell of a grid) so that the final arrangement ascends. This crate
//! computes exact win probabilities for threshold strategies, builds the
//! optimal strategy, advises on live positions, and simulates play.

pub mod beta;
pub mod error;
pub mod game;
pub mod grid;
pub mod matching;
pub mod par;
pub mod sim;
pub mod strategy;

pub use error::{Error, Result};
pub use game::{normalize_draw, AdviseOptions, Bin, BinWidth, GameState, Ranking, SlotRecommendation};
pub use grid::{grid_advise, placement_probability, Cell, CellBounds, GridRecommendation, GridState, Sampling};
pub use matching::feasible_assignment_exists;
pub use par::Execution;
pub use sim::{SimConfig, SimResult};
pub use strategy::{
    correct_so_far_slot, equal_spacing_table, p3_of_alpha, risk_tolerant_table, slot_value, tables_for,
    win_prob_table, StrategyDocument, StrategyKind, StrategyTable, WinProbTable,
};

/// Default largest list length for precomputed tables.
pub const DEFAULT_N_MAX: usize = 64;
/// Hard cap on list length.
pub const N_MAX_CAP: usize = 256;
