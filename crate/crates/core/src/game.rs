//! A list game in progress: validation, bins, and slot-by-slot advice.

use serde::{Deserialize, Serialize};

use crate::beta::multinomial;
use crate::error::{Error, Result};
use crate::strategy::{StrategyKind, StrategyTable, WinProbTable};
use crate::N_MAX_CAP;

/// Maps a displayed integer `0..=999` onto `[0, 1]` at the midpoint of its
/// unit cell.
pub fn normalize_draw(raw: i64) -> Result<f64> {
    if !(0..=999).contains(&raw) {
        return Err(Error::DrawOutOfRange(raw));
    }
    Ok((raw as f64 + 0.5) / 1000.0)
}

/// A maximal run of empty slots and the values that enclose it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    /// 1-based index of the first empty slot.
    pub first_slot: usize,
    pub size: usize,
    pub lower: f64,
    pub upper: f64,
}

impl Bin {
    pub fn contains(&self, x: f64) -> bool {
        self.lower < x && x < self.upper
    }

    pub fn slots(&self) -> std::ops::Range<usize> {
        self.first_slot..self.first_slot + self.size
    }

    /// Probability that a fresh uniform draw fits this bin.
    pub fn width(&self, convention: BinWidth) -> f64 {
        match convention {
            BinWidth::Continuous => self.upper - self.lower,
            BinWidth::Inclusive { resolution } => {
                let half = 0.5 / resolution as f64;
                (self.upper + half).min(1.0) - (self.lower - half).max(0.0)
            }
        }
    }
}

/// How a bin's fit probability is measured when scoring a state.
///
/// `Continuous` is the exact value for real-valued draws. `Inclusive` treats
/// draws as integers on a grid of `resolution` cells and counts both
/// enclosing values as part of the bin, i.e. `(u - l + 1) / resolution` for
/// integer bounds. Feasibility of a draw is unaffected: repeats are fatal in
/// both conventions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "convention")]
pub enum BinWidth {
    #[default]
    Continuous,
    Inclusive { resolution: u32 },
}

/// How [`GameState::advise_with`] orders feasible slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ranking {
    /// Highest win probability under the continuation strategy.
    #[default]
    WinProb,
    /// Highest probability that the placements so far are correct; this is
    /// the decision rule of the equal-spacing strategy.
    CorrectSoFar,
}

impl Ranking {
    /// The ranking that agrees with a strategy's own step function.
    pub fn natural_for(kind: StrategyKind) -> Self {
        match kind {
            StrategyKind::EqualSpacing => Ranking::CorrectSoFar,
            _ => Ranking::WinProb,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdviseOptions {
    pub ranking: Ranking,
    pub width: BinWidth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotRecommendation {
    pub slot: usize,
    pub correct_so_far: f64,
    pub win_prob: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGameState")]
pub struct GameState {
    n: usize,
    slots: Vec<Option<f64>>,
    history: Vec<f64>,
}

#[derive(Deserialize)]
struct RawGameState {
    n: usize,
    slots: Vec<Option<f64>>,
    #[serde(default)]
    history: Option<Vec<f64>>,
}

impl TryFrom<RawGameState> for GameState {
    type Error = Error;

    fn try_from(raw: RawGameState) -> Result<Self> {
        let history = raw
            .history
            .unwrap_or_else(|| raw.slots.iter().flatten().copied().collect());
        GameState::from_parts(raw.n, raw.slots, history)
    }
}

impl GameState {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > N_MAX_CAP {
            return Err(Error::InvalidState(format!("length {n} outside 1..={N_MAX_CAP}")));
        }
        Ok(GameState {
            n,
            slots: vec![None; n],
            history: Vec::new(),
        })
    }

    pub fn from_parts(n: usize, slots: Vec<Option<f64>>, history: Vec<f64>) -> Result<Self> {
        let mut state = GameState::new(n)?;
        if slots.len() != n {
            return Err(Error::InvalidState(format!("{} slots for a {n}-game", slots.len())));
        }
        let mut prev = f64::NEG_INFINITY;
        for (i, v) in slots.iter().enumerate() {
            if let Some(v) = *v {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidState(format!("slot {} holds {v}", i + 1)));
                }
                if v <= prev {
                    return Err(Error::InvalidState(format!("slot {} breaks ascending order", i + 1)));
                }
                prev = v;
            }
        }
        let filled = slots.iter().flatten().count();
        if history.len() != filled {
            return Err(Error::InvalidState(format!(
                "{} draws in history but {filled} filled slots",
                history.len()
            )));
        }
        if let Some(h) = history.iter().find(|h| !slots.contains(&Some(**h))) {
            return Err(Error::InvalidState(format!("history value {h} is not on the board")));
        }
        state.slots = slots;
        state.history = history;
        Ok(state)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    pub fn slots(&self) -> &[Option<f64>] {
        &self.slots
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }

    pub fn filled(&self) -> usize {
        self.history.len()
    }

    pub fn is_complete(&self) -> bool {
        self.history.len() == self.n
    }

    pub fn bins(&self) -> Vec<Bin> {
        let mut bins = Vec::new();
        let mut lower = 0.0;
        let mut start = 0usize;
        for i in 0..=self.n {
            let bound = if i == self.n { Some(1.0) } else { self.slots[i] };
            if let Some(v) = bound {
                if i > start {
                    bins.push(Bin {
                        first_slot: start + 1,
                        size: i - start,
                        lower,
                        upper: v,
                    });
                }
                lower = v;
                start = i + 1;
            }
        }
        bins
    }

    /// The bin whose open interval contains `x`, if any.
    pub fn bin_for(&self, x: f64) -> Option<Bin> {
        self.bins().into_iter().find(|b| b.contains(x))
    }

    /// Empty slots where `x` keeps the list ascending; empty means elimination.
    pub fn feasible_slots(&self, x: f64) -> Vec<usize> {
        self.bin_for(x).map(|b| b.slots().collect()).unwrap_or_default()
    }

    /// Puts `x` in a 1-based `slot`, which must be empty and inside the bin
    /// containing `x`.
    pub fn place(&mut self, slot: usize, x: f64) -> Result<()> {
        let bin = self
            .bin_for(x)
            .ok_or_else(|| Error::Infeasible(format!("{x} fits no empty bin")))?;
        if !bin.slots().contains(&slot) {
            return Err(Error::Infeasible(format!(
                "slot {slot} is outside the feasible slots {}..={}",
                bin.first_slot,
                bin.first_slot + bin.size - 1
            )));
        }
        self.slots[slot - 1] = Some(x);
        self.history.push(x);
        Ok(())
    }

    fn placed(&self, slot: usize, x: f64) -> GameState {
        let mut next = self.clone();
        next.slots[slot - 1] = Some(x);
        next.history.push(x);
        next
    }

    /// Probability that every placement so far sits in its final position.
    pub fn correct_so_far(&self) -> f64 {
        self.correct_so_far_with(BinWidth::Continuous)
    }

    pub fn correct_so_far_with(&self, width: BinWidth) -> f64 {
        let bins = self.bins();
        let sizes: Vec<usize> = bins.iter().map(|b| b.size).collect();
        bins.iter()
            .fold(multinomial(&sizes), |acc, b| acc * b.width(width).powi(b.size as i32))
    }

    /// Win probability from here, playing each bin as an independent rescaled
    /// game under `probs`.
    pub fn win_prob(&self, probs: &WinProbTable) -> Result<f64> {
        self.win_prob_with(probs, BinWidth::Continuous)
    }

    pub fn win_prob_with(&self, probs: &WinProbTable, width: BinWidth) -> Result<f64> {
        let bins = self.bins();
        if let Some(b) = bins.iter().find(|b| b.size > probs.n_max()) {
            return Err(Error::TooLong(b.size));
        }
        let sub_games: f64 = bins.iter().map(|b| probs.get(b.size)).product();
        Ok(self.correct_so_far_with(width) * sub_games)
    }

    /// Scores each feasible slot for `x` by win probability.
    pub fn advise(&self, x: f64, probs: &WinProbTable) -> Result<Vec<SlotRecommendation>> {
        self.advise_with(x, probs, AdviseOptions::default())
    }

    pub fn advise_with(
        &self,
        x: f64,
        probs: &WinProbTable,
        options: AdviseOptions,
    ) -> Result<Vec<SlotRecommendation>> {
        let mut recs = self
            .feasible_slots(x)
            .into_iter()
            .map(|slot| {
                let next = self.placed(slot, x);
                Ok(SlotRecommendation {
                    slot,
                    correct_so_far: next.correct_so_far_with(options.width),
                    win_prob: next.win_prob_with(probs, options.width)?,
                    rank: 0,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let key = |r: &SlotRecommendation| match options.ranking {
            Ranking::WinProb => r.win_prob,
            Ranking::CorrectSoFar => r.correct_so_far,
        };
        // Stable sort keeps lower slots first among ties.
        recs.sort_by(|a, b| key(b).total_cmp(&key(a)));
        for (i, r) in recs.iter_mut().enumerate() {
            r.rank = i + 1;
        }
        Ok(recs)
    }

    /// The slot `strategy` picks for `x`, rescaling `x` into its bin.
    /// `None` means `x` fits nowhere.
    pub fn strategy_slot(&self, x: f64, strategy: &StrategyTable) -> Option<usize> {
        let bin = self.bin_for(x)?;
        Some(bin.first_slot + slot_in_bin(&bin, x, strategy) - 1)
    }
}

pub(crate) fn slot_in_bin(bin: &Bin, x: f64, strategy: &StrategyTable) -> usize {
    let scaled = (x - bin.lower) / (bin.upper - bin.lower);
    strategy.slot(bin.size, scaled)
}
