//! Threshold strategies and the win probabilities they induce.
//!
//! A strategy for lists of length `k` is a step function on `[0, 1]` with
//! breakpoints `0 = a_0 <= a_1 <= ... <= a_k = 1`; a draw in `[a_{j-1}, a_j)`
//! goes to slot `j`. Win probabilities obey the recursion
//!
//! ```text
//! p_n = sum_k C(n-1,k-1) p_{k-1} p_{n-k} int_{a_{k-1}}^{a_k} x^(k-1) (1-x)^(n-k) dx
//! ```
//!
//! with `p_0 = 1`, because once the first draw is correctly placed the two
//! sides are independent, rescaled copies of smaller games.

use serde::{Deserialize, Serialize};

use crate::beta::{binomial, regularized_segment};
use crate::error::{Error, Result};
use crate::N_MAX_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    EqualSpacing,
    RiskTolerant,
    Custom,
}

impl StrategyKind {
    pub fn short_name(self) -> &'static str {
        match self {
            StrategyKind::EqualSpacing => "es",
            StrategyKind::RiskTolerant => "rt",
            StrategyKind::Custom => "custom",
        }
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "es" | "equal_spacing" | "equal-spacing" => Ok(StrategyKind::EqualSpacing),
            "rt" | "risk_tolerant" | "risk-tolerant" => Ok(StrategyKind::RiskTolerant),
            "custom" => Ok(StrategyKind::Custom),
            other => Err(Error::InvalidRange(format!("unknown strategy kind '{other}'"))),
        }
    }
}

/// Decision boundaries for every list length `1..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStrategy")]
pub struct StrategyTable {
    kind: StrategyKind,
    n_max: usize,
    /// `boundaries[k - 1]` holds `a_{k,0..=k}`.
    boundaries: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawStrategy {
    kind: StrategyKind,
    n_max: usize,
    boundaries: Vec<Vec<f64>>,
}

impl TryFrom<RawStrategy> for StrategyTable {
    type Error = Error;

    fn try_from(raw: RawStrategy) -> Result<Self> {
        if raw.boundaries.len() != raw.n_max {
            return Err(Error::InvalidStrategy {
                row: raw.boundaries.len(),
                reason: format!("expected {} rows", raw.n_max),
            });
        }
        StrategyTable::from_rows(raw.kind, raw.boundaries)
    }
}

fn check_n_max(n_max: usize) -> Result<()> {
    if n_max == 0 {
        return Err(Error::InvalidRange("n_max must be at least 1".into()));
    }
    if n_max > N_MAX_CAP {
        return Err(Error::TooLong(n_max));
    }
    Ok(())
}

fn validate_row(k: usize, row: &[f64]) -> Result<()> {
    let bad = |reason: String| Err(Error::InvalidStrategy { row: k, reason });
    if row.len() != k + 1 {
        return bad(format!("expected {} boundaries, got {}", k + 1, row.len()));
    }
    if row[0] != 0.0 || row[k] != 1.0 {
        return bad("row must start at 0 and end at 1".into());
    }
    if let Some(j) = row.windows(2).position(|w| w[0].partial_cmp(&w[1]).is_none_or(|o| o.is_gt())) {
        return bad(format!("boundary {} decreases", j + 1));
    }
    Ok(())
}

impl StrategyTable {
    pub fn from_rows(kind: StrategyKind, boundaries: Vec<Vec<f64>>) -> Result<Self> {
        check_n_max(boundaries.len())?;
        for (i, row) in boundaries.iter().enumerate() {
            validate_row(i + 1, row)?;
        }
        if kind == StrategyKind::EqualSpacing {
            for (i, row) in boundaries.iter().enumerate() {
                let k = i + 1;
                if row.iter().enumerate().any(|(j, &a)| a != j as f64 / k as f64) {
                    return Err(Error::InvalidStrategy {
                        row: k,
                        reason: "equal-spacing rows must be j/k".into(),
                    });
                }
            }
        }
        Ok(StrategyTable {
            kind,
            n_max: boundaries.len(),
            boundaries,
        })
    }

    /// Replaces row `k`; the result is always a `Custom` table.
    pub fn with_row(mut self, k: usize, row: Vec<f64>) -> Result<Self> {
        if k == 0 || k > self.n_max {
            return Err(Error::InvalidRange(format!("row {k} outside 1..={}", self.n_max)));
        }
        validate_row(k, &row)?;
        self.boundaries[k - 1] = row;
        self.kind = StrategyKind::Custom;
        Ok(self)
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Boundaries `a_{k,0..=k}`. Panics if `k` is outside `1..=n_max`.
    pub fn row(&self, k: usize) -> &[f64] {
        &self.boundaries[k - 1]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.boundaries
    }

    /// The slot `1..=k` for a draw `x` in a list of length `k`.
    ///
    /// Intervals are half-open, `[a_{j-1}, a_j)`, so a draw sitting exactly on
    /// a boundary goes to the slot above it; `x = 1` lands in slot `k`.
    pub fn slot(&self, k: usize, x: f64) -> usize {
        let row = self.row(k);
        let interior = &row[1..k];
        (interior.partition_point(|&a| a <= x) + 1).min(k)
    }
}

/// Win probabilities `p_0..=p_{n_max}` for one strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinProbTable {
    strategy_kind: StrategyKind,
    p: Vec<f64>,
}

impl WinProbTable {
    pub fn kind(&self) -> StrategyKind {
        self.strategy_kind
    }

    pub fn n_max(&self) -> usize {
        self.p.len() - 1
    }

    /// `p_n`. Panics if `n > n_max`.
    pub fn get(&self, n: usize) -> f64 {
        self.p[n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }
}

/// Boundaries `j/k` in every row.
pub fn equal_spacing_table(n_max: usize) -> Result<StrategyTable> {
    check_n_max(n_max)?;
    let boundaries = (1..=n_max)
        .map(|k| (0..=k).map(|j| j as f64 / k as f64).collect())
        .collect();
    Ok(StrategyTable {
        kind: StrategyKind::EqualSpacing,
        n_max,
        boundaries,
    })
}

// p_n from row n and the already known p_0..p_{n-1}.
fn next_win_prob(n: usize, row: &[f64], p: &[f64]) -> f64 {
    // C(n-1,k-1) * segment = (I_b - I_a) / n
    let total: f64 = (1..=n)
        .map(|k| p[k - 1] * p[n - k] * regularized_segment(row[k - 1], row[k], k, n))
        .sum();
    total / n as f64
}

pub fn win_prob_table(strategy: &StrategyTable) -> WinProbTable {
    let mut p = Vec::with_capacity(strategy.n_max + 1);
    p.push(1.0);
    for n in 1..=strategy.n_max {
        let pn = next_win_prob(n, strategy.row(n), &p);
        p.push(pn);
    }
    WinProbTable {
        strategy_kind: strategy.kind,
        p,
    }
}

/// The optimal boundaries: each `a_{n,k}` is where the slot-value curves of
/// slots `k` and `k+1` cross, which needs only `p_0..p_{n-1}`, so rows and
/// win probabilities are built together in one pass.
pub fn risk_tolerant_table(n_max: usize) -> Result<(StrategyTable, WinProbTable)> {
    check_n_max(n_max)?;
    let mut p = vec![1.0];
    let mut boundaries = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut row = Vec::with_capacity(n + 1);
        row.push(0.0);
        for k in 1..n {
            let odds = (p[k] * p[n - k - 1]) / (p[k - 1] * p[n - k]);
            row.push(1.0 / (1.0 + odds * (n as f64 / k as f64 - 1.0)));
        }
        row.push(1.0);
        p.push(next_win_prob(n, &row, &p));
        boundaries.push(row);
    }
    let strategy = StrategyTable {
        kind: StrategyKind::RiskTolerant,
        n_max,
        boundaries,
    };
    let probs = WinProbTable {
        strategy_kind: StrategyKind::RiskTolerant,
        p,
    };
    Ok((strategy, probs))
}

/// Convenience: the boundary table and win probabilities for a named kind.
pub fn tables_for(kind: StrategyKind, n_max: usize) -> Result<(StrategyTable, WinProbTable)> {
    match kind {
        StrategyKind::EqualSpacing => {
            let s = equal_spacing_table(n_max)?;
            let p = win_prob_table(&s);
            Ok((s, p))
        }
        StrategyKind::RiskTolerant => risk_tolerant_table(n_max),
        StrategyKind::Custom => Err(Error::InvalidRange(
            "custom strategies have no canonical table".into(),
        )),
    }
}

fn check_slot(n: usize, k: usize, x: f64) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidRange(format!("slot {k} outside 1..={n}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidRange(format!("draw {x} outside [0, 1]")));
    }
    Ok(())
}

fn monomial(n: usize, k: usize, x: f64) -> f64 {
    x.powi(k as i32 - 1) * (1.0 - x).powi((n - k) as i32)
}

/// Probability of winning an `n`-game after putting the first draw `x` in
/// slot `k`, with optimal play afterwards under `probs`.
pub fn slot_value(n: usize, k: usize, x: f64, probs: &WinProbTable) -> Result<f64> {
    check_slot(n, k, x)?;
    if n > probs.n_max() {
        return Err(Error::TooLong(n));
    }
    Ok(binomial(n - 1, k - 1) * probs.get(k - 1) * probs.get(n - k) * monomial(n, k, x))
}

/// Probability that slot `k` is the correct final position of the first draw
/// `x` of an `n`-game.
pub fn correct_so_far_slot(n: usize, k: usize, x: f64) -> Result<f64> {
    check_slot(n, k, x)?;
    Ok(binomial(n - 1, k - 1) * monomial(n, k, x))
}

/// Closed form of `p_3` for the symmetric row `[0, alpha, 1 - alpha, 1]`.
pub fn p3_of_alpha(alpha: f64) -> f64 {
    ((11.0 / 6.0 * alpha - 7.0 / 2.0) * alpha + 3.0 / 2.0) * alpha + 1.0 / 3.0
}

/// The JSON document shape shared by the CLI and the service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyDocument {
    pub kind: StrategyKind,
    pub n_max: usize,
    pub boundaries: Vec<Vec<f64>>,
    pub p: Vec<f64>,
}

impl StrategyDocument {
    pub fn new(strategy: &StrategyTable, probs: &WinProbTable) -> Self {
        StrategyDocument {
            kind: strategy.kind,
            n_max: strategy.n_max,
            boundaries: strategy.boundaries.clone(),
            p: probs.p[..=strategy.n_max.min(probs.n_max())].to_vec(),
        }
    }

    /// Validates the boundaries and recomputes nothing; `p` is taken as given.
    pub fn into_tables(self) -> Result<(StrategyTable, WinProbTable)> {
        let strategy = StrategyTable::from_rows(self.kind, self.boundaries)?;
        if self.p.len() != strategy.n_max + 1 {
            return Err(Error::InvalidState(format!(
                "expected {} win probabilities, got {}",
                strategy.n_max + 1,
                self.p.len()
            )));
        }
        let probs = WinProbTable {
            strategy_kind: self.kind,
            p: self.p,
        };
        Ok((strategy, probs))
    }
}
