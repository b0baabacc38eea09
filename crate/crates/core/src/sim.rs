//! Seeded Monte Carlo play of list games under a fixed strategy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{map_reduce, Execution};
use crate::strategy::StrategyTable;

const CHUNK: u64 = 4096;
// Keeps repeated-play sessions on different streams from `run`.
const SESSION_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n: usize,
    pub strategy: StrategyTable,
    pub games: u64,
    pub seed: u64,
    pub workers: usize,
}

impl SimConfig {
    pub fn new(n: usize, strategy: StrategyTable, games: u64, seed: u64) -> Self {
        SimConfig {
            n,
            strategy,
            games,
            seed,
            workers: crate::par::default_workers(),
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > self.strategy.n_max() {
            return Err(Error::InvalidRange(format!(
                "game length {} outside 1..={}",
                self.n,
                self.strategy.n_max()
            )));
        }
        if self.games == 0 {
            return Err(Error::InvalidRange("at least one game is required".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidRange("at least one worker is required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimResult {
    pub n: usize,
    pub games: u64,
    pub wins: u64,
    /// `elimination_histogram[t - 1]` counts losing games whose `t`-th draw
    /// had no feasible slot.
    pub elimination_histogram: Vec<u64>,
    pub total_draws: u64,
}

impl SimResult {
    fn empty(n: usize) -> Self {
        SimResult {
            n,
            games: 0,
            wins: 0,
            elimination_histogram: vec![0; n],
            total_draws: 0,
        }
    }

    fn merge(mut self, other: SimResult) -> SimResult {
        self.games += other.games;
        self.wins += other.wins;
        self.total_draws += other.total_draws;
        for (a, b) in self.elimination_histogram.iter_mut().zip(other.elimination_histogram) {
            *a += b;
        }
        self
    }

    pub fn losses(&self) -> u64 {
        self.games - self.wins
    }

    pub fn win_rate(&self) -> f64 {
        self.wins as f64 / self.games as f64
    }

    /// Binomial standard error of `win_rate` around a reference probability.
    pub fn standard_error(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.games as f64).sqrt()
    }

    /// Mean turn of elimination among losing games.
    pub fn mean_elimination_turn(&self) -> Result<f64> {
        mean_elimination_turn(&self.elimination_histogram)
    }

    /// Elimination-turn distribution conditioned on losing, indexed by turn - 1.
    pub fn elimination_distribution(&self) -> Vec<f64> {
        let losses = self.losses().max(1) as f64;
        self.elimination_histogram.iter().map(|&c| c as f64 / losses).collect()
    }
}

/// `sum t * h[t] / sum h[t]` over a histogram indexed by turn - 1.
pub fn mean_elimination_turn(histogram: &[u64]) -> Result<f64> {
    let (weighted, total) = histogram
        .iter()
        .enumerate()
        .fold((0u128, 0u128), |(w, t), (i, &c)| (w + (i as u128 + 1) * c as u128, t + c as u128));
    if total == 0 {
        return Err(Error::NoLosses);
    }
    Ok(weighted as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Won,
    /// The 1-based draw that could not be placed.
    Eliminated(usize),
}

impl Outcome {
    pub fn draws(self, n: usize) -> usize {
        match self {
            Outcome::Won => n,
            Outcome::Eliminated(turn) => turn,
        }
    }
}

/// Plays one game, drawing from `rng` and placing with `strategy`.
pub fn play<R: Rng>(n: usize, strategy: &StrategyTable, rng: &mut R) -> Outcome {
    // slots[i] is NaN while empty
    let mut slots = [f64::NAN; crate::N_MAX_CAP];
    let slots = &mut slots[..n];
    for turn in 1..=n {
        let x: f64 = rng.random();
        match locate(slots, x) {
            Some((first, size, lower, upper)) => {
                let k = strategy.slot(size, (x - lower) / (upper - lower));
                slots[first + k - 1] = x;
            }
            None => return Outcome::Eliminated(turn),
        }
    }
    Outcome::Won
}

// Finds the run of empty slots whose enclosing values bracket x:
// (0-based first slot, size, lower, upper).
fn locate(slots: &[f64], x: f64) -> Option<(usize, usize, f64, f64)> {
    let mut lower = 0.0;
    let mut start = 0;
    for (i, &v) in slots.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        if x < v {
            return (x > lower && i > start).then_some((start, i - start, lower, v));
        }
        lower = v;
        start = i + 1;
    }
    (x > lower && slots.len() > start).then_some((start, slots.len() - start, lower, 1.0))
}

fn game_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Plays `config.games` games; game `i` always uses stream `i` of the seed,
/// so the result does not depend on `workers`.
pub fn run(config: &SimConfig) -> Result<SimResult> {
    run_with(config, Execution::from_workers(config.workers))
}

pub fn run_with(config: &SimConfig, exec: Execution) -> Result<SimResult> {
    config.validate()?;
    let n = config.n;
    let base = ChaCha8Rng::seed_from_u64(config.seed);
    let result = map_reduce(
        config.games,
        CHUNK,
        exec,
        |games| {
            let mut part = SimResult::empty(n);
            for g in games {
                let mut rng = base.clone();
                rng.set_stream(g);
                let outcome = play(n, &config.strategy, &mut rng);
                part.games += 1;
                part.total_draws += outcome.draws(n) as u64;
                match outcome {
                    Outcome::Won => part.wins += 1,
                    Outcome::Eliminated(t) => part.elimination_histogram[t - 1] += 1,
                }
            }
            part
        },
        SimResult::merge,
    );
    Ok(result.unwrap_or_else(|| SimResult::empty(n)))
}

/// Expected draws over repeated play until the first win, in the printed
/// form `n + (1/p + 1) * mean_elimination`.
pub fn expected_draws_to_win(p_n: f64, mean_elim: f64, n: usize) -> f64 {
    n as f64 + (1.0 / p_n + 1.0) * mean_elim
}

/// The same quantity from the geometric count of failed games,
/// `n + (1/p - 1) * mean_elimination`.
pub fn expected_draws_to_win_geometric(p_n: f64, mean_elim: f64, n: usize) -> f64 {
    n as f64 + (1.0 / p_n - 1.0) * mean_elim
}

/// Mean total draws over `trials` independent play-until-first-win sessions.
pub fn empirical_draws_to_win(config: &SimConfig, trials: u64) -> Result<f64> {
    config.validate()?;
    if trials == 0 {
        return Err(Error::InvalidRange("at least one trial is required".into()));
    }
    let n = config.n;
    let seed = config.seed ^ SESSION_SALT;
    let total = map_reduce(
        trials,
        64,
        Execution::from_workers(config.workers),
        |range| {
            range
                .map(|t| {
                    let mut rng = game_rng(seed, t);
                    let mut draws = 0u64;
                    loop {
                        let outcome = play(n, &config.strategy, &mut rng);
                        draws += outcome.draws(n) as u64;
                        if outcome == Outcome::Won {
                            break draws;
                        }
                    }
                })
                .sum::<u64>()
        },
        |a, b| a + b,
    )
    .unwrap_or(0);
    Ok(total as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::{equal_spacing_table, risk_tolerant_table};

    #[test]
    fn locate_matches_bins() {
        let nan = f64::NAN;
        let slots = [nan, 0.3, nan, nan, 0.8];
        assert_eq!(locate(&slots, 0.1), Some((0, 1, 0.0, 0.3)));
        assert_eq!(locate(&slots, 0.5), Some((2, 2, 0.3, 0.8)));
        assert_eq!(locate(&slots, 0.9), None);
        assert_eq!(locate(&slots, 0.3), None);
        assert_eq!(locate(&[nan; 3], 0.5), Some((0, 3, 0.0, 1.0)));
        assert_eq!(locate(&[0.2, 0.4], 0.3), None);
    }

    #[test]
    fn single_slot_always_wins() {
        let cfg = SimConfig::new(1, equal_spacing_table(1).unwrap(), 1000, 3);
        let r = run(&cfg).unwrap();
        assert_eq!(r.wins, 1000);
        assert_eq!(r.total_draws, 1000);
        assert_eq!(r.mean_elimination_turn(), Err(Error::NoLosses));
        assert_eq!(empirical_draws_to_win(&cfg, 10).unwrap(), 1.0);
    }

    #[test]
    fn histogram_accounts_for_every_game() {
        let (rt, _) = risk_tolerant_table(8).unwrap();
        let r = run(&SimConfig::new(8, rt, 20_000, 11)).unwrap();
        assert_eq!(r.wins + r.elimination_histogram.iter().sum::<u64>(), r.games);
        // The first draw always fits.
        assert_eq!(r.elimination_histogram[0], 0);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let es = equal_spacing_table(10).unwrap();
        let cfg = SimConfig::new(10, es, 30_000, 99);
        let one = run(&cfg.clone().with_workers(1)).unwrap();
        let four = run(&cfg.clone().with_workers(4)).unwrap();
        let seq = run_with(&cfg, Execution::Sequential).unwrap();
        assert_eq!(one, four);
        assert_eq!(one, seq);
    }

    #[test]
    fn mean_of_single_bucket() {
        let mut h = vec![0u64; 5];
        h[1] = 10;
        assert_eq!(mean_elimination_turn(&h).unwrap(), 2.0);
    }

    #[test]
    fn draws_formula_examples() {
        assert_eq!(expected_draws_to_win(1.0, 0.0, 7), 7.0);
        let es = expected_draws_to_win(1.0 / 9651.0, 10.8414, 20);
        assert!((es / 1.0466e5 - 1.0).abs() < 1e-3);
        assert_eq!(expected_draws_to_win_geometric(1.0, 3.0, 4), 4.0);
    }

    #[test]
    fn rejects_bad_configs() {
        let es = equal_spacing_table(4).unwrap();
        assert!(run(&SimConfig::new(5, es.clone(), 10, 0)).is_err());
        assert!(run(&SimConfig::new(4, es.clone(), 0, 0)).is_err());
        assert!(run(&SimConfig::new(4, es.clone(), 10, 0).with_workers(0)).is_err());
        assert!(empirical_draws_to_win(&SimConfig::new(4, es, 10, 0), 0).is_err());
    }
}
