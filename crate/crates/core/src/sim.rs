//! Monte Carlo batches of games.
//!
//! Every game draws from its own ChaCha stream, selected by the game index,
//! so a batch gives the same traces whatever order rayon runs the games in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{fcls_bound, mcls_bound_or_fixed};
use crate::center::compute_center;
use crate::engine::{play, EngineError, GameConfig, ManKind, Outcome, Trace};
use crate::geometry::Point;
use crate::strategies::LionKind;

/// Random starts put the lion uniformly in `[0.5, 4]^2`.
pub const LION_START_RANGE: (f64, f64) = (0.5, 4.0);

/// Random starts whose initial center has a larger `m` are redrawn.
pub const MAX_RANDOM_M0: f64 = 12.0;

const START_STREAM: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("games must be at least 1")]
    NoGames,
    #[error("give both --lion-pos and --man-pos or neither")]
    HalfStart,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub lion: LionKind,
    pub man: ManKind,
    /// Fixed start for every game; random dominating starts when absent.
    pub start: Option<(Point, Point)>,
    pub games: usize,
    pub max_steps: Option<u64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameResult {
    pub index: usize,
    pub m0: f64,
    /// Capture-time bound of the lion strategy played.
    pub bound: u64,
    pub trace: Trace,
}

impl GameResult {
    pub fn within_bound(&self) -> bool {
        self.trace.lion_moves().is_some_and(|n| n <= self.bound)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub games: usize,
    pub captured: usize,
    /// Mean lion moves over captured games.
    pub mean_capture: f64,
    /// Mean bound over captured games.
    pub bound: f64,
    pub ratio: f64,
    /// Games not captured within their bound, including aborted ones.
    pub over_bound: usize,
}

impl Summary {
    pub const CSV_HEADER: &'static str = "mean_capture,bound,ratio";

    pub fn csv_line(&self) -> String {
        use crate::csv::fmt_f64;
        format!(
            "{},{},{}",
            fmt_f64(self.mean_capture),
            fmt_f64(self.bound),
            fmt_f64(self.ratio)
        )
    }
}

/// Per-game random number stream.
pub fn game_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Lion uniform in `[0.5, 4]^2`, man uniform in the box below and to the left
/// of it, redrawn until the initial center has `m0 <= 12`.
pub fn random_start<R: Rng + ?Sized>(rng: &mut R) -> (Point, Point) {
    let (lo, hi) = LION_START_RANGE;
    loop {
        let lion = Point::new(rng.random_range(lo..hi), rng.random_range(lo..hi));
        let man = Point::new(rng.random_range(0.0..lion.x), rng.random_range(0.0..lion.y));
        if !lion.dominates(man) {
            continue;
        }
        if let Ok(c) = compute_center(lion, man) {
            if c.m <= MAX_RANDOM_M0 {
                return (lion, man);
            }
        }
    }
}

pub fn strategy_bound(kind: LionKind, m0: f64) -> u64 {
    match kind {
        LionKind::Fcls => fcls_bound(m0),
        LionKind::Mcls => mcls_bound_or_fixed(m0),
    }
    .unwrap_or(0)
}

pub fn run_game(config: &SimConfig, index: usize) -> Result<GameResult, SimError> {
    let (lion_start, man_start) = match config.start {
        Some(s) => s,
        None => random_start(&mut game_rng(config.seed, START_STREAM + index as u64)),
    };
    let game_seed = game_rng(config.seed, index as u64).random();
    let game = GameConfig {
        lion_start,
        man_start,
        lion_strategy: config.lion,
        man_strategy: config.man.clone(),
        max_steps: config.max_steps,
        seed: game_seed,
    };
    let trace = play(&game)?;
    let m0 = compute_center(lion_start, man_start).map(|c| c.m).unwrap_or(f64::NAN);
    Ok(GameResult {
        index,
        m0,
        bound: strategy_bound(config.lion, m0),
        trace,
    })
}

/// Runs `config.games` games in parallel, returned in index order.
pub fn run_batch(config: &SimConfig) -> Result<Vec<GameResult>, SimError> {
    if config.games == 0 {
        return Err(SimError::NoGames);
    }
    (0..config.games).into_par_iter().map(|i| run_game(config, i)).collect()
}

pub fn summarize(results: &[GameResult]) -> Summary {
    let captured: Vec<_> = results
        .iter()
        .filter_map(|r| r.trace.lion_moves().map(|n| (n as f64, r.bound as f64)))
        .collect();
    let k = captured.len() as f64;
    let mean_capture = captured.iter().map(|c| c.0).sum::<f64>() / k;
    let bound = captured.iter().map(|c| c.1).sum::<f64>() / k;
    Summary {
        games: results.len(),
        captured: captured.len(),
        mean_capture,
        bound,
        ratio: mean_capture / bound,
        over_bound: results.iter().filter(|r| !r.within_bound()).count(),
    }
}

/// Games that ended in an invariant violation.
pub fn violations(results: &[GameResult]) -> impl Iterator<Item = &GameResult> {
    results
        .iter()
        .filter(|r| matches!(r.trace.outcome, Outcome::InvariantViolation(_)))
}
