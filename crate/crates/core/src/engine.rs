//! Alternating-move game runner. The man moves first, then the lion; every
//! lion move is recorded with the center it used and checked against the
//! per-step inequalities in [`crate::checks`].

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::fcls_bound;
use crate::center::{compute_center, Center};
use crate::checks::{move_checks, InequalityId, MoveContext, ENGINE_TOL};
use crate::csv::fmt_f64;
use crate::geometry::{Displacement, Point};
use crate::strategies::{
    lion_reply, Greedy, LionDecision, LionKind, LionStrategy, ManPolicy, Orthogonal, Position, RandomWalk, Scripted,
    StrategyError, DEFAULT_GREEDY_SAMPLES,
};

/// Man moves may exceed unit length by this much.
pub const MOVE_TOL: f64 = 1e-12;

/// Slack added to the fixed-center bound when no step limit is given.
pub const DEFAULT_STEP_SLACK: u64 = 8;

pub const TRACE_CSV_HEADER: &str = "t,man_x,man_y,lion_x,lion_y,center_x,center_y,r,m,r_tilde,captured";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum MoveViolation {
    #[error("move longer than one unit")]
    TooFar,
    #[error("destination outside the quadrant")]
    OutOfQuadrant,
}

impl MoveViolation {
    pub fn reason(self) -> &'static str {
        match self {
            MoveViolation::TooFar => "TooFar",
            MoveViolation::OutOfQuadrant => "OutOfQuadrant",
        }
    }
}

/// Legal iff the destination is in the quadrant and at most one unit away.
pub fn validate_move(from: Point, to: Point) -> Result<(), MoveViolation> {
    if !to.in_quadrant() {
        return Err(MoveViolation::OutOfQuadrant);
    }
    let dist = from.distance(to);
    if dist.is_nan() || dist > 1.0 + MOVE_TOL {
        return Err(MoveViolation::TooFar);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("lion must start strictly above and to the right of the man (lion {lion:?}, man {man:?}); otherwise the man escapes along an axis")]
    ManWinsTrivially { lion: Point, man: Point },
    #[error("start positions must be finite points in the quadrant")]
    InvalidStart,
    #[error("initial center: {0}")]
    Strategy(#[from] StrategyError),
    #[error("man strategy `{0}` cannot be driven by the engine")]
    UnsupportedStrategy(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ManKind {
    Orthogonal,
    Greedy {
        samples: usize,
    },
    Random,
    Scripted {
        moves: Vec<Point>,
    },
    /// Moves supplied from outside, e.g. by the play service.
    External,
}

impl ManKind {
    pub fn name(&self) -> &'static str {
        match self {
            ManKind::Orthogonal => "orthogonal",
            ManKind::Greedy { .. } => "greedy",
            ManKind::Random => "random",
            ManKind::Scripted { .. } => "scripted",
            ManKind::External => "external",
        }
    }

    pub fn build(&self, seed: u64) -> Result<Box<dyn ManPolicy>, EngineError> {
        Ok(match self {
            ManKind::Orthogonal => Box::new(Orthogonal),
            ManKind::Greedy { samples } => Box::new(Greedy {
                angle_samples: *samples,
            }),
            ManKind::Random => Box::new(RandomWalk::new(ChaCha8Rng::seed_from_u64(seed))),
            ManKind::Scripted { moves } => Box::new(Scripted::new(moves.clone())),
            ManKind::External => return Err(EngineError::UnsupportedStrategy("external")),
        })
    }
}

impl fmt::Display for ManKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ManKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "orthogonal" => Ok(ManKind::Orthogonal),
            "greedy" => Ok(ManKind::Greedy {
                samples: DEFAULT_GREEDY_SAMPLES,
            }),
            "random" => Ok(ManKind::Random),
            "scripted" => Ok(ManKind::Scripted { moves: Vec::new() }),
            "external" => Ok(ManKind::External),
            other => Err(format!(
                "unknown man strategy `{other}` (expected orthogonal, greedy, random, scripted or external)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub lion_start: Point,
    pub man_start: Point,
    pub lion_strategy: LionKind,
    pub man_strategy: ManKind,
    /// Defaults to the fixed-center bound plus [`DEFAULT_STEP_SLACK`].
    pub max_steps: Option<u64>,
    pub seed: u64,
}

/// One round: the man's move followed by the lion's reply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    pub man_pos: Point,
    pub lion_pos: Point,
    /// Center in force for this lion move (recomputed each round by the
    /// moving-center lion).
    pub center: Option<Center>,
    pub r: f64,
    pub m: f64,
    /// Distance from the center to the lion's new position.
    pub r_tilde: f64,
    pub captured: bool,
}

impl StepRecord {
    pub fn csv_row(&self) -> String {
        let (cx, cy) = match self.center {
            Some(c) => (fmt_f64(c.x), fmt_f64(c.y)),
            None => (String::new(), String::new()),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.t,
            fmt_f64(self.man_pos.x),
            fmt_f64(self.man_pos.y),
            fmt_f64(self.lion_pos.x),
            fmt_f64(self.lion_pos.y),
            cx,
            cy,
            fmt_f64(self.r),
            fmt_f64(self.m),
            fmt_f64(self.r_tilde),
            u8::from(self.captured)
        )
    }
}

/// A failed inequality, with the margin by which it failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: InequalityId,
    pub t: u64,
    pub slack: f64,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} violated at t={} (slack {:e}): {}",
            self.check, self.t, self.slack, self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Outcome {
    Captured { lion_moves: u64 },
    StepLimit,
    InvariantViolation(Violation),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub config: GameConfig,
    pub steps: Vec<StepRecord>,
    pub outcome: Outcome,
}

impl Trace {
    pub fn to_csv(&self) -> String {
        trace_csv(&self.steps)
    }

    pub fn lion_moves(&self) -> Option<u64> {
        match self.outcome {
            Outcome::Captured { lion_moves } => Some(lion_moves),
            _ => None,
        }
    }
}

pub fn trace_csv(steps: &[StepRecord]) -> String {
    let mut out = String::with_capacity(64 * (steps.len() + 1));
    out.push_str(TRACE_CSV_HEADER);
    out.push('\n');
    for s in steps {
        out.push_str(&s.csv_row());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GameStatus {
    Active,
    Captured,
    Aborted(Violation),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("invalid man move: {0}")]
    InvalidMove(MoveViolation),
    #[error("game is over")]
    GameOver,
    #[error("{0}")]
    Violation(Violation),
}

/// Result of one round, as seen by an interactive client.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub record: StepRecord,
    pub decision: LionDecision,
}

/// A game in progress. Both [`play`] and interactive sessions drive games
/// through [`Game::advance`], so a session replays bit-for-bit offline.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    lion_strategy: LionStrategy,
    initial_center: Center,
    lion: Point,
    man: Point,
    heading: Option<Displacement>,
    t: u64,
    previous_center: Option<Center>,
    steps: Vec<StepRecord>,
    status: GameStatus,
}

impl Game {
    pub fn new(kind: LionKind, lion_start: Point, man_start: Point) -> Result<Self, EngineError> {
        if !lion_start.in_quadrant() || !man_start.in_quadrant() {
            return Err(EngineError::InvalidStart);
        }
        if !lion_start.dominates(man_start) {
            return Err(EngineError::ManWinsTrivially {
                lion: lion_start,
                man: man_start,
            });
        }
        let lion_strategy = LionStrategy::new(kind, lion_start, man_start)?;
        let initial_center = compute_center(lion_start, man_start).map_err(StrategyError::from)?;
        Ok(Game {
            lion_strategy,
            initial_center,
            lion: lion_start,
            man: man_start,
            heading: None,
            t: 0,
            previous_center: None,
            steps: Vec::new(),
            status: GameStatus::Active,
        })
    }

    pub fn lion(&self) -> Point {
        self.lion
    }

    pub fn man(&self) -> Point {
        self.man
    }

    pub fn position(&self) -> Position {
        Position {
            lion: self.lion,
            man: self.man,
            heading: self.heading,
        }
    }

    pub fn lion_strategy(&self) -> &LionStrategy {
        &self.lion_strategy
    }

    /// Center built from the starting positions; `m` of it is the `m0` of the bounds.
    pub fn initial_center(&self) -> Center {
        self.initial_center
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    pub fn status(&self) -> &GameStatus {
        &self.status
    }

    pub fn lion_moves(&self) -> u64 {
        self.t
    }

    /// Center the lion would use if the man moved now.
    pub fn current_center(&self) -> Result<Center, StrategyError> {
        self.lion_strategy.center_at(&self.position())
    }

    /// Plays one round with the man moving to `man_to`. An illegal man move
    /// leaves the game untouched; a failed inequality aborts the game.
    pub fn advance(&mut self, man_to: Point) -> Result<RoundOutcome, StepError> {
        if self.status != GameStatus::Active {
            return Err(StepError::GameOver);
        }
        validate_move(self.man, man_to).map_err(StepError::InvalidMove)?;
        match self.round(man_to) {
            Ok(outcome) => Ok(outcome),
            Err(v) => {
                self.status = GameStatus::Aborted(v.clone());
                Err(StepError::Violation(v))
            }
        }
    }

    fn round(&mut self, man_to: Point) -> Result<RoundOutcome, Violation> {
        let t = self.t;
        let failure = |e: StrategyError| Violation {
            check: InequalityId::StrategyFailure,
            t,
            slack: f64::NAN,
            detail: e.to_string(),
        };
        let pos = self.position();
        let decision = lion_reply(&self.lion_strategy, &pos, man_to).map_err(failure)?;
        let lion_after = decision.new_position;
        // A capture needs no center, so one that cannot be formed is only
        // left out of the record.
        let center = match decision.center_used {
            Some(c) => Some(c),
            None => self.lion_strategy.center_at(&pos).ok(),
        };

        if let Some(center) = center {
            let ctx = MoveContext {
                kind: self.lion_strategy.kind(),
                lion_before: self.lion,
                lion_after,
                captured: decision.captured,
                center,
                previous_center: self.previous_center,
            };
            if let Some(bad) = move_checks(&ctx).into_iter().find(|c| !c.passes(ENGINE_TOL)) {
                return Err(Violation {
                    check: bad.id,
                    t,
                    slack: bad.slack,
                    detail: format!(
                        "lion {:?} -> {:?}, man {:?} -> {:?}, center ({}, {})",
                        self.lion, lion_after, self.man, man_to, center.x, center.y
                    ),
                });
            }
        }

        let record = StepRecord {
            t,
            man_pos: man_to,
            lion_pos: lion_after,
            center,
            r: center.map_or(f64::NAN, |c| c.r),
            m: center.map_or(f64::NAN, |c| c.m),
            r_tilde: center.map_or(f64::NAN, |c| lion_after.distance(c.point())),
            captured: decision.captured,
        };
        self.steps.push(record);
        self.lion = lion_after;
        self.man = man_to;
        self.heading = decision.heading;
        self.t += 1;
        if self.lion_strategy.kind() == LionKind::Mcls {
            self.previous_center = center;
        }
        if decision.captured {
            self.status = GameStatus::Captured;
        }
        Ok(RoundOutcome { record, decision })
    }
}

pub fn default_max_steps(initial_center: &Center) -> u64 {
    fcls_bound(initial_center.m).unwrap_or(0) + DEFAULT_STEP_SLACK
}

/// Runs a full game with both players driven by their strategies.
pub fn play(config: &GameConfig) -> Result<Trace, EngineError> {
    let mut game = Game::new(config.lion_strategy, config.lion_start, config.man_start)?;
    let mut man_policy = config.man_strategy.build(config.seed)?;
    let max_steps = config
        .max_steps
        .unwrap_or_else(|| default_max_steps(&game.initial_center));

    let mut outcome = Outcome::StepLimit;
    while game.lion_moves() < max_steps {
        let t = game.lion_moves();
        let proposal = match man_policy.next_move(&game.position(), &game.lion_strategy) {
            Ok(d) => d.new_position,
            Err(e) => {
                outcome = Outcome::InvariantViolation(Violation {
                    check: InequalityId::StrategyFailure,
                    t,
                    slack: f64::NAN,
                    detail: format!("man strategy: {e}"),
                });
                break;
            }
        };
        match game.advance(proposal) {
            Ok(round) if round.record.captured => {
                outcome = Outcome::Captured {
                    lion_moves: game.lion_moves(),
                };
                break;
            }
            Ok(_) => {}
            Err(StepError::InvalidMove(reason)) => {
                outcome = Outcome::InvariantViolation(Violation {
                    check: InequalityId::ManMove,
                    t,
                    slack: f64::NAN,
                    detail: format!(
                        "{} proposed {:?} from {:?}: {reason}",
                        config.man_strategy, proposal, game.man
                    ),
                });
                break;
            }
            Err(StepError::Violation(v)) => {
                outcome = Outcome::InvariantViolation(v);
                break;
            }
            Err(StepError::GameOver) => unreachable!("loop exits on capture"),
        }
    }
    Ok(Trace {
        config: config.clone(),
        steps: game.steps,
        outcome,
    })
}
