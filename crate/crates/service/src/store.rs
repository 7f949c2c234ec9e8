//! In-memory sessions. Each session sits behind its own lock: moves take it
//! exclusively, previews and reads share it.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, PoisonError, RwLock};
use std::time::{Duration, Instant};

use lionman::bounds::{fcls_bound, mcls_bound_or_fixed};
use lionman::engine::{EngineError, GameStatus, StepError, TRACE_CSV_HEADER};
use lionman::{Center, Game, LionKind, Point, StepRecord};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(3600);

/// Machine-readable error reasons returned to clients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reason {
    TooFar,
    OutOfQuadrant,
    GameOver,
    NotFound,
    NonDominatingStart,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ServiceError {
    #[error("move longer than one unit")]
    TooFar,
    #[error("{0}")]
    OutOfQuadrant(String),
    #[error("{0}")]
    GameOver(String),
    #[error("no session with id {0}")]
    NotFound(Uuid),
    #[error("{0}")]
    NonDominatingStart(String),
}

impl ServiceError {
    pub fn reason(&self) -> Reason {
        match self {
            ServiceError::TooFar => Reason::TooFar,
            ServiceError::OutOfQuadrant(_) => Reason::OutOfQuadrant,
            ServiceError::GameOver(_) => Reason::GameOver,
            ServiceError::NotFound(_) => Reason::NotFound,
            ServiceError::NonDominatingStart(_) => Reason::NonDominatingStart,
        }
    }
}

impl From<EngineError> for ServiceError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::ManWinsTrivially { .. } => ServiceError::NonDominatingStart(e.to_string()),
            other => ServiceError::OutOfQuadrant(other.to_string()),
        }
    }
}

impl From<StepError> for ServiceError {
    fn from(e: StepError) -> Self {
        use lionman::engine::MoveViolation;
        match e {
            StepError::InvalidMove(MoveViolation::TooFar) => ServiceError::TooFar,
            StepError::InvalidMove(MoveViolation::OutOfQuadrant) => {
                ServiceError::OutOfQuadrant("destination outside the quadrant".into())
            }
            StepError::GameOver => ServiceError::GameOver("game is over".into()),
            StepError::Violation(v) => ServiceError::GameOver(format!("game aborted: {v}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SessionStatus {
    Active,
    LionWon,
    Aborted,
}

impl From<&GameStatus> for SessionStatus {
    fn from(s: &GameStatus) -> Self {
        match s {
            GameStatus::Active => SessionStatus::Active,
            GameStatus::Captured => SessionStatus::LionWon,
            GameStatus::Aborted(_) => SessionStatus::Aborted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CreateGame {
    pub lion_strategy: LionKind,
    pub lion_start: Point,
    pub man_start: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: Uuid,
    pub lion_strategy: LionKind,
    pub status: SessionStatus,
    pub t: u64,
    pub lion_pos: Point,
    pub man_pos: Point,
    pub initial_center: Point,
    pub r0: f64,
    pub m0: f64,
    pub fcls_bound: u64,
    pub mcls_bound: u64,
    /// Center the lion will use on the next move, when one is defined.
    pub center: Option<Point>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveRequest {
    pub to: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveOutcome {
    pub t: u64,
    pub man_pos: Point,
    pub lion_pos: Point,
    pub center_used: Option<Point>,
    pub captured: bool,
    pub m_t: Option<f64>,
    pub r_t: Option<f64>,
    /// Lion moves still allowed by the moving-center recursion started from
    /// `m_t`, after this one.
    pub bound_remaining: u64,
    pub status: SessionStatus,
}

/// One trace row, with the field names of the trace CSV columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepView {
    pub t: u64,
    pub man_x: f64,
    pub man_y: f64,
    pub lion_x: f64,
    pub lion_y: f64,
    pub center_x: Option<f64>,
    pub center_y: Option<f64>,
    pub r: Option<f64>,
    pub m: Option<f64>,
    pub r_tilde: Option<f64>,
    pub captured: bool,
}

impl StepView {
    pub const COLUMNS: &'static str = TRACE_CSV_HEADER;
}

impl From<&StepRecord> for StepView {
    fn from(s: &StepRecord) -> Self {
        let finite = |v: f64| v.is_finite().then_some(v);
        StepView {
            t: s.t,
            man_x: s.man_pos.x,
            man_y: s.man_pos.y,
            lion_x: s.lion_pos.x,
            lion_y: s.lion_pos.y,
            center_x: s.center.map(|c| c.x),
            center_y: s.center.map(|c| c.y),
            r: finite(s.r),
            m: finite(s.m),
            r_tilde: finite(s.r_tilde),
            captured: s.captured,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    #[serde(flatten)]
    pub summary: SessionSummary,
    /// Explanation when the game was aborted.
    pub abort_reason: Option<String>,
    pub man_start: Point,
    pub lion_start: Point,
    pub steps: Vec<StepView>,
}

#[derive(Debug)]
pub struct Session {
    id: Uuid,
    lion_start: Point,
    man_start: Point,
    game: RwLock<Game>,
    last_used: AtomicU64,
}

impl Session {
    pub fn id(&self) -> Uuid {
        self.id
    }

    /// A copy of the game as it stands.
    pub fn game(&self) -> Game {
        read(&self.game).clone()
    }

    fn summary_of(&self, game: &Game) -> SessionSummary {
        let c0 = game.initial_center();
        SessionSummary {
            id: self.id,
            lion_strategy: game.lion_strategy().kind(),
            status: game.status().into(),
            t: game.lion_moves(),
            lion_pos: game.lion(),
            man_pos: game.man(),
            initial_center: c0.point(),
            r0: c0.r,
            m0: c0.m,
            fcls_bound: fcls_bound(c0.m).unwrap_or(0),
            mcls_bound: mcls_bound_or_fixed(c0.m).unwrap_or(0),
            center: match game.status() {
                GameStatus::Active => game.current_center().ok().map(|c| c.point()),
                _ => None,
            },
        }
    }
}

fn read<T>(lock: &RwLock<T>) -> std::sync::RwLockReadGuard<'_, T> {
    lock.read().unwrap_or_else(PoisonError::into_inner)
}

fn write<T>(lock: &RwLock<T>) -> std::sync::RwLockWriteGuard<'_, T> {
    lock.write().unwrap_or_else(PoisonError::into_inner)
}

fn outcome(game: &Game, center: Option<Center>, record: &StepRecord) -> MoveOutcome {
    let m_t = center.map(|c| c.m);
    let bound_remaining = match (record.captured, m_t) {
        (true, _) | (false, None) => 0,
        (false, Some(m)) => mcls_bound_or_fixed(m).unwrap_or(1).saturating_sub(1),
    };
    MoveOutcome {
        t: record.t,
        man_pos: record.man_pos,
        lion_pos: record.lion_pos,
        center_used: center.map(|c| c.point()),
        captured: record.captured,
        m_t,
        r_t: center.map(|c| c.r),
        bound_remaining,
        status: game.status().into(),
    }
}

fn apply(game: &mut Game, to: Point) -> Result<MoveOutcome, ServiceError> {
    let round = game.advance(to)?;
    Ok(outcome(game, round.record.center, &round.record))
}

#[derive(Debug)]
pub struct SessionStore {
    sessions: RwLock<HashMap<Uuid, Arc<Session>>>,
    epoch: Instant,
    idle_timeout: Duration,
}

impl Default for SessionStore {
    fn default() -> Self {
        Self::new(DEFAULT_IDLE_TIMEOUT)
    }
}

impl SessionStore {
    pub fn new(idle_timeout: Duration) -> Self {
        SessionStore {
            sessions: RwLock::new(HashMap::new()),
            epoch: Instant::now(),
            idle_timeout,
        }
    }

    pub fn idle_timeout(&self) -> Duration {
        self.idle_timeout
    }

    pub fn len(&self) -> usize {
        read(&self.sessions).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn touch(&self, session: &Session) {
        let ms = Instant::now().saturating_duration_since(self.epoch).as_millis() as u64;
        session.last_used.fetch_max(ms, Ordering::Relaxed);
    }

    pub fn get(&self, id: Uuid) -> Result<Arc<Session>, ServiceError> {
        let session = read(&self.sessions)
            .get(&id)
            .cloned()
            .ok_or(ServiceError::NotFound(id))?;
        self.touch(&session);
        Ok(session)
    }

    pub fn create(&self, req: &CreateGame) -> Result<SessionSummary, ServiceError> {
        if !req.lion_start.in_quadrant() || !req.man_start.in_quadrant() {
            return Err(ServiceError::OutOfQuadrant(
                "start positions must be finite points in the quadrant".into(),
            ));
        }
        let game = Game::new(req.lion_strategy, req.lion_start, req.man_start)?;
        let session = Arc::new(Session {
            id: Uuid::new_v4(),
            lion_start: req.lion_start,
            man_start: req.man_start,
            game: RwLock::new(game),
            last_used: AtomicU64::new(0),
        });
        self.touch(&session);
        let summary = session.summary_of(&read(&session.game));
        write(&self.sessions).insert(session.id, session);
        Ok(summary)
    }

    pub fn man_move(&self, id: Uuid, to: Point) -> Result<MoveOutcome, ServiceError> {
        let session = self.get(id)?;
        let mut game = write(&session.game);
        apply(&mut game, to)
    }

    /// The outcome `man_move` would return, computed on a copy.
    pub fn preview(&self, id: Uuid, to: Point) -> Result<MoveOutcome, ServiceError> {
        let session = self.get(id)?;
        let mut copy = read(&session.game).clone();
        apply(&mut copy, to)
    }

    pub fn view(&self, id: Uuid) -> Result<SessionView, ServiceError> {
        let session = self.get(id)?;
        let game = read(&session.game);
        Ok(SessionView {
            summary: session.summary_of(&game),
            abort_reason: match game.status() {
                GameStatus::Aborted(v) => Some(v.to_string()),
                _ => None,
            },
            man_start: session.man_start,
            lion_start: session.lion_start,
            steps: game.steps().iter().map(StepView::from).collect(),
        })
    }

    pub fn delete(&self, id: Uuid) -> Result<(), ServiceError> {
        write(&self.sessions)
            .remove(&id)
            .map(|_| ())
            .ok_or(ServiceError::NotFound(id))
    }

    /// Drops sessions unused for longer than the idle timeout as of `now`.
    /// Returns how many were dropped.
    pub fn evict_idle(&self, now: Instant) -> usize {
        let elapsed = now.saturating_duration_since(self.epoch);
        if elapsed < self.idle_timeout {
            return 0;
        }
        let cutoff = (elapsed - self.idle_timeout).as_millis() as u64;
        let mut sessions = write(&self.sessions);
        let before = sessions.len();
        sessions.retain(|_, s| s.last_used.load(Ordering::Relaxed) >= cutoff);
        before - sessions.len()
    }
}
