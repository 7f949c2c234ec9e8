//! Lion strategies (fixed and moving center) and the man strategies used to
//! exercise them.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::center::{center_from_ray, compute_center, Center, CenterError};
use crate::geometry::{
    clipped_step, line_circle_intersections, quadrant_step_limit, Displacement, GeometryError, Point,
};

/// A lion within this distance of the man's new position captures him.
pub const CAPTURE_RADIUS: f64 = 1.0;

/// Allowance on [`CAPTURE_RADIUS`] for rounding in the distance test. Without
/// it a man standing a few ulps from the lion can compute as just outside the
/// unit disk while being inside it.
pub const CAPTURE_TOL: f64 = 1e-9;

/// Default angular resolution of the greedy man.
pub const DEFAULT_GREEDY_SAMPLES: usize = 360;

const GREEDY_REFINE_SAMPLES: usize = 16;
const RANDOM_MAX_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum StrategyError {
    #[error(transparent)]
    Center(#[from] CenterError),
    #[error("line through center and man does not meet the lion's unit circle")]
    NoIntersection,
    #[error("center and man coincide")]
    DegenerateLine,
}

impl From<GeometryError> for StrategyError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::DegenerateLine => StrategyError::DegenerateLine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LionKind {
    Fcls,
    Mcls,
}

impl LionKind {
    pub fn name(self) -> &'static str {
        match self {
            LionKind::Fcls => "fcls",
            LionKind::Mcls => "mcls",
        }
    }
}

impl fmt::Display for LionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LionKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fcls" => Ok(LionKind::Fcls),
            "mcls" => Ok(LionKind::Mcls),
            other => Err(format!("unknown lion strategy `{other}` (expected fcls or mcls)")),
        }
    }
}

/// Lion strategy state. The fixed-center lion computes its center once from
/// the starting positions; the moving-center lion is stateless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LionStrategy {
    kind: LionKind,
    fixed_center: Option<Center>,
}

impl LionStrategy {
    pub fn new(kind: LionKind, lion_start: Point, man_start: Point) -> Result<Self, StrategyError> {
        let fixed_center = match kind {
            LionKind::Fcls => Some(compute_center(lion_start, man_start)?),
            LionKind::Mcls => None,
        };
        Ok(LionStrategy { kind, fixed_center })
    }

    pub fn kind(&self) -> LionKind {
        self.kind
    }

    pub fn fixed_center(&self) -> Option<Center> {
        self.fixed_center
    }

    /// Center used for the lion's move at time `t`, from the positions at time
    /// `t` (before the man's move).
    pub fn center_for(&self, lion: Point, man: Point) -> Result<Center, StrategyError> {
        self.center_at(&Position::new(lion, man))
    }

    /// Like [`center_for`](Self::center_for), but follows the recorded heading
    /// when there is one.
    pub fn center_at(&self, pos: &Position) -> Result<Center, StrategyError> {
        match (self.fixed_center, pos.heading) {
            (Some(c), _) => Ok(c),
            (None, Some(h)) => Ok(center_from_ray(pos.lion, h)?),
            (None, None) => Ok(compute_center(pos.lion, pos.man)?),
        }
    }
}

/// Positions at the start of a round.
///
/// After a non-capturing lion move the lion sits on the line through the
/// center and the man, so the direction from the man to the lion is known to
/// full precision as a multiple of `center - man` even when the two players
/// are much closer than rounding error allows `lion - man` to resolve.
/// `heading` carries that unit direction; `None` means "use `lion - man`".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub lion: Point,
    pub man: Point,
    pub heading: Option<Displacement>,
}

impl Position {
    pub fn new(lion: Point, man: Point) -> Self {
        Position {
            lion,
            man,
            heading: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LionDecision {
    pub new_position: Point,
    pub captured: bool,
    pub center_used: Option<Center>,
    pub candidate_discarded: Option<Point>,
    /// Direction from the man to the lion after this move.
    pub heading: Option<Displacement>,
}

pub fn is_capture(lion: Point, man_new: Point) -> bool {
    lion.distance(man_new) <= CAPTURE_RADIUS + CAPTURE_TOL
}

/// Unit step from `lion` onto the line through `center` and `man_new`,
/// keeping the intersection farther from `center`. Returns `(kept, discarded)`.
pub fn step_on_center_line(
    center: Point,
    lion: Point,
    man_new: Point,
) -> Result<(Point, Option<Point>), StrategyError> {
    let step = center_line_step(center, lion, man_new)?;
    Ok((step.kept, step.discarded))
}

struct CenterLineStep {
    kept: Point,
    discarded: Option<Point>,
    heading: Option<Displacement>,
}

fn center_line_step(center: Point, lion: Point, man_new: Point) -> Result<CenterLineStep, StrategyError> {
    // Parameterized so that the center is at s = 0 and the man at s = 1.
    let hits = line_circle_intersections(lion, 1.0, center, man_new)?;
    let (kept, discarded, side) = match hits.as_slice() {
        [] => return Err(StrategyError::NoIntersection),
        [only] => (only.point, None, only.s - 1.0),
        [a, b, ..] => {
            // The man is outside the unit disk, so both roots lie on the same
            // side of s = 1 and their sum tells which side without
            // cancellation, however close the kept root is to the man.
            let side = a.s + b.s - 2.0;
            if a.point.distance(center) >= b.point.distance(center) {
                (a.point, Some(b.point), side)
            } else {
                (b.point, Some(a.point), side)
            }
        }
    };
    let heading = (center - man_new)
        .normalized()
        .map(|along| if side > 0.0 { -along } else { along });
    Ok(CenterLineStep {
        kept,
        discarded,
        heading,
    })
}

/// The lion's reply to the man moving from `man_prev` to `man_new`.
///
/// Capture copies the man's coordinates verbatim. Otherwise the lion takes a
/// unit step onto the line through the strategy center and the man's new
/// position, on the side away from the center.
pub fn lion_respond(
    state: &LionStrategy,
    lion: Point,
    man_prev: Point,
    man_new: Point,
) -> Result<LionDecision, StrategyError> {
    lion_reply(state, &Position::new(lion, man_prev), man_new)
}

/// [`lion_respond`] from a [`Position`] that may carry a heading.
pub fn lion_reply(state: &LionStrategy, pos: &Position, man_new: Point) -> Result<LionDecision, StrategyError> {
    if is_capture(pos.lion, man_new) {
        return Ok(LionDecision {
            new_position: man_new,
            captured: true,
            center_used: None,
            candidate_discarded: None,
            heading: None,
        });
    }
    let center = state.center_at(pos)?;
    let step = center_line_step(center.point(), pos.lion, man_new)?;
    Ok(LionDecision {
        new_position: step.kept,
        captured: false,
        center_used: Some(center),
        candidate_discarded: step.discarded,
        heading: step.heading,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManDecision {
    pub new_position: Point,
}

/// Step perpendicular to the line joining the man to the current center.
///
/// The direction toward the center rotated by +90 degrees is preferred. A
/// direction that would leave the quadrant loses to one that stays inside;
/// if both hit a wall the step is shortened to the wall along whichever
/// direction allows the longer step.
pub fn man_orthogonal(man: Point, lion: Point) -> Result<ManDecision, StrategyError> {
    man_orthogonal_about(man, compute_center(lion, man)?)
}

/// [`man_orthogonal`] about a given center.
pub fn man_orthogonal_about(man: Point, center: Center) -> Result<ManDecision, StrategyError> {
    let toward = (center.point() - man)
        .normalized()
        .ok_or(StrategyError::DegenerateLine)?;
    let ccw = toward.rotate_ccw();
    let cw = toward.rotate_cw();
    let lambda_ccw = quadrant_step_limit(man, ccw);
    let lambda_cw = quadrant_step_limit(man, cw);
    let (dir, lambda) = if lambda_cw > lambda_ccw {
        (cw, lambda_cw)
    } else {
        (ccw, lambda_ccw)
    };
    Ok(ManDecision {
        new_position: clipped_step(man, dir, lambda),
    })
}

/// How good a candidate destination is for the man, compared lexicographically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyScore {
    pub survives: bool,
    /// Smallest coordinate of the center after the lion's reply.
    pub next_m: f64,
    pub lion_distance: f64,
}

impl GreedyScore {
    const LOST: GreedyScore = GreedyScore {
        survives: false,
        next_m: f64::NEG_INFINITY,
        lion_distance: f64::NEG_INFINITY,
    };

    pub fn better_than(&self, other: &GreedyScore) -> bool {
        (self.survives, self.next_m, self.lion_distance)
            .partial_cmp(&(other.survives, other.next_m, other.lion_distance))
            .is_some_and(|o| o.is_gt())
    }
}

pub fn greedy_score(pos: &Position, opponent: &LionStrategy, to: Point) -> GreedyScore {
    let Ok(reply) = lion_reply(opponent, pos, to) else {
        return GreedyScore::LOST;
    };
    if reply.captured {
        return GreedyScore::LOST;
    }
    let after = Position {
        lion: reply.new_position,
        man: to,
        heading: reply.heading,
    };
    let next_m = LionStrategy {
        kind: LionKind::Mcls,
        fixed_center: None,
    }
    .center_at(&after)
    .map_or(f64::NEG_INFINITY, |c| c.m);
    GreedyScore {
        survives: true,
        next_m,
        lion_distance: reply.new_position.distance(to),
    }
}

/// Destination reached by stepping along `angle`, shortened at the quadrant walls.
pub fn greedy_candidate(man: Point, angle: f64) -> Point {
    let dir = Displacement::from_angle(angle);
    clipped_step(man, dir, quadrant_step_limit(man, dir))
}

/// One-ply adversary: tries `angle_samples` headings (plus standing still),
/// then refines around the best heading with 16 more.
pub fn man_greedy(man: Point, lion: Point, opponent: &LionStrategy, angle_samples: usize) -> ManDecision {
    man_greedy_at(&Position::new(lion, man), opponent, angle_samples)
}

/// [`man_greedy`] from a [`Position`].
pub fn man_greedy_at(pos: &Position, opponent: &LionStrategy, angle_samples: usize) -> ManDecision {
    let man = pos.man;
    let samples = angle_samples.max(8);
    let mut best_to = man;
    let mut best_angle = None;
    let mut best = greedy_score(pos, opponent, man);
    let mut consider = |angle: f64, best_angle: &mut Option<f64>| {
        let to = greedy_candidate(man, angle);
        let score = greedy_score(pos, opponent, to);
        if score.better_than(&best) {
            best = score;
            best_to = to;
            *best_angle = Some(angle);
        }
    };
    for k in 0..samples {
        consider(TAU * k as f64 / samples as f64, &mut best_angle);
    }
    if let Some(center_angle) = best_angle {
        let spacing = TAU / samples as f64;
        let half = GREEDY_REFINE_SAMPLES / 2;
        for j in 1..=half {
            let offset = spacing * j as f64 / (half + 1) as f64;
            consider(center_angle - offset, &mut best_angle);
            consider(center_angle + offset, &mut best_angle);
        }
    }
    if !best.survives {
        return ManDecision { new_position: man };
    }
    ManDecision { new_position: best_to }
}

/// Uniform heading and uniform step length in `[0, 1]`, resampled until the
/// destination lies in the quadrant. Stays put after 64 failed draws.
pub fn man_random<R: Rng + ?Sized>(man: Point, rng: &mut R) -> ManDecision {
    for _ in 0..RANDOM_MAX_ATTEMPTS {
        let angle = rng.random_range(0.0..TAU);
        let radius: f64 = rng.random_range(0.0..=1.0);
        let to = man + Displacement::from_angle(angle) * radius;
        if to.in_quadrant() && man.distance(to) <= 1.0 {
            return ManDecision { new_position: to };
        }
    }
    ManDecision { new_position: man }
}

/// A man strategy that can be driven by the engine.
pub trait ManPolicy: Send {
    fn next_move(&mut self, pos: &Position, opponent: &LionStrategy) -> Result<ManDecision, StrategyError>;
}

pub struct Orthogonal;

/// Moves perpendicular to the line joining the man to the center the lion
/// will use.
impl ManPolicy for Orthogonal {
    fn next_move(&mut self, pos: &Position, opponent: &LionStrategy) -> Result<ManDecision, StrategyError> {
        man_orthogonal_about(pos.man, opponent.center_at(pos)?)
    }
}

pub struct Greedy {
    pub angle_samples: usize,
}

impl ManPolicy for Greedy {
    fn next_move(&mut self, pos: &Position, opponent: &LionStrategy) -> Result<ManDecision, StrategyError> {
        Ok(man_greedy_at(pos, opponent, self.angle_samples))
    }
}

pub struct RandomWalk {
    rng: ChaCha8Rng,
}

impl RandomWalk {
    pub fn new(rng: ChaCha8Rng) -> Self {
        RandomWalk { rng }
    }
}

impl ManPolicy for RandomWalk {
    fn next_move(&mut self, pos: &Position, _: &LionStrategy) -> Result<ManDecision, StrategyError> {
        Ok(man_random(pos.man, &mut self.rng))
    }
}

/// Plays a fixed list of destinations, then stands still.
pub struct Scripted {
    moves: Vec<Point>,
    next: usize,
}

impl Scripted {
    pub fn new(moves: Vec<Point>) -> Self {
        Scripted { moves, next: 0 }
    }
}

impl ManPolicy for Scripted {
    fn next_move(&mut self, pos: &Position, _: &LionStrategy) -> Result<ManDecision, StrategyError> {
        let to = self.moves.get(self.next).copied().unwrap_or(pos.man);
        self.next += 1;
        Ok(ManDecision { new_position: to })
    }
}

/// Smallest angular distance between two headings.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}
