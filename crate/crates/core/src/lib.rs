//! Gale's lion-and-man game in the non-negative quadrant.
//!
//! The lion steers along lines through a *center* built from the lion and
//! man positions. The fixed-center lion builds it once; the moving-center
//! lion rebuilds it before every move, which gives a shorter capture-time
//! bound. This crate plays both, computes both bounds, and checks the
//! geometric inequalities behind them numerically.

pub mod bounds;
pub mod center;
pub mod checks;
pub mod csv;
pub mod engine;
pub mod geometry;
pub mod sim;
pub mod strategies;
pub mod verify;

pub use center::{center_from_ray, compute_center, Center, CenterError};
pub use engine::{play, validate_move, Game, GameConfig, ManKind, Outcome, StepRecord, Trace};
pub use geometry::{Displacement, Point};
pub use strategies::{lion_respond, LionKind, LionStrategy};
