//! The strategy center: the point `C = L + eta * (L - M)`, `eta > 0`, whose
//! distance from the lion equals its own largest coordinate.
//!
//! Both lion strategies steer along lines through a center; they differ only
//! in how often it is recomputed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Displacement, Point, GEOM_TOL, MIN_LINE_SEPARATION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum CenterError {
    #[error("no center exists on this ray")]
    CenterUndefined,
    #[error("lion and man occupy the same position")]
    CoincidentPlayers,
}

/// A center with its largest (`r`) and smallest (`m`) coordinate cached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Center {
    pub x: f64,
    pub y: f64,
    pub r: f64,
    pub m: f64,
}

impl Center {
    pub fn from_point(p: Point) -> Self {
        Center {
            x: p.x,
            y: p.y,
            r: p.x.max(p.y),
            m: p.x.min(p.y),
        }
    }

    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }

    /// `|C|^2 = r^2 + m^2`.
    pub fn norm_sq(&self) -> f64 {
        self.r * self.r + self.m * self.m
    }
}

/// `|d| - d_i` evaluated without cancellation when `d` hugs axis `i`.
fn slack_along(component: f64, other: f64, len: f64) -> f64 {
    if component > 0.0 {
        other * other / (len + component)
    } else {
        len - component
    }
}

/// The ray parameter `eta` of the center built from `lion` along `dir`.
///
/// Each axis gives a candidate `eta_i = L_i / (|dir| - dir_i)`: the value at
/// which `eta |dir|` catches up with coordinate `i`. The distance grows at
/// least as fast as either coordinate, so the last crossing (the larger
/// candidate) is the one where the distance equals the maximum coordinate.
pub fn center_eta(lion: Point, dir: Displacement) -> Result<f64, CenterError> {
    let len = dir.norm();
    if len <= MIN_LINE_SEPARATION || !len.is_finite() || !lion.is_finite() {
        return Err(CenterError::CenterUndefined);
    }
    let candidate = |coord: f64, comp: f64, other: f64| {
        let denom = slack_along(comp, other, len);
        (denom > 0.0)
            .then(|| coord / denom)
            .filter(|eta| *eta > 0.0 && eta.is_finite())
    };
    let eta = match (candidate(lion.x, dir.dx, dir.dy), candidate(lion.y, dir.dy, dir.dx)) {
        (Some(a), Some(b)) => a.max(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => return Err(CenterError::CenterUndefined),
    };
    let c = lion + dir * eta;
    let gap = eta * len - c.x.max(c.y);
    if gap.abs() > GEOM_TOL * (1.0 + eta * len) {
        return Err(CenterError::CenterUndefined);
    }
    Ok(eta)
}

/// Center on the ray from `lion` in direction `dir`.
pub fn center_from_ray(lion: Point, dir: Displacement) -> Result<Center, CenterError> {
    let eta = center_eta(lion, dir)?;
    Ok(Center::from_point(lion + dir * eta))
}

/// Center for a lion at `lion` chasing a man at `man`: the ray points away from the man.
pub fn compute_center(lion: Point, man: Point) -> Result<Center, CenterError> {
    if lion == man {
        return Err(CenterError::CoincidentPlayers);
    }
    center_from_ray(lion, lion - man)
}
