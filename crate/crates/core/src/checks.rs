//! Per-step inequalities that every lion move must satisfy, evaluated from
//! recorded positions. The engine runs them live; the verification suites
//! rerun them over finished traces.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bounds::recursion_step;
use crate::center::Center;
use crate::geometry::Point;
use crate::strategies::{LionKind, CAPTURE_RADIUS, CAPTURE_TOL};

/// Tolerance of the live engine checks.
pub const ENGINE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityId {
    /// Non-capturing lion moves have length exactly 1.
    LionStep,
    LionQuadrant,
    ManMove,
    /// `|L_t - C|^2 + 1 <= |L_{t+1} - C|^2`
    PotentialGain,
    /// `|L_{t+1} - C|^2 <= |C|^2`
    PotentialCeiling,
    /// Both components of `C - L_{t+1}` strictly positive.
    CenterAhead,
    /// `r_t^2 + 1 <= r~_{t+1}^2`
    RadiusGain,
    /// `r~_{t+1}^2 <= r_t^2 + m_t^2`
    RadiusCeiling,
    /// `x_{t+1} < x_t`
    CenterShrinkX,
    /// `y_{t+1} < y_t`
    CenterShrinkY,
    /// `m_{t+1} <= g(m_t)` whenever `m_t > 1`.
    MinCoordRecursion,
    /// `m_t <= 1` means the next lion move captures.
    OneMoveCapture,
    /// `m_t <= b_t` along the bound recursion.
    RecursionDominates,
    /// Lion moves used do not exceed the capture-time bound.
    CaptureWithinBound,
    /// Strategy failed to produce a move (undefined center, no intersection).
    StrategyFailure,
    /// Sampled arc maximum does not exceed the closed form.
    ArcSupremum,
    /// Sampled arc maximum comes within the sampling allowance of the closed form.
    ArcSampleGap,
    ArcEndpointFirst,
    ArcEndpointSecond,
    ArcMirror,
    BetaArgmax,
    BetaMonotone,
    BetaSupValue,
    ClosedFormIdentity,
    RadiusArgmax,
    RadiusMaxValue,
    RadiusMonotone,
    BoundDominance,
    /// `n_mcls < n_fcls` for `m0 >= 3`.
    BoundStrict,
    DecayMargin,
    RecursionMonotone,
}

impl InequalityId {
    pub fn as_str(self) -> &'static str {
        use InequalityId::*;
        match self {
            LionStep => "lion_step",
            LionQuadrant => "lion_quadrant",
            ManMove => "man_move",
            PotentialGain => "potential_gain",
            PotentialCeiling => "potential_ceiling",
            CenterAhead => "center_ahead",
            RadiusGain => "radius_gain",
            RadiusCeiling => "radius_ceiling",
            CenterShrinkX => "center_shrink_x",
            CenterShrinkY => "center_shrink_y",
            MinCoordRecursion => "min_coord_recursion",
            OneMoveCapture => "one_move_capture",
            RecursionDominates => "recursion_dominates",
            CaptureWithinBound => "capture_within_bound",
            StrategyFailure => "strategy_failure",
            ArcSupremum => "arc_supremum",
            ArcSampleGap => "arc_sample_gap",
            ArcEndpointFirst => "arc_endpoint_first",
            ArcEndpointSecond => "arc_endpoint_second",
            ArcMirror => "arc_mirror",
            BetaArgmax => "beta_argmax",
            BetaMonotone => "beta_monotone",
            BetaSupValue => "beta_sup_value",
            ClosedFormIdentity => "closed_form_identity",
            RadiusArgmax => "radius_argmax",
            RadiusMaxValue => "radius_max_value",
            RadiusMonotone => "radius_monotone",
            BoundDominance => "bound_dominance",
            BoundStrict => "bound_strict",
            DecayMargin => "decay_margin",
            RecursionMonotone => "recursion_monotone",
        }
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    /// Needs `slack > 0` whatever the tolerance.
    Strict,
    /// Needs `slack >= -tol`.
    Tolerant,
    /// The tolerance is already part of the slack; needs `slack >= 0`.
    Absolute,
}

/// One evaluated inequality. `slack` is the measured margin: positive means
/// satisfied with room to spare.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: InequalityId,
    pub slack: f64,
    pub mode: CheckMode,
}

impl Check {
    pub fn at_most(id: InequalityId, lhs: f64, rhs: f64) -> Self {
        Check {
            id,
            slack: rhs - lhs,
            mode: CheckMode::Tolerant,
        }
    }

    pub fn strictly_less(id: InequalityId, lhs: f64, rhs: f64) -> Self {
        Check {
            id,
            slack: rhs - lhs,
            mode: CheckMode::Strict,
        }
    }

    pub fn positive(id: InequalityId, value: f64) -> Self {
        Check {
            id,
            slack: value,
            mode: CheckMode::Strict,
        }
    }

    /// `value == target` up to the caller's tolerance.
    pub fn near(id: InequalityId, value: f64, target: f64) -> Self {
        Check {
            id,
            slack: -(value - target).abs(),
            mode: CheckMode::Tolerant,
        }
    }

    /// `|value - target| <= tol` for a fixed `tol`.
    pub fn within(id: InequalityId, value: f64, target: f64, tol: f64) -> Self {
        Check {
            id,
            slack: tol - (value - target).abs(),
            mode: CheckMode::Absolute,
        }
    }

    pub fn passes(&self, tol: f64) -> bool {
        if self.slack.is_nan() {
            return false;
        }
        match self.mode {
            CheckMode::Strict => self.slack > 0.0,
            CheckMode::Tolerant => self.slack >= -tol,
            CheckMode::Absolute => self.slack >= 0.0,
        }
    }
}

/// What the checks need to know about one lion move.
#[derive(Debug, Clone, Copy)]
pub struct MoveContext {
    pub kind: LionKind,
    pub lion_before: Point,
    pub lion_after: Point,
    pub captured: bool,
    /// Center in force for this move.
    pub center: Center,
    /// Moving center of the previous move, if any.
    pub previous_center: Option<Center>,
}

/// All inequalities that apply to a single lion move.
pub fn move_checks(ctx: &MoveContext) -> Vec<Check> {
    use InequalityId::*;
    let mut out = Vec::with_capacity(10);
    let c = ctx.center;
    let cp = c.point();

    if ctx.kind == LionKind::Mcls {
        if let Some(prev) = ctx.previous_center {
            out.push(Check::strictly_less(CenterShrinkX, c.x, prev.x));
            out.push(Check::strictly_less(CenterShrinkY, c.y, prev.y));
            if prev.m > 1.0 {
                let g = recursion_step(prev.m).expect("m > 1");
                out.push(Check::at_most(MinCoordRecursion, c.m, g));
            }
        }
        if c.m <= 1.0 {
            out.push(Check {
                id: OneMoveCapture,
                slack: if ctx.captured { 1.0 - c.m } else { c.m - 1.0 },
                mode: CheckMode::Tolerant,
            });
        }
    }

    out.push(Check {
        id: LionQuadrant,
        slack: ctx.lion_after.x.min(ctx.lion_after.y),
        mode: CheckMode::Tolerant,
    });
    if ctx.captured {
        let limit = CAPTURE_RADIUS + CAPTURE_TOL;
        out.push(Check::at_most(
            LionStep,
            ctx.lion_before.distance(ctx.lion_after),
            limit,
        ));
        return out;
    }

    out.push(Check::near(LionStep, ctx.lion_before.distance(ctx.lion_after), 1.0));
    let before_sq = (ctx.lion_before - cp).norm_sq();
    let after_sq = (ctx.lion_after - cp).norm_sq();
    out.push(Check::at_most(PotentialGain, before_sq + 1.0, after_sq));
    out.push(Check::at_most(PotentialCeiling, after_sq, c.norm_sq()));
    let ahead = cp - ctx.lion_after;
    out.push(Check::positive(CenterAhead, ahead.dx.min(ahead.dy)));
    if ctx.kind == LionKind::Mcls {
        out.push(Check::at_most(RadiusGain, c.r * c.r + 1.0, after_sq));
        out.push(Check::at_most(RadiusCeiling, after_sq, c.r * c.r + c.m * c.m));
    }
    out
}
