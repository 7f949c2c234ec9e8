//! Numerical checks of the moving-center analysis.
//!
//! Closed forms are compared against brute-force oracles: the supremum over
//! the arc of candidate lion positions is sampled directly, the worst-case
//! center shape is found by grid search, and recorded game traces are
//! re-checked step by step.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{bounds_series, decay_margin, mcls_bound, recursion, recursion_step};
use crate::center::{center_from_ray, Center, CenterError};
use crate::checks::{move_checks, Check, InequalityId, MoveContext};
use crate::csv::fmt_f64;
use crate::engine::{ManKind, Outcome, Trace};
use crate::geometry::{Displacement, Point};
use crate::sim::{self, GameResult, SimConfig};
use crate::strategies::LionKind;

/// Identities and endpoint evaluations.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Allowed shortfall of a sampled maximum below the true supremum.
pub const SAMPLING_GAP: f64 = 1e-3;
/// Relative tolerance tying the worst case to the bound recursion.
pub const RECURSION_IDENTITY_RTOL: f64 = 1e-12;
pub const DEFAULT_ARC_SAMPLES: usize = 10_000;
pub const MIN_ARC_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("arc instance needs 0 < m <= r < r_tilde (got r = {r}, m = {m}, r_tilde = {r_tilde})")]
    Domain { r: f64, m: f64, r_tilde: f64 },
    #[error("no lion position at distance r_tilde from the center lies in the quadrant")]
    EmptyArc,
    #[error("at least {MIN_ARC_SAMPLES} arc samples are needed, got {0}")]
    TooFewSamples(usize),
    #[error("grid is empty")]
    EmptyGrid,
    #[error("grid value {0} outside [sqrt(m^2 + 1), sqrt(2) m]")]
    OutsideWindow(f64),
    #[error("{0} must exceed 1")]
    NeedsAboveOne(&'static str),
    #[error(transparent)]
    Center(#[from] CenterError),
    #[error("unknown suite `{0}` (expected prop3, lemma1, lemma2, lemma3, theorem1, theorem2 or all)")]
    UnknownSuite(String),
    #[error("cases must be at least 1")]
    NoCases,
    #[error(transparent)]
    Sim(#[from] sim::SimError),
}

/// Center `(r, m)` together with the distance `r_tilde` of the lion's next
/// position from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcInstance {
    r: f64,
    m: f64,
    r_tilde: f64,
}

impl ArcInstance {
    pub fn new(r: f64, m: f64, r_tilde: f64) -> Result<Self, VerifyError> {
        let ok = [r, m, r_tilde].iter().all(|v| v.is_finite()) && 0.0 < m && m <= r && r < r_tilde;
        if !ok {
            return Err(VerifyError::Domain { r, m, r_tilde });
        }
        Ok(ArcInstance { r, m, r_tilde })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn r_tilde(&self) -> f64 {
        self.r_tilde
    }

    /// Some point at distance `r_tilde` from the center lies in the quadrant.
    pub fn arc_nonempty(&self) -> bool {
        self.r_tilde * self.r_tilde <= self.r * self.r + self.m * self.m + IDENTITY_TOL
    }

    /// `r^2 + 1 <= r_tilde^2 <= r^2 + m^2`, reachable by one lion move.
    pub fn in_window(&self) -> bool {
        let rt2 = self.r_tilde * self.r_tilde;
        let r2 = self.r * self.r;
        r2 + 1.0 <= rt2 + IDENTITY_TOL && self.arc_nonempty()
    }

    /// Angles of `C - L` over the arc: `[arccos(r / r_tilde), arcsin(m / r_tilde)]`.
    /// The first end puts the lion on the y-axis, the second on the x-axis.
    pub fn theta_range(&self) -> Result<(f64, f64), VerifyError> {
        if !self.arc_nonempty() {
            return Err(VerifyError::EmptyArc);
        }
        let lo = (self.r / self.r_tilde).acos();
        let hi = (self.m / self.r_tilde).min(1.0).asin();
        Ok((lo, hi.max(lo)))
    }

    /// Candidate lion position at angle `theta`.
    pub fn arc_point(&self, theta: f64) -> Point {
        let p = Point::new(self.r, self.m) - Displacement::from_angle(theta) * self.r_tilde;
        // The arc ends touch the axes; rounding may put them a few ulps outside.
        Point::new(p.x.max(0.0), p.y.max(0.0))
    }

    /// The two closed-form candidates: the lion on the x-axis, then on the y-axis.
    pub fn closed_form_terms(&self) -> (f64, f64) {
        let (r, m, rt) = (self.r, self.m, self.r_tilde);
        // a = sqrt(rt^2 - m^2), and rt - a = m^2 / (rt + a) avoids cancellation.
        let a = ((rt - m) * (rt + m)).sqrt();
        let b = ((rt - r) * (rt + r)).sqrt();
        let first = (r - a) * (rt + a) / m;
        let second = (m - b) * (rt + b) / r;
        (first, second)
    }

    fn mirrored(&self) -> MirroredArc {
        MirroredArc(*self)
    }
}

/// Largest smallest-coordinate of the next center over the arc, in closed form.
/// Either term may be negative, meaning the next center is forced onto an axis.
pub fn arc_sup_closed_form(inst: &ArcInstance) -> f64 {
    let (a, b) = inst.closed_form_terms();
    a.max(b)
}

fn next_center(lion: Point, toward: Displacement, scale: f64) -> Result<Center, CenterError> {
    if lion.x.max(lion.y) <= 1e-12 * scale {
        // Centers scale with the lion for a fixed direction, so a lion at
        // the origin has its center there too.
        return Ok(Center::from_point(Point::ORIGIN));
    }
    center_from_ray(lion, toward)
}

/// Smallest coordinate of the next center when the lion lands at angle `theta`.
pub fn arc_next_m(inst: &ArcInstance, theta: f64) -> Result<f64, CenterError> {
    let c = Point::new(inst.r, inst.m);
    let lion = inst.arc_point(theta);
    Ok(next_center(lion, c - lion, inst.r_tilde)?.m)
}

fn sample_angles(lo: f64, hi: f64, samples: usize) -> impl Iterator<Item = f64> {
    let n = samples - 1;
    (0..=n).map(move |k| {
        if k == n {
            hi
        } else {
            lo + (hi - lo) * k as f64 / n as f64
        }
    })
}

/// Brute-force maximum over `samples` evenly spaced angles, both ends included.
pub fn arc_sup_sampled(inst: &ArcInstance, samples: usize) -> Result<f64, VerifyError> {
    if samples < MIN_ARC_SAMPLES {
        return Err(VerifyError::TooFewSamples(samples));
    }
    let (lo, hi) = inst.theta_range()?;
    let mut best = f64::NEG_INFINITY;
    for theta in sample_angles(lo, hi, samples) {
        best = best.max(arc_next_m(inst, theta)?);
    }
    Ok(best)
}

/// The same instance with the larger coordinate on the y-axis.
struct MirroredArc(ArcInstance);

impl MirroredArc {
    fn oracle(&self, samples: usize) -> Result<f64, VerifyError> {
        let inst = self.0;
        let (lo, hi) = inst.theta_range()?;
        let c = Point::new(inst.m, inst.r);
        let mut best = f64::NEG_INFINITY;
        for theta in sample_angles(lo, hi, samples) {
            let p = inst.arc_point(theta);
            let lion = Point::new(p.y, p.x);
            best = best.max(next_center(lion, c - lion, inst.r_tilde)?.m);
        }
        Ok(best)
    }
}

/// Result of scanning `r = beta m`, `r_tilde = gamma r` over a grid of `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaScan {
    pub beta_star: f64,
    pub sup_value: f64,
    /// `(beta, closed form)` for every grid point.
    pub values: Vec<(f64, f64)>,
    /// Grid points whose `r_tilde` one lion move cannot produce. They are
    /// still evaluated: the closed form is defined there.
    pub out_of_window: Vec<f64>,
}

impl BetaScan {
    /// Largest consecutive difference along the grid; negative when strictly decreasing.
    pub fn max_increment(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1].1 - w[0].1)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Worst-case next `m` for a center `(beta m, m)` and `r_tilde = gamma beta m`.
pub fn worst_next_m(m: f64, gamma: f64, beta: f64) -> Result<f64, VerifyError> {
    let r = beta * m;
    Ok(arc_sup_closed_form(&ArcInstance::new(r, m, gamma * r)?))
}

/// Closed form at `beta = 1`: `m (m - sqrt(rt^2 - m^2)) / (rt - sqrt(rt^2 - m^2))`, `rt = gamma m`.
pub fn square_center_next_m(m: f64, gamma: f64) -> f64 {
    let rt = gamma * m;
    let a = (rt * rt - m * m).sqrt();
    m * (m - a) / (rt - a)
}

pub fn beta_argmax_check(m: f64, gamma: f64, beta_grid: &[f64]) -> Result<BetaScan, VerifyError> {
    if beta_grid.is_empty() {
        return Err(VerifyError::EmptyGrid);
    }
    if gamma.is_nan() || gamma <= 1.0 {
        return Err(VerifyError::NeedsAboveOne("gamma"));
    }
    let mut values = Vec::with_capacity(beta_grid.len());
    let mut out_of_window = Vec::new();
    for &beta in beta_grid {
        let r = beta * m;
        let inst = ArcInstance::new(r, m, gamma * r)?;
        if !inst.in_window() {
            out_of_window.push(beta);
        }
        values.push((beta, arc_sup_closed_form(&inst)));
    }
    let &(beta_star, sup_value) = values
        .iter()
        .fold(&values[0], |best, v| if v.1 > best.1 { v } else { best });
    Ok(BetaScan {
        beta_star,
        sup_value,
        values,
        out_of_window,
    })
}

/// `m (1 - sqrt(rh^2 - 1)) / (rh - sqrt(rh^2 - 1))` with `rh = r_tilde / m`.
pub fn radius_value(m: f64, r_hat: f64) -> f64 {
    let s = ((r_hat - 1.0) * (r_hat + 1.0)).sqrt();
    m * (1.0 - s) * (r_hat + s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusScan {
    pub argmax_index: usize,
    /// Grid index closest to `sqrt(m^2 + 1)`.
    pub expected_index: usize,
    pub max_value: f64,
    /// `m (m - 1) / (sqrt(1 + m^2) - 1)`.
    pub expected_max: f64,
    /// Largest consecutive difference along the grid.
    pub max_increment: f64,
}

pub fn radius_sup_check(m: f64, r_tilde_grid: &[f64]) -> Result<RadiusScan, VerifyError> {
    if m.is_nan() || m <= 1.0 {
        return Err(VerifyError::NeedsAboveOne("m"));
    }
    if r_tilde_grid.is_empty() {
        return Err(VerifyError::EmptyGrid);
    }
    let lo = (m * m + 1.0).sqrt();
    let hi = std::f64::consts::SQRT_2 * m;
    let slop = 1e-12 * hi;
    if let Some(&bad) = r_tilde_grid.iter().find(|&&rt| !(rt >= lo - slop && rt <= hi + slop)) {
        return Err(VerifyError::OutsideWindow(bad));
    }
    let values: Vec<f64> = r_tilde_grid.iter().map(|&rt| radius_value(m, rt / m)).collect();
    let argmax_index = (0..values.len()).fold(0, |best, i| if values[i] > values[best] { i } else { best });
    let expected_index = (0..r_tilde_grid.len()).fold(0, |best, i| {
        if (r_tilde_grid[i] - lo).abs() < (r_tilde_grid[best] - lo).abs() {
            i
        } else {
            best
        }
    });
    let max_increment = values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    Ok(RadiusScan {
        argmax_index,
        expected_index,
        max_value: values[argmax_index],
        expected_max: m * (m - 1.0) / ((1.0 + m * m).sqrt() - 1.0),
        max_increment,
    })
}

/// `n` evenly spaced points from `lo` to `hi`, both included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// A step-indexed check of a recorded game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceCheck {
    pub t: u64,
    pub check: Check,
}

/// Re-evaluates every per-step inequality along a finished trace, plus the
/// bound recursion (`m_t <= b_t`) and, for captured moving-center games,
/// capture within the bound.
pub fn trace_checks(trace: &Trace) -> Vec<TraceCheck> {
    let kind = trace.config.lion_strategy;
    let mut out = Vec::new();
    let mut lion_before = trace.config.lion_start;
    let mut previous_center = None;
    for step in &trace.steps {
        if let Some(center) = step.center {
            let ctx = MoveContext {
                kind,
                lion_before,
                lion_after: step.lion_pos,
                captured: step.captured,
                center,
                previous_center,
            };
            out.extend(
                move_checks(&ctx)
                    .into_iter()
                    .map(|check| TraceCheck { t: step.t, check }),
            );
        }
        lion_before = step.lion_pos;
        if kind == LionKind::Mcls {
            previous_center = step.center;
        }
    }
    if kind == LionKind::Mcls {
        if let Some(m0) = trace.steps.first().and_then(|s| s.center).map(|c| c.m) {
            if let Ok(b) = recursion(m0) {
                for (step, bt) in trace.steps.iter().zip(b) {
                    if let Some(c) = step.center {
                        let check = Check::at_most(InequalityId::RecursionDominates, c.m, bt);
                        out.push(TraceCheck { t: step.t, check });
                    }
                }
            }
            if let Ok(bound) = mcls_bound(m0) {
                let used = trace.lion_moves().map_or(f64::INFINITY, |n| n as f64);
                let t = trace.steps.last().map_or(0, |s| s.t);
                let check = Check::within(InequalityId::CaptureWithinBound, used, 0.0, bound as f64);
                out.push(TraceCheck { t, check });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Prop3,
    Lemma1,
    Lemma2,
    Lemma3,
    Theorem1,
    Theorem2,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Prop3,
        Suite::Lemma1,
        Suite::Lemma2,
        Suite::Lemma3,
        Suite::Theorem1,
        Suite::Theorem2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Prop3 => "prop3",
            Suite::Lemma1 => "lemma1",
            Suite::Lemma2 => "lemma2",
            Suite::Lemma3 => "lemma3",
            Suite::Theorem1 => "theorem1",
            Suite::Theorem2 => "theorem2",
        }
    }

    /// Trace inequalities that belong to this suite.
    fn covers(self, id: InequalityId) -> bool {
        use InequalityId::*;
        match self {
            Suite::Prop3 => matches!(
                id,
                LionStep | LionQuadrant | PotentialGain | PotentialCeiling | CenterAhead | RadiusGain | RadiusCeiling
            ),
            Suite::Lemma1 => matches!(id, CenterShrinkX | CenterShrinkY),
            Suite::Theorem1 => {
                matches!(
                    id,
                    MinCoordRecursion | OneMoveCapture | RecursionDominates | CaptureWithinBound
                )
            }
            _ => false,
        }
    }

    fn uses_games(self) -> bool {
        matches!(self, Suite::Prop3 | Suite::Lemma1 | Suite::Theorem1)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A suite name or `all`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteSelection {
    One(Suite),
    All,
}

impl SuiteSelection {
    pub fn suites(self) -> Vec<Suite> {
        match self {
            SuiteSelection::One(s) => vec![s],
            SuiteSelection::All => Suite::ALL.to_vec(),
        }
    }
}

impl FromStr for SuiteSelection {
    type Err = VerifyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            return Ok(SuiteSelection::All);
        }
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .map(SuiteSelection::One)
            .ok_or_else(|| VerifyError::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub cases: usize,
    pub seed: u64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub suite: Suite,
    pub case_id: String,
    pub inequality: InequalityId,
    pub slack: f64,
    pub pass: bool,
}

impl ReportRow {
    fn new(suite: Suite, case_id: String, check: Check, tol: f64) -> Self {
        ReportRow {
            suite,
            case_id,
            inequality: check.id,
            slack: check.slack,
            pass: check.passes(tol),
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.suite,
            self.case_id,
            self.inequality,
            fmt_f64(self.slack),
            self.pass
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suites: Vec<Suite>,
    pub cases: usize,
    pub tol: f64,
    pub rows: Vec<ReportRow>,
}

impl VerificationReport {
    pub const CSV_HEADER: &'static str = "suite,case_id,inequality_id,slack,pass";

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv_row());
            out.push('\n');
        }
        out
    }

    /// Per-suite and per-inequality counts with the smallest slack seen,
    /// followed by every failure.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for &suite in &self.suites {
            let rows: Vec<_> = self.rows.iter().filter(|r| r.suite == suite).collect();
            let failed = rows.iter().filter(|r| !r.pass).count();
            out.push_str(&format!("suite {suite}: {} checks, {failed} failures\n", rows.len()));
            let mut by_id: BTreeMap<InequalityId, (usize, f64)> = BTreeMap::new();
            for r in &rows {
                let e = by_id.entry(r.inequality).or_insert((0, f64::INFINITY));
                e.0 += 1;
                e.1 = e.1.min(r.slack);
            }
            for (id, (n, min)) in by_id {
                out.push_str(&format!("  {id}: {n} checks, min slack {min:e}\n"));
            }
        }
        for r in self.failures() {
            out.push_str(&format!(
                "FAIL {} {} {} slack {}\n",
                r.suite,
                r.case_id,
                r.inequality,
                fmt_f64(r.slack)
            ));
        }
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        out.push_str(&format!("{verdict} ({} checks, tol {:e})\n", self.rows.len(), self.tol));
        out
    }
}

fn game_batch(opts: &SuiteOptions) -> Result<Vec<GameResult>, VerifyError> {
    let kinds = [
        ManKind::Orthogonal,
        ManKind::Greedy {
            samples: crate::strategies::DEFAULT_GREEDY_SAMPLES,
        },
        ManKind::Random,
    ];
    let results: Result<Vec<_>, sim::SimError> = (0..opts.cases)
        .into_par_iter()
        .map(|i| {
            let config = SimConfig {
                lion: LionKind::Mcls,
                man: kinds[i % kinds.len()].clone(),
                start: None,
                games: opts.cases,
                max_steps: None,
                seed: opts.seed,
            };
            sim::run_game(&config, i)
        })
        .collect();
    Ok(results?)
}

fn game_rows(suite: Suite, games: &[GameResult], tol: f64) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for g in games {
        let case = |t: u64| format!("game-{}/t{}", g.index, t);
        for tc in trace_checks(&g.trace) {
            if suite.covers(tc.check.id) {
                rows.push(ReportRow::new(suite, case(tc.t), tc.check, tol));
            }
        }
        match &g.trace.outcome {
            Outcome::InvariantViolation(v) if !suite.covers(v.check) => {
                // The game stopped early, so its remaining steps went unchecked.
                let check = Check {
                    id: v.check,
                    slack: v.slack,
                    mode: crate::checks::CheckMode::Absolute,
                };
                rows.push(ReportRow {
                    pass: false,
                    ..ReportRow::new(suite, case(v.t), check, tol)
                });
            }
            Outcome::StepLimit => {
                let t = g.trace.steps.last().map_or(0, |s| s.t);
                let check = Check::within(InequalityId::CaptureWithinBound, f64::INFINITY, 0.0, g.bound as f64);
                rows.push(ReportRow::new(suite, case(t), check, tol));
            }
            _ => {}
        }
    }
    rows
}

/// Random instance inside the one-move window: `m` in `(1, 10]`, `r / m` in
/// `[1, 4]`, `r_tilde^2` uniform over `[r^2 + 1, r^2 + m^2]`.
pub fn random_arc_instance<R: Rng + ?Sized>(rng: &mut R) -> ArcInstance {
    loop {
        let m = rng.random_range(1.0..=10.0);
        let r = m * rng.random_range(1.0..=4.0);
        let rt2 = rng.random_range(r * r + 1.0..=r * r + m * m);
        if let Ok(inst) = ArcInstance::new(r, m, rt2.sqrt()) {
            if inst.in_window() && m > 1.0 {
                return inst;
            }
        }
    }
}

fn arc_case(inst: &ArcInstance, samples: usize) -> Result<Vec<Check>, VerifyError> {
    use InequalityId::*;
    let closed = arc_sup_closed_form(inst);
    let (first, second) = inst.closed_form_terms();
    let (lo, hi) = inst.theta_range()?;
    let sampled = arc_sup_sampled(inst, samples)?;
    Ok(vec![
        Check::at_most(ArcSupremum, sampled, closed),
        Check::within(ArcSampleGap, sampled.min(closed), closed, SAMPLING_GAP),
        Check::within(ArcEndpointFirst, arc_next_m(inst, hi)?, first, IDENTITY_TOL),
        Check::within(ArcEndpointSecond, arc_next_m(inst, lo)?, second, IDENTITY_TOL),
    ])
}

fn arc_rows(opts: &SuiteOptions) -> Result<Vec<ReportRow>, VerifyError> {
    let cases: Vec<Vec<ReportRow>> = (0..opts.cases)
        .into_par_iter()
        .map(|i| {
            let inst = random_arc_instance(&mut sim::game_rng(opts.seed, i as u64));
            let checks = arc_case(&inst, DEFAULT_ARC_SAMPLES)?;
            Ok(checks
                .into_iter()
                .map(|c| ReportRow::new(Suite::Lemma2, format!("arc-{i}"), c, opts.tol))
                .collect())
        })
        .collect::<Result<_, VerifyError>>()?;
    let mut rows: Vec<ReportRow> = cases.into_iter().flatten().collect();

    // Swapping the axes must give the same supremum.
    let inst = random_arc_instance(&mut sim::game_rng(opts.seed, u64::MAX));
    let canonical = arc_sup_sampled(&inst, DEFAULT_ARC_SAMPLES)?;
    let mirrored = inst.mirrored().oracle(DEFAULT_ARC_SAMPLES)?;
    let check = Check::within(InequalityId::ArcMirror, mirrored, canonical, IDENTITY_TOL);
    rows.push(ReportRow::new(Suite::Lemma2, "arc-mirror".into(), check, opts.tol));
    Ok(rows)
}

/// `m` in `(1, 20]` and `gamma^2` uniform over `[1 + 1/m^2, 2]`, so that
/// `beta = 1` is inside the one-move window.
pub fn random_beta_instance<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let m = 1.0 + rng.random_range(0.05..=19.0);
    let g2 = rng.random_range(1.0 + 1.0 / (m * m)..=2.0);
    (m, g2.sqrt())
}

pub const BETA_GRID: (f64, f64, usize) = (1.0, 3.0, 201);
pub const RECURSION_IDENTITY_POINTS: [f64; 4] = [1.1, 2.0, 5.0, 50.0];

fn beta_case(m: f64, gamma: f64) -> Result<Vec<Check>, VerifyError> {
    use InequalityId::*;
    let (lo, hi, n) = BETA_GRID;
    let scan = beta_argmax_check(m, gamma, &linspace(lo, hi, n))?;
    let expected = square_center_next_m(m, gamma);
    Ok(vec![
        Check::within(BetaArgmax, scan.beta_star, 1.0, 0.0),
        Check::strictly_less(BetaMonotone, scan.max_increment(), 0.0),
        Check::within(
            BetaSupValue,
            scan.sup_value,
            expected,
            IDENTITY_TOL * expected.abs().max(1.0),
        ),
    ])
}

/// `arc_sup_closed_form(m, m, sqrt(1 + m^2))` against one step of the bound recursion.
pub fn recursion_identity_check(m: f64) -> Result<Check, VerifyError> {
    let inst = ArcInstance::new(m, m, (1.0 + m * m).sqrt())?;
    let g = recursion_step(m).map_err(|_| VerifyError::NeedsAboveOne("m"))?;
    let closed = arc_sup_closed_form(&inst);
    Ok(Check::within(
        InequalityId::ClosedFormIdentity,
        closed,
        g,
        RECURSION_IDENTITY_RTOL * g.abs(),
    ))
}

fn beta_rows(opts: &SuiteOptions) -> Result<Vec<ReportRow>, VerifyError> {
    let cases: Vec<Vec<ReportRow>> = (0..opts.cases)
        .into_par_iter()
        .map(|i| {
            let (m, gamma) = random_beta_instance(&mut sim::game_rng(opts.seed, i as u64));
            let mut checks = beta_case(m, gamma)?;
            checks.push(recursion_identity_check(m)?);
            Ok(checks
                .into_iter()
                .map(|c| ReportRow::new(Suite::Lemma3, format!("beta-{i}"), c, opts.tol))
                .collect())
        })
        .collect::<Result<_, VerifyError>>()?;
    let mut rows: Vec<ReportRow> = cases.into_iter().flatten().collect();
    for m in RECURSION_IDENTITY_POINTS {
        let check = recursion_identity_check(m)?;
        rows.push(ReportRow::new(Suite::Lemma3, format!("identity-m{m}"), check, opts.tol));
    }
    Ok(rows)
}

fn radius_sup_checks(m: f64, grid_points: usize) -> Result<Vec<Check>, VerifyError> {
    use InequalityId::*;
    let grid = linspace((m * m + 1.0).sqrt(), std::f64::consts::SQRT_2 * m, grid_points);
    let scan = radius_sup_check(m, &grid)?;
    Ok(vec![
        Check::within(RadiusArgmax, scan.argmax_index as f64, scan.expected_index as f64, 0.0),
        Check::within(
            RadiusMaxValue,
            scan.max_value,
            scan.expected_max,
            IDENTITY_TOL * scan.expected_max.max(1.0),
        ),
        Check::strictly_less(RadiusMonotone, scan.max_increment, 0.0),
    ])
}

fn radius_rows(opts: &SuiteOptions) -> Result<Vec<ReportRow>, VerifyError> {
    let cases: Vec<Vec<ReportRow>> = (0..opts.cases)
        .into_par_iter()
        .map(|i| {
            let m = 1.0 + sim::game_rng(opts.seed, i as u64).random_range(0.01..=49.0);
            let checks = radius_sup_checks(m, 1000)?;
            Ok(checks
                .into_iter()
                .map(|c| ReportRow::new(Suite::Theorem1, format!("radius-{i}"), c, opts.tol))
                .collect())
        })
        .collect::<Result<_, VerifyError>>()?;
    Ok(cases.into_iter().flatten().collect())
}

pub const BOUND_GRID: (f64, f64, f64) = (1.0, 10.0, 0.01);

fn bound_rows(opts: &SuiteOptions) -> Result<Vec<ReportRow>, VerifyError> {
    use InequalityId::*;
    let (lo, hi, step) = BOUND_GRID;
    let series = bounds_series(lo, hi, step).expect("valid grid");
    let mut rows = Vec::new();
    let mut push = |case: String, check: Check| rows.push(ReportRow::new(Suite::Theorem2, case, check, opts.tol));
    for row in &series.rows {
        let case = format!("m0-{}", fmt_f64(row.m0));
        push(
            case.clone(),
            Check::at_most(BoundDominance, row.n_mcls as f64, row.n_fcls as f64),
        );
        if row.m0 >= 3.0 {
            push(
                case.clone(),
                Check::strictly_less(BoundStrict, row.n_mcls as f64, row.n_fcls as f64),
            );
        }
        if row.m0 > 1.0 {
            let b = row.m0;
            push(case.clone(), Check::positive(DecayMargin, decay_margin(b)));
            let h = step / 2.0;
            let g0 = recursion_step(b).expect("b > 1");
            let g1 = recursion_step(b + h).expect("b > 1");
            push(case, Check::strictly_less(RecursionMonotone, g0, g1));
        }
    }
    Ok(rows)
}

/// Runs the selected suites. Deterministic given `opts.seed`.
pub fn run_suite(selection: SuiteSelection, opts: &SuiteOptions) -> Result<VerificationReport, VerifyError> {
    if opts.cases == 0 {
        return Err(VerifyError::NoCases);
    }
    let suites = selection.suites();
    let games = if suites.iter().any(|s| s.uses_games()) {
        game_batch(opts)?
    } else {
        Vec::new()
    };
    let mut rows = Vec::new();
    for &suite in &suites {
        match suite {
            Suite::Prop3 | Suite::Lemma1 => rows.extend(game_rows(suite, &games, opts.tol)),
            Suite::Theorem1 => {
                rows.extend(game_rows(suite, &games, opts.tol));
                rows.extend(radius_rows(opts)?);
            }
            Suite::Lemma2 => rows.extend(arc_rows(opts)?),
            Suite::Lemma3 => rows.extend(beta_rows(opts)?),
            Suite::Theorem2 => rows.extend(bound_rows(opts)?),
        }
    }
    Ok(VerificationReport {
        suites,
        cases: opts.cases,
        tol: opts.tol,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PHI: f64 = 1.618_033_988_749_895;

    fn inst(r: f64, m: f64, rt: f64) -> ArcInstance {
        ArcInstance::new(r, m, rt).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let sym = inst(2.0, 2.0, 5f64.sqrt());
        assert!((arc_sup_closed_form(&sym) - PHI).abs() < 1e-12);
        let (a, b) = sym.closed_form_terms();
        assert!((a - b).abs() < 1e-12);

        let flat = inst(2.0, 1.0, 5f64.sqrt());
        let (a, b) = flat.closed_form_terms();
        assert!(a.abs() < 1e-12 && b.abs() < 1e-12, "{a} {b}");
    }

    #[test]
    fn equal_coordinates_give_equal_terms() {
        for &(m, rt) in &[(1.5, 2.0), (3.0, 3.5), (10.0, 10.05)] {
            let (a, b) = inst(m, m, rt).closed_form_terms();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn instance_domain() {
        assert!(ArcInstance::new(1.0, 2.0, 3.0).is_err());
        assert!(ArcInstance::new(2.0, 1.0, 2.0).is_err());
        assert!(ArcInstance::new(2.0, 0.0, 3.0).is_err());
        assert!(ArcInstance::new(f64::NAN, 1.0, 3.0).is_err());
        assert!(!inst(2.0, 1.0, 3.0).arc_nonempty());
        assert!(inst(2.0, 2.0, 2.5).in_window());
        assert!(!inst(2.0, 2.0, 2.1).in_window());
    }

    #[test]
    fn oracle_on_the_symmetric_instance() {
        let i = inst(2.0, 2.0, 5f64.sqrt());
        let v = arc_sup_sampled(&i, 10_000).unwrap();
        assert!((PHI - 1e-3..=PHI + 1e-6).contains(&v), "{v}");
    }

    #[test]
    fn oracle_on_the_degenerate_arc() {
        let i = inst(2.0, 1.0, 5f64.sqrt());
        assert!(arc_sup_sampled(&i, 10_000).unwrap() <= 1e-9);
    }

    #[test]
    fn endpoints_hit_the_two_terms() {
        let i = inst(3.0, 1.7, 3.3);
        let (lo, hi) = i.theta_range().unwrap();
        assert!(i.arc_point(lo).x == 0.0);
        assert!(i.arc_point(hi).y == 0.0);
        let (first, second) = i.closed_form_terms();
        assert!((arc_next_m(&i, hi).unwrap() - first).abs() < 1e-9);
        assert!((arc_next_m(&i, lo).unwrap() - second).abs() < 1e-9);
    }

    #[test]
    fn mirrored_oracle_agrees() {
        let i = inst(3.0, 1.7, 3.3);
        let a = arc_sup_sampled(&i, 1000).unwrap();
        let b = i.mirrored().oracle(1000).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn oracle_needs_samples() {
        assert_eq!(
            arc_sup_sampled(&inst(2.0, 2.0, 2.5), 10),
            Err(VerifyError::TooFewSamples(10))
        );
    }

    #[test]
    fn beta_scan_examples() {
        for &(m, gamma, hi, n) in &[(2.0, 1.1, 3.0, 41), (5.0, 1.02, 4.0, 31)] {
            let scan = beta_argmax_check(m, gamma, &linspace(1.0, hi, n)).unwrap();
            assert_eq!(scan.beta_star, 1.0);
            assert!(scan.max_increment() < 0.0);
            let expected = square_center_next_m(m, gamma);
            assert!((scan.sup_value - expected).abs() < 1e-12 * expected.abs().max(1.0));
        }
        let scan = beta_argmax_check(2.0, 1.1, &linspace(1.0, 3.0, 41)).unwrap();
        assert_eq!(scan.out_of_window.first(), Some(&1.0));
        assert!(beta_argmax_check(2.0, 1.1, &[]).is_err());
    }

    #[test]
    fn radius_scan_examples() {
        let m = 2.0;
        let grid = linspace(5f64.sqrt(), 2.0 * 2f64.sqrt(), 1000);
        let scan = radius_sup_check(m, &grid).unwrap();
        assert_eq!(scan.argmax_index, 0);
        assert!((scan.max_value - PHI).abs() < 1e-9);
        assert!(scan.max_increment < 0.0);

        let m: f64 = 1.0 + 1e-6;
        let grid = linspace((m * m + 1.0).sqrt(), 2f64.sqrt() * m, 100);
        let scan = radius_sup_check(m, &grid).unwrap();
        assert!(scan.max_value.abs() < 1e-5);
        assert!(radius_sup_check(2.0, &[1.0]).is_err());
    }

    #[test]
    fn recursion_identity() {
        for m in RECURSION_IDENTITY_POINTS {
            assert!(recursion_identity_check(m).unwrap().passes(0.0), "m = {m}");
        }
    }

    #[test]
    fn suite_names() {
        assert_eq!("all".parse::<SuiteSelection>().unwrap(), SuiteSelection::All);
        assert_eq!(
            "lemma2".parse::<SuiteSelection>().unwrap(),
            SuiteSelection::One(Suite::Lemma2)
        );
        assert!("lemma4".parse::<SuiteSelection>().is_err());
    }

    #[test]
    fn every_suite_passes_small_runs() {
        let opts = SuiteOptions {
            cases: 20,
            seed: 3,
            tol: 1e-9,
        };
        let report = run_suite(SuiteSelection::All, &opts).unwrap();
        assert!(report.passed(), "{}", report.to_text());
        for suite in Suite::ALL {
            assert!(report.rows.iter().any(|r| r.suite == suite), "{suite} produced no rows");
        }
        let again = run_suite(SuiteSelection::All, &opts).unwrap();
        assert_eq!(report.to_csv(), again.to_csv());
    }

    #[test]
    fn a_broken_trace_is_reported() {
        let cfg = crate::engine::GameConfig {
            lion_start: Point::new(3.0, 2.5),
            man_start: Point::new(1.0, 0.7),
            lion_strategy: LionKind::Mcls,
            man_strategy: ManKind::Orthogonal,
            max_steps: None,
            seed: 0,
        };
        let mut trace = crate::engine::play(&cfg).unwrap();
        trace.steps[1].lion_pos.x += 0.3;
        let bad: Vec<_> = trace_checks(&trace)
            .into_iter()
            .filter(|c| !c.check.passes(1e-9))
            .collect();
        assert!(!bad.is_empty());
        assert!(bad.iter().any(|c| c.check.id == InequalityId::LionStep));
    }
}
