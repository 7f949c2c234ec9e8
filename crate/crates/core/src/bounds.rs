//! Capture-time upper bounds.
//!
//! With the fixed center the lion needs at most `ceil(m0^2)` moves. With the
//! moving center, the smallest center coordinate is bounded step by step by
//! the recursion `b <- g(b)`, `g(b) = b (b - 1) / (sqrt(1 + b^2) - 1)`, and
//! once it drops to 1 or below the next lion move captures.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum BoundsError {
    #[error("{what} must be finite and positive, got {value}")]
    Domain { what: &'static str, value: f64 },
    #[error("recursion step needs b > 1, got {0}")]
    RecursionDomain(f64),
    #[error("recursion from m0 = {m0} did not terminate within {cap} iterations")]
    IterationCap { m0: f64, cap: u64 },
    #[error("m0 = {m0} exceeds the supported maximum {max}")]
    TooLarge { m0: f64, max: f64 },
    #[error("invalid grid: {0}")]
    Grid(&'static str),
}

fn check_positive(what: &'static str, value: f64) -> Result<(), BoundsError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(BoundsError::Domain { what, value })
    }
}

/// `ceil(m0^2)`: lion moves needed by the fixed-center strategy.
pub fn fcls_bound(m0: f64) -> Result<u64, BoundsError> {
    check_positive("m0", m0)?;
    Ok((m0 * m0).ceil() as u64)
}

/// One step of the moving-center recursion, `g(b)` for `b > 1`.
///
/// Evaluated as `(b - 1)(sqrt(1 + b^2) + 1) / b`, which is the same function
/// with the `sqrt(1 + b^2) - 1` denominator rationalized away.
pub fn recursion_step(b: f64) -> Result<f64, BoundsError> {
    if !(b.is_finite() && b > 1.0) {
        return Err(BoundsError::RecursionDomain(b));
    }
    Ok((b - 1.0) * ((1.0 + b * b).sqrt() + 1.0) / b)
}

/// Largest `m0` accepted by [`recursion_trajectory`] and [`mcls_bound`].
/// The trajectory length grows like `m0^2`, so this keeps the count under
/// roughly `10^8` iterations.
pub const MAX_RECURSION_M0: f64 = 1e4;

/// Iterator over `b_0 = m0, g(b_0), ...`, ending with the first value `<= 1`.
/// Takes any positive start; callers bound how far they iterate.
#[derive(Debug, Clone)]
pub struct Recursion {
    next: Option<f64>,
}

impl Iterator for Recursion {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let b = self.next?;
        self.next = recursion_step(b).ok();
        Some(b)
    }
}

pub fn recursion(m0: f64) -> Result<Recursion, BoundsError> {
    check_positive("m0", m0)?;
    Ok(Recursion { next: Some(m0) })
}

fn check_recursion_start(m0: f64) -> Result<(), BoundsError> {
    check_positive("m0", m0)?;
    if m0 > MAX_RECURSION_M0 {
        return Err(BoundsError::TooLarge {
            m0,
            max: MAX_RECURSION_M0,
        });
    }
    Ok(())
}

/// Iterates `g` from `b_0 = m0` while the value stays above 1. The returned
/// sequence ends with the first value `<= 1`.
pub fn recursion_trajectory(m0: f64) -> Result<Vec<f64>, BoundsError> {
    check_recursion_start(m0)?;
    let cap = iteration_cap(m0);
    let mut seq = Vec::new();
    for b in recursion(m0)? {
        if seq.len() as u64 > cap {
            return Err(BoundsError::IterationCap { m0, cap });
        }
        seq.push(b);
    }
    Ok(seq)
}

fn iteration_cap(m0: f64) -> u64 {
    (m0 * m0).ceil() as u64 + 1
}

/// Lion moves needed by the moving-center strategy starting from a center
/// whose smallest coordinate is `m0`.
///
/// If `b_t <= 1` for the first time at index `t`, the lion captures on its
/// next move, so the bound is `t + 1`. `m0 <= 1` gives 1.
pub fn mcls_bound(m0: f64) -> Result<u64, BoundsError> {
    check_recursion_start(m0)?;
    let cap = iteration_cap(m0);
    let mut len = 0u64;
    for _ in recursion(m0)? {
        if len > cap {
            return Err(BoundsError::IterationCap { m0, cap });
        }
        len += 1;
    }
    Ok(len)
}

/// [`mcls_bound`], or the fixed-center bound (which dominates it) when `m0`
/// is beyond [`MAX_RECURSION_M0`].
pub fn mcls_bound_or_fixed(m0: f64) -> Result<u64, BoundsError> {
    match mcls_bound(m0) {
        Err(BoundsError::TooLarge { .. }) => fcls_bound(m0),
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub m0: f64,
    pub n_fcls: u64,
    pub n_mcls: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundSeries {
    pub rows: Vec<BoundRow>,
}

/// Inclusive grid `m0_min, m0_min + step, ..., <= m0_max`.
pub fn grid(m0_min: f64, m0_max: f64, step: f64) -> Result<Vec<f64>, BoundsError> {
    check_positive("m0_min", m0_min)?;
    check_positive("m0_max", m0_max)?;
    check_positive("step", step)?;
    if m0_min > m0_max {
        return Err(BoundsError::Grid("m0_min exceeds m0_max"));
    }
    let n = ((m0_max - m0_min) / step + 1e-9).floor() as u64;
    if n > 10_000_000 {
        return Err(BoundsError::Grid("too many grid points"));
    }
    Ok((0..=n).map(|i| m0_min + i as f64 * step).collect())
}

pub fn bounds_series(m0_min: f64, m0_max: f64, step: f64) -> Result<BoundSeries, BoundsError> {
    let rows = grid(m0_min, m0_max, step)?
        .into_iter()
        .map(|m0| {
            Ok(BoundRow {
                m0,
                n_fcls: fcls_bound(m0)?,
                n_mcls: mcls_bound(m0)?,
            })
        })
        .collect::<Result<Vec<_>, BoundsError>>()?;
    Ok(BoundSeries { rows })
}

impl BoundSeries {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m0,n_fcls,n_mcls\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{}\n",
                crate::csv::fmt_f64(row.m0),
                row.n_fcls,
                row.n_mcls
            ));
        }
        out
    }
}

/// Per-step decrease of `b^2` under the recursion, minus the unit decrease of
/// the fixed-center potential:
/// `(2b^3 - 3b^2 + 4b - 2 - 2(b-1)^2 sqrt(1+b^2)) / b^2 - 1`.
/// Positive for every `b > 1`.
pub fn decay_margin(b: f64) -> f64 {
    let s = (1.0 + b * b).sqrt();
    let num = 2.0 * b * b * b - 3.0 * b * b + 4.0 * b - 2.0 - 2.0 * (b - 1.0) * (b - 1.0) * s;
    num / (b * b) - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    /// g in its original form, `b (b - 1) / (sqrt(1 + b^2) - 1)`.
    fn g_direct(b: f64) -> f64 {
        b * (b - 1.0) / ((1.0 + b * b).sqrt() - 1.0)
    }

    /// `min { t : b_t < 0 }` evaluated literally, with guards for the points
    /// where `g` is 0/0 (b = 0) or the sequence sits exactly at 1.
    fn mcls_bound_literal(m0: f64) -> u64 {
        let mut b = m0;
        let mut t = 0u64;
        loop {
            if b < 0.0 {
                return t;
            }
            if b <= 1.0 {
                // g(b) <= 0 here; g(1) = 0 is followed by capture as well.
                return t + 1;
            }
            b = g_direct(b);
            t += 1;
            assert!(t < 100_000);
        }
    }

    #[test]
    fn fcls_examples() {
        assert_eq!(fcls_bound(3.0).unwrap(), 9);
        assert_eq!(fcls_bound(1.0).unwrap(), 1);
        assert_eq!(fcls_bound(2.5).unwrap(), 7);
        assert_eq!(fcls_bound(0.5).unwrap(), 1);
        assert_eq!(fcls_bound(10.0).unwrap(), 100);
    }

    #[test]
    fn fcls_domain() {
        assert!(fcls_bound(0.0).is_err());
        assert!(fcls_bound(-1.0).is_err());
        assert!(fcls_bound(f64::NAN).is_err());
        assert!(fcls_bound(f64::INFINITY).is_err());
    }

    #[test]
    fn recursion_step_examples() {
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((recursion_step(2.0).unwrap() - golden).abs() < 1e-15);
        assert!((recursion_step(2.0).unwrap() - 1.618_033_988_7).abs() < 1e-10);
        let three = 6.0 / (10f64.sqrt() - 1.0);
        assert!((recursion_step(3.0).unwrap() - three).abs() < 1e-14);
        assert!((recursion_step(3.0).unwrap() - 2.774_851_773_445_586).abs() < 1e-13);
        assert!(recursion_step(1.0).is_err());
        assert!(recursion_step(0.5).is_err());
    }

    #[test]
    fn stabilized_form_matches_original() {
        for i in 1..=2000 {
            let b = 1.0 + i as f64 * 0.01;
            let a = recursion_step(b).unwrap();
            let d = g_direct(b);
            assert!((a - d).abs() <= 1e-12 * d.abs().max(1.0), "b = {b}");
        }
    }

    #[test]
    fn mcls_examples() {
        assert_eq!(mcls_bound(1.0).unwrap(), 1);
        assert_eq!(mcls_bound(0.3).unwrap(), 1);
        assert_eq!(mcls_bound(2.0).unwrap(), 4);
        assert_eq!(mcls_bound(3.0).unwrap(), 7);
        assert!(mcls_bound(0.0).is_err());
    }

    #[test]
    fn trajectory_from_two() {
        let seq = recursion_trajectory(2.0).unwrap();
        let expected = [2.0, 1.618_033_988_749_895, 1.108_508_539_255_466, 0.244_023_757_712_549];
        assert_eq!(seq.len(), expected.len());
        for (b, e) in seq.iter().zip(expected) {
            assert!((b - e).abs() < 1e-13, "{b} vs {e}");
        }
    }

    #[test]
    fn trajectory_from_three() {
        let seq = recursion_trajectory(3.0).unwrap();
        let expected = [3.0, 2.7749, 2.5262, 2.2456, 1.9182, 1.5142, 0.9557];
        assert_eq!(seq.len(), expected.len());
        for (b, e) in seq.iter().zip(expected) {
            assert!((b - e).abs() < 1e-4, "{b} vs {e}");
        }
    }

    #[test]
    fn termination_rule_matches_literal_definition() {
        for i in 0..=20_000 {
            let m0 = 0.01 + i as f64 * 0.001;
            assert_eq!(mcls_bound(m0).unwrap(), mcls_bound_literal(m0), "m0 = {m0}");
        }
    }

    #[test]
    fn g_is_strictly_increasing_above_one() {
        let h = 1e-6;
        let mut b = 1.0 + 1e-3;
        while b <= 100.0 {
            assert!(recursion_step(b + h).unwrap() > recursion_step(b).unwrap(), "b = {b}");
            b += 1e-3;
        }
    }

    #[test]
    fn decay_margin_positive() {
        let mut b = 1.0 + 1e-3;
        while b <= 100.0 {
            assert!(decay_margin(b) > 0.0, "b = {b}");
            b += 1e-3;
        }
    }

    #[test]
    fn mcls_never_exceeds_fcls() {
        for row in bounds_series(1.0, 10.0, 0.01).unwrap().rows {
            assert!(row.n_mcls <= row.n_fcls, "{row:?}");
        }
    }

    #[test]
    fn large_starts_are_rejected_without_allocating() {
        assert!(matches!(mcls_bound(1e6), Err(BoundsError::TooLarge { .. })));
        assert!(matches!(recursion_trajectory(1e6), Err(BoundsError::TooLarge { .. })));
        assert_eq!(mcls_bound_or_fixed(1e6).unwrap(), fcls_bound(1e6).unwrap());
        assert_eq!(mcls_bound_or_fixed(5.0).unwrap(), mcls_bound(5.0).unwrap());
        let first: Vec<f64> = recursion(1e6).unwrap().take(3).collect();
        assert_eq!(first[0], 1e6);
        assert!(first[2] < first[1] && first[1] < first[0]);
    }

    #[test]
    fn counted_bound_matches_trajectory_length() {
        for m0 in [0.5, 1.0, 1.5, 7.3, 40.0, MAX_RECURSION_M0] {
            if m0 <= 40.0 {
                assert_eq!(mcls_bound(m0).unwrap(), recursion_trajectory(m0).unwrap().len() as u64);
            } else {
                assert_eq!(mcls_bound(m0).unwrap(), recursion(m0).unwrap().count() as u64);
            }
        }
    }

    #[test]
    fn series_examples() {
        let single = bounds_series(1.0, 1.0, 0.1).unwrap();
        assert_eq!(
            single.rows,
            vec![BoundRow {
                m0: 1.0,
                n_fcls: 1,
                n_mcls: 1
            }]
        );

        let rows = bounds_series(2.0, 3.0, 0.5).unwrap().rows;
        assert_eq!(rows.len(), 3);
        assert_eq!((rows[0].n_fcls, rows[0].n_mcls), (4, 4));
        assert_eq!(rows[1].n_fcls, 7);
        assert_eq!(rows[1].n_mcls, mcls_bound_literal(2.5));
        assert_eq!((rows[2].n_fcls, rows[2].n_mcls), (9, 7));
    }

    #[test]
    fn series_domain_errors() {
        assert!(bounds_series(0.0, 1.0, 0.1).is_err());
        assert!(bounds_series(2.0, 1.0, 0.1).is_err());
        assert!(bounds_series(1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let csv = bounds_series(2.0, 3.0, 0.5).unwrap().to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "m0,n_fcls,n_mcls");
        assert_eq!(lines[1], "2,4,4");
        assert_eq!(lines[3], "3,9,7");
    }
}
