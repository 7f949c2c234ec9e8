//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::f64::consts::FRAC_PI_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lionman::bounds::{bounds_series, fcls_bound, mcls_bound, recursion_step};
use lionman::engine::{play, GameConfig, ManKind, Outcome};
use lionman::sim::{self, SimConfig};
use lionman::strategies::DEFAULT_GREEDY_SAMPLES;
use lionman::verify::{
    arc_next_m, arc_sup_closed_form, arc_sup_sampled, beta_argmax_check, linspace, random_arc_instance,
    random_beta_instance, trace_checks, ArcInstance,
};
use lionman::{compute_center, LionKind, Point};

const SEED: u64 = 20_240_601;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let v = f();
    let elapsed = start.elapsed();
    match limit {
        Some(limit) => {
            let detail = format!("{}; {:.2?} of {:?} allowed", v.detail, elapsed, limit);
            verdict(v.pass && elapsed <= limit, detail)
        }
        None => verdict(v.pass, format!("{}; {:.2?}", v.detail, elapsed)),
    }
}

/// Capture-time bound of the moving-center lion, counted directly: iterate
/// `b <- b (b - 1) / (sqrt(1 + b^2) - 1)` and count terms up to the first `b <= 1`.
fn oracle_mcls_bound(m0: f64) -> u64 {
    let mut b = m0;
    let mut n = 1;
    while b > 1.0 {
        b = b * (b - 1.0) / ((1.0 + b * b).sqrt() - 1.0);
        n += 1;
    }
    n
}

fn oracle_fcls_bound(m0: f64) -> u64 {
    (m0 * m0).ceil() as u64
}

fn bound_formulas() -> Verdict {
    let mut bad = Vec::new();
    for (m0, expected) in [(0.5, 1), (1.0, 1), (2.5, 7), (3.0, 9), (10.0, 100)] {
        let got = fcls_bound(m0).unwrap();
        if got != expected || got != oracle_fcls_bound(m0) {
            bad.push(format!("fcls_bound({m0}) = {got}"));
        }
    }
    for (m0, expected) in [(1.0, 1), (2.0, 4), (3.0, 7)] {
        let got = mcls_bound(m0).unwrap();
        if got != expected || got != oracle_mcls_bound(m0) {
            bad.push(format!("mcls_bound({m0}) = {got}"));
        }
    }
    verdict(
        bad.is_empty(),
        if bad.is_empty() {
            "8 values match".into()
        } else {
            bad.join(", ")
        },
    )
}

fn bound_dominance() -> Verdict {
    let series = bounds_series(1.0, 10.0, 0.01).unwrap();
    let mut mismatch = 0;
    let mut weak = Vec::new();
    let mut strict_needed = 0;
    for (i, row) in series.rows.iter().enumerate() {
        let m0 = 1.0 + i as f64 * 0.01;
        if (row.m0 - m0).abs() > 1e-9
            || row.n_fcls != oracle_fcls_bound(row.m0)
            || row.n_mcls != oracle_mcls_bound(row.m0)
        {
            mismatch += 1;
        }
        // Grid index 200 is m0 = 3.
        let strict = i >= 200;
        strict_needed += strict as usize;
        if row.n_mcls > row.n_fcls || (strict && row.n_mcls >= row.n_fcls) {
            weak.push(format!("{:.2}", row.m0));
        }
    }
    let pass = series.rows.len() == 901 && mismatch == 0 && weak.is_empty();
    verdict(
        pass,
        format!(
            "{} grid points, {mismatch} oracle mismatches, strict on {}/{strict_needed} points with m0 >= 3{}",
            series.rows.len(),
            strict_needed - weak.len().min(strict_needed),
            if weak.is_empty() {
                String::new()
            } else {
                format!(", failing at {}", weak.join(" "))
            }
        ),
    )
}

fn capture_guarantee() -> Verdict {
    let kinds = [
        ManKind::Orthogonal,
        ManKind::Greedy {
            samples: DEFAULT_GREEDY_SAMPLES,
        },
        ManKind::Random,
    ];
    let mut games = 0;
    let mut late = 0;
    let mut failed_checks = 0;
    let mut checks = 0;
    let mut worst_ratio: f64 = 0.0;
    for (k, man) in kinds.iter().enumerate() {
        let n = if k < 1000 % 3 { 1000 / 3 + 1 } else { 1000 / 3 };
        let config = SimConfig {
            lion: LionKind::Mcls,
            man: man.clone(),
            start: None,
            games: n,
            max_steps: None,
            seed: SEED + k as u64,
        };
        for g in sim::run_batch(&config).unwrap() {
            games += 1;
            match g.trace.outcome {
                Outcome::Captured { lion_moves } if lion_moves <= oracle_mcls_bound(g.m0) => {
                    worst_ratio = worst_ratio.max(lion_moves as f64 / g.bound as f64);
                }
                _ => late += 1,
            }
            for c in trace_checks(&g.trace) {
                checks += 1;
                failed_checks += !c.check.passes(1e-9) as usize;
            }
        }
    }
    verdict(
        games == 1000 && late == 0 && failed_checks == 0,
        format!(
            "{games} games, {late} not captured within bound, {failed_checks}/{checks} stepwise checks failed, \
             worst moves/bound {worst_ratio:.3}"
        ),
    )
}

/// Independent next-center computation: the center lies on the ray from `lion`
/// along the unit vector `u`, at the distance `s` from the lion that equals
/// its own larger coordinate.
fn oracle_center_min(lion: Point, u: (f64, f64)) -> f64 {
    let mut best: Option<(f64, f64)> = None;
    for (l, du) in [(lion.x, u.0), (lion.y, u.1)] {
        if du < 1.0 {
            let s = l / (1.0 - du);
            let (cx, cy) = (lion.x + s * u.0, lion.y + s * u.1);
            if cx.max(cy) <= s * (1.0 + 1e-12) + 1e-12 && best.is_none_or(|b| s > b.0) {
                best = Some((s, cx.min(cy)));
            }
        }
    }
    best.map_or(f64::NAN, |b| b.1)
}

fn oracle_terms(inst: &ArcInstance) -> (f64, f64) {
    let (r, m, rt) = (inst.r(), inst.m(), inst.r_tilde());
    let a = (rt * rt - m * m).sqrt();
    let b = (rt * rt - r * r).sqrt();
    (m * (r - a) / (rt - a), r * (m - b) / (rt - b))
}

fn arc_agreement() -> Verdict {
    let mut rng = sim::game_rng(SEED, 7);
    let mut bad_oracle = 0;
    let mut bad_endpoint = 0;
    let mut bad_independent = 0;
    let mut worst_gap: f64 = 0.0;
    for _ in 0..1000 {
        let inst = random_arc_instance(&mut rng);
        let cf = arc_sup_closed_form(&inst);
        let sampled = arc_sup_sampled(&inst, 10_000).unwrap();
        if !(sampled <= cf + 1e-6 && sampled >= cf - 1e-3) {
            bad_oracle += 1;
        }
        worst_gap = worst_gap.max(cf - sampled);

        let (t1, t2) = oracle_terms(&inst);
        let lo = (inst.r() / inst.r_tilde()).acos();
        let hi = (inst.m() / inst.r_tilde()).asin();
        let at_hi = arc_next_m(&inst, hi).unwrap();
        let at_lo = arc_next_m(&inst, lo).unwrap();
        if (at_hi - t1).abs() > 1e-9 || (at_lo - t2).abs() > 1e-9 {
            bad_endpoint += 1;
        }

        // Coarse independent sweep of the same arc.
        let c = (inst.r(), inst.m());
        let mut best = f64::NEG_INFINITY;
        for k in 0..=400 {
            let th = lo + (hi - lo) * k as f64 / 400.0;
            let lion = Point::new(
                (c.0 - inst.r_tilde() * th.cos()).max(0.0),
                (c.1 - inst.r_tilde() * th.sin()).max(0.0),
            );
            let v = oracle_center_min(lion, (th.cos(), th.sin()));
            if v.is_finite() {
                best = best.max(v);
            }
        }
        let cf_independent = t1.max(t2);
        if best > cf_independent + 1e-6 || (cf - cf_independent).abs() > 1e-9 * cf.abs().max(1.0) {
            bad_independent += 1;
        }
    }
    verdict(
        bad_oracle + bad_endpoint + bad_independent == 0,
        format!(
            "1000 instances: {bad_oracle} outside [cf - 1e-3, cf + 1e-6], {bad_endpoint} endpoint mismatches, \
             {bad_independent} disagreements with the direct formulas; largest sampling shortfall {worst_gap:.2e}"
        ),
    )
}

fn center_shape() -> Verdict {
    let mut rng = sim::game_rng(SEED, 11);
    let grid = linspace(1.0, 3.0, 201);
    let mut off = Vec::new();
    for _ in 0..200 {
        let (m, gamma) = random_beta_instance(&mut rng);
        let scan = beta_argmax_check(m, gamma, &grid).unwrap();
        if scan.beta_star != 1.0 {
            off.push(format!("(m {m:.3}, gamma {gamma:.4}) -> {}", scan.beta_star));
        }
    }
    let mut identity = Vec::new();
    for m in [1.1f64, 2.0, 5.0, 50.0] {
        let cf = arc_sup_closed_form(&ArcInstance::new(m, m, (1.0 + m * m).sqrt()).unwrap());
        let g = recursion_step(m).unwrap();
        let direct = m * (m - 1.0) / ((1.0 + m * m).sqrt() - 1.0);
        let rel = ((cf - g) / g).abs().max(((direct - g) / g).abs());
        if rel > 1e-12 {
            identity.push(format!("m {m}: relative error {rel:.1e}"));
        }
    }
    verdict(
        off.is_empty() && identity.is_empty(),
        format!(
            "argmax at beta = 1 on {}/200 instances; identity holds at {}/4 points{}",
            200 - off.len(),
            4 - identity.len(),
            off.iter()
                .chain(&identity)
                .map(|s| format!("; {s}"))
                .collect::<String>()
        ),
    )
}

/// Orthogonal man against the fixed-center lion from a start 0.1 away from
/// the lion, over a family of start geometries with the given `m0`. Returns
/// the longest capture time found.
fn longest_fcls_game(m0: f64) -> (u64, String) {
    let mut best = (0, String::new());
    for rho in [1.0, 1.5, 2.0, 4.0, 8.0] {
        let r0 = rho * m0;
        for k in 1..40 {
            let th = FRAC_PI_2 * k as f64 / 40.0;
            let (cx, cy) = (r0, m0);
            let lion = Point::new(cx - r0 * th.cos(), cy - r0 * th.sin());
            let man = Point::new(lion.x - 0.1 * th.cos(), lion.y - 0.1 * th.sin());
            if !lion.in_quadrant() || !man.in_quadrant() || !lion.dominates(man) {
                continue;
            }
            let c = compute_center(lion, man).unwrap();
            assert!((c.m - m0).abs() < 1e-9 * m0, "start construction");
            let trace = play(&GameConfig {
                lion_start: lion,
                man_start: man,
                lion_strategy: LionKind::Fcls,
                man_strategy: ManKind::Orthogonal,
                max_steps: None,
                seed: 0,
            })
            .unwrap();
            if let Some(n) = trace.lion_moves() {
                if n > best.0 {
                    best = (n, format!("r0/m0 {rho}, angle {th:.3}"));
                }
            }
        }
    }
    best
}

fn fcls_near_tightness() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for m0 in [3.0, 4.0, 5.0, 6.0, 7.0, 8.0] {
        let bound = oracle_fcls_bound(m0);
        let (n, geometry) = longest_fcls_game(m0);
        let ok = n as f64 >= 0.9 * bound as f64;
        pass &= ok;
        parts.push(format!("m0 {m0}: {n}/{bound} ({geometry})"));
    }
    verdict(
        pass,
        format!("longest capture vs ceil(m0^2) needing >= 90%: {}", parts.join("; ")),
    )
}

fn empirical_ratio() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for (k, man) in [
        ManKind::Orthogonal,
        ManKind::Greedy {
            samples: DEFAULT_GREEDY_SAMPLES,
        },
        ManKind::Random,
    ]
    .into_iter()
    .enumerate()
    {
        let name = man.name();
        let config = SimConfig {
            lion: LionKind::Mcls,
            man,
            start: None,
            games: 500,
            max_steps: None,
            seed: SEED + 100 + k as u64,
        };
        let s = sim::summarize(&sim::run_batch(&config).unwrap());
        pass &= s.captured == s.games && s.ratio < 1.0;
        parts.push(format!(
            "{name}: mean capture {:.3}, mean bound {:.3}, ratio {:.4}",
            s.mean_capture, s.bound, s.ratio
        ));
    }
    verdict(pass, format!("500 random starts each; {}", parts.join("; ")))
}

type Criterion = (&'static str, Option<Duration>, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("bound formulas", Some(Duration::from_secs(1)), bound_formulas),
        (
            "moving-center bound never exceeds fixed-center bound",
            Some(Duration::from_secs(5)),
            bound_dominance,
        ),
        (
            "capture guarantee on 1000 random games",
            Some(Duration::from_secs(60)),
            capture_guarantee,
        ),
        ("arc supremum closed form vs sampling", None, arc_agreement),
        ("worst-case center shape and recursion identity", None, center_shape),
        (
            "fixed-center near-tightness from close starts",
            None,
            fcls_near_tightness,
        ),
        ("mean capture / bound ratio on random starts", None, empirical_ratio),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let v = timed(*limit, run);
        failed += !v.pass as usize;
        println!(
            "{} [{}] {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
