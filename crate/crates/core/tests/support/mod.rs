//! Generative property suites shared by the property tests and the acceptance
//! gate. Each suite runs `cases` random cases and reports the first failure.
#![allow(dead_code)]

use std::f64::consts::PI;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use buffon::ant::{intersect_count, segments_intersect, Point, Segment, SegmentSet, TorusRegion};
use buffon::joint::{RunLengthState, RunLengthTally};
use buffon::needle::Board;
use buffon::stats::StreamingMoments;
use buffon::streams::Replay;

pub type SuiteResult = Result<(), String>;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn close(a: f64, b: f64, scale: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(scale)
}

fn moments_close(x: &StreamingMoments, y: &StreamingMoments, scale: f64) -> bool {
    x.count() == y.count()
        && close(x.mean(), y.mean(), scale, 1e-9)
        && close(x.m2(), y.m2(), scale * scale, 1e-9)
}

fn samples() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3f64..1e3, 0..24)
}

/// Merge is commutative and associative, and update-then-merge agrees with
/// merge-then-update, all within 1e-9 relative (scaled by the data magnitude).
pub fn merge_laws(cases: u32) -> SuiteResult {
    runner(cases)
        .run(
            &(samples(), samples(), samples(), -1e3f64..1e3),
            |(a, b, c, extra)| {
                let (ma, mb, mc) = (
                    StreamingMoments::from_values(a.iter().copied()),
                    StreamingMoments::from_values(b.iter().copied()),
                    StreamingMoments::from_values(c.iter().copied()),
                );
                let scale = a
                    .iter()
                    .chain(&b)
                    .chain(&c)
                    .fold(1.0f64, |s, v| s.max(v.abs()));

                prop_assert!(moments_close(&ma.merge(&mb), &mb.merge(&ma), scale));
                let left = ma.merge(&mb).merge(&mc);
                let right = ma.merge(&mb.merge(&mc));
                prop_assert!(moments_close(&left, &right, scale));
                let flat = StreamingMoments::from_values(a.iter().chain(&b).chain(&c).copied());
                prop_assert!(moments_close(&left, &flat, scale));

                let mut upd_then_merge = ma;
                upd_then_merge.update(extra);
                let upd_then_merge = upd_then_merge.merge(&mb);
                let mut merge_then_upd = ma.merge(&mb);
                merge_then_upd.update(extra);
                prop_assert!(moments_close(
                    &upd_then_merge,
                    &merge_then_upd,
                    scale.max(extra.abs())
                ));
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}

/// `x = min(y, a - y)`, `u` in `[0, 1)` with `u = y/a`, and the crossing
/// flag equals the predicate `x <= (l/2) sin(phi)`.
pub fn throw_invariants(cases: u32) -> SuiteResult {
    let draw = 0.0f64..1.0;
    runner(cases)
        .run(
            &(1e-3f64..1e3, 1e-3f64..=1.0, draw.clone(), draw),
            |(a, ratio, d1, d2)| {
                let l = (a * ratio).min(a);
                let board =
                    Board::with_dims(a, l).map_err(|e| TestCaseError::fail(e.to_string()))?;
                let t = board.throw(&mut Replay::new(vec![d1, d2]));
                prop_assert!(t.y >= 0.0 && t.y < a);
                prop_assert_eq!(t.x, t.y.min(a - t.y));
                prop_assert!(t.u >= 0.0 && t.u < 1.0);
                prop_assert!((t.y / a - t.u).abs() <= 4.0 * f64::EPSILON);
                prop_assert!(t.phi >= 0.0 && t.phi < PI);
                prop_assert_eq!(t.crossed, t.x <= 0.5 * l * t.phi.sin());
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}

/// Completed run lengths plus the open count equal the number of draws fed,
/// every run has length at least 1 (at least 2 at threshold 1), and the
/// tally's mean equals total draws over runs.
pub fn run_length_conservation(cases: u32) -> SuiteResult {
    let threshold = prop_oneof![Just(1.0f64), 1e-3f64..=1.0];
    runner(cases)
        .run(
            &(threshold, prop::collection::vec(0.0f64..1.0, 0..300)),
            |(x, draws)| {
                let mut state =
                    RunLengthState::new(x).map_err(|e| TestCaseError::fail(e.to_string()))?;
                let mut tally = RunLengthTally::new();
                let mut lengths = Vec::new();
                for &u in &draws {
                    if let Some(n) = state
                        .feed(u)
                        .map_err(|e| TestCaseError::fail(e.to_string()))?
                    {
                        prop_assert!(n >= 1);
                        if x == 1.0 {
                            prop_assert!(n >= 2);
                        }
                        tally.record(n);
                        lengths.push(n);
                    }
                    prop_assert!(state.partial_sum() <= x);
                }
                prop_assert_eq!(
                    lengths.iter().sum::<u64>() + state.current_count(),
                    draws.len() as u64
                );
                prop_assert_eq!(tally.total_draws(), lengths.iter().sum::<u64>());
                if tally.completed_runs() > 0 {
                    let mean = tally.total_draws() as f64 / tally.completed_runs() as f64;
                    prop_assert!((tally.moments().mean() - mean).abs() <= 1e-12 * mean);
                }
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}

pub fn segment_on(side: f64) -> impl Strategy<Value = Segment> {
    (0.0..side, 0.0..side, 0.0..PI, 0.01..=0.5f64).prop_map(move |(x, y, theta, frac)| Segment {
        mid: Point::new(x, y),
        theta,
        len: frac * side,
    })
}

pub fn segment_sets() -> impl Strategy<Value = (f64, SegmentSet, SegmentSet)> {
    (0.5f64..10.0).prop_flat_map(|side| {
        (
            Just(side),
            prop::collection::vec(segment_on(side), 1..8).prop_map(SegmentSet::new),
            prop::collection::vec(segment_on(side), 1..8).prop_map(SegmentSet::new),
        )
    })
}

/// Brute-force torus test: every one of the nine periodic copies of `b`.
pub fn replicated_intersect(a: &Segment, b: &Segment, side: f64) -> bool {
    let ends = |s: &Segment, ox: f64, oy: f64| {
        let (hx, hy) = (0.5 * s.len * s.theta.cos(), 0.5 * s.len * s.theta.sin());
        (
            Point::new(s.mid.x + ox - hx, s.mid.y + oy - hy),
            Point::new(s.mid.x + ox + hx, s.mid.y + oy + hy),
        )
    };
    let (p1, p2) = ends(a, 0.0, 0.0);
    [-1.0, 0.0, 1.0].iter().any(|&i| {
        [-1.0, 0.0, 1.0].iter().any(|&j| {
            let (q1, q2) = ends(b, i * side, j * side);
            segments_intersect(p1, p2, q1, q2, side)
        })
    })
}

pub fn replicated_count(a: &SegmentSet, b: &SegmentSet, side: f64) -> u64 {
    a.segments
        .iter()
        .map(|s| {
            b.segments
                .iter()
                .filter(|t| replicated_intersect(s, t, side))
                .count() as u64
        })
        .sum()
}

/// `intersect_count(A, B) = intersect_count(B, A)`, and both agree with the
/// 3x3 replication oracle.
pub fn torus_symmetry(cases: u32) -> SuiteResult {
    runner(cases)
        .run(&segment_sets(), |(side, a, b)| {
            let region = TorusRegion::new(side).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let ab =
                intersect_count(&a, &b, &region).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let ba =
                intersect_count(&b, &a, &region).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(ab, ba);
            prop_assert_eq!(ab, replicated_count(&a, &b, side));
            Ok(())
        })
        .map_err(|e| e.to_string())
}
