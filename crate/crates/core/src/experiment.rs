//! Parallel drivers: fan throws or repetitions out over substreams and merge
//! the per-worker results in substream order.
//!
//! Needle and joint runs split the throw budget across `workers` substreams,
//! so the sample depends on `(seed, workers)`. Convergence sweeps and ant
//! repetitions give each seed or repetition its own substream, so their
//! results do not depend on the worker count at all.

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use serde::Serialize;

use crate::ant::{self, SegmentSet, TorusRegion};
use crate::error::{Error, Result};
use crate::joint::{RunLengthState, RunLengthTally};
use crate::needle::{Board, Tally};
use crate::stats::{fit_error_slope, rms, CoMoments, StreamingMoments};
use crate::streams::{split, StreamSpec};

/// Builds a pool with exactly `workers` threads.
pub fn pool(workers: usize) -> Result<ThreadPool> {
    if workers == 0 {
        return Err(Error::InvalidConfiguration(
            "workers must be at least 1".into(),
        ));
    }
    ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfiguration(format!("cannot start {workers} workers: {e}")))
}

/// Splits `total` into `parts` near-equal shares; the first `total % parts`
/// shares get one extra.
pub fn partition(total: u64, parts: usize) -> Vec<u64> {
    let k = parts as u64;
    (0..k)
        .map(|i| total / k + u64::from(i < total % k))
        .collect()
}

/// Crossing tally over `throws` throws split across `workers` substreams.
pub fn run_needle(board: &Board, seed: u64, workers: usize, throws: u64) -> Result<Tally> {
    let streams = split(seed, workers)?;
    let shares = partition(throws, workers);
    let tallies: Vec<Tally> = pool(workers)?.install(|| {
        streams
            .par_iter()
            .zip(&shares)
            .map(|(spec, &n)| board.tally(&mut spec.open(), n))
            .collect()
    });
    Ok(tallies.iter().fold(Tally::default(), |acc, t| acc.merge(t)))
}

/// Everything one joint pass produces.
#[derive(Debug, Clone, Copy, Default)]
pub struct JointOutcome {
    pub tally: Tally,
    pub runs: RunLengthTally,
    /// Crossing indicator against normalized offset, per throw.
    pub co: CoMoments,
    /// Draws left in the open run at the end of each worker's share (discarded).
    pub open_draws: u64,
}

impl JointOutcome {
    fn merge(&self, other: &Self) -> Self {
        Self {
            tally: self.tally.merge(&other.tally),
            runs: self.runs.merge(&other.runs),
            co: self.co.merge(&other.co),
            open_draws: self.open_draws + other.open_draws,
        }
    }
}

/// One pass over the throws feeding both the crossing tally and the run-length
/// estimator with each throw's normalized offset.
pub fn joint_pass(
    board: &Board,
    spec: StreamSpec,
    throws: u64,
    threshold: f64,
) -> Result<JointOutcome> {
    let mut src = spec.open();
    let mut state = RunLengthState::new(threshold)?;
    let mut out = JointOutcome::default();
    for _ in 0..throws {
        let t = board.throw(&mut src);
        out.tally.record(t.crossed);
        out.co.update(f64::from(u8::from(t.crossed)), t.u);
        if let Some(n) = state.feed_unchecked(t.u) {
            out.runs.record(n);
        }
    }
    out.open_draws = state.current_count();
    Ok(out)
}

pub fn run_joint(
    board: &Board,
    threshold: f64,
    seed: u64,
    workers: usize,
    throws: u64,
) -> Result<JointOutcome> {
    RunLengthState::new(threshold)?;
    let streams = split(seed, workers)?;
    let shares = partition(throws, workers);
    let parts = pool(workers)?.install(|| {
        streams
            .par_iter()
            .zip(&shares)
            .map(|(spec, &n)| joint_pass(board, *spec, n, threshold))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(parts
        .iter()
        .fold(JointOutcome::default(), |acc, p| acc.merge(p)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub rms_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub slope: f64,
}

/// RMS error of the pi estimate across `seeds` substreams at each throw count
/// in `ns`, and the log-log slope of error against n.
///
/// Each substream is thrown once up to the largest n; the smaller counts are
/// read off as checkpoints along the way.
pub fn converge(
    board: &Board,
    seed: u64,
    seeds: usize,
    ns: &[u64],
    workers: usize,
) -> Result<ConvergenceTable> {
    let mut checkpoints = ns.to_vec();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    if checkpoints.len() < 3 || checkpoints[0] == 0 {
        return Err(Error::InvalidConfiguration(
            "convergence needs at least 3 distinct positive throw counts".into(),
        ));
    }
    let streams = split(seed, seeds)?;
    let per_seed: Vec<Vec<f64>> = pool(workers)?.install(|| {
        streams
            .par_iter()
            .map(|spec| {
                let mut src = spec.open();
                let mut tally = Tally::default();
                let mut errors = Vec::with_capacity(checkpoints.len());
                for &n in &checkpoints {
                    let more = board.tally(&mut src, n - tally.n);
                    tally = tally.merge(&more);
                    let est = board
                        .pi_point(tally.n, tally.m)
                        .ok_or(Error::NoCrossings { throws: tally.n })?;
                    errors.push(est - std::f64::consts::PI);
                }
                Ok(errors)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let rows: Vec<ConvergenceRow> = checkpoints
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let errs: Vec<f64> = per_seed.iter().map(|e| e[i]).collect();
            ConvergenceRow {
                n,
                rms_error: rms(&errs),
            }
        })
        .collect();
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.rms_error)).collect();
    let slope = fit_error_slope(&points)?;
    Ok(ConvergenceTable { rows, slope })
}

#[derive(Debug, Clone, Copy)]
pub struct AntConfig {
    pub region: TorusRegion,
    pub count_a: usize,
    pub count_b: usize,
    pub seg_len: f64,
}

impl AntConfig {
    pub fn total_a(&self) -> f64 {
        self.count_a as f64 * self.seg_len
    }

    pub fn total_b(&self) -> f64 {
        self.count_b as f64 * self.seg_len
    }

    /// Scatters set A then set B from one stream.
    pub fn scatter_pair(&self, spec: StreamSpec) -> Result<(SegmentSet, SegmentSet)> {
        let mut src = spec.open();
        let a = ant::scatter(&mut src, self.count_a, self.seg_len, &self.region)?;
        let b = ant::scatter(&mut src, self.count_b, self.seg_len, &self.region)?;
        Ok((a, b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AntRep {
    pub rep: u64,
    pub intersections: u64,
    /// `None` when the sets did not intersect.
    pub area: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntOutcome {
    pub reps: Vec<AntRep>,
    pub counts: StreamingMoments,
    /// Over repetitions with at least one intersection.
    pub areas: StreamingMoments,
}

/// `reps` independent scatters; repetition `r` uses substream `r` of `seed`.
pub fn run_ant(config: &AntConfig, seed: u64, reps: usize, workers: usize) -> Result<AntOutcome> {
    let streams = split(seed, reps)?;
    let (s, l) = (config.total_a(), config.total_b());
    let results = pool(workers)?.install(|| {
        streams
            .par_iter()
            .map(|spec| {
                let (a, b) = config.scatter_pair(*spec)?;
                let n = ant::intersect_count(&a, &b, &config.region)?;
                Ok(AntRep {
                    rep: spec.stream_index,
                    intersections: n,
                    area: ant::estimate_area(s, l, n).ok(),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let counts = StreamingMoments::from_values(results.iter().map(|r| r.intersections as f64));
    let areas = StreamingMoments::from_values(results.iter().filter_map(|r| r.area));
    Ok(AntOutcome {
        reps: results,
        counts,
        areas,
    })
}
