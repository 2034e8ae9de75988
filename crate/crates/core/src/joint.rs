//! Estimating e from the offsets of the same throws.
//!
//! Add uniform draws until the running sum strictly exceeds a threshold `x`
//! in `(0, 1]`; the number of draws `N` this takes has mean `e^x`, so the mean
//! run length over many runs estimates `e` at the default threshold of 1.
//!
//! Runs are consecutive in the draw sequence. A run still open when the input
//! ends is dropped, so every tallied run is a complete sample of `N`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{EstimateSummary, StreamingMoments};

/// An open run: the partial sum and the number of draws in it so far.
///
/// The sum is a plain `f64` accumulation; runs average fewer than three draws,
/// so compensated summation would buy nothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunLengthState {
    threshold: f64,
    partial_sum: f64,
    current_count: u64,
}

impl RunLengthState {
    pub fn new(threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "run threshold must lie in (0, 1], got {threshold}"
            )));
        }
        Ok(Self {
            threshold,
            partial_sum: 0.0,
            current_count: 0,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn partial_sum(&self) -> f64 {
        self.partial_sum
    }

    /// Draws in the open run.
    pub fn current_count(&self) -> u64 {
        self.current_count
    }

    /// Adds one draw; returns the run length when the sum strictly exceeds
    /// the threshold, and starts a new run.
    pub fn feed(&mut self, u: f64) -> Result<Option<u64>> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::InvalidArgument(format!("offset {u} outside [0, 1)")));
        }
        Ok(self.feed_unchecked(u))
    }

    /// [`feed`](Self::feed) for values already known to lie in `[0, 1)`.
    #[inline]
    pub fn feed_unchecked(&mut self, u: f64) -> Option<u64> {
        self.partial_sum += u;
        self.current_count += 1;
        if self.partial_sum > self.threshold {
            let n = self.current_count;
            self.partial_sum = 0.0;
            self.current_count = 0;
            Some(n)
        } else {
            None
        }
    }
}

/// Completed runs and the moments of their lengths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RunLengthTally {
    completed_runs: u64,
    total_draws: u64,
    moments: StreamingMoments,
}

impl RunLengthTally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_lengths<I: IntoIterator<Item = u64>>(lengths: I) -> Self {
        let mut t = Self::new();
        for n in lengths {
            t.record(n);
        }
        t
    }

    #[inline]
    pub fn record(&mut self, run_length: u64) {
        self.completed_runs += 1;
        self.total_draws += run_length;
        self.moments.update(run_length as f64);
    }

    pub fn merge(&self, other: &Self) -> Self {
        Self {
            completed_runs: self.completed_runs + other.completed_runs,
            total_draws: self.total_draws + other.total_draws,
            moments: self.moments.merge(&other.moments),
        }
    }

    pub fn completed_runs(&self) -> u64 {
        self.completed_runs
    }

    /// Draws consumed by completed runs.
    pub fn total_draws(&self) -> u64 {
        self.total_draws
    }

    pub fn moments(&self) -> &StreamingMoments {
        &self.moments
    }
}

/// Feeds a whole sequence into a fresh state and tallies the completed runs.
/// Returns the tally and the state holding the trailing open run.
pub fn run_lengths<I>(threshold: f64, values: I) -> Result<(RunLengthTally, RunLengthState)>
where
    I: IntoIterator<Item = f64>,
{
    let mut state = RunLengthState::new(threshold)?;
    let mut tally = RunLengthTally::new();
    for u in values {
        if let Some(n) = state.feed(u)? {
            tally.record(n);
        }
    }
    Ok((tally, state))
}

/// Mean run length with its sample standard error.
pub fn estimate_e(tally: &RunLengthTally) -> Result<EstimateSummary> {
    if tally.completed_runs < 2 {
        return Err(Error::InsufficientData(format!(
            "the e estimate needs at least 2 completed runs, got {}",
            tally.completed_runs
        )));
    }
    tally.moments.summary()
}

/// Expected run length `e^x` for a threshold `x` in `[0, 1]`.
pub fn expected_draws(threshold: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!(
            "expected run length is e^x only for x in [0, 1], got {threshold}"
        )));
    }
    Ok(threshold.exp())
}
