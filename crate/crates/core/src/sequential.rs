//! Running pi estimates, stop rules, and the optional-stopping demonstration.
//!
//! A fixed-n experiment throws a predetermined number of times. A target-window
//! rule instead watches the running estimate and stops the first time it lands
//! within `tolerance` of a known target, which is how a reported error far
//! below the honest sampling scale can be manufactured.

use std::fmt;

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::needle::Board;
use crate::stats::median;
use crate::streams::{StreamSpec, UnitSource};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StopRule {
    FixedN {
        n_stop: u64,
    },
    TargetWindow {
        target: f64,
        tolerance: f64,
        n_min: u64,
        n_max: u64,
    },
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StopRule::FixedN { n_stop: 0 } => Err(Error::InvalidConfiguration(
                "fixed stop needs at least one throw".into(),
            )),
            StopRule::TargetWindow {
                target,
                tolerance,
                n_min,
                n_max,
            } => {
                if n_min == 0 || n_min > n_max {
                    return Err(Error::InvalidConfiguration(format!(
                        "target window needs 1 <= n_min <= n_max, got {n_min}..{n_max}"
                    )));
                }
                if tolerance.is_nan() || tolerance <= 0.0 || !target.is_finite() {
                    return Err(Error::InvalidConfiguration(format!(
                        "target window needs a finite target and positive tolerance, got {target} +/- {tolerance}"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Largest number of throws the rule can consume.
    pub fn budget(&self) -> u64 {
        match *self {
            StopRule::FixedN { n_stop } => n_stop,
            StopRule::TargetWindow { n_max, .. } => n_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Fixed,
    TargetHit,
    Exhausted,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Fixed => "fixed",
            StopReason::TargetHit => "target-hit",
            StopReason::Exhausted => "exhausted",
        })
    }
}

/// Running state after `n` throws. `estimate` is absent until the first crossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub n: u64,
    pub m: u64,
    pub estimate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequentialTrace {
    pub records: Vec<TraceRecord>,
    pub stop_n: u64,
    pub stop_reason: StopReason,
}

impl SequentialTrace {
    /// The record at the stop point (always the last one).
    pub fn last(&self) -> &TraceRecord {
        self.records
            .last()
            .expect("a trace always records its stop point")
    }

    pub fn final_estimate(&self) -> Option<f64> {
        self.last().estimate
    }

    /// Records with `n >= n_min`.
    pub fn records_from(&self, n_min: u64) -> &[TraceRecord] {
        let start = self.records.partition_point(|r| r.n < n_min);
        &self.records[start..]
    }
}

/// Throws until `rule` fires, recording every `stride` throws and at the stop.
///
/// A target window is checked after every throw regardless of `stride`; the
/// stride only thins what gets recorded.
pub fn run_sequential<S: UnitSource + ?Sized>(
    src: &mut S,
    board: &Board,
    rule: StopRule,
    stride: u64,
) -> Result<SequentialTrace> {
    rule.validate()?;
    if stride == 0 {
        return Err(Error::InvalidConfiguration(
            "stride must be at least 1".into(),
        ));
    }
    let budget = rule.budget();
    let mut records = Vec::with_capacity((budget / stride).min(1 << 24) as usize + 1);
    let mut m = 0u64;
    let mut reason = match rule {
        StopRule::FixedN { .. } => StopReason::Fixed,
        StopRule::TargetWindow { .. } => StopReason::Exhausted,
    };
    let mut n = 0u64;
    while n < budget {
        n += 1;
        m += board.throw(src).crossed as u64;
        let estimate = board.pi_point(n, m);
        let hit = match rule {
            StopRule::TargetWindow {
                target,
                tolerance,
                n_min,
                ..
            } => n >= n_min && estimate.is_some_and(|e| (e - target).abs() <= tolerance),
            StopRule::FixedN { .. } => false,
        };
        if hit {
            reason = StopReason::TargetHit;
        }
        if hit || n.is_multiple_of(stride) || n == budget {
            records.push(TraceRecord { n, m, estimate });
        }
        if hit {
            break;
        }
    }
    Ok(SequentialTrace {
        records,
        stop_n: n,
        stop_reason: reason,
    })
}

/// Counts sign changes of `estimate - target` between consecutive records.
///
/// Records without an estimate are skipped. Landing exactly on the target
/// counts as one crossing; leaving it again does not count a second time.
pub fn sign_crossings(records: &[TraceRecord], target: f64) -> u64 {
    let mut prev: Option<f64> = None;
    let mut count = 0;
    for d in records
        .iter()
        .filter_map(|r| r.estimate)
        .map(|e| e - target)
    {
        if let Some(p) = prev {
            if p != 0.0 && (d == 0.0 || (d > 0.0) != (p > 0.0)) {
                count += 1;
            }
        }
        prev = Some(d);
    }
    count
}

/// Exact `2ln/(am)` with `l/a = length_num/length_den`, in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RationalEstimate {
    pub numerator: u128,
    pub denominator: u128,
}

impl RationalEstimate {
    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// Decimal expansion truncated to `places` digits after the point.
    pub fn decimal(&self, places: usize) -> String {
        let whole = self.numerator / self.denominator;
        let mut rem = self.numerator % self.denominator;
        let mut out = whole.to_string();
        if places > 0 {
            out.push('.');
            for _ in 0..places {
                rem *= 10;
                out.push(char::from_digit((rem / self.denominator) as u32, 10).unwrap());
                rem %= self.denominator;
            }
        }
        out
    }
}

impl fmt::Display for RationalEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

pub fn exact_estimate_rational(
    length_num: u64,
    length_den: u64,
    n: u64,
    m: u64,
) -> Result<RationalEstimate> {
    if length_num == 0 || length_den == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "exact estimate needs positive integers, got l/a = {length_num}/{length_den}, n = {n}"
        )));
    }
    if m == 0 {
        return Err(Error::NoCrossings { throws: n });
    }
    // 2*l*n can exceed u128
    let num = (length_num as u128)
        .checked_mul(n as u128)
        .and_then(|v| v.checked_mul(2))
        .ok_or_else(|| Error::Overflow("2*l*n exceeds 128 bits".into()))?;
    let den = length_den as u128 * m as u128;
    let g = num.gcd(&den);
    Ok(RationalEstimate {
        numerator: num / g,
        denominator: den / g,
    })
}

/// Outcome of both rules on one seed's throw stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeedOutcome {
    pub stream: StreamSpec,
    /// `|estimate - target|` after the fixed budget; `None` if nothing crossed.
    pub fixed_error: Option<f64>,
    pub cheat_error: Option<f64>,
    pub cheat_stop_n: u64,
    pub cheat_reason: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheatReport {
    pub outcomes: Vec<SeedOutcome>,
    pub hits: usize,
    pub hit_rate: f64,
    pub median_fixed_error: Option<f64>,
    pub median_hit_error: Option<f64>,
    /// Median target-hit error over median fixed-n error.
    pub median_error_ratio: Option<f64>,
}

impl CheatReport {
    pub fn hit_errors(&self) -> impl Iterator<Item = f64> + '_ {
        self.outcomes
            .iter()
            .filter(|o| o.cheat_reason == StopReason::TargetHit)
            .filter_map(|o| o.cheat_error)
    }
}

/// Runs a fixed-n rule and a target-window rule on each stream and compares
/// the reported errors. Both rules see the same throws for a given stream.
pub fn cheat_report(
    streams: &[StreamSpec],
    fixed_rule: StopRule,
    cheat_rule: StopRule,
    board: &Board,
) -> Result<CheatReport> {
    let target = match (fixed_rule, cheat_rule) {
        (StopRule::FixedN { .. }, StopRule::TargetWindow { target, .. }) => target,
        _ => {
            return Err(Error::InvalidConfiguration(
                "cheat report compares a fixed-n rule against a target-window rule".into(),
            ))
        }
    };
    fixed_rule.validate()?;
    cheat_rule.validate()?;

    let outcomes = streams
        .par_iter()
        .map(|spec| -> Result<SeedOutcome> {
            let fixed = run_sequential(&mut spec.open(), board, fixed_rule, fixed_rule.budget())?;
            let cheat = run_sequential(&mut spec.open(), board, cheat_rule, 1)?;
            Ok(SeedOutcome {
                stream: *spec,
                fixed_error: fixed.final_estimate().map(|e| (e - target).abs()),
                cheat_error: cheat.final_estimate().map(|e| (e - target).abs()),
                cheat_stop_n: cheat.stop_n,
                cheat_reason: cheat.stop_reason,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let hits = outcomes
        .iter()
        .filter(|o| o.cheat_reason == StopReason::TargetHit)
        .count();
    let fixed_errors: Vec<f64> = outcomes.iter().filter_map(|o| o.fixed_error).collect();
    let mut report = CheatReport {
        hit_rate: hits as f64 / outcomes.len().max(1) as f64,
        hits,
        median_fixed_error: median(&fixed_errors),
        median_hit_error: None,
        median_error_ratio: None,
        outcomes,
    };
    let hit_errors: Vec<f64> = report.hit_errors().collect();
    report.median_hit_error = median(&hit_errors);
    report.median_error_ratio = match (report.median_hit_error, report.median_fixed_error) {
        (Some(h), Some(f)) if f > 0.0 => Some(h / f),
        _ => None,
    };
    Ok(report)
}
