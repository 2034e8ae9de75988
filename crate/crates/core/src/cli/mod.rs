//! Command-line surface: argument types, command runners and exit codes.
//!
//! Every command is deterministic in its flags. Needle and joint runs split
//! their throws over `--workers` substreams, so their output is reproducible
//! per `(seed, workers)` but changes with the worker count; the other
//! commands give each seed or repetition its own substream and do not depend
//! on `--workers`.

mod commands;
mod output;

use std::fmt;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};

pub use commands::{cmd_ant, cmd_converge, cmd_joint, cmd_lazzarini, cmd_needle, execute};
pub use output::{CommandOutput, EstimateEntry, Report, Table};

use crate::error::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const DEGENERATE: i32 = 2;
}

/// Exit code for a failed command.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_degenerate() {
        exit::DEGENERATE
    } else {
        exit::CONFIG
    }
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "buffon",
    version,
    about = "Buffon's needle experiments: pi, e, optional stopping and area by intersections"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Estimate pi from needle-line crossings.
    Needle(NeedleArgs),
    /// Estimate pi and e from one stream of throws.
    Joint(JointArgs),
    /// Sequential traces, stop rules and the optional-stopping comparison.
    Lazzarini(LazzariniArgs),
    /// Estimate a torus area from intersections of two scattered segment sets.
    Ant(AntArgs),
    /// RMS error of the pi estimate against throw count, with the log-log slope.
    Converge(ConvergeArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Needle(_) => "needle",
            Command::Joint(_) => "joint",
            Command::Lazzarini(_) => "lazzarini",
            Command::Ant(_) => "ant",
            Command::Converge(_) => "converge",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// A 64-bit seed given in decimal or as `0x`-prefixed hex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl FromStr for Seed {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
            Some(hex) => u64::from_str_radix(hex, 16),
            None => t.parse(),
        };
        parsed
            .map(Seed)
            .map_err(|e| format!("seed must be a decimal or 0x-prefixed hex u64 ({e})"))
    }
}

/// A positive real that remembers its exact decimal value as a fraction when
/// it was written as a plain decimal (`5`, `0.125`), so ratios of lengths can
/// be formed without rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decimal {
    pub value: f64,
    pub exact: Option<(u64, u64)>,
}

impl Decimal {
    pub fn new(value: f64) -> Self {
        Self { value, exact: None }
    }
}

impl FromStr for Decimal {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let value: f64 = t.parse().map_err(|e| format!("not a number: {t} ({e})"))?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(format!("must be positive and finite, got {t}"));
        }
        Ok(Self {
            value,
            exact: exact_decimal(t),
        })
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.value)
    }
}

fn exact_decimal(t: &str) -> Option<(u64, u64)> {
    let (int, frac) = t.split_once('.').unwrap_or((t, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let den = 10u64.checked_pow(frac.len() as u32)?;
    let digits = format!("{int}{frac}");
    let num: u64 = digits.trim_start_matches('0').parse().unwrap_or(0);
    (num > 0).then_some((num, den))
}

/// `l/a` as a reduced fraction when both lengths are exact decimals.
pub fn length_ratio(length: &Decimal, spacing: &Decimal) -> Option<(u64, u64)> {
    use num_integer::Integer;
    let (ln, ld) = length.exact?;
    let (an, ad) = spacing.exact?;
    let num = ln as u128 * ad as u128;
    let den = ld as u128 * an as u128;
    let g = num.gcd(&den);
    Some((u64::try_from(num / g).ok()?, u64::try_from(den / g).ok()?))
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CommonArgs {
    /// Experiment seed (decimal or 0x-prefixed hex).
    #[arg(long, default_value = "0")]
    pub seed: Seed,

    /// Worker threads; the throw partition depends on it.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write to this file instead of stdout.
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoardArgs {
    /// Distance between the floor lines.
    #[arg(long, default_value = "1")]
    pub spacing: Decimal,

    /// Needle length; must not exceed the spacing.
    #[arg(long, default_value = "1")]
    pub length: Decimal,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NeedleArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub throws: u64,

    #[command(flatten)]
    #[serde(flatten)]
    pub board: BoardArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct JointArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub throws: u64,

    /// Run threshold for the e estimator; the mean run length targets e^threshold.
    #[arg(long, default_value_t = 1.0)]
    pub threshold: f64,

    #[command(flatten)]
    #[serde(flatten)]
    pub board: BoardArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LazzariniArgs {
    /// Exact estimate from integers: L_NUM L_DEN N M with l/a = L_NUM/L_DEN.
    #[arg(long, num_args = 4, value_names = ["L_NUM", "L_DEN", "N", "M"])]
    pub exact: Option<Vec<u64>>,

    #[arg(long, default_value = "6")]
    pub spacing: Decimal,

    #[arg(long, default_value = "5")]
    pub length: Decimal,

    /// Stop when the running estimate comes within --tolerance of --target.
    /// Without it the trace runs a fixed --n-stop throws.
    #[arg(long)]
    pub target_window: bool,

    #[arg(long, default_value_t = 3408)]
    pub n_stop: u64,

    #[arg(long, default_value_t = std::f64::consts::PI)]
    pub target: f64,

    #[arg(long, default_value_t = 3e-6)]
    pub tolerance: f64,

    #[arg(long, default_value_t = 3000)]
    pub n_min: u64,

    #[arg(long, default_value_t = 200_000)]
    pub n_max: u64,

    /// Record every STRIDE throws.
    #[arg(long, default_value_t = 1)]
    pub stride: u64,

    /// Compare the target window against a fixed --n-stop budget over this many
    /// substreams instead of tracing one.
    #[arg(long)]
    pub compare: Option<usize>,

    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AntArgs {
    /// Side of the square torus.
    #[arg(long, default_value_t = 1.0)]
    pub side: f64,

    #[arg(long, default_value_t = 200)]
    pub count_a: usize,

    #[arg(long, default_value_t = 200)]
    pub count_b: usize,

    #[arg(long, default_value_t = 0.1)]
    pub seg_len: f64,

    #[arg(long, default_value_t = 100)]
    pub reps: usize,

    /// Also write the first repetition's segments as CSV to this file.
    #[arg(long)]
    #[serde(skip)]
    pub scatter_csv: Option<std::path::PathBuf>,

    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConvergeArgs {
    /// Comma-separated throw counts.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "1000,10000,100000,1000000"
    )]
    pub ns: Vec<u64>,

    /// Independent substreams per throw count.
    #[arg(long, default_value_t = 100)]
    pub seeds: usize,

    #[command(flatten)]
    #[serde(flatten)]
    pub board: BoardArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

impl Command {
    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Needle(a) => &a.common,
            Command::Joint(a) => &a.common,
            Command::Lazzarini(a) => &a.common,
            Command::Ant(a) => &a.common,
            Command::Converge(a) => &a.common,
        }
    }
}
