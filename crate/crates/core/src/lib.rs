//! Buffon's needle as a Monte Carlo laboratory.
//!
//! One stream of needle throws yields two estimates: pi from the fraction of
//! throws that cross a line, and e from how many normalized offsets must be
//! summed to exceed one. Around that core sit sequential traces for studying
//! optional stopping, the segment-intersection area estimator on a torus, and
//! mergeable statistics for parallel reduction.

pub mod ant;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod format;
pub mod joint;
pub mod needle;
pub mod sequential;
pub mod stats;
pub mod streams;

pub use error::{Error, Result};
pub use needle::{Board, FloorSpec, NeedleSpec, Tally, Throw};
pub use stats::{EstimateSummary, StreamingMoments};
pub use streams::{StreamSpec, UnitSource, UnitStream};
