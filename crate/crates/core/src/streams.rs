//! Seedable, splittable uniform streams.
//!
//! Every stream is a ChaCha8 keystream. The 256-bit key is derived from the
//! 64-bit seed with `rand_core`'s portable `seed_from_u64`, and the substream
//! index selects ChaCha's 64-bit stream (nonce) word. Two substreams under one
//! seed therefore draw from disjoint counter domains of the same key and can
//! never overlap, however far either one advances.
//!
//! Reals are built from the top 53 bits of a `u64` draw scaled by 2^-53, so
//! every value is an exact multiple of 2^-53 in `[0, 1)` and 1.0 is never
//! produced. The whole construction is platform independent: a given
//! `(seed, stream_index)` yields the same bits everywhere.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};

const UNIT_SCALE: f64 = 1.0 / (1u64 << 53) as f64;

/// Identifies one substream: a seed plus a substream index under that seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct StreamSpec {
    pub seed: u64,
    pub stream_index: u64,
}

impl StreamSpec {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    /// Starts the stream at step zero.
    pub fn open(&self) -> UnitStream {
        UnitStream::new(*self)
    }
}

/// Returns the substreams `0..k` of `seed`.
pub fn split(seed: u64, k: usize) -> Result<Vec<StreamSpec>> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "cannot split a seed into zero streams".into(),
        ));
    }
    Ok((0..k as u64).map(|i| StreamSpec::new(seed, i)).collect())
}

/// Anything that hands out uniform reals on `[0, 1)`.
///
/// The experiment code is written against this trait so tests can replay a
/// scripted sequence of draws.
pub trait UnitSource {
    fn next_unit(&mut self) -> f64;
}

/// The live state of a [`StreamSpec`]. Single owner; move it to a worker
/// rather than sharing it.
#[derive(Debug, Clone)]
pub struct UnitStream {
    spec: StreamSpec,
    rng: ChaCha8Rng,
}

impl UnitStream {
    pub fn new(spec: StreamSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(spec.stream_index);
        Self { spec, rng }
    }

    pub fn spec(&self) -> StreamSpec {
        self.spec
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

impl UnitSource for UnitStream {
    #[inline]
    fn next_unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * UNIT_SCALE
    }
}

/// Replays a fixed list of draws, then panics when exhausted.
#[derive(Debug, Clone)]
pub struct Replay {
    values: Vec<f64>,
    pos: usize,
}

impl Replay {
    pub fn new(values: impl Into<Vec<f64>>) -> Self {
        Self {
            values: values.into(),
            pos: 0,
        }
    }

    /// Number of draws consumed so far.
    pub fn consumed(&self) -> usize {
        self.pos
    }
}

impl UnitSource for Replay {
    fn next_unit(&mut self) -> f64 {
        let v = *self
            .values
            .get(self.pos)
            .unwrap_or_else(|| panic!("replay exhausted after {} draws", self.pos));
        self.pos += 1;
        v
    }
}
