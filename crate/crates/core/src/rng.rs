//! Seeds, substreams and the significance level.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] seeded by a
//! [`RandomSeed`]. Work that fans out (bootstrap replicates, simulation runs)
//! derives one substream per unit of work with [`derive_substream`], so the
//! result never depends on how the work is scheduled.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The generator behind every stream.
pub type Stream = ChaCha8Rng;

/// A reproducible random stream identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RandomSeed(pub u64);

impl RandomSeed {
    /// Seed used when the caller does not pick one.
    pub const DEFAULT: RandomSeed = RandomSeed(0);

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn substream(self, index: u64) -> RandomSeed {
        derive_substream(self, index)
    }

    pub fn stream(self) -> Stream {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for RandomSeed {
    fn from(value: u64) -> Self {
        RandomSeed(value)
    }
}

impl fmt::Display for RandomSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

// SplitMix64 finalizer; a bijection on u64.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of substream `index` of `seed`.
///
/// For a fixed parent seed the map `index -> substream` is a composition of
/// bijections, so distinct indices never collide.
pub fn derive_substream(seed: RandomSeed, index: u64) -> RandomSeed {
    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
    let spread = mix(index.wrapping_add(1).wrapping_mul(GOLDEN));
    RandomSeed(mix(seed.0.wrapping_add(spread)))
}

/// Significance level used to turn a p-value into a verdict.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Significance(f64);

impl Significance {
    pub const DEFAULT: Significance = Significance(0.05);

    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Significance(alpha))
        } else {
            Err(Error::invalid("alpha", format!("{alpha} is not in (0, 1)")))
        }
    }

    pub fn alpha(self) -> f64 {
        self.0
    }

    /// Strict rule: only `p < alpha` rejects.
    pub fn rejects(self, p_value: f64) -> bool {
        p_value < self.0
    }
}

impl Default for Significance {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl TryFrom<f64> for Significance {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Significance::new(value)
    }
}

impl From<Significance> for f64 {
    fn from(value: Significance) -> f64 {
        value.0
    }
}
