//! Seeded random streams and categorical sampling from joint tables.
//!
//! Stream derivation: trial `t` of a run seeded with `s` uses
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `t`. Streams are
//! independent, so trials can run in any order or in parallel and still
//! produce the same records.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::JointTable;
use crate::error::{Error, Result};

pub type ProtocolRng = ChaCha8Rng;

/// RNG for trial `stream` of a run seeded with `seed`.
pub fn derive_rng(seed: u64, stream: u64) -> ProtocolRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Inverse-CDF sampler over the flattened entries of a table.
#[derive(Debug, Clone)]
pub struct TableSampler {
    shape: Vec<usize>,
    index: WeightedIndex<f64>,
}

impl TableSampler {
    pub fn new(table: &JointTable) -> Result<Self> {
        if !table.is_normalized() {
            return Err(Error::Unnormalized(table.total()));
        }
        let index = WeightedIndex::new(table.probs().iter().copied())
            .map_err(|e| Error::MalformedTable(e.to_string()))?;
        Ok(Self {
            shape: table.shape(),
            index,
        })
    }

    pub fn sample_flat<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index.sample(rng)
    }

    /// One outcome per party.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let mut flat = self.sample_flat(rng);
        let mut out = vec![0; self.shape.len()];
        for axis in (0..self.shape.len()).rev() {
            out[axis] = flat % self.shape[axis];
            flat /= self.shape[axis];
        }
        out
    }
}
