use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};

/// Seed for every random stream in the simulator.
///
/// Streams are ChaCha8 keyed by the seed; independent sub-streams (per block,
/// per sweep point) are selected with the ChaCha stream id, so results do
/// not depend on how work is scheduled across threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent generator number `index` under this seed.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }

    /// A new seed derived from `(self, index)`.
    pub fn derive(&self, index: u64) -> RngSeed {
        RngSeed(self.stream(index).next_u64())
    }
}

/// A block of BPSK symbols, each exactly `+1` or `-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolBlock(Vec<i8>);

impl SymbolBlock {
    pub fn new(symbols: Vec<i8>) -> Result<Self> {
        if let Some(bad) = symbols.iter().find(|s| s.abs() != 1) {
            return Err(invalid("symbol", format!("{bad} is not +1 or -1")));
        }
        Ok(Self(symbols))
    }

    /// `n` independent equiprobable symbols drawn from `rng`.
    pub fn random<R: RngCore>(n: usize, rng: &mut R) -> Self {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let bits = rng.next_u64();
            let take = (n - out.len()).min(64);
            out.extend((0..take).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }));
        }
        Self(out)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        f64::from(self.0[i])
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    /// Number of positions where `self` and `other` differ.
    pub fn errors_against(&self, other: &SymbolBlock) -> Result<u64> {
        if self.len() != other.len() {
            return Err(crate::Error::LengthMismatch {
                what: "decisions",
                got: self.len(),
                expected: other.len(),
            });
        }
        Ok(self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count() as u64)
    }
}

/// Draws a block of `n` symbols from `seed`.
pub fn generate_block(n: usize, seed: RngSeed) -> Result<SymbolBlock> {
    if n == 0 {
        return Err(invalid("n", "block length must be >= 1"));
    }
    Ok(SymbolBlock::random(n, &mut seed.rng()))
}

/// Sign detector. A sample of exactly zero decodes to `+1`.
pub fn detect(observations: &[f64]) -> SymbolBlock {
    SymbolBlock(
        observations
            .iter()
            .map(|&y| if y >= 0.0 { 1 } else { -1 })
            .collect(),
    )
}
