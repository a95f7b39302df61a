//! Deterministic synthetic rate matrices for tests and demos.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{IngestError, RateMatrix};
use crate::rate::{IncomeType, Rate};

/// Intra-block rates of a planted matrix are drawn from `0..=PLANTED_INTRA_MAX` percent.
pub const PLANTED_INTRA_MAX: u64 = 5;
/// Inter-block rates of a planted matrix are drawn from `PLANTED_INTER_MIN..=30` percent.
pub const PLANTED_INTER_MIN: u64 = 15;
const PLANTED_INTER_MAX: u64 = 30;
const UNIFORM_MAX: u64 = 30;
/// Share of cells forced to zero in the zero-heavy profile, in percent.
const ZERO_SHARE_PERCENT: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticProfile {
    /// Independent whole-percent rates in `0..=30`.
    Uniform,
    /// Contiguous blocks; low rates inside a block, high rates across blocks.
    PlantedCommunities { blocks: usize },
    /// At least 60% of the cells are exactly zero, the rest in `5..=30`.
    ZeroHeavy,
}

/// Block of vertex `v` under the planted profile: contiguous, near-equal blocks.
pub fn planted_block(n: usize, blocks: usize, v: usize) -> usize {
    v * blocks / n
}

pub fn planted_blocks(n: usize, blocks: usize) -> Vec<usize> {
    (0..n).map(|v| planted_block(n, blocks, v)).collect()
}

/// Generates a dividends matrix; relabel with [`RateMatrix::with_income`].
pub fn generate_synthetic(n: usize, seed: u64, profile: SyntheticProfile) -> Result<RateMatrix, IngestError> {
    if n < 2 {
        return Err(IngestError::TooSmall(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let income = IncomeType::Dividends;
    match profile {
        SyntheticProfile::Uniform => {
            RateMatrix::from_fn(n, income, |_, _| Rate::from_percent(rng.gen_range(0..=UNIFORM_MAX)))
        }
        SyntheticProfile::PlantedCommunities { blocks } => {
            let blocks = blocks.clamp(1, n);
            RateMatrix::from_fn(n, income, |i, j| {
                let pct = if planted_block(n, blocks, i) == planted_block(n, blocks, j) {
                    rng.gen_range(0..=PLANTED_INTRA_MAX)
                } else {
                    rng.gen_range(PLANTED_INTER_MIN..=PLANTED_INTER_MAX)
                };
                Rate::from_percent(pct)
            })
        }
        SyntheticProfile::ZeroHeavy => {
            let cells = n * (n - 1);
            let zeros = (cells * ZERO_SHARE_PERCENT).div_ceil(100);
            let mut is_zero: Vec<bool> = (0..cells).map(|k| k < zeros).collect();
            is_zero.shuffle(&mut rng);
            let mut k = 0;
            RateMatrix::from_fn(n, income, |_, _| {
                let z = is_zero[k];
                k += 1;
                if z {
                    Rate::ZERO
                } else {
                    Rate::from_percent(rng.gen_range(1..=6) * 5)
                }
            })
        }
    }
}
