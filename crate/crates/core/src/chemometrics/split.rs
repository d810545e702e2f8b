use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_RATIOS: [f64; 3] = [0.6, 0.2, 0.2];

/// Disjoint calibration / validation / prediction index sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub calibration: Vec<usize>,
    pub validation: Vec<usize>,
    pub prediction: Vec<usize>,
    pub seed: u64,
}

impl SplitIndices {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.calibration.len(), self.validation.len(), self.prediction.len())
    }
}

/// Partition sizes by largest-remainder rounding; ties go to the earlier
/// partition.
pub fn partition_sizes(n: usize, ratios: [f64; 3]) -> Result<[usize; 3]> {
    if ratios.iter().any(|r| !(*r >= 0.0)) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::BadRatios(ratios));
    }
    let exact: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut sizes = [0usize; 3];
    for (s, e) in sizes.iter_mut().zip(&exact) {
        *s = e.floor() as usize;
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    let assigned: usize = sizes.iter().sum();
    for &k in order.iter().take(n.saturating_sub(assigned)) {
        sizes[k] += 1;
    }
    Ok(sizes)
}

/// Seeded uniform shuffle of `0..n`, cut into three parts. Each part is
/// returned in ascending order.
pub fn random_split(n: usize, ratios: [f64; 3], seed: u64) -> Result<SplitIndices> {
    if n < 5 {
        return Err(Error::InvalidArgument(format!("need at least 5 samples to split, got {n}")));
    }
    let sizes = partition_sizes(n, ratios)?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let take = |k: usize, from: usize| {
        let mut part = idx[from..from + sizes[k]].to_vec();
        part.sort_unstable();
        part
    };
    Ok(SplitIndices {
        calibration: take(0, 0),
        validation: take(1, sizes[0]),
        prediction: take(2, sizes[0] + sizes[1]),
        seed,
    })
}
