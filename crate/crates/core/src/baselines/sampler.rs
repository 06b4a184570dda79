//! Random pairs of distinct coordinates.
//!
//! Unordered pairs are numbered in the triangular order
//! `(1,0), (2,0), (2,1), (3,0), …` (0-based, larger index first), so that the
//! integer `k` maps to the pair in closed form.

use rand::Rng;

/// Largest dimension accepted by the weighted sampler (its table is `O(n²)`).
pub const WEIGHTED_MAX_DIM: usize = 20_000;

/// Number of unordered pairs of distinct indices among `n`.
pub fn pair_count(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// Decodes `k ∈ {0, …, n(n−1)/2 − 1}` to the pair `(i, j)`, `i > j`.
///
/// In 1-based terms `i = 1 + ⌊(√(1+8k)+1)/2⌋` and
/// `j = 1 + k − (i−2)(i−1)/2`; the float estimate of `i` is corrected with
/// integer arithmetic so large `k` stay exact.
pub fn decode_pair(k: u64) -> (usize, usize) {
    let mut i1 = 1 + (((1.0 + 8.0 * k as f64).sqrt() + 1.0) / 2.0).floor() as u64;
    let tri = |i1: u64| (i1 - 2) * (i1 - 1) / 2;
    while i1 > 2 && tri(i1) > k {
        i1 -= 1;
    }
    while tri(i1 + 1) <= k {
        i1 += 1;
    }
    let j1 = 1 + k - tri(i1);
    ((i1 - 1) as usize, (j1 - 1) as usize)
}

/// Inverse of [`decode_pair`] for `i ≠ j` in either order.
pub fn encode_pair(i: usize, j: usize) -> u64 {
    let (hi, lo) = if i > j { (i as u64, j as u64) } else { (j as u64, i as u64) };
    hi * (hi - 1) / 2 + lo
}

#[derive(Debug, Clone, PartialEq)]
pub enum PairSampler {
    Uniform { n: usize },
    /// Pair `(i,j)` drawn with probability proportional to `1/L_i + 1/L_j`.
    LipschitzWeighted { n: usize, cumulative: Vec<f64> },
}

impl PairSampler {
    pub fn uniform(n: usize) -> Self {
        assert!(n >= 2, "need at least two coordinates");
        PairSampler::Uniform { n }
    }

    pub fn lipschitz_weighted(lipschitz: &[f64]) -> Result<Self, String> {
        let n = lipschitz.len();
        if n < 2 {
            return Err("need at least two coordinates".into());
        }
        if n > WEIGHTED_MAX_DIM {
            return Err(format!("weighted sampler supports n <= {WEIGHTED_MAX_DIM}, got {n}"));
        }
        if lipschitz.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err("Lipschitz constants must be positive and finite".into());
        }
        let mut cumulative = Vec::with_capacity(pair_count(n) as usize);
        let mut acc = 0.0;
        for i in 1..n {
            for j in 0..i {
                acc += 1.0 / lipschitz[i] + 1.0 / lipschitz[j];
                cumulative.push(acc);
            }
        }
        Ok(PairSampler::LipschitzWeighted { n, cumulative })
    }

    pub fn dim(&self) -> usize {
        match self {
            PairSampler::Uniform { n } | PairSampler::LipschitzWeighted { n, .. } => *n,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        match self {
            PairSampler::Uniform { n } => decode_pair(rng.random_range(0..pair_count(*n))),
            PairSampler::LipschitzWeighted { cumulative, .. } => {
                let total = *cumulative.last().expect("at least one pair");
                let u = rng.random::<f64>() * total;
                let k = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
                decode_pair(k as u64)
            }
        }
    }

    /// Probability of the unordered pair `{i, j}`.
    pub fn probability(&self, i: usize, j: usize) -> f64 {
        match self {
            PairSampler::Uniform { n } => 1.0 / pair_count(*n) as f64,
            PairSampler::LipschitzWeighted { cumulative, .. } => {
                let k = encode_pair(i, j) as usize;
                let prev = if k == 0 { 0.0 } else { cumulative[k - 1] };
                (cumulative[k] - prev) / cumulative.last().expect("at least one pair")
            }
        }
    }
}
