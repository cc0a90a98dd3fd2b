//! Hypothesized cell probabilities and observed counts.

use alloc::format;
use alloc::vec::Vec;

// Unused when std is linked into the build, which supplies inherent float methods.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::rotations::UnitVector;

/// Tolerance on `|Σ p_i − 1|` accepted by [`DiscreteModel::new`].
pub const PROB_SUM_TOL: f64 = 1e-9;

/// 64-bit FNV-1a over the bit patterns of `values`. Used to bind derived
/// vectors to the model or anchor that produced them.
pub fn fingerprint(values: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_bits().to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Cell probabilities `p_1..p_m`, all positive, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteModel {
    probs: Vec<f64>,
}

impl DiscreteModel {
    /// Validates `probs` and rescales them so the sum is one to working
    /// precision (the input may be off by at most `1e-9`).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::TooFewCells(probs.len()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p > 0.0))
        {
            return Err(Error::InvalidModel(format!(
                "cell {} has probability {p}",
                i + 1
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidModel(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self {
            probs: probs.into_iter().map(|p| p / total).collect(),
        })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(alloc::vec![1.0 / m as f64; m])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `√p` as a unit vector.
    pub fn sqrt_probs(&self) -> UnitVector {
        UnitVector::normalized(self.probs.iter().map(|p| p.sqrt()).collect())
            .expect("valid model has a nonzero root vector")
    }

    pub fn fingerprint(&self) -> u64 {
        fingerprint(&self.probs)
    }

    /// `min_i n p_i`
    pub fn min_expected(&self, n: u64) -> f64 {
        self.probs
            .iter()
            .fold(f64::INFINITY, |a, p| a.min(n as f64 * p))
    }
}

/// Observed cell frequencies `ν_1..ν_m` with `n = Σ ν_i > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleCounts {
    counts: Vec<u64>,
    n: u64,
}

impl SampleCounts {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::TooFewCells(counts.len()));
        }
        let n = counts
            .iter()
            .try_fold(0u64, |acc, c| acc.checked_add(*c))
            .ok_or_else(|| Error::InvalidCounts("total count overflows".into()))?;
        if n == 0 {
            return Err(Error::InvalidCounts("sample is empty".into()));
        }
        Ok(Self { counts, n })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}
