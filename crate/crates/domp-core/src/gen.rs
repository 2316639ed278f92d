//! Seeded instance generation.
//!
//! Costs are integer draws from `[1, 100]` off the diagonal (the diagonal
//! stays zero), produced by a fixed SplitMix64 stream so a seed identifies
//! an instance forever. Weight vectors come from the classical presets:
//! all-ones (sum of costs), max-only (worst served client), a trimmed mean
//! ignoring the cheapest and the most expensive clients, or a custom
//! vector.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rng::SplitMix64;

/// Weight-vector presets for [`gen_instance`].
#[derive(Debug, Clone, PartialEq)]
pub enum WeightPreset {
    /// All ones: minimizes the plain sum of allocation costs.
    Median,
    /// `(0, …, 0, 1)`: minimizes the largest allocation cost.
    Center,
    /// Zeros on the first `k1` and the last `k2` sorted positions, ones
    /// between: a trimmed mean that ignores the cheapest `k1` and the most
    /// expensive `k2` clients. Requires `k1 + k2 <= n`.
    Trimmed(usize, usize),
    /// A caller-supplied weight vector of length `n`.
    Custom(Vec<f64>),
}

impl WeightPreset {
    /// Expands the preset into an explicit length-`n` weight vector.
    pub fn weights(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            WeightPreset::Median => Ok(vec![1.0; n]),
            WeightPreset::Center => {
                let mut w = vec![0.0; n];
                w[n - 1] = 1.0;
                Ok(w)
            }
            WeightPreset::Trimmed(k1, k2) => {
                if k1 + k2 > n {
                    return Err(Error::InvalidArgument(format!(
                        "trimmed preset needs k1 + k2 <= n, got {k1} + {k2} > {n}"
                    )));
                }
                let mut w = vec![0.0; n];
                for slot in w.iter_mut().take(n - k2).skip(*k1) {
                    *slot = 1.0;
                }
                Ok(w)
            }
            WeightPreset::Custom(v) => {
                if v.len() != n {
                    return Err(Error::InvalidArgument(format!(
                        "custom weights have length {}, expected {n}",
                        v.len()
                    )));
                }
                if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(Error::InvalidArgument(String::from(
                        "custom weights must be finite and nonnegative",
                    )));
                }
                Ok(v.clone())
            }
        }
    }
}

/// Generates a reproducible instance: off-diagonal costs are uniform
/// integers in `[1, 100]` drawn row-major from a SplitMix64 stream seeded
/// with `seed`; the diagonal is zero; weights come from `preset`.
pub fn gen_instance(n: usize, p: usize, seed: u64, preset: &WeightPreset) -> Result<Instance> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n must be at least 2, got {n}")));
    }
    let mut rng = SplitMix64::new(seed);
    let mut costs = vec![0.0; n * n];
    for j in 0..n {
        for l in 0..n {
            if j != l {
                costs[j * n + l] = rng.next_in_range(1, 100) as f64;
            }
        }
    }
    Instance::new(n, p, preset.weights(n)?, costs, None, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_vectors() {
        assert_eq!(WeightPreset::Median.weights(3).unwrap(), [1.0, 1.0, 1.0]);
        assert_eq!(WeightPreset::Center.weights(4).unwrap(), [0.0, 0.0, 0.0, 1.0]);
        assert_eq!(
            WeightPreset::Trimmed(1, 1).weights(4).unwrap(),
            [0.0, 1.0, 1.0, 0.0]
        );
        assert!(WeightPreset::Trimmed(3, 2).weights(4).is_err());
        assert!(WeightPreset::Custom(vec![1.0, 2.0]).weights(3).is_err());
    }

    #[test]
    fn generator_is_deterministic_and_valid() {
        let a = gen_instance(5, 2, 424242, &WeightPreset::Median).unwrap();
        let b = gen_instance(5, 2, 424242, &WeightPreset::Median).unwrap();
        assert_eq!(a, b);
        for j in 0..5 {
            for l in 0..5 {
                let c = a.cost(j, l);
                if j == l {
                    assert_eq!(c, 0.0);
                } else {
                    assert!((1.0..=100.0).contains(&c));
                    assert_eq!(c, c.trunc());
                }
            }
        }
    }

    #[test]
    fn different_seeds_differ() {
        let a = gen_instance(4, 1, 1, &WeightPreset::Median).unwrap();
        let b = gen_instance(4, 1, 2, &WeightPreset::Median).unwrap();
        assert_ne!(a, b);
    }
}
