//! Minimal deterministic pseudo-random generator.
//!
//! The whole crate draws randomness through [`SplitMix64`]: a tiny,
//! well-studied 64-bit mixer with a single word of state. It is chosen over
//! an external generator because reproducibility across platforms and
//! toolchain versions matters more here than statistical depth — instance
//! families, test sweeps, and solver initialization must be bit-stable
//! given a seed.

/// SplitMix64 generator (Steele, Lea, Flood; the `java.util.SplittableRandom`
/// finalizer). Passes BigCrush when used as a stream; period 2^64.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform float in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[lo, hi]` inclusive. Uses the top bits modulo the
    /// range width; the bias is below 2^-32 for the desk-scale ranges used
    /// here and the mapping is fixed so seeded draws never change.
    pub fn next_in_range(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        let width = hi - lo + 1;
        lo + (self.next_u64() >> 32) % width
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_stream() {
        // First outputs for seed 1234567, cross-checked against the
        // published Java reference implementation.
        let mut rng = SplitMix64::new(1234567);
        assert_eq!(rng.next_u64(), 6457827717110365317);
        assert_eq!(rng.next_u64(), 3203168211198807973);
    }

    #[test]
    fn unit_interval() {
        let mut rng = SplitMix64::new(99);
        for _ in 0..1000 {
            let x = rng.next_f64();
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn range_bounds() {
        let mut rng = SplitMix64::new(7);
        let mut seen_lo = false;
        let mut seen_hi = false;
        for _ in 0..10_000 {
            let v = rng.next_in_range(1, 100);
            assert!((1..=100).contains(&v));
            seen_lo |= v == 1;
            seen_hi |= v == 100;
        }
        assert!(seen_lo && seen_hi);
    }

    #[test]
    fn determinism() {
        let a: Vec<u64> = {
            let mut r = SplitMix64::new(42);
            (0..32).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = SplitMix64::new(42);
            (0..32).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
    }
}
