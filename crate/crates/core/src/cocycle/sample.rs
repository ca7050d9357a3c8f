use num_bigint::BigInt;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::StepCocycle;
use crate::error::{Error, Result};
use crate::iet::{sample_simplex, SampleConfig};
use crate::scalar::{Rational, Scalar};

/// Maximum number of value draws before giving up.
pub const REJECTION_BUDGET: usize = 10_000;

const VALUE_BITS: u32 = 62;

/// Samples `f ∈ C_{m,M}`: lengths uniform on the simplex, values uniform in
/// `[−M, M]^{m+1}` projected onto `⟨lengths, values⟩ = 0` along the lengths
/// vector, and rejected while some value exceeds `M`. Deterministic per seed.
pub fn sample_cocycle<S: Scalar>(seed: u64, m: usize, bound: &S) -> Result<StepCocycle<S>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lengths: Vec<S> = sample_simplex(&mut rng, m + 1, &SampleConfig::default());
    let norm2 = lengths
        .iter()
        .fold(S::zero(), |a, l| a + l.clone() * l.clone());
    let scale = BigInt::from(1u64 << VALUE_BITS);
    for _ in 0..REJECTION_BUDGET {
        let raw: Vec<S> = (0..=m)
            .map(|_| {
                let k: i64 = rng.gen_range(-(1i64 << VALUE_BITS)..=(1i64 << VALUE_BITS));
                S::from_rational(&Rational::new(BigInt::from(k), scale.clone())) * bound.clone()
            })
            .collect();
        let dot = lengths
            .iter()
            .zip(&raw)
            .fold(S::zero(), |a, (l, v)| a + l.clone() * v.clone());
        let c = dot / norm2.clone();
        let values: Vec<S> = raw
            .iter()
            .zip(&lengths)
            .map(|(v, l)| v.clone() - c.clone() * l.clone())
            .collect();
        if values.iter().all(|v| v.abs() <= *bound) {
            return StepCocycle::new(lengths, values, bound.clone());
        }
    }
    Err(Error::RejectionBudgetExceeded {
        attempts: REJECTION_BUDGET,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_satisfy_constraints_exactly_and_are_reproducible() {
        let one = Rational::from_i64(1);
        for seed in 0..50 {
            let f = sample_cocycle::<Rational>(seed, 2, &one).unwrap();
            let total: Rational = f.segment_lengths().iter().sum();
            assert_eq!(total, one);
            let mean: Rational = f
                .segment_lengths()
                .iter()
                .zip(f.values())
                .map(|(l, v)| l * v)
                .sum();
            assert_eq!(mean, Rational::from_i64(0));
            assert!(f.values().iter().all(|v| v.abs() <= one));
            assert_eq!(f, sample_cocycle::<Rational>(seed, 2, &one).unwrap());
        }
    }

    #[test]
    fn dense_jumps_for_almost_every_sample() {
        let one = Rational::from_i64(1);
        let dense = (0..1000u64)
            .filter(|&s| {
                sample_cocycle::<Rational>(s, 2, &one)
                    .unwrap()
                    .jumps()
                    .dense
            })
            .count();
        assert!(dense >= 990, "{dense} of 1000 samples flagged dense");
    }

    #[test]
    fn float_samples_satisfy_constraints() {
        for seed in 0..20 {
            let f = sample_cocycle::<f64>(seed, 3, &1.0).unwrap();
            let mean: f64 = f
                .segment_lengths()
                .iter()
                .zip(f.values())
                .map(|(l, v)| l * v)
                .sum();
            assert!(mean.abs() < 1e-12);
            assert!(f.values().iter().all(|v| v.abs() <= 1.0));
        }
    }
}
