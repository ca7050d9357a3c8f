use num_bigint::{BigInt, BigUint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Iet, Permutation};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleConfig {
    /// Exact samples are multiples of `2^-denominator_bits`.
    pub denominator_bits: u32,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            denominator_bits: 192,
        }
    }
}

fn random_below_pow2<R: Rng>(rng: &mut R, bits: u32) -> BigUint {
    let words = (bits as usize).div_ceil(32);
    let digits: Vec<u32> = (0..words).map(|_| rng.gen()).collect();
    let mut v = BigUint::new(digits);
    let excess = words as u32 * 32 - bits;
    if excess > 0 {
        v >>= excess as usize;
    }
    v
}

/// Uniform point on the open simplex with `k` coordinates, via sorted-uniform gaps.
///
/// Exact scalars get distinct cut points on the grid `2^-bits`; floats use `f64` uniforms.
pub fn sample_simplex<S: Scalar, R: Rng>(rng: &mut R, k: usize, cfg: &SampleConfig) -> Vec<S> {
    assert!(k >= 1);
    if S::EXACT {
        let den = BigInt::from(1) << cfg.denominator_bits as usize;
        let mut cuts: Vec<BigUint> = Vec::with_capacity(k - 1);
        while cuts.len() < k - 1 {
            let c = random_below_pow2(rng, cfg.denominator_bits);
            if c != BigUint::from(0u32) && !cuts.contains(&c) {
                cuts.push(c);
            }
        }
        cuts.sort();
        let mut prev = BigInt::from(0);
        let mut out = Vec::with_capacity(k);
        for c in cuts
            .into_iter()
            .map(BigInt::from)
            .chain(std::iter::once(den.clone()))
        {
            out.push(S::from_rational(&Rational::new(&c - &prev, den.clone())));
            prev = c;
        }
        out
    } else {
        loop {
            let mut cuts: Vec<f64> = (0..k - 1).map(|_| rng.gen::<f64>()).collect();
            cuts.sort_by(f64::total_cmp);
            let mut out = Vec::with_capacity(k);
            let mut prev = 0.0;
            for c in cuts.into_iter().chain(std::iter::once(1.0)) {
                out.push(c - prev);
                prev = c;
            }
            if out.iter().all(|v| *v > 0.0) {
                let total: f64 = out.iter().sum();
                return out.into_iter().map(|v| S::from_f64(v / total)).collect();
            }
        }
    }
}

/// Normalized IET with lengths uniform on the simplex; deterministic per seed.
pub fn sample_iet<S: Scalar>(seed: u64, perm: &Permutation, cfg: &SampleConfig) -> Iet<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambda = sample_simplex::<S, _>(&mut rng, perm.d(), cfg);
    Iet::from_parts(perm.clone(), lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_normalized() {
        let p = Permutation::reversal(4);
        let a: Iet<Rational> = sample_iet(11, &p, &SampleConfig::default());
        let b: Iet<Rational> = sample_iet(11, &p, &SampleConfig::default());
        assert_eq!(a, b);
        assert_eq!(*a.total_length(), Rational::one());
        assert!(a.lambda().iter().all(|l| *l > Rational::zero()));
        let c: Iet<Rational> = sample_iet(12, &p, &SampleConfig::default());
        assert_ne!(a, c);
    }

    #[test]
    fn float_samples_sum_to_one() {
        let t: Iet<f64> = sample_iet(5, &Permutation::reversal(5), &SampleConfig::default());
        assert!((t.total_length() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_mean_within_three_standard_errors() {
        // Dirichlet(1,..,1) marginal: mean 1/d, variance (d-1)/(d^2 (d+1)).
        let d = 4usize;
        let n = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut sums = vec![0.0; d];
        for _ in 0..n {
            let v: Vec<f64> = sample_simplex(&mut rng, d, &SampleConfig::default());
            for (s, x) in sums.iter_mut().zip(v) {
                *s += x;
            }
        }
        let var = (d as f64 - 1.0) / ((d * d) as f64 * (d as f64 + 1.0));
        let se = (var / n as f64).sqrt();
        for s in sums {
            assert!((s / n as f64 - 0.25).abs() < 3.0 * se);
        }
    }

    #[test]
    fn exact_simplex_on_small_grid_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let v: Vec<Rational> = sample_simplex(
                &mut rng,
                5,
                &SampleConfig {
                    denominator_bits: 8,
                },
            );
            assert!(v.iter().all(|x| *x > Rational::zero()));
            assert_eq!(
                v.into_iter().fold(Rational::zero(), |a, b| a + b),
                Rational::one()
            );
        }
    }
}
