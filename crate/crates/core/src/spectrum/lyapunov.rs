use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::iet::{Iet, Permutation};
use crate::renorm::{
    induce_once, step_decision, successor, winner_loser, StepType, DEFAULT_KAPPA_CAP,
};
use crate::scalar::{Scalar, DEFAULT_FLOAT_TOL};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovConfig {
    pub n_blocks: usize,
    /// Zorich blocks between Gram–Schmidt steps.
    pub reorth_period: usize,
    /// Blocks decided in exact arithmetic before switching to normalized floats.
    pub exact_blocks: usize,
    /// Seed of the initial frame.
    pub seed: u64,
    /// `NonConvergence` is raised when the confidence half-width exceeds this.
    pub max_confidence: f64,
    pub kappa_cap: usize,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        LyapunovConfig {
            n_blocks: 10_000,
            reorth_period: 1,
            exact_blocks: 32,
            seed: 0,
            max_confidence: 0.05,
            kappa_cap: DEFAULT_KAPPA_CAP,
        }
    }
}

/// Exponents per Zorich block.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub theta1: f64,
    /// Zero by convention when `d = 2`.
    pub theta2: f64,
    /// Top exponent read off the contraction of the length vector.
    pub theta1_lengths: f64,
    pub blocks_used: usize,
    pub rauzy_steps: usize,
    pub renormalization_period: usize,
    /// Half-width of the spread of the running estimates over the last quarter of the run.
    pub confidence: f64,
}

impl LyapunovEstimate {
    /// `θ₂/θ₁`, the deviation exponent.
    pub fn ratio(&self) -> f64 {
        self.theta2 / self.theta1
    }
}

pub fn lyapunov_exponents<S: Scalar>(
    iet: &Iet<S>,
    n_blocks: usize,
    reorth_period: usize,
) -> Result<LyapunovEstimate> {
    lyapunov_with(
        iet,
        &LyapunovConfig {
            n_blocks,
            reorth_period,
            ..Default::default()
        },
    )
}

/// Source of Rauzy decisions: exact induction first, then normalized floats.
enum Driver<S> {
    Exact(Iet<S>),
    Float { perm: Permutation, lambda: Vec<f64> },
}

impl<S: Scalar> Driver<S> {
    fn decide(&self, step: usize) -> Result<StepType> {
        match self {
            Driver::Exact(t) => Ok(step_decision(t, DEFAULT_FLOAT_TOL, step)?.step_type),
            Driver::Float { perm, lambda } => float_decision(perm, lambda, step),
        }
    }

    /// Applies one step; returns `(winner, loser)`.
    fn advance(&mut self, step: usize) -> Result<(usize, usize)> {
        match self {
            Driver::Exact(t) => {
                let (next, dec) = induce_once(t, DEFAULT_FLOAT_TOL, step)?;
                *t = next;
                Ok((dec.winner, dec.loser))
            }
            Driver::Float { perm, lambda } => {
                let ty = float_decision(perm, lambda, step)?;
                let (w, l) = winner_loser(perm, ty);
                lambda[w] -= lambda[l];
                *perm = successor(perm, ty);
                Ok((w, l))
            }
        }
    }

    /// Log of the total length, after which the lengths are rescaled to total 1.
    fn renormalize(&mut self) -> f64 {
        match self {
            Driver::Exact(t) => {
                let total = t.total_length().to_f64();
                *t = t.normalized();
                total.ln()
            }
            Driver::Float { lambda, .. } => {
                let total: f64 = lambda.iter().sum();
                lambda.iter_mut().for_each(|l| *l /= total);
                total.ln()
            }
        }
    }

    fn to_float(&self) -> Self {
        match self {
            Driver::Exact(t) => Driver::Float {
                perm: t.perm().clone(),
                lambda: t.lambda().iter().map(|l| l.to_f64()).collect(),
            },
            Driver::Float { perm, lambda } => Driver::Float {
                perm: perm.clone(),
                lambda: lambda.clone(),
            },
        }
    }
}

fn float_decision(perm: &Permutation, lambda: &[f64], step: usize) -> Result<StepType> {
    let d = perm.d();
    let top = lambda[perm.top_letter(d - 1)];
    let bottom = lambda[perm.bottom_letter(d - 1)];
    if (top - bottom).abs() < DEFAULT_FLOAT_TOL * lambda.iter().sum::<f64>() {
        return Err(Error::DegenerateLengths { step });
    }
    Ok(if top > bottom {
        StepType::Top
    } else {
        StepType::Bottom
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn half_spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::MIN, f64::max);
    let min = v.iter().cloned().fold(f64::MAX, f64::min);
    if v.is_empty() {
        0.0
    } else {
        (max - min) / 2.0
    }
}

/// Top two exponents of the height cocycle (`q_l += q_w` at each Rauzy step)
/// from the growth of a Gram–Schmidt frame, per Zorich block.
pub fn lyapunov_with<S: Scalar>(iet: &Iet<S>, cfg: &LyapunovConfig) -> Result<LyapunovEstimate> {
    if cfg.n_blocks == 0 || cfg.reorth_period == 0 {
        return Err(Error::BadConfig(
            "n_blocks and reorth_period must be positive".into(),
        ));
    }
    let d = iet.d();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut v1: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..1.5)).collect();
    let mut v2: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut driver = Driver::Exact(iet.normalized());
    let (mut log1, mut log2, mut log_len) = (0.0, 0.0, 0.0);
    let mut trace1 = Vec::new();
    let mut trace2 = Vec::new();
    let mut step = 0usize;
    for block in 1..=cfg.n_blocks {
        if block == cfg.exact_blocks + 1 {
            driver = driver.to_float();
        }
        let ty = driver.decide(step)?;
        let mut kappa = 0;
        loop {
            let (w, l) = driver.advance(step)?;
            v1[l] += v1[w];
            v2[l] += v2[w];
            step += 1;
            kappa += 1;
            match driver.decide(step) {
                Ok(next) if next == ty => {
                    if kappa == cfg.kappa_cap {
                        return Err(Error::KappaCapExceeded { cap: cfg.kappa_cap });
                    }
                }
                Ok(_) => break,
                Err(e) => return Err(e),
            }
        }
        log_len += driver.renormalize();
        if block % cfg.reorth_period == 0 || block == cfg.n_blocks {
            let n1 = dot(&v1, &v1).sqrt();
            v1.iter_mut().for_each(|x| *x /= n1);
            let proj = dot(&v2, &v1);
            v2.iter_mut().zip(&v1).for_each(|(x, y)| *x -= proj * y);
            let n2 = dot(&v2, &v2).sqrt();
            v2.iter_mut().for_each(|x| *x /= n2);
            log1 += n1.ln();
            log2 += n2.ln();
            if block * 4 > cfg.n_blocks * 3 {
                trace1.push(log1 / block as f64);
                trace2.push(log2 / block as f64);
            }
        }
    }
    let blocks = cfg.n_blocks as f64;
    let (theta2, spread2) = if d == 2 {
        (0.0, 0.0)
    } else {
        (log2 / blocks, half_spread(&trace2))
    };
    let est = LyapunovEstimate {
        theta1: log1 / blocks,
        theta2,
        theta1_lengths: -log_len / blocks,
        blocks_used: cfg.n_blocks,
        rauzy_steps: step,
        renormalization_period: cfg.reorth_period,
        confidence: half_spread(&trace1).max(spread2),
    };
    if est.confidence > cfg.max_confidence {
        return Err(Error::NonConvergence {
            confidence: est.confidence,
            threshold: cfg.max_confidence,
        });
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iet::{sample_iet, SampleConfig};
    use crate::scalar::{QuadSqrt5, Rational};

    #[test]
    fn golden_top_exponent_is_log_phi() {
        let cfg = LyapunovConfig {
            n_blocks: 400,
            exact_blocks: 400,
            ..Default::default()
        };
        let est = lyapunov_with(&Iet::<QuadSqrt5>::golden(), &cfg).unwrap();
        let log_phi = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert_eq!(est.theta2, 0.0);
        assert_eq!(est.rauzy_steps, 400);
        assert!((est.theta1 - log_phi).abs() < 5e-3, "{}", est.theta1);
        assert!(
            (est.theta1_lengths - log_phi).abs() < 1e-9,
            "{}",
            est.theta1_lengths
        );
    }

    #[test]
    fn self_similar_exponents_match_loop_eigenvalues() {
        let t = Iet::self_similar_reversal4();
        let cfg = LyapunovConfig {
            n_blocks: 2000,
            exact_blocks: 2000,
            ..Default::default()
        };
        let est = lyapunov_with(&t, &cfg).unwrap();
        let log_phi = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        // per loop: 16 Rauzy steps, 10 Zorich blocks, growth φ⁶ and φ²
        assert_eq!(est.rauzy_steps, 3200);
        assert!((est.theta1 - 0.6 * log_phi).abs() < 2e-3, "{est:?}");
        assert!((est.theta2 - 0.2 * log_phi).abs() < 2e-3, "{est:?}");
        assert!((est.theta1_lengths - 0.6 * log_phi).abs() < 1e-9, "{est:?}");
    }

    #[test]
    fn reversal_four_has_a_gap() {
        let t: Iet<Rational> = sample_iet(1, &Permutation::reversal(4), &SampleConfig::default());
        let est = lyapunov_exponents(&t, 3000, 1).unwrap();
        assert!(est.theta2 > 0.0 && est.theta2 < est.theta1);
        assert!((est.theta1 - est.theta1_lengths).abs() < 0.1 * est.theta1);
    }

    #[test]
    fn rejects_zero_blocks() {
        let t: Iet<f64> = Iet::golden_f64();
        assert_eq!(
            lyapunov_exponents(&t, 0, 1).unwrap_err().code(),
            "BAD_CONFIG"
        );
    }
}
