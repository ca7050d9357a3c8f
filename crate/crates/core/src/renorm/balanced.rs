//! The balanced domain: a positive loop `γ` with entries at least 2, its
//! no-return extension `γ̃`, and a sampled check of the properties that make
//! returns to `Δ_γ̃` balanced times.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::induction::{delta_membership, find_path_where, InductionState};
use super::matrix::ser_bigint;
use super::path::{extend_no_return, RauzyPath};
use super::IntMatrix;
use crate::error::{Error, Result};
use crate::iet::{sample_simplex, Iet, Permutation, SampleConfig};
use crate::scalar::{Scalar, DEFAULT_FLOAT_TOL};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalancedConfig {
    /// Balance parameter of the neighbourhood `U`.
    pub nu: f64,
    /// Rauzy steps searched for the loop `γ`.
    pub budget: usize,
    /// The loop must be longer than this.
    pub min_loop_length: usize,
    /// Members of `Δ_γ̃` sampled for the property report.
    pub samples: usize,
    pub seed: u64,
    /// Raise `PreconditionU` when the lengths are outside `U`, and require `Δ_γ ⊆ U`.
    pub enforce_u: bool,
    /// Grid of the sampled simplex coordinates.
    pub denominator_bits: u32,
}

impl Default for BalancedConfig {
    fn default() -> Self {
        BalancedConfig {
            nu: 0.3,
            budget: 10_000,
            min_loop_length: 1,
            samples: 100,
            seed: 0,
            enforce_u: true,
            denominator_bits: 64,
        }
    }
}

/// Where the lengths and the simplex `Δ_γ` sit relative to `U`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UCheck {
    pub lambda_in_u: bool,
    pub delta_in_u: bool,
    pub enforced: bool,
}

/// Failure counts of the sampled properties over members of `Δ_γ̃`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BulletReport {
    pub samples: usize,
    pub entries_at_least_two: bool,
    /// Samples hitting a tie within the checked horizon.
    pub degenerate: usize,
    /// Samples whose first `3ℓ` steps do not follow `γ∗γ∗γ`.
    pub not_following_gamma_cubed: usize,
    /// Samples where the `iL`-th Zorich step is not the `iℓ`-th Rauzy step, `i = 1, 2, 3`.
    pub zorich_rauzy_mismatch: usize,
    /// Samples returning to `Δ_γ̃` after `i` Zorich steps for some `0 < i < 3L`.
    pub early_return: usize,
    /// Samples outside `U` (normalized) at Rauzy steps `0, ℓ, 2ℓ`.
    pub outside_u: usize,
    /// Samples with height ratio at least `C_γ` at Rauzy steps `ℓ, 2ℓ, 3ℓ`.
    pub heights_unbalanced: usize,
    /// Samples with length ratio at least `1 + ν` at Rauzy steps `0, ℓ, 2ℓ`.
    pub lengths_unbalanced: usize,
}

impl BulletReport {
    pub fn total_failures(&self) -> usize {
        self.degenerate
            + self.not_following_gamma_cubed
            + self.zorich_rauzy_mismatch
            + self.early_return
            + self.outside_u
            + self.heights_unbalanced
            + self.lengths_unbalanced
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalancedDomain {
    pub gamma: RauzyPath,
    pub gamma_tilde: RauzyPath,
    /// `ℓ = |γ|` in Rauzy steps.
    pub loop_len: usize,
    /// `L`: Zorich steps of `γ`.
    pub zorich_len: usize,
    #[serde(serialize_with = "ser_bigint")]
    pub c_gamma: BigInt,
    #[serde(serialize_with = "ser_bigint")]
    pub a_gamma_norm: BigInt,
    pub nu: f64,
    pub u_check: UCheck,
    pub report: BulletReport,
}

impl BalancedDomain {
    pub fn a_gamma(&self) -> &IntMatrix {
        self.gamma.matrix()
    }

    /// `C_Δ = d·C_γ²·‖A_γ‖³`.
    pub fn c_delta(&self) -> BigInt {
        let d = BigInt::from(self.gamma.d());
        d * &self.c_gamma * &self.c_gamma * self.a_gamma_norm.pow(3)
    }

    /// `σ = 1/(10·d·C_γ)`.
    pub fn sigma(&self) -> f64 {
        1.0 / (10.0 * self.gamma.d() as f64 * self.c_gamma.to_f64().unwrap_or(f64::INFINITY))
    }

    /// `C = C_γ²·C_Δ·‖A_γ‖²/d`.
    pub fn density_constant(&self) -> f64 {
        let num = &self.c_gamma
            * &self.c_gamma
            * self.c_delta()
            * &self.a_gamma_norm
            * &self.a_gamma_norm;
        num.to_f64().unwrap_or(f64::INFINITY) / self.gamma.d() as f64
    }
}

/// Normalized lengths within `ν/(2d)` of each other and increasing along the top row.
pub fn lambda_in_u<S: Scalar>(perm: &Permutation, lambda: &[S], nu: f64) -> bool {
    let total = lambda.iter().fold(S::zero(), |a, l| a + l.clone());
    let norm: Vec<S> = lambda.iter().map(|l| l.clone() / total.clone()).collect();
    spread_within(&norm, nu / (2.0 * perm.d() as f64)) && increasing_along_top(perm, &norm)
}

fn spread_within<S: Scalar>(v: &[S], bound: f64) -> bool {
    let max = v.iter().fold(&v[0], |a, b| S::max_of(a, b));
    let min = v.iter().fold(&v[0], |a, b| S::min_of(a, b));
    (max.clone() - min.clone()) <= S::from_f64(bound)
}

fn increasing_along_top<S: Scalar>(perm: &Permutation, v: &[S]) -> bool {
    perm.top_order().windows(2).all(|w| v[w[0]] < v[w[1]])
}

/// `Δ_γ ⊆ U`, tested on the normalized columns of `A_γ` (both conditions are convex).
pub fn delta_in_u(path: &RauzyPath, nu: f64) -> bool {
    let Some(perm) = path.start() else {
        return false;
    };
    let m = path.matrix();
    let d = m.d();
    (0..d).all(|c| {
        let col: Vec<crate::scalar::Rational> = (0..d)
            .map(|r| crate::scalar::Rational::from_bigint(m.get(r, c)))
            .collect();
        lambda_in_u(perm, &col, nu)
    })
}

/// Finds `γ` on the orbit of `iet`, builds `γ̃ = extend_no_return(γ∗γ∗γ∗φ)` with
/// `φ` the first arrow of `γ`, and samples `Δ_γ̃` for the property report.
pub fn build_balanced_domain<S: Scalar>(
    iet: &Iet<S>,
    cfg: &BalancedConfig,
) -> Result<BalancedDomain> {
    let lambda_ok = lambda_in_u(iet.perm(), iet.lambda(), cfg.nu);
    if cfg.enforce_u && !lambda_ok {
        let norm: Vec<f64> = iet
            .lambda()
            .iter()
            .map(|l| l.to_f64() / iet.total_length().to_f64())
            .collect();
        let spread = norm.iter().cloned().fold(f64::MIN, f64::max)
            - norm.iter().cloned().fold(f64::MAX, f64::min);
        return Err(Error::PreconditionU {
            spread: format!("{spread}"),
            bound: format!("{}", cfg.nu / (2.0 * iet.d() as f64)),
        });
    }
    let nu = cfg.nu;
    let enforce = cfg.enforce_u;
    let gamma = find_path_where(iet, cfg.min_loop_length, cfg.budget, |p| {
        p.matrix().min_entry() >= BigInt::from(2) && (!enforce || delta_in_u(p, nu))
    })
    .map_err(|_| Error::NotFoundWithinBudget {
        what: "loop path with entries ≥ 2".into(),
        stats: format!("{} Rauzy steps examined", cfg.budget),
    })?;
    let gamma_cubed = gamma.concat(&gamma)?.concat(&gamma)?;
    let with_first = gamma_cubed.concat(&gamma.prefix(1))?;
    let gamma_tilde = extend_no_return(&with_first)?;
    let c_gamma = gamma.matrix().entry_sum();
    let mut domain = BalancedDomain {
        loop_len: gamma.len(),
        zorich_len: gamma.type_runs(),
        a_gamma_norm: gamma.matrix().norm(),
        c_gamma,
        nu,
        u_check: UCheck {
            lambda_in_u: lambda_ok,
            delta_in_u: delta_in_u(&gamma, nu),
            enforced: enforce,
        },
        report: BulletReport::default(),
        gamma,
        gamma_tilde,
    };
    domain.report = sample_report::<S>(&domain, &gamma_cubed, cfg)?;
    Ok(domain)
}

/// Point of `Δ_path` with barycentric weights `u` on the columns of `A_path`.
pub fn simplex_member<S: Scalar>(path: &RauzyPath, u: &[S]) -> Result<Iet<S>> {
    let m = path.matrix();
    let d = m.d();
    let lambda: Vec<S> = (0..d)
        .map(|r| {
            (0..d).fold(S::zero(), |acc, c| {
                acc + S::from_bigint(m.get(r, c)) * u[c].clone()
            })
        })
        .collect();
    let perm = path.start().ok_or(Error::BrokenChain { index: 0 })?.clone();
    Iet::new(perm, lambda, true)
}

fn sample_report<S: Scalar>(
    dom: &BalancedDomain,
    gamma_cubed: &RauzyPath,
    cfg: &BalancedConfig,
) -> Result<BulletReport> {
    let d = dom.gamma.d();
    let ell = dom.loop_len;
    let big_l = dom.zorich_len;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let simplex_cfg = SampleConfig {
        denominator_bits: cfg.denominator_bits,
    };
    let c_gamma = S::from_bigint(&dom.c_gamma);
    let ratio_cap = S::from_f64(1.0 + cfg.nu);
    let mut rep = BulletReport {
        samples: cfg.samples,
        entries_at_least_two: dom.gamma.matrix().min_entry() >= BigInt::from(2),
        ..Default::default()
    };
    for _ in 0..cfg.samples {
        let u: Vec<S> = sample_simplex(&mut rng, d, &simplex_cfg);
        let member = simplex_member(&dom.gamma_tilde, &u)?;
        match delta_membership(&member, gamma_cubed) {
            Ok(true) => {}
            Ok(false) => rep.not_following_gamma_cubed += 1,
            Err(_) => {
                rep.degenerate += 1;
                continue;
            }
        }
        let mut state = InductionState::new(member.clone()).with_tolerance(DEFAULT_FLOAT_TOL);
        let mut rauzy_at_block = vec![0usize];
        let mut early = false;
        let mut failed = false;
        for i in 1..=3 * big_l {
            if state.advance_zorich(usize::MAX).is_err() {
                failed = true;
                break;
            }
            rauzy_at_block.push(state.step());
            if i < 3 * big_l
                && matches!(
                    delta_membership(state.current(), &dom.gamma_tilde),
                    Ok(true)
                )
            {
                early = true;
            }
        }
        if failed {
            rep.degenerate += 1;
            continue;
        }
        if early {
            rep.early_return += 1;
        }
        if (1..=3).any(|i| rauzy_at_block[i * big_l] != i * ell) {
            rep.zorich_rauzy_mismatch += 1;
        }
        // lengths and heights along the first 3ℓ Rauzy steps
        let mut walk = InductionState::new(member);
        let mut outside = false;
        let mut long = false;
        let mut tall = false;
        for step in 0..=3 * ell {
            if step % ell == 0 {
                let i = step / ell;
                if i <= 2 {
                    let cur = walk.current();
                    outside |= !lambda_in_u(cur.perm(), cur.lambda(), cfg.nu);
                    let max = cur
                        .lambda()
                        .iter()
                        .fold(&cur.lambda()[0], |a, b| S::max_of(a, b))
                        .clone();
                    let min = cur
                        .lambda()
                        .iter()
                        .fold(&cur.lambda()[0], |a, b| S::min_of(a, b))
                        .clone();
                    long |= max >= min * ratio_cap.clone();
                }
                if i >= 1 {
                    let h = walk.heights();
                    let max = S::from_bigint(h.iter().max().expect("d ≥ 2"));
                    let min = S::from_bigint(h.iter().min().expect("d ≥ 2"));
                    tall |= max >= min * c_gamma.clone();
                }
            }
            if step < 3 * ell && walk.advance().is_err() {
                break;
            }
        }
        rep.outside_u += outside as usize;
        rep.lengths_unbalanced += long as usize;
        rep.heights_unbalanced += tall as usize;
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{QuadSqrt5, Rational};

    fn golden_config() -> BalancedConfig {
        BalancedConfig {
            enforce_u: false,
            samples: 20,
            ..Default::default()
        }
    }

    #[test]
    fn golden_domain_constants() {
        let dom = build_balanced_domain(&Iet::<QuadSqrt5>::golden(), &golden_config()).unwrap();
        assert_eq!(dom.loop_len, 4);
        assert_eq!(dom.zorich_len, 4);
        assert_eq!(
            dom.a_gamma(),
            &IntMatrix::from_rows(&[vec![5, 3], vec![3, 2]])
        );
        assert_eq!(dom.c_gamma, BigInt::from(13));
        assert_eq!(dom.a_gamma_norm, BigInt::from(8));
        assert_eq!(dom.c_delta(), BigInt::from(2 * 169 * 512));
        assert_eq!(dom.gamma_tilde.len(), 26);
        assert!(dom.report.entries_at_least_two);
        assert!(!dom.u_check.lambda_in_u);
        assert_eq!(dom.report.degenerate, 0);
        assert_eq!(dom.report.not_following_gamma_cubed, 0);
        assert_eq!(dom.report.heights_unbalanced, 0);
        assert_eq!(dom.report.early_return, 0);
    }

    #[test]
    fn golden_is_outside_u() {
        let err = build_balanced_domain(&Iet::<QuadSqrt5>::golden(), &BalancedConfig::default())
            .unwrap_err();
        assert_eq!(err.code(), "PRECONDITION_U");
    }

    #[test]
    fn u_membership() {
        let p = Permutation::reversal(3);
        let q = |n, d| Rational::from_ratio(n, d);
        assert!(lambda_in_u(&p, &[q(32, 100), q(33, 100), q(35, 100)], 0.3));
        assert!(!lambda_in_u(&p, &[q(33, 100), q(32, 100), q(35, 100)], 0.3));
        assert!(!lambda_in_u(&p, &[q(20, 100), q(33, 100), q(47, 100)], 0.3));
    }

    #[test]
    fn balanced_domain_in_u_for_d3() {
        let q = |n, d| Rational::from_ratio(n, d);
        let t = Iet::new(
            Permutation::reversal(3),
            vec![q(3199, 10000), q(3331, 10000), q(3470, 10000)],
            false,
        )
        .unwrap();
        let cfg = BalancedConfig {
            samples: 10,
            budget: 2000,
            ..Default::default()
        };
        match build_balanced_domain(&t, &cfg) {
            Ok(dom) => {
                assert!(dom.u_check.delta_in_u && dom.u_check.lambda_in_u);
                assert!(dom.gamma.matrix().min_entry() >= BigInt::from(2));
                assert_eq!(dom.report.not_following_gamma_cubed, 0);
                assert_eq!(dom.report.outside_u, 0);
            }
            Err(e) => assert_eq!(e.code(), "NOT_FOUND_WITHIN_BUDGET"),
        }
    }
}
