//! Balanced times: returns of the Zorich orbit to the balanced domain,
//! thinned out so that the cocycle grows by a controlled factor between
//! consecutive selected times.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iet::{Iet, Letter, Permutation};
use crate::par::Exec;
use crate::renorm::{
    build_balanced_domain, induce_once, ser_bigint, ser_bigint_vec, BalancedConfig, BalancedDomain,
    Hierarchy, IntMatrix, RauzyPath, StepType, DEFAULT_KAPPA_CAP,
};
use crate::scalar::{Rational, Scalar, DEFAULT_FLOAT_TOL};
use crate::spectrum::lyapunov_exponents;

/// Which visits of the orbit count as returns to the balanced domain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnRule {
    /// `GammaTilde` if the orbit follows `γ̃` at least twice within the budget, else `GammaCubed`.
    #[default]
    Auto,
    /// The next Rauzy steps follow `γ̃`.
    GammaTilde,
    /// The next Rauzy steps follow `γ∗γ∗γ∗φ`, at least `3L` Zorich blocks after the previous return.
    GammaCubed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalancedTimesConfig {
    pub domain: BalancedConfig,
    pub rule: ReturnRule,
    /// Selected times wanted; the run stops collecting returns once enough are available.
    pub times: usize,
    /// Returns collected at most.
    pub return_cap: usize,
    /// Points sampled for the tower and density checks.
    pub samples: usize,
    pub seed: u64,
    /// Second exponent for `d > 2`; estimated with `lyapunov_blocks` blocks when absent.
    pub theta2: Option<f64>,
    pub lyapunov_blocks: usize,
    /// Full tower passes allowed per density bound.
    pub gap_pass_cap: u64,
    /// Policy for the per-sample checks.
    pub exec: Exec,
}

impl Default for BalancedTimesConfig {
    fn default() -> Self {
        BalancedTimesConfig {
            domain: BalancedConfig::default(),
            rule: ReturnRule::Auto,
            times: 5,
            return_cap: 64,
            samples: 100,
            seed: 0,
            theta2: None,
            lyapunov_blocks: 2000,
            gap_pass_cap: 64,
            exec: Exec::Parallel,
        }
    }
}

/// Constants of the construction, as used by the run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalancedConstants {
    pub eta: f64,
    pub epsilon: f64,
    /// Exact `σ = 1/(10·d·C_γ)`.
    pub sigma: String,
    /// Exact `C = C_γ²·C_Δ·‖A_γ‖²/d`.
    pub c: String,
    #[serde(serialize_with = "ser_bigint")]
    pub c_delta: BigInt,
    pub delta: f64,
    pub nu: f64,
    pub theta1: f64,
    pub theta2: f64,
    /// Returns per Zorich block, standing in for `C_d·ν`.
    pub return_rate: f64,
    /// Blocks with norm above this are "big" (`max(η^δ, t_δ)`).
    pub big_block_threshold: f64,
    /// Smallest threshold `t_δ` for which the big-block average is at most `δ`.
    pub tail_threshold: f64,
    /// `ln η₀ = max(1/δ, ln t_δ / δ)`.
    pub log_eta0: f64,
    pub eta_below_eta0: bool,
}

/// One selected time with its checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalancedTime {
    pub k: usize,
    /// Zorich step index `n_k = m_{l_k} + 2L`.
    pub zorich_index: usize,
    pub rauzy_index: usize,
    /// Index `l_k` into the return sequence.
    pub return_index: usize,
    #[serde(serialize_with = "ser_bigint")]
    pub h: BigInt,
    #[serde(serialize_with = "ser_bigint_vec")]
    pub heights: Vec<BigInt>,
    /// `max q / min q`, against the bound `C_γ`.
    pub height_ratio: f64,
    pub height_ratio_ok: bool,
    /// Sampled points for which one side of radius `σ/h` has disjoint iterates.
    pub towers_ok: usize,
    /// Sampled points whose `⌊h/η⌋`-prefix gap bound is at most `Cη^{1+ε}/h`.
    pub density_ok: usize,
    /// Largest certified gap bound over the samples, times `h`.
    pub density_scaled_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthCheck {
    pub k: usize,
    /// `ln(h_k)/k`.
    pub log_root: f64,
    /// `ln(C·η^{1+ε})`.
    pub log_bound: f64,
    pub ok: bool,
    /// Smallest `h_{k+1}/h_k` over the sequence.
    pub min_step_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalancedTimes {
    pub domain: BalancedDomain,
    pub rule: ReturnRule,
    pub constants: BalancedConstants,
    /// Zorich indices `m_k` of the returns.
    pub returns: Vec<usize>,
    /// `‖Q(m_{i−1}, m_i)‖`, one per consecutive pair of returns.
    #[serde(serialize_with = "ser_bigint_vec")]
    pub block_norms: Vec<BigInt>,
    pub samples: usize,
    pub sequence: Vec<BalancedTime>,
    pub growth: GrowthCheck,
}

impl BalancedTimes {
    /// True when every recorded check holds.
    pub fn all_checks_pass(&self) -> bool {
        !self.sequence.is_empty()
            && self.growth.ok
            && self.sequence.iter().all(|t| {
                t.height_ratio_ok && t.towers_ok == self.samples && t.density_ok == self.samples
            })
    }

    pub fn sigma(&self) -> Rational {
        self.constants.sigma.parse().expect("exact rational")
    }

    pub fn density_constant(&self) -> Rational {
        self.constants.c.parse().expect("exact rational")
    }

    pub fn last_rauzy_index(&self) -> usize {
        self.sequence.last().map_or(0, |t| t.rauzy_index)
    }
}

/// Rauzy orbit with its Zorich block boundaries, extended on demand.
struct Orbit<S> {
    current: Iet<S>,
    perms: Vec<Permutation>,
    types: Vec<StepType>,
    moves: Vec<(Letter, Letter)>,
    heights: Vec<BigInt>,
    /// Rauzy index at which each Zorich block starts.
    block_starts: Vec<usize>,
    ended: bool,
}

impl<S: Scalar> Orbit<S> {
    fn new(iet: Iet<S>) -> Self {
        let d = iet.d();
        Orbit {
            perms: vec![iet.perm().clone()],
            current: iet,
            types: Vec::new(),
            moves: Vec::new(),
            heights: vec![BigInt::from(1); d],
            block_starts: vec![0],
            ended: false,
        }
    }

    /// Extends to at least `n` Rauzy steps; false if the induction stops first.
    fn extend_to(&mut self, n: usize) -> Result<bool> {
        while self.types.len() < n && !self.ended {
            let step = self.types.len();
            match induce_once(&self.current, DEFAULT_FLOAT_TOL, step) {
                Ok((next, dec)) => {
                    let next = if step > 0 && self.types[step - 1] != dec.step_type {
                        self.block_starts.push(step);
                        // decisions are scale invariant; keeps exact coefficients small
                        next.normalized()
                    } else {
                        next
                    };
                    let hw = self.heights[dec.winner].clone();
                    self.heights[dec.loser] += hw;
                    self.types.push(dec.step_type);
                    self.moves.push((dec.winner, dec.loser));
                    self.perms.push(next.perm().clone());
                    self.current = next;
                }
                Err(Error::DegenerateLengths { .. }) => self.ended = true,
                Err(e) => return Err(e),
            }
        }
        Ok(self.types.len() >= n)
    }

    /// Rauzy index at which Zorich block `z` starts, if the orbit reaches it.
    fn block_start(&mut self, z: usize) -> Result<Option<usize>> {
        while self.block_starts.len() <= z {
            let start = *self.block_starts.last().expect("non-empty");
            if self.types.len() > start + DEFAULT_KAPPA_CAP {
                return Err(Error::KappaCapExceeded {
                    cap: DEFAULT_KAPPA_CAP,
                });
            }
            if !self.extend_to(self.types.len() + 1)? {
                return Ok(None);
            }
        }
        Ok(Some(self.block_starts[z]))
    }

    fn follows(&mut self, r: usize, path: &RauzyPath) -> Result<bool> {
        if Some(&self.perms[r]) != path.start() || !self.extend_to(r + path.len())? {
            return Ok(false);
        }
        Ok(path
            .arrows()
            .iter()
            .enumerate()
            .all(|(i, a)| a.step_type == self.types[r + i]))
    }

    /// Path matrix of Rauzy steps `from..to`.
    fn segment(&self, from: usize, to: usize) -> IntMatrix {
        let mut m = IntMatrix::identity(self.current.d());
        for &(w, l) in &self.moves[from..to] {
            m.add_col(l, w);
        }
        m
    }

    /// Heights after `r` Rauzy steps.
    fn heights_at(&self, r: usize) -> Vec<BigInt> {
        let ones = vec![BigInt::from(1); self.current.d()];
        self.segment(0, r).transpose().mul_vec(&ones)
    }
}

/// `‖Q‖` for the height action `Q = Pᵀ` of a path matrix `P`.
fn q_norm(path_matrix: &IntMatrix) -> BigInt {
    path_matrix.transpose().norm()
}

fn ln_big(v: &BigInt) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits < 1000 {
        return v.to_f64().expect("fits").ln();
    }
    let shift = bits - 60;
    (v >> shift).to_f64().expect("fits").ln() + shift as f64 * std::f64::consts::LN_2
}

/// Collects returns under one rule; stops at `cap` returns or `budget` Zorich blocks.
fn collect_returns<S: Scalar>(
    orbit: &mut Orbit<S>,
    dom: &BalancedDomain,
    rule: ReturnRule,
    budget: usize,
    cap: usize,
) -> Result<Vec<usize>> {
    let cubed_phi = dom
        .gamma
        .concat(&dom.gamma)?
        .concat(&dom.gamma)?
        .concat(&dom.gamma.prefix(1))?;
    let (path, spacing) = match rule {
        ReturnRule::GammaCubed => (&cubed_phi, 3 * dom.zorich_len),
        _ => (&dom.gamma_tilde, 1),
    };
    let mut returns: Vec<usize> = Vec::new();
    for z in 0..budget {
        if returns.len() >= cap {
            break;
        }
        if returns.last().is_some_and(|&m| z < m + spacing) {
            continue;
        }
        let Some(r) = orbit.block_start(z)? else {
            break;
        };
        if orbit.follows(r, path)? {
            returns.push(z);
        }
    }
    Ok(returns)
}

/// Largest `δ < min(ε, 1/(10d))` satisfying the constants condition, by bisection.
fn solve_delta(theta1: f64, rate: f64, epsilon: f64, d: usize) -> Option<f64> {
    let g = |delta: f64| {
        let denom = 1.0 - rate * (1.0 + 2.0 * delta) / (theta1 - delta);
        if theta1 - 2.0 * delta <= 0.0 || denom <= 0.0 {
            return f64::INFINITY;
        }
        (1.0 + delta) * (theta1 + delta) / (theta1 - 2.0 * delta) / denom
    };
    let hi0 = epsilon.min(1.0 / (10.0 * d as f64));
    if g(hi0 * 1e-9) > 1.0 + epsilon {
        return None;
    }
    let (mut lo, mut hi) = (0.0, hi0);
    if g(hi * (1.0 - 1e-12)) <= 1.0 + epsilon {
        return Some(hi * (1.0 - 1e-12));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if g(mid) <= 1.0 + epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// `ln t` for the smallest threshold `t` with `(1/N)·Σ_{b > t} ln b ≤ δ` over the block norms.
fn tail_log_threshold(norms: &[BigInt], delta: f64) -> f64 {
    let logs: Vec<f64> = norms.iter().map(ln_big).collect();
    if logs.is_empty() {
        return 0.0;
    }
    let mut candidates: Vec<f64> = logs.clone();
    candidates.push(0.0);
    candidates.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = logs.len() as f64;
    candidates
        .into_iter()
        .find(|&t| logs.iter().filter(|&&l| l > t).sum::<f64>() / n <= delta)
        .unwrap_or(f64::INFINITY)
}

/// Selection rule: `l_{k+1}` is the least `l > l_k` for which some `l_k < j < l`
/// has `‖Q(m_j, m_l)‖ ≥ ηC_Δ` and only small blocks in between. Returns the `l_k`, `k ≥ 1`.
fn select<S: Scalar>(
    orbit: &mut Orbit<S>,
    returns: &[usize],
    norms: &[BigInt],
    big_log: f64,
    target: &BigInt,
) -> Result<Vec<usize>> {
    let mut picks = Vec::new();
    let mut l_prev = 0usize;
    let mut last_big: Option<usize> = None;
    for l in 1..returns.len() {
        // block i spans returns i..i+1
        if ln_big(&norms[l - 1]) > big_log {
            last_big = Some(l - 1);
        }
        let j = (l_prev + 1).max(last_big.map_or(0, |b| b + 1));
        if j >= l {
            continue;
        }
        let from = orbit.block_start(returns[j])?.expect("reached");
        let to = orbit.block_start(returns[l])?.expect("reached");
        if q_norm(&orbit.segment(from, to)) >= *target {
            picks.push(l);
            l_prev = l;
        }
    }
    Ok(picks)
}

fn rational_from_f64(v: f64) -> Rational {
    <Rational as Scalar>::from_f64(v)
}

/// Builds the balanced domain on the orbit of `iet` (normalized to length 1),
/// collects its returns, selects balanced times and checks their properties.
pub fn balanced_times<S: Scalar>(
    iet: &Iet<S>,
    epsilon: f64,
    eta: f64,
    budget: usize,
) -> Result<BalancedTimes> {
    balanced_times_with(iet, epsilon, eta, budget, &BalancedTimesConfig::default())
}

pub fn balanced_times_with<S: Scalar>(
    iet: &Iet<S>,
    epsilon: f64,
    eta: f64,
    budget: usize,
    cfg: &BalancedTimesConfig,
) -> Result<BalancedTimes> {
    if !(epsilon > 0.0 && epsilon < 1.0) || eta.is_nan() || eta <= 1.0 || budget == 0 {
        return Err(Error::BadConfig(format!(
            "need 0 < ε < 1, η > 1, budget > 0 (got {epsilon}, {eta}, {budget})"
        )));
    }
    let iet = iet.normalized();
    let d = iet.d();
    let dom = build_balanced_domain(&iet, &cfg.domain)?;
    let big_l = dom.zorich_len;
    let mut orbit = Orbit::new(iet.clone());
    let (rule, returns) = match cfg.rule {
        ReturnRule::Auto => {
            let strict = collect_returns(
                &mut orbit,
                &dom,
                ReturnRule::GammaTilde,
                budget,
                cfg.return_cap,
            )?;
            if strict.len() >= 2 {
                (ReturnRule::GammaTilde, strict)
            } else {
                (
                    ReturnRule::GammaCubed,
                    collect_returns(
                        &mut orbit,
                        &dom,
                        ReturnRule::GammaCubed,
                        budget,
                        cfg.return_cap,
                    )?,
                )
            }
        }
        rule => (
            rule,
            collect_returns(&mut orbit, &dom, rule, budget, cfg.return_cap)?,
        ),
    };
    if returns.len() < 2 {
        return Err(Error::NoReturnsWithinBudget { budget });
    }
    // every selected time needs 2L further blocks
    let last = *returns.last().expect("≥ 2 returns");
    if orbit.block_start(last + 2 * big_l)?.is_none() {
        return Err(Error::NoReturnsWithinBudget { budget });
    }

    let starts: Vec<usize> = returns.iter().map(|&m| orbit.block_starts[m]).collect();
    let norms: Vec<BigInt> = starts
        .windows(2)
        .map(|w| q_norm(&orbit.segment(w[0], w[1])))
        .collect();
    let end = starts[starts.len() - 1];
    let q_end = orbit.heights_at(end);
    let q_total: BigInt = q_end.iter().sum();
    let theta1 = ln_big(&q_total) / last as f64;
    let return_rate = (returns.len() - 1) as f64 / (last - returns[0]).max(1) as f64;
    let theta2 = if d == 2 {
        0.0
    } else {
        match cfg.theta2 {
            Some(t) => t,
            None => lyapunov_exponents(&iet, cfg.lyapunov_blocks, 1)?.ratio() * theta1,
        }
    };
    if (1.0 + epsilon) * theta2 / theta1 >= 1.0 {
        return Err(Error::SpectralGapViolated {
            value: (1.0 + epsilon) * theta2 / theta1,
        });
    }
    let delta = solve_delta(theta1, return_rate, epsilon, d).ok_or_else(|| {
        Error::NoAdmissibleConstants {
            reason: format!(
                "no δ for θ₁ = {theta1:.4}, return rate {return_rate:.4}, ε = {epsilon}"
            ),
        }
    })?;
    let tail_log = tail_log_threshold(&norms, delta);
    let big_log = (delta * eta.ln()).max(tail_log);
    let log_eta0 = (1.0 / delta).max(tail_log / delta);

    let c_gamma = Rational::from_integer(dom.c_gamma.clone());
    let dd = Rational::from_integer(BigInt::from(d));
    let norm_a = Rational::from_integer(dom.a_gamma_norm.clone());
    let c_delta = dom.c_delta();
    let c_exact = c_gamma.clone()
        * c_gamma.clone()
        * Rational::from_integer(c_delta.clone())
        * norm_a.clone()
        * norm_a
        / dd.clone();
    let sigma = Rational::from_integer(BigInt::from(1))
        / (Rational::from_integer(BigInt::from(10)) * dd * c_gamma);
    let eta_c_delta = rational_from_f64(eta) * Rational::from_integer(c_delta.clone());
    let target = eta_c_delta.ceil().to_integer();

    let picks = select(&mut orbit, &returns, &norms, big_log, &target)?;
    let picks: Vec<usize> = picks.into_iter().take(cfg.times).collect();
    if picks.is_empty() {
        return Err(Error::NotFoundWithinBudget {
            what: "balanced time".into(),
            stats: format!(
                "{} returns, block norms up to {}",
                returns.len(),
                norms.iter().max().expect("≥ 1")
            ),
        });
    }
    let rauzy: Vec<usize> = picks
        .iter()
        .map(|&l| {
            orbit
                .block_start(returns[l] + 2 * big_l)
                .map(|r| r.expect("checked above"))
        })
        .collect::<Result<_>>()?;
    let depth = *rauzy.last().expect("non-empty");
    orbit.extend_to(depth)?;
    let hierarchy = Hierarchy::build(&iet, None, depth)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let xs: Vec<S> = (0..cfg.samples).map(|_| unit_point(&mut rng)).collect();
    let density_factor = c_exact.clone() * rational_from_f64(eta.powf(1.0 + epsilon));
    let eta_exact = rational_from_f64(eta);
    let mut sequence = Vec::with_capacity(picks.len());
    for (k, (&l, &r)) in picks.iter().zip(&rauzy).enumerate() {
        let heights = hierarchy.heights(r).to_vec();
        let h = hierarchy.min_height(r).clone();
        let max_q = heights.iter().max().expect("d ≥ 2").clone();
        let height_ratio =
            max_q.to_f64().unwrap_or(f64::INFINITY) / h.to_f64().unwrap_or(f64::INFINITY);
        let height_ratio_ok = max_q < &dom.c_gamma * &h;
        let radius = S::from_rational(&sigma) / S::from_bigint(&h);
        let sides = cfg
            .exec
            .map(&xs, |x| disjoint_side(&hierarchy, x, r, &radius, &h));
        let mut towers_ok = 0;
        for side in sides {
            towers_ok += side?.is_some() as usize;
        }
        let prefix = (Rational::from_integer(h.clone()) / eta_exact.clone())
            .floor()
            .to_integer();
        let bound = S::from_rational(&(density_factor.clone() / Rational::from_integer(h.clone())));
        let mut density_ok = 0;
        let mut density_scaled_max: f64 = 0.0;
        let gaps = cfg
            .exec
            .map(&xs, |x| hierarchy.gap_bound(x, &prefix, cfg.gap_pass_cap));
        for gap in gaps {
            match gap? {
                Some(g) => {
                    density_scaled_max =
                        density_scaled_max.max(g.to_f64() * h.to_f64().unwrap_or(f64::INFINITY));
                    density_ok += (g <= bound) as usize;
                }
                None => density_scaled_max = f64::INFINITY,
            }
        }
        sequence.push(BalancedTime {
            k: k + 1,
            zorich_index: returns[l] + 2 * big_l,
            rauzy_index: r,
            return_index: l,
            h,
            heights,
            height_ratio,
            height_ratio_ok,
            towers_ok,
            density_ok,
            density_scaled_max,
        });
    }
    let last_time = sequence.last().expect("non-empty");
    let log_root = ln_big(&last_time.h) / last_time.k as f64;
    let log_bound = <Rational as Scalar>::to_f64(&c_exact).ln() + (1.0 + epsilon) * eta.ln();
    let min_step_ratio = sequence
        .windows(2)
        .map(|w| (ln_big(&w[1].h) - ln_big(&w[0].h)).exp())
        .fold(f64::INFINITY, f64::min);
    let growth = GrowthCheck {
        k: last_time.k,
        log_root,
        log_bound,
        ok: log_root <= log_bound,
        min_step_ratio,
    };
    Ok(BalancedTimes {
        rule,
        constants: BalancedConstants {
            eta,
            epsilon,
            sigma: sigma.to_string(),
            c: c_exact.to_string(),
            c_delta,
            delta,
            nu: dom.nu,
            theta1,
            theta2,
            return_rate,
            big_block_threshold: big_log.exp(),
            tail_threshold: tail_log.exp(),
            log_eta0,
            eta_below_eta0: eta.ln() < log_eta0,
        },
        domain: dom,
        returns,
        block_norms: norms,
        samples: cfg.samples,
        sequence,
        growth,
    })
}

/// Uniform point of `[0, 1)` with a 53-bit denominator.
pub(crate) fn unit_point<S: Scalar, R: Rng>(rng: &mut R) -> S {
    let k: i64 = rng.gen_range(0..(1i64 << 53));
    S::from_ratio(k, 1i64 << 53)
}

/// Side on which the first `h` iterates of the closed interval of length
/// `radius` next to `x` are pairwise disjoint, read off the towers of level `s`:
/// the interval sits inside one floor of its tower, and if the orbit leaves
/// the tower before `h` steps, the image under the return map lies in a single
/// base interval of level `s`.
pub fn disjoint_side<S: Scalar>(
    hier: &Hierarchy<S>,
    x: &S,
    s: usize,
    radius: &S,
    h: &BigInt,
) -> Result<Option<super::Side>> {
    let loc = hier.locate(x, s)?;
    let lvl = hier.level_iet(s);
    let lambda = &lvl.lambda()[loc.letter];
    let exits = &hier.heights(s)[loc.letter] - &loc.floor < *h;
    let y = lvl.top_start(loc.letter).clone() + loc.offset.clone() + lvl.translation(loc.letter);
    let left_fits = |p: &S, start: &S| p.clone() - radius.clone() >= *start;
    let right_fits =
        |p: &S, start: &S, len: &S| p.clone() + radius.clone() < start.clone() + len.clone();
    let left = loc.offset >= *radius
        && (!exits || {
            let b = lvl.letter_at(&y);
            left_fits(&y, lvl.top_start(b))
        });
    if left {
        return Ok(Some(super::Side::Left));
    }
    let right = loc.offset.clone() + radius.clone() < *lambda
        && (!exits || {
            let b = lvl.letter_at(&y);
            right_fits(&y, lvl.top_start(b), &lvl.lambda()[b])
        });
    Ok(right.then_some(super::Side::Right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iet::Permutation;
    use crate::scalar::QuadSqrt5;

    fn golden_cfg() -> BalancedTimesConfig {
        BalancedTimesConfig {
            domain: BalancedConfig {
                enforce_u: false,
                samples: 10,
                ..Default::default()
            },
            samples: 20,
            ..Default::default()
        }
    }

    #[test]
    fn golden_times() {
        let bt = balanced_times_with(
            &Iet::<QuadSqrt5>::golden(),
            0.5,
            64.0,
            10_000,
            &golden_cfg(),
        )
        .unwrap();
        assert_eq!(bt.rule, ReturnRule::GammaCubed);
        assert!(
            bt.returns.windows(2).all(|w| w[1] - w[0] == 12),
            "{:?}",
            bt.returns
        );
        assert!(bt.block_norms.iter().all(|n| *n == BigInt::from(377)));
        assert_eq!(bt.sequence.len(), 5);
        assert!(bt.sequence.windows(2).all(|w| w[1].h > w[0].h));
        assert!(bt.growth.min_step_ratio >= 64.0);
        assert!(bt.constants.eta_below_eta0);
        assert!(bt.all_checks_pass(), "{bt:#?}");
    }

    /// Pushes `[lo, hi]` forward `h` times, requiring each image to sit inside
    /// one interval of `T`, then checks the images are pairwise disjoint.
    fn floors_disjoint(t: &Iet<Rational>, lo: Rational, hi: Rational, h: u64) -> bool {
        let (mut a, mut b) = (lo, hi);
        let mut images = Vec::new();
        for _ in 0..h {
            let letter = t.letter_at(&a);
            let end = t.top_start(letter).clone() + t.lambda()[letter].clone();
            if b >= end {
                return false;
            }
            images.push((a.clone(), b.clone()));
            let shift = t.translation(letter);
            a += shift.clone();
            b += shift;
        }
        images.sort();
        images.windows(2).all(|w| w[0].1 < w[1].0)
    }

    proptest::proptest! {
        #[test]
        fn disjoint_side_matches_direct_iteration(
            lens in proptest::collection::vec(1i64..60, 3),
            xn in 0i64..997,
            level in 1usize..10,
            shrink in 2i64..8,
        ) {
            let total: i64 = lens.iter().sum();
            let t = Iet::new(Permutation::reversal(3), lens.iter().map(|&l| Rational::from_ratio(l, total)).collect(), false).unwrap();
            let Ok(hier) = Hierarchy::build(&t, None, level) else { return Ok(()) };
            let h = hier.min_height(level).clone();
            let shortest = hier.level_iet(level).lambda().iter().min().unwrap().clone();
            let radius = shortest / Rational::from_i64(shrink);
            let x = Rational::from_ratio(xn, 997);
            let hh = h.to_u64().unwrap();
            match disjoint_side(&hier, &x, level, &radius, &h).unwrap() {
                Some(super::super::Side::Left) => proptest::prop_assert!(floors_disjoint(&t, x.clone() - radius.clone(), x, hh)),
                Some(super::super::Side::Right) => proptest::prop_assert!(floors_disjoint(&t, x.clone(), x + radius, hh)),
                None => {}
            }
        }
    }

    #[test]
    fn solve_delta_respects_condition() {
        let delta = solve_delta(0.48, 1.0 / 12.0, 0.5, 2).unwrap();
        assert!(delta > 0.0 && delta <= 0.05);
        assert!(solve_delta(0.1, 0.2, 0.5, 2).is_none());
    }

    #[test]
    fn tail_threshold_examples() {
        let norms: Vec<BigInt> = [377, 377, 377].iter().map(|&v| BigInt::from(v)).collect();
        assert_eq!(tail_log_threshold(&norms, 0.1), 377f64.ln());
        let mixed: Vec<BigInt> = [2, 2, 2, 1000].iter().map(|&v| BigInt::from(v)).collect();
        // keeping only the 1000 block above the threshold averages ln(1000)/4 ≈ 1.73
        assert_eq!(tail_log_threshold(&mixed, 2.0), 2f64.ln());
        assert_eq!(tail_log_threshold(&mixed, 1.0), 1000f64.ln());
    }

    #[test]
    fn ln_big_matches_float() {
        let v = BigInt::from(10).pow(400);
        assert!((ln_big(&v) - 400.0 * 10f64.ln()).abs() < 1e-9);
        assert!((ln_big(&BigInt::from(377)) - 377f64.ln()).abs() < 1e-12);
    }
}
