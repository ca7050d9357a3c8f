//! Searches for good returns inside the windows `[h_p/η, h_p]` given by
//! balanced times, with certificates that can be checked independently.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::intervals::IntervalSet;
use super::orbit::{continuity_rooms, max_gap, Side};
use super::times::BalancedTimes;
use crate::cocycle::StepCocycle;
use crate::error::{Error, Result};
use crate::iet::Iet;
use crate::par::Exec;
use crate::renorm::{ser_bigint, Hierarchy};
use crate::scalar::{ser_exact, Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchConfig {
    pub seed: u64,
    /// Candidates `(y, n)` tried at most.
    pub budget: usize,
    /// Points drawn per tower-height candidate before moving on.
    pub points_per_height: usize,
    pub gap_pass_cap: u64,
    /// Certificates with `n` up to this are re-verified by plain iteration.
    pub brute_force_cap: u64,
    pub exec: Exec,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            seed: 0,
            budget: 20_000,
            points_per_height: 4,
            gap_pass_cap: 64,
            brute_force_cap: 200_000,
            exec: Exec::Parallel,
        }
    }
}

/// `y ∈ E` with `Tⁿy ∈ E` and `|S_n f(y)| < D`, `n` in the window of balanced time `p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct Recurrence<S> {
    pub p: usize,
    #[serde(serialize_with = "ser_bigint")]
    pub h_p: BigInt,
    #[serde(serialize_with = "ser_exact")]
    pub x: S,
    #[serde(serialize_with = "ser_bigint")]
    pub n: BigInt,
    #[serde(serialize_with = "ser_exact")]
    pub image: S,
    #[serde(serialize_with = "ser_exact")]
    pub birkhoff: S,
}

/// A point satisfying all four conditions, with the numbers that witness them.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct GoodReturn<S> {
    #[serde(flatten)]
    pub recurrence: Recurrence<S>,
    /// Certified upper bound on the largest gap of `{Tⁱx}_{i<n}`.
    #[serde(serialize_with = "ser_exact")]
    pub density_gap: S,
    pub continuity_side: Side,
    /// Certified room: `Tⁿ` is a translation on `[x − r, x]` for `r ≤` this
    /// (left), or on `[x, x + r]` for `r <` this (right).
    #[serde(serialize_with = "ser_exact")]
    pub continuity_radius: S,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SearchStats {
    pub candidates: usize,
    pub structured_candidates: usize,
    /// Misses by first failed condition.
    pub misses: BTreeMap<&'static str, usize>,
    pub windows: Vec<(usize, String, String)>,
}

impl SearchStats {
    fn summary(&self) -> String {
        let misses: Vec<String> = self
            .misses
            .iter()
            .map(|(k, v)| format!("{k}: {v}"))
            .collect();
        format!(
            "{} candidates over {} windows; misses {{{}}}",
            self.candidates,
            self.windows.len(),
            misses.join(", ")
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Found<T> {
    pub hit: T,
    pub stats: SearchStats,
}

/// The constants the conditions are checked against.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodReturnBounds {
    /// Density constant with slack, `C + 1`.
    pub c_prime: String,
    /// Continuity constant with slack, `σ/4`.
    pub sigma_prime: String,
}

impl GoodReturnBounds {
    pub fn from_times(bt: &BalancedTimes) -> Self {
        let c: Rational = bt.density_constant() + <Rational as One>::one();
        let sigma: Rational = bt.sigma() / Rational::from_integer(BigInt::from(4));
        GoodReturnBounds {
            c_prime: c.to_string(),
            sigma_prime: sigma.to_string(),
        }
    }

    fn c_prime(&self) -> Rational {
        self.c_prime.parse().expect("exact rational")
    }

    fn sigma_prime(&self) -> Rational {
        self.sigma_prime.parse().expect("exact rational")
    }
}

struct Window {
    p: usize,
    h: BigInt,
    lo: BigInt,
    hi: BigInt,
}

struct Context<'a, S: Scalar> {
    hier: Hierarchy<S>,
    e: &'a IntervalSet<S>,
    d_bound: &'a S,
    windows: Vec<Window>,
    /// `(window, n)` pairs taken from tower heights, tried first.
    structured: Vec<(usize, BigInt)>,
    cfg: &'a SearchConfig,
}

enum Outcome<T> {
    Hit(T),
    Miss(&'static str),
}

pub(crate) fn check_d<S: Scalar>(f: &StepCocycle<S>, d_bound: &S) -> Result<()> {
    let mm = S::from_i64(f.m() as i64) * f.bound().clone();
    if *d_bound <= mm {
        return Err(Error::PreconditionD {
            d: d_bound.to_exact_string(),
            bound: mm.to_exact_string(),
        });
    }
    Ok(())
}

/// Uniform integer in `[lo, hi]` (up to 53 bits of resolution for huge spans).
fn draw_in<R: Rng>(rng: &mut R, lo: &BigInt, hi: &BigInt) -> BigInt {
    let span = hi - lo;
    match span.to_u64() {
        Some(s) if s < u64::MAX => lo + rng.gen_range(0..=s),
        _ => lo + (span * BigInt::from(rng.gen_range(0..(1u64 << 53)))) / BigInt::from(1u64 << 53),
    }
}

impl<'a, S: Scalar> Context<'a, S> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        iet: &Iet<S>,
        f: &StepCocycle<S>,
        e: &'a IntervalSet<S>,
        d_bound: &'a S,
        bt: &BalancedTimes,
        first_p: usize,
        n_floor: &BigInt,
        cfg: &'a SearchConfig,
    ) -> Result<Self> {
        check_d(f, d_bound)?;
        if e.measure() <= S::zero() {
            return Err(Error::BadConfig("query set has zero measure".into()));
        }
        let eta = Rational::from_float(bt.constants.eta).expect("finite η");
        let windows: Vec<Window> = bt
            .sequence
            .iter()
            .filter(|t| t.k >= first_p)
            .filter_map(|t| {
                let lo = (Rational::from_integer(t.h.clone()) / eta.clone())
                    .ceil()
                    .to_integer()
                    .max(n_floor + 1);
                (lo <= t.h).then(|| Window {
                    p: t.k,
                    h: t.h.clone(),
                    lo,
                    hi: t.h.clone(),
                })
            })
            .collect();
        if windows.is_empty() {
            return Err(Error::NotFoundWithinBudget {
                what: "balanced window".into(),
                stats: format!("no balanced time with p ≥ {first_p} and h_p > {n_floor}"),
            });
        }
        let depth = bt.last_rauzy_index();
        let hier = Hierarchy::build(iet, Some(f), depth)?;
        let mut structured = Vec::new();
        for (w, win) in windows.iter().enumerate() {
            let mut seen: Vec<BigInt> = (0..=depth)
                .flat_map(|s| hier.heights(s).iter().cloned())
                .filter(|q| *q >= win.lo && *q <= win.hi)
                .collect();
            seen.sort();
            seen.dedup();
            structured.extend(seen.into_iter().map(|q| (w, q)));
        }
        Ok(Context {
            hier,
            e,
            d_bound,
            windows,
            structured,
            cfg,
        })
    }

    fn structured_candidates(&self) -> usize {
        self.structured.len() * self.cfg.points_per_height
    }

    /// Candidate `i`: tower heights first, then uniform times; points uniform in `E`.
    fn candidate(&self, i: usize) -> (usize, S, BigInt) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(i as u64);
        let y = self.e.sample(&mut rng);
        if i < self.structured_candidates() {
            let (w, n) = &self.structured[i / self.cfg.points_per_height];
            return (*w, y, n.clone());
        }
        let w = (i - self.structured_candidates()) % self.windows.len();
        let n = draw_in(&mut rng, &self.windows[w].lo, &self.windows[w].hi);
        (w, y, n)
    }

    fn recurrence(&self, i: usize) -> Result<Outcome<Recurrence<S>>> {
        let (w, y, n) = self.candidate(i);
        let walk = self.hier.walk(&y, &n)?;
        if !self.e.contains(&walk.point) {
            return Ok(Outcome::Miss("image_outside_e"));
        }
        if walk.birkhoff.abs() >= *self.d_bound {
            return Ok(Outcome::Miss("birkhoff_too_large"));
        }
        let win = &self.windows[w];
        Ok(Outcome::Hit(Recurrence {
            p: win.p,
            h_p: win.h.clone(),
            x: y,
            n,
            image: walk.point,
            birkhoff: walk.birkhoff,
        }))
    }

    fn good(&self, i: usize, bounds: &GoodReturnBounds) -> Result<Outcome<GoodReturn<S>>> {
        let rec = match self.recurrence(i)? {
            Outcome::Hit(r) => r,
            Outcome::Miss(m) => return Ok(Outcome::Miss(m)),
        };
        let n_s = S::from_bigint(&rec.n);
        let walk = self.hier.walk(&rec.x, &rec.n)?;
        let sigma = S::from_rational(&bounds.sigma_prime()) / n_s.clone();
        let (side, radius) = if walk.right_room > walk.left_room {
            (Side::Right, walk.right_room)
        } else {
            (Side::Left, walk.left_room)
        };
        let room_ok = match side {
            Side::Left => radius >= sigma,
            Side::Right => radius > sigma,
        };
        if !room_ok {
            return Ok(Outcome::Miss("continuity_too_short"));
        }
        let Some(gap) = self.hier.gap_bound(&rec.x, &rec.n, self.cfg.gap_pass_cap)? else {
            return Ok(Outcome::Miss("density_uncertified"));
        };
        if gap > S::from_rational(&bounds.c_prime()) / n_s {
            return Ok(Outcome::Miss("density_gap_too_large"));
        }
        Ok(Outcome::Hit(GoodReturn {
            recurrence: rec,
            density_gap: gap,
            continuity_side: side,
            continuity_radius: radius,
        }))
    }

    fn stats(&self) -> SearchStats {
        SearchStats {
            structured_candidates: self.structured_candidates(),
            windows: self
                .windows
                .iter()
                .map(|w| (w.p, w.lo.to_string(), w.hi.to_string()))
                .collect(),
            ..Default::default()
        }
    }

    /// Runs candidates in chunks under the execution policy; the smallest
    /// index that hits wins, so the result does not depend on the policy.
    fn run<T: Send>(
        &self,
        what: &str,
        probe: impl Fn(usize) -> Result<Outcome<T>> + Sync + Send,
    ) -> Result<Found<T>> {
        let mut stats = self.stats();
        let chunk = 64;
        let mut start = 0;
        while start < self.cfg.budget {
            let end = (start + chunk).min(self.cfg.budget);
            let outcomes = self.cfg.exec.map_range(end - start, |k| probe(start + k));
            for outcome in outcomes {
                stats.candidates += 1;
                match outcome? {
                    Outcome::Hit(hit) => return Ok(Found { hit, stats }),
                    Outcome::Miss(m) => *stats.misses.entry(m).or_default() += 1,
                }
            }
            start = end;
        }
        Err(Error::NotFoundWithinBudget {
            what: what.into(),
            stats: stats.summary(),
        })
    }
}

/// Finds `y ∈ E` and `n ∈ [h_p/η, h_p]`, `p ≥ first_p`, with `Tⁿy ∈ E` and
/// `|S_n f(y)| < D`. Tower heights inside the windows are tried first (the
/// orbit of a return time comes back close to its start), then uniform times.
#[allow(clippy::too_many_arguments)]
pub fn recurrence_search<S: Scalar>(
    iet: &Iet<S>,
    f: &StepCocycle<S>,
    e: &IntervalSet<S>,
    d_bound: &S,
    first_p: usize,
    bt: &BalancedTimes,
    cfg: &SearchConfig,
) -> Result<Found<Recurrence<S>>> {
    let iet = iet.normalized();
    let ctx = Context::new(
        &iet,
        f,
        e,
        d_bound,
        bt,
        first_p.max(1),
        &BigInt::from(0),
        cfg,
    )?;
    ctx.run("recurrence", |i| ctx.recurrence(i))
}

/// Finds `x` and `n > n_min` meeting all four conditions: `x, Tⁿx ∈ E`,
/// `|S_n f(x)| < D`, the first `n` iterates are `(C+1)/n`-dense, and `Tⁿ`
/// is continuous on a one-sided interval of radius `(σ/4)/n` at `x`.
pub fn good_return_search<S: Scalar>(
    iet: &Iet<S>,
    f: &StepCocycle<S>,
    e: &IntervalSet<S>,
    d_bound: &S,
    n_min: &BigInt,
    bt: &BalancedTimes,
    cfg: &SearchConfig,
) -> Result<Found<GoodReturn<S>>> {
    let iet = iet.normalized();
    let bounds = GoodReturnBounds::from_times(bt);
    let ctx = Context::new(&iet, f, e, d_bound, bt, 1, n_min, cfg)?;
    ctx.run("good return", |i| ctx.good(i, &bounds))
}

/// Outcome of re-checking a certificate from scratch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verification {
    /// `"iteration"` (plain orbit) or `"hierarchy"` (towers of another depth).
    pub method: &'static str,
    pub start_in_e: bool,
    pub image_in_e: bool,
    pub image_matches: bool,
    pub birkhoff_matches: bool,
    pub birkhoff_below_d: bool,
    pub n_above_min: bool,
    pub density_ok: bool,
    pub continuity_ok: bool,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.start_in_e
            && self.image_in_e
            && self.image_matches
            && self.birkhoff_matches
            && self.birkhoff_below_d
            && self.n_above_min
            && self.density_ok
            && self.continuity_ok
    }
}

/// Recomputes every number of `gr`. Orbits of length up to
/// `cfg.brute_force_cap` are iterated point by point (exact gap by sorting,
/// rooms from the orbit's distances to the interval ends); longer ones go
/// through a hierarchy just deep enough to hold `n`, built independently of
/// the one the search used.
#[allow(clippy::too_many_arguments)]
pub fn verify_good_return<S: Scalar>(
    iet: &Iet<S>,
    f: &StepCocycle<S>,
    e: &IntervalSet<S>,
    d_bound: &S,
    n_min: &BigInt,
    bounds: &GoodReturnBounds,
    gr: &GoodReturn<S>,
    cfg: &SearchConfig,
) -> Result<Verification> {
    let iet = iet.normalized();
    let rec = &gr.recurrence;
    let n_s = S::from_bigint(&rec.n);
    let c_bound = S::from_rational(&bounds.c_prime()) / n_s.clone();
    let sigma = S::from_rational(&bounds.sigma_prime()) / n_s;
    let small = rec.n.to_u64().filter(|&n| n <= cfg.brute_force_cap);
    let (method, image, birkhoff, gap, left, right) = match small {
        Some(n) => {
            let mut y = rec.x.clone();
            let mut sum = <S::Acc as Default>::default();
            let mut points = Vec::with_capacity(n as usize);
            for _ in 0..n {
                crate::scalar::Accumulator::add(&mut sum, f.eval_unchecked(&y));
                let next = iet.apply_unchecked(&y);
                points.push(y);
                y = next;
            }
            let (left, right) = continuity_rooms(&iet, &rec.x, n)?;
            let gap = max_gap(points, iet.total_length());
            (
                "iteration",
                y,
                crate::scalar::Accumulator::value(&sum),
                Some(gap),
                left,
                right,
            )
        }
        None => {
            let mut depth = 0;
            let mut hier = Hierarchy::build(&iet, Some(f), 0)?;
            while *hier.min_height(depth) <= rec.n {
                depth = (depth + 1) * 2;
                hier = Hierarchy::build(&iet, Some(f), depth)?;
            }
            let walk = hier.walk(&rec.x, &rec.n)?;
            let gap = hier.gap_bound(&rec.x, &rec.n, cfg.gap_pass_cap)?;
            (
                "hierarchy",
                walk.point,
                walk.birkhoff,
                gap,
                walk.left_room,
                walk.right_room,
            )
        }
    };
    let continuity_ok = match gr.continuity_side {
        Side::Left => left >= sigma,
        Side::Right => right > sigma,
    };
    Ok(Verification {
        method,
        start_in_e: e.contains(&rec.x),
        image_in_e: e.contains(&image),
        image_matches: image == rec.image,
        birkhoff_matches: birkhoff == rec.birkhoff,
        birkhoff_below_d: birkhoff.abs() < *d_bound,
        n_above_min: rec.n > *n_min,
        density_ok: gap.is_some_and(|g| g <= c_bound && g <= gr.density_gap),
        continuity_ok,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::OnceLock;

    use super::*;
    use crate::cocycle::sample_cocycle;
    use crate::good_returns::times::{balanced_times_with, BalancedTimesConfig};
    use crate::renorm::BalancedConfig;
    use crate::scalar::QuadSqrt5;

    fn golden() -> Iet<QuadSqrt5> {
        Iet::<QuadSqrt5>::golden().normalized()
    }

    fn golden_times() -> &'static BalancedTimes {
        static BT: OnceLock<BalancedTimes> = OnceLock::new();
        BT.get_or_init(|| {
            let cfg = BalancedTimesConfig {
                domain: BalancedConfig {
                    enforce_u: false,
                    samples: 10,
                    ..Default::default()
                },
                samples: 2,
                ..Default::default()
            };
            balanced_times_with(&golden(), 0.5, 64.0, 10_000, &cfg).unwrap()
        })
    }

    fn cocycle(seed: u64) -> StepCocycle<QuadSqrt5> {
        sample_cocycle(seed, 2, &QuadSqrt5::one()).unwrap()
    }

    #[test]
    fn full_set_succeeds_and_verifies() {
        let (e, d, n_min) = (
            IntervalSet::full(),
            QuadSqrt5::from_ratio(5, 2),
            BigInt::from(10),
        );
        let f = cocycle(3);
        let cfg = SearchConfig {
            seed: 1,
            ..Default::default()
        };
        let found =
            good_return_search(&golden(), &f, &e, &d, &n_min, golden_times(), &cfg).unwrap();
        assert_eq!(found.stats.candidates, 1);
        let bounds = GoodReturnBounds::from_times(golden_times());
        let v =
            verify_good_return(&golden(), &f, &e, &d, &n_min, &bounds, &found.hit, &cfg).unwrap();
        assert_eq!(v.method, "hierarchy");
        assert!(v.passed(), "{v:?}");
    }

    #[test]
    fn recurrence_lands_in_a_window() {
        let e = IntervalSet::parse("0.2:0.3").unwrap();
        let f = cocycle(7);
        let cfg = SearchConfig {
            seed: 7,
            ..Default::default()
        };
        let found = recurrence_search(
            &golden(),
            &f,
            &e,
            &QuadSqrt5::from_ratio(5, 2),
            2,
            golden_times(),
            &cfg,
        )
        .unwrap();
        let hit = &found.hit;
        assert!(hit.p >= 2);
        assert!(hit.n <= hit.h_p && &hit.n * BigInt::from(64) >= hit.h_p);
        assert!(e.contains(&hit.x) && e.contains(&hit.image));
    }

    #[test]
    fn bound_at_most_m_times_max_is_rejected() {
        let e = IntervalSet::full();
        let err = good_return_search(
            &golden(),
            &cocycle(7),
            &e,
            &QuadSqrt5::from_i64(2),
            &BigInt::from(10),
            golden_times(),
            &SearchConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err.code(), "PRECONDITION_D");
    }

    #[test]
    fn uniform_times_alone_miss_a_tiny_set() {
        let e = IntervalSet::parse("0.5:0.500001").unwrap();
        let cfg = SearchConfig {
            seed: 7,
            budget: 200,
            points_per_height: 0,
            ..Default::default()
        };
        let err = good_return_search(
            &golden(),
            &cocycle(7),
            &e,
            &QuadSqrt5::from_ratio(5, 2),
            &BigInt::from(1000),
            golden_times(),
            &cfg,
        )
        .unwrap_err();
        match err {
            Error::NotFoundWithinBudget { stats, .. } => {
                assert!(stats.contains("200 candidates"), "{stats}")
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn iteration_and_hierarchy_agree_on_short_orbits() {
        let t = golden();
        let f = cocycle(11);
        let e = IntervalSet::full();
        let x = QuadSqrt5::from_ratio(3, 7);
        let n = 987u64;
        let hier = Hierarchy::build(&t, Some(&f), 20).unwrap();
        let walk = hier.walk(&x, &BigInt::from(n)).unwrap();
        let (left, right) = continuity_rooms(&t, &x, n).unwrap();
        let (side, radius) = if right > left {
            (Side::Right, right)
        } else {
            (Side::Left, left)
        };
        let gr = GoodReturn {
            recurrence: Recurrence {
                p: 1,
                h_p: BigInt::from(n),
                x: x.clone(),
                n: BigInt::from(n),
                image: walk.point,
                birkhoff: walk.birkhoff.clone(),
            },
            density_gap: QuadSqrt5::one(),
            continuity_side: side,
            continuity_radius: radius,
        };
        let bounds = GoodReturnBounds::from_times(golden_times());
        let d = walk.birkhoff.abs() + QuadSqrt5::one() + QuadSqrt5::one();
        let n_min = BigInt::from(1);
        let by_orbit = SearchConfig {
            brute_force_cap: 10_000,
            ..Default::default()
        };
        let by_towers = SearchConfig {
            brute_force_cap: 0,
            ..Default::default()
        };
        let a = verify_good_return(&t, &f, &e, &d, &n_min, &bounds, &gr, &by_orbit).unwrap();
        let b = verify_good_return(&t, &f, &e, &d, &n_min, &bounds, &gr, &by_towers).unwrap();
        assert_eq!(a.method, "iteration");
        assert_eq!(b.method, "hierarchy");
        assert!(a.passed(), "{a:?}");
        assert!(b.passed(), "{b:?}");
    }
}
