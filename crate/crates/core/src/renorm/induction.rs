use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use super::path::{successor, winner_loser, Arrow, RauzyPath, StepType};
use super::IntMatrix;
use crate::error::{Error, Result};
use crate::iet::{Iet, Letter};
use crate::scalar::{Scalar, DEFAULT_FLOAT_TOL};

/// Default cap on Rauzy steps inside one Zorich block.
pub const DEFAULT_KAPPA_CAP: usize = 1_000_000;

/// Outcome of comparing the two last intervals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepDecision {
    pub step_type: StepType,
    pub winner: Letter,
    pub loser: Letter,
}

/// Type of the next Rauzy step of `iet`, or `DegenerateLengths` on a tie.
///
/// Exact scalars compare exactly; floats treat `|λ_top − λ_bottom| < tol·|λ|` as a tie.
pub fn step_decision<S: Scalar>(iet: &Iet<S>, tol: f64, step: usize) -> Result<StepDecision> {
    let perm = iet.perm();
    let d = perm.d();
    let top = &iet.lambda()[perm.top_letter(d - 1)];
    let bottom = &iet.lambda()[perm.bottom_letter(d - 1)];
    if top.near(bottom, iet.total_length(), tol) {
        return Err(Error::DegenerateLengths { step });
    }
    let step_type = if top > bottom {
        StepType::Top
    } else {
        StepType::Bottom
    };
    let (winner, loser) = winner_loser(perm, step_type);
    Ok(StepDecision {
        step_type,
        winner,
        loser,
    })
}

/// Applies one Rauzy step to an IET, returning the induced IET on `[0, |λ| − λ_loser)`.
pub fn induce_once<S: Scalar>(
    iet: &Iet<S>,
    tol: f64,
    step: usize,
) -> Result<(Iet<S>, StepDecision)> {
    let dec = step_decision(iet, tol, step)?;
    let mut lambda = iet.lambda().to_vec();
    lambda[dec.winner] = lambda[dec.winner].clone() - lambda[dec.loser].clone();
    let perm = successor(iet.perm(), dec.step_type);
    Ok((Iet::from_parts(perm, lambda), dec))
}

/// One Zorich block: `kappa` consecutive Rauzy steps of the same type.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZorichBlock {
    pub kappa: usize,
    pub step_type: StepType,
    /// Rauzy step index at which the block starts.
    pub start: usize,
    /// Length matrix of the block: `λ_after = B λ_before`.
    pub b: IntMatrix,
    /// Inverse of `b` (non-negative); `Q = factorᵀ` acts on heights.
    pub factor: IntMatrix,
}

impl ZorichBlock {
    /// The dual factor `Q = B* = (B⁻¹)ᵀ`.
    pub fn q(&self) -> IntMatrix {
        self.factor.transpose()
    }
}

/// Snapshot of Rauzy–Veech induction after `step` steps.
#[derive(Clone, Debug)]
pub struct InductionState<S> {
    origin: Iet<S>,
    current: Iet<S>,
    step: usize,
    a_matrix: IntMatrix,
    path: RauzyPath,
    heights: Vec<BigInt>,
    zorich: Vec<ZorichBlock>,
    tol: f64,
}

impl<S: Scalar> InductionState<S> {
    pub fn new(iet: Iet<S>) -> Self {
        let d = iet.d();
        InductionState {
            current: iet.clone(),
            origin: iet,
            step: 0,
            a_matrix: IntMatrix::identity(d),
            path: RauzyPath::empty(d),
            heights: vec![BigInt::one(); d],
            zorich: Vec::new(),
            tol: DEFAULT_FLOAT_TOL,
        }
    }

    /// Sets the float tie tolerance (ignored by exact scalars).
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn origin(&self) -> &Iet<S> {
        &self.origin
    }

    pub fn current(&self) -> &Iet<S> {
        &self.current
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// `A^{(n)}` with `λⁿ = A^{(n)} λ`.
    pub fn a_matrix(&self) -> &IntMatrix {
        &self.a_matrix
    }

    /// `(A^{(n)})⁻¹`, the matrix of the path followed so far.
    pub fn path_matrix(&self) -> &IntMatrix {
        self.path.matrix()
    }

    pub fn path(&self) -> &RauzyPath {
        &self.path
    }

    /// Tower heights `qⁿ = (A^{(n)})^{-T} (1, …, 1)`.
    pub fn heights(&self) -> &[BigInt] {
        &self.heights
    }

    pub fn zorich_blocks(&self) -> &[ZorichBlock] {
        &self.zorich
    }

    /// Type of the next Rauzy step.
    pub fn next_decision(&self) -> Result<StepDecision> {
        step_decision(&self.current, self.tol, self.step)
    }

    pub(crate) fn advance(&mut self) -> Result<StepDecision> {
        let (next, dec) = induce_once(&self.current, self.tol, self.step)?;
        let arrow = Arrow {
            from: self.current.perm().clone(),
            step_type: dec.step_type,
            to: next.perm().clone(),
            winner: dec.winner,
            loser: dec.loser,
        };
        self.path.push_unchecked(arrow);
        self.a_matrix.add_row(dec.winner, dec.loser, -1);
        let hw = self.heights[dec.winner].clone();
        self.heights[dec.loser] += hw;
        self.current = next;
        self.step += 1;
        Ok(dec)
    }

    /// Advances one Zorich block, i.e. `κ` Rauzy steps of the same type.
    pub(crate) fn advance_zorich(&mut self, kappa_cap: usize) -> Result<&ZorichBlock> {
        let d = self.current.d();
        let start = self.step;
        let first = self.advance()?;
        let mut b = IntMatrix::identity(d);
        let mut factor = IntMatrix::identity(d);
        b.add_row(first.winner, first.loser, -1);
        factor.add_col(first.loser, first.winner);
        let mut kappa = 1;
        loop {
            let next = self.next_decision()?;
            if next.step_type != first.step_type {
                break;
            }
            if kappa == kappa_cap {
                return Err(Error::KappaCapExceeded { cap: kappa_cap });
            }
            let dec = self.advance()?;
            b.add_row(dec.winner, dec.loser, -1);
            factor.add_col(dec.loser, dec.winner);
            kappa += 1;
        }
        self.zorich.push(ZorichBlock {
            kappa,
            step_type: first.step_type,
            start,
            b,
            factor,
        });
        Ok(self.zorich.last().expect("just pushed"))
    }

    /// `Σ_α λⁿ_α qⁿ_α`, equal to `|λ|` by the tower partition.
    pub fn tower_area(&self) -> S {
        self.current
            .lambda()
            .iter()
            .zip(&self.heights)
            .fold(S::zero(), |acc, (l, q)| acc + l.clone() * S::from_bigint(q))
    }

    /// `A^{(n)} λ` evaluated in the scalar field.
    pub fn a_times_origin_lambda(&self) -> Vec<S> {
        let d = self.current.d();
        (0..d)
            .map(|r| {
                (0..d).fold(S::zero(), |acc, c| {
                    acc + S::from_bigint(self.a_matrix.get(r, c)) * self.origin.lambda()[c].clone()
                })
            })
            .collect()
    }
}

/// Successor state after one Rauzy–Veech step.
pub fn rauzy_step<S: Scalar>(state: &InductionState<S>) -> Result<InductionState<S>> {
    let mut next = state.clone();
    next.advance()?;
    Ok(next)
}

/// Successor state after one Zorich step; `κ > kappa_cap` is an error.
pub fn zorich_step<S: Scalar>(
    state: &InductionState<S>,
    kappa_cap: usize,
) -> Result<InductionState<S>> {
    let mut next = state.clone();
    next.advance_zorich(kappa_cap)?;
    Ok(next)
}

/// Runs `n` Rauzy steps from `iet`.
pub fn run_rauzy<S: Scalar>(iet: &Iet<S>, n: usize) -> Result<InductionState<S>> {
    let mut state = InductionState::new(iet.clone());
    for _ in 0..n {
        state.advance()?;
    }
    Ok(state)
}

/// Runs `n` Zorich steps from `iet`.
pub fn run_zorich<S: Scalar>(
    iet: &Iet<S>,
    n: usize,
    kappa_cap: usize,
) -> Result<InductionState<S>> {
    let mut state = InductionState::new(iet.clone());
    for _ in 0..n {
        state.advance_zorich(kappa_cap)?;
    }
    Ok(state)
}

/// True iff the first `|γ|` Rauzy steps of `iet` follow `path`.
pub fn delta_membership<S: Scalar>(iet: &Iet<S>, path: &RauzyPath) -> Result<bool> {
    if path.start().is_some_and(|p| p != iet.perm()) {
        return Ok(false);
    }
    let mut cur = iet.clone();
    for (i, arrow) in path.arrows().iter().enumerate() {
        let (next, dec) = induce_once(&cur, DEFAULT_FLOAT_TOL, i)?;
        if dec.step_type != arrow.step_type {
            return Ok(false);
        }
        cur = next;
    }
    Ok(true)
}

/// Shortest prefix of the orbit of `iet`, longer than `min_length`, that is a
/// positive loop whose first and last arrows have opposite types.
pub fn find_loop_path<S: Scalar>(
    iet: &Iet<S>,
    min_length: usize,
    max_steps: usize,
) -> Result<RauzyPath> {
    find_path_where(iet, min_length, max_steps, |p| p.is_positive())
}

pub(crate) fn find_path_where<S: Scalar, F: Fn(&RauzyPath) -> bool>(
    iet: &Iet<S>,
    min_length: usize,
    max_steps: usize,
    accept: F,
) -> Result<RauzyPath> {
    let mut state = InductionState::new(iet.clone());
    let start = iet.perm().clone();
    while state.step() < max_steps {
        state.advance()?;
        let path = state.path();
        if path.len() > min_length
            && path.end() == Some(&start)
            && path.arrows()[0].step_type != path.arrows()[path.len() - 1].step_type
            && accept(path)
        {
            return Ok(path.clone());
        }
    }
    Err(Error::NotFoundWithinBudget {
        what: "loop path".into(),
        stats: format!("{max_steps} Rauzy steps examined"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iet::{sample_iet, Permutation, SampleConfig};
    use crate::renorm::towers::{first_return_pieces, heights_bruteforce};
    use crate::scalar::{QuadSqrt5, Rational};

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn two_thirds_example() {
        let t = Iet::new(Permutation::reversal(2), vec![q(2, 3), q(1, 3)], false).unwrap();
        let s = rauzy_step(&InductionState::new(t)).unwrap();
        assert_eq!(s.path().arrows()[0].step_type, StepType::Bottom);
        assert_eq!(s.current().lambda(), &[q(1, 3), q(1, 3)]);
        assert_eq!(s.heights(), &[BigInt::from(1), BigInt::from(2)]);
        assert_eq!(
            *s.path_matrix(),
            IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]])
        );
        assert_eq!(
            rauzy_step(&s).unwrap_err(),
            Error::DegenerateLengths { step: 1 }
        );
        assert_eq!(rauzy_step(&s).unwrap_err().code(), "DEGENERATE_LENGTHS");
    }

    #[test]
    fn golden_alternates_and_swaps() {
        let s = run_rauzy(&Iet::golden_f64(), 6).unwrap();
        let types = s.path().types();
        assert_eq!(types[0], StepType::Bottom);
        assert!(types.windows(2).all(|w| w[0] != w[1]));
        // normalized lengths swap components each step
        let mut st = InductionState::new(Iet::golden_f64());
        for _ in 0..6 {
            let before = st.current().normalized();
            st.advance().unwrap();
            let after = st.current().normalized();
            assert!((before.lambda()[0] - after.lambda()[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn golden_exact_zorich_blocks_have_kappa_one() {
        let s = run_zorich(&Iet::golden(), 50, 10).unwrap();
        assert!(s.zorich_blocks().iter().all(|b| b.kappa == 1));
        assert_eq!(s.tower_area(), QuadSqrt5::one());
    }

    #[test]
    fn zorich_kappa_matches_continued_fraction() {
        // α = 5/18 = [0; 3, 1, 1, 2]. With lengths (1, α) the first block has
        // a_1 = 3 steps; with (1 − α, α) one subtraction is already spent.
        let alpha = q(5, 18);
        let count = |a0: Rational, b0: Rational| {
            let (mut a, mut n) = (a0, 0);
            while a > b0 {
                a -= b0.clone();
                n += 1;
            }
            n
        };
        for (first, kappa) in [(q(1, 1), 3), (q(13, 18), 2)] {
            let t = Iet::new(
                Permutation::reversal(2),
                vec![first.clone(), alpha.clone()],
                false,
            )
            .unwrap();
            let s = zorich_step(&InductionState::new(t), 100).unwrap();
            assert_eq!(s.zorich_blocks()[0].kappa, kappa);
            assert_eq!(kappa, count(first, alpha.clone()));
        }
    }

    #[test]
    fn kappa_cap_on_near_rational_float() {
        let t = Iet::new(Permutation::reversal(2), vec![0.999, 0.001], false).unwrap();
        let err = zorich_step(&InductionState::new(t), 10).unwrap_err();
        assert_eq!(err, Error::KappaCapExceeded { cap: 10 });
        assert_eq!(err.code(), "KAPPA_CAP_EXCEEDED");
    }

    #[test]
    fn zorich_factors_compose_to_rauzy_product() {
        let t: Iet<Rational> = sample_iet(4, &Permutation::reversal(4), &SampleConfig::default());
        let s = run_zorich(&t, 12, DEFAULT_KAPPA_CAP).unwrap();
        let b_total = s
            .zorich_blocks()
            .iter()
            .fold(IntMatrix::identity(4), |acc, blk| &blk.b * &acc);
        assert_eq!(&b_total, s.a_matrix());
        let f_total = s
            .zorich_blocks()
            .iter()
            .fold(IntMatrix::identity(4), |acc, blk| &acc * &blk.factor);
        assert_eq!(&f_total, s.path_matrix());
        assert_eq!(&(&b_total * &f_total), &IntMatrix::identity(4));
        let kappa: usize = s.zorich_blocks().iter().map(|b| b.kappa).sum();
        assert_eq!(kappa, s.step());
    }

    #[test]
    fn matrix_orbit_duality_and_visits() {
        for seed in 0..6u64 {
            let d = 2 + (seed as usize % 4);
            let t: Iet<Rational> =
                sample_iet(seed, &Permutation::reversal(d), &SampleConfig::default());
            let mut s = InductionState::new(t.clone());
            for n in 1..=8 {
                s.advance().unwrap();
                let cur = s.current();
                let pieces = first_return_pieces(&t, cur.total_length(), 1 << 20).unwrap();
                assert_eq!(pieces.len(), d);
                for p in &pieces {
                    let a = cur.letter_at(&p.left);
                    assert_eq!(*cur.top_start(a), p.left);
                    assert_eq!(s.heights()[a], BigInt::from(p.time), "seed {seed} n {n}");
                    for (beta, v) in p.visits.iter().enumerate() {
                        assert_eq!(*s.path_matrix().get(beta, a), BigInt::from(*v));
                    }
                }
                assert_eq!(s.a_times_origin_lambda(), cur.lambda());
                assert_eq!(s.tower_area(), <Rational as Scalar>::one());
                let bf = heights_bruteforce(&t, cur.total_length(), 1 << 20).unwrap();
                assert_eq!(bf.len(), d);
            }
        }
    }

    #[test]
    fn membership_and_loops() {
        let t: Iet<Rational> = sample_iet(8, &Permutation::reversal(4), &SampleConfig::default());
        let s = run_rauzy(&t, 5).unwrap();
        assert!(delta_membership(&t, s.path()).unwrap());
        let mut types = s.path().types();
        types[0] = types[0].opposite();
        let other = RauzyPath::from_types(t.perm(), &types);
        assert!(!delta_membership(&t, &other).unwrap());

        let g = find_loop_path(&Iet::golden(), 1, 100).unwrap();
        assert_eq!(g.types(), vec![StepType::Bottom, StepType::Top]);
        assert_eq!(*g.matrix(), IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]]));

        let p = find_loop_path(&t, 0, 10_000).unwrap();
        assert!(p.is_positive());
        assert_eq!(p.start(), p.end());
        assert_ne!(p.arrows()[0].step_type, p.arrows()[p.len() - 1].step_type);
        assert!(delta_membership(&t, &p).unwrap());
    }
}
