//! Mean-zero step cocycles on `[0, 1)`, their jumps, nudging, and the skew product.
//!
//! A cocycle is stored as `segment_lengths` and `values`: the function equals
//! `values[i]` on the `i`-th segment `[s_i, s_i + segment_lengths[i])`. Both
//! conventions for naming these vectors (lengths called `p` and values `q`, or
//! the reverse) map onto these two fields.

mod sample;
mod skew;

pub use sample::{sample_cocycle, REJECTION_BUDGET};
pub use skew::{
    birkhoff_sum, coboundary, skew_apply, skew_orbit, strip_first_return, StepFunction, StripPoint,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iet::ScalarLiteral;
use crate::scalar::{continued_fraction, continued_fraction_f64, ser_exact_vec, Rational, Scalar};

/// Partial-quotient depth above which a ratio of jumps is treated as irrational.
pub const DENSE_CF_DEPTH: usize = 10;

/// Absolute tolerance for the float-mode normalization and mean-zero checks.
pub const FLOAT_CONSTRAINT_TOL: f64 = 1e-9;

/// `f = Σ values[i] · χ_{segment i}` with `Σ lengths = 1`, `⟨lengths, values⟩ = 0`,
/// and `max |values| ≤ bound`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct StepCocycle<S> {
    #[serde(serialize_with = "ser_exact_vec")]
    segment_lengths: Vec<S>,
    #[serde(serialize_with = "ser_exact_vec")]
    values: Vec<S>,
    #[serde(serialize_with = "crate::scalar::ser_exact")]
    bound: S,
    #[serde(skip)]
    starts: Vec<S>,
}

impl<S: Scalar> StepCocycle<S> {
    /// Validates the three constraints (exactly for exact scalars).
    pub fn new(segment_lengths: Vec<S>, values: Vec<S>, bound: S) -> Result<Self> {
        if segment_lengths.is_empty() || segment_lengths.len() != values.len() {
            return Err(Error::InvalidCocycle(format!(
                "{} lengths for {} values",
                segment_lengths.len(),
                values.len()
            )));
        }
        if let Some(i) = segment_lengths.iter().position(|l| *l <= S::zero()) {
            return Err(Error::InvalidCocycle(format!(
                "segment {i} has non-positive length"
            )));
        }
        let total = segment_lengths.iter().fold(S::zero(), |a, l| a + l.clone());
        let mean = segment_lengths
            .iter()
            .zip(&values)
            .fold(S::zero(), |a, (l, v)| a + l.clone() * v.clone());
        if !constraint_holds(&total, &S::one()) {
            return Err(Error::InvalidCocycle(format!(
                "segment lengths sum to {total}, not 1"
            )));
        }
        if !constraint_holds(&mean, &S::zero()) {
            return Err(Error::InvalidCocycle(format!("mean is {mean}, not 0")));
        }
        if let Some(v) = values.iter().find(|v| v.abs() > bound) {
            return Err(Error::ValueBoundExceeded {
                value: v.to_exact_string(),
                bound: bound.to_exact_string(),
            });
        }
        let mut starts = Vec::with_capacity(values.len());
        let mut acc = S::zero();
        for l in &segment_lengths {
            starts.push(acc.clone());
            acc = acc + l.clone();
        }
        Ok(StepCocycle {
            segment_lengths,
            values,
            bound,
            starts,
        })
    }

    /// Number of interior discontinuities (`m` in `C_{m,M}`).
    pub fn m(&self) -> usize {
        self.values.len() - 1
    }

    pub fn segment_lengths(&self) -> &[S] {
        &self.segment_lengths
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn bound(&self) -> &S {
        &self.bound
    }

    /// Left endpoints of the segments; the first is 0.
    pub fn starts(&self) -> &[S] {
        &self.starts
    }

    /// Interior discontinuity positions.
    pub fn discontinuities(&self) -> &[S] {
        &self.starts[1..]
    }

    /// Shortest segment length (`Γ`).
    pub fn min_length(&self) -> S {
        self.segment_lengths
            .iter()
            .skip(1)
            .fold(self.segment_lengths[0].clone(), |a, l| {
                S::min_of(&a, l).clone()
            })
    }

    pub fn eval(&self, x: &S) -> Result<S> {
        if x.is_negative() || *x >= S::one() {
            return Err(Error::OutOfDomain {
                value: x.to_exact_string(),
                bound: "1".into(),
            });
        }
        Ok(self.eval_unchecked(x).clone())
    }

    /// Value on the segment containing `x`; breakpoints belong to the right segment.
    #[inline]
    pub fn eval_unchecked(&self, x: &S) -> &S {
        let i = self.starts.partition_point(|s| s <= x).saturating_sub(1);
        &self.values[i]
    }

    /// Index of the segment containing `x`.
    pub fn segment_at(&self, x: &S) -> usize {
        self.starts.partition_point(|s| s <= x).saturating_sub(1)
    }

    /// `σ_i = values[i+1] − values[i]`.
    pub fn jumps(&self) -> Jumps<S> {
        let sigma: Vec<S> = self
            .values
            .windows(2)
            .map(|w| w[1].clone() - w[0].clone())
            .collect();
        let dense = jumps_generate_dense(&sigma);
        Jumps { sigma, dense }
    }

    /// Total variation `Σ |σ_i|`.
    pub fn variation(&self) -> S {
        self.jumps()
            .sigma
            .iter()
            .fold(S::zero(), |a, s| a + s.abs())
    }

    /// Moves discontinuity `i` (0-based: between segments `i` and `i+1`) by `zeta`
    /// and corrects `values[i+1]` so that the mean stays zero.
    pub fn nudge(&self, i: usize, zeta: &S) -> Result<Self> {
        if i >= self.m() {
            return Err(Error::InvalidCocycle(format!(
                "discontinuity index {i} out of range 0..{}",
                self.m()
            )));
        }
        let half_gamma = self.min_length() / S::from_i64(2);
        if zeta.abs() >= half_gamma {
            return Err(Error::ZetaTooLarge {
                zeta: zeta.to_exact_string(),
                half_gamma: half_gamma.to_exact_string(),
            });
        }
        let mut lengths = self.segment_lengths.clone();
        let mut values = self.values.clone();
        let (li, vi) = (lengths[i + 1].clone(), values[i].clone());
        let corrected =
            (values[i + 1].clone() * li.clone() - zeta.clone() * vi) / (li - zeta.clone());
        lengths[i] = lengths[i].clone() + zeta.clone();
        lengths[i + 1] = lengths[i + 1].clone() - zeta.clone();
        values[i + 1] = corrected;
        StepCocycle::new(lengths, values, self.bound.clone())
    }

    /// l∞ distance between the parameter vectors `(lengths, values)`.
    pub fn parameter_distance(&self, other: &Self) -> S {
        self.segment_lengths
            .iter()
            .zip(&other.segment_lengths)
            .chain(self.values.iter().zip(&other.values))
            .fold(S::zero(), |a, (x, y)| {
                S::max_of(&a, &(x.clone() - y.clone()).abs()).clone()
            })
    }

    /// Converts every entry with `conv`, revalidating in the target type.
    pub fn map_scalar<T: Scalar>(&self, conv: impl Fn(&S) -> T) -> Result<StepCocycle<T>> {
        StepCocycle::new(
            self.segment_lengths.iter().map(&conv).collect(),
            self.values.iter().map(&conv).collect(),
            conv(&self.bound),
        )
    }

    pub fn to_f64(&self) -> StepCocycle<f64> {
        self.map_scalar(|v| v.to_f64())
            .expect("float image of a valid cocycle is valid")
    }
}

impl StepCocycle<Rational> {
    /// The same cocycle over another exact or float scalar field.
    pub fn to_scalar<T: Scalar>(&self) -> StepCocycle<T> {
        self.map_scalar(T::from_rational)
            .expect("field embedding preserves the constraints")
    }
}

fn constraint_holds<S: Scalar>(value: &S, target: &S) -> bool {
    if S::EXACT {
        value == target
    } else {
        (value.to_f64() - target.to_f64()).abs() <= FLOAT_CONSTRAINT_TOL
    }
}

/// Jumps `σ_i(f)` and whether they plausibly generate a dense subgroup of ℝ.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct Jumps<S> {
    #[serde(serialize_with = "ser_exact_vec")]
    pub sigma: Vec<S>,
    pub dense: bool,
}

/// Dense iff some ratio `σ_i / σ_j` is irrational: an exact witness in Q(√5),
/// otherwise a continued-fraction depth of at least [`DENSE_CF_DEPTH`].
fn jumps_generate_dense<S: Scalar>(sigma: &[S]) -> bool {
    let nonzero: Vec<&S> = sigma.iter().filter(|s| !s.is_zero()).collect();
    for (a, x) in nonzero.iter().enumerate() {
        for y in &nonzero[a + 1..] {
            let ratio = ((*x).clone() / (*y).clone()).abs();
            let deep = if S::EXACT {
                match ratio.as_rational() {
                    Some(r) => continued_fraction(&r, DENSE_CF_DEPTH + 1).len() > DENSE_CF_DEPTH,
                    None => true,
                }
            } else {
                continued_fraction_f64(ratio.to_f64(), DENSE_CF_DEPTH + 1, 1e-9).len()
                    > DENSE_CF_DEPTH
            };
            if deep {
                return true;
            }
        }
    }
    false
}

/// JSON form of a cocycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleDescriptor {
    pub m: usize,
    pub lengths: Vec<ScalarLiteral>,
    pub values: Vec<ScalarLiteral>,
    #[serde(rename = "M")]
    pub bound: ScalarLiteral,
}

impl CocycleDescriptor {
    pub fn build<S: Scalar>(&self) -> Result<StepCocycle<S>> {
        if self.lengths.len() != self.m + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.m + 1,
                got: self.lengths.len(),
            });
        }
        StepCocycle::new(
            self.lengths
                .iter()
                .map(|l| l.parse())
                .collect::<Result<_>>()?,
            self.values
                .iter()
                .map(|l| l.parse())
                .collect::<Result<_>>()?,
            self.bound.parse()?,
        )
    }

    pub fn from_cocycle<S: Scalar>(f: &StepCocycle<S>) -> Self {
        CocycleDescriptor {
            m: f.m(),
            lengths: f
                .segment_lengths()
                .iter()
                .map(ScalarLiteral::from_scalar)
                .collect(),
            values: f.values().iter().map(ScalarLiteral::from_scalar).collect(),
            bound: ScalarLiteral::from_scalar(f.bound()),
        }
    }
}
