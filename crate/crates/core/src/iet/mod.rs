//! Interval exchange transformations.
//!
//! An IET on `[0, |λ|)` is a permutation pair plus a length vector. Intervals
//! are half-open, so `T` is right-continuous at every breakpoint.

mod descriptor;
mod keane;
mod permutation;
mod sample;

pub use descriptor::{IetDescriptor, ScalarLiteral};
pub use keane::{keane_check, KeaneReport, KeaneStatus};
pub use permutation::{letter_name, Letter, Permutation};
pub use sample::{sample_iet, sample_simplex, SampleConfig};

use crate::error::{Error, Result};
use crate::scalar::{QuadSqrt5, Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Iet<S> {
    perm: Permutation,
    lambda: Vec<S>,
    total: S,
    top_start: Vec<S>,
    bottom_start: Vec<S>,
}

impl<S: Scalar> Iet<S> {
    /// Validates and builds an IET; with `normalize` the lengths are rescaled to sum 1.
    pub fn new(perm: Permutation, lambda: Vec<S>, normalize: bool) -> Result<Self> {
        if lambda.len() != perm.d() {
            return Err(Error::DimensionMismatch {
                expected: perm.d(),
                got: lambda.len(),
            });
        }
        if let Some(letter) = lambda.iter().position(|l| *l <= S::zero()) {
            return Err(Error::NonPositiveLength { letter });
        }
        let mut iet = Iet::from_parts(perm, lambda);
        if normalize {
            let total = iet.total.clone();
            iet = Iet::from_parts(
                iet.perm,
                iet.lambda.into_iter().map(|l| l / total.clone()).collect(),
            );
        }
        Ok(iet)
    }

    /// Like [`Iet::new`] but also rejects reducible permutations.
    pub fn new_irreducible(perm: Permutation, lambda: Vec<S>, normalize: bool) -> Result<Self> {
        perm.ensure_irreducible()?;
        Iet::new(perm, lambda, normalize)
    }

    /// Builds without validation; callers guarantee positive lengths.
    pub(crate) fn from_parts(perm: Permutation, lambda: Vec<S>) -> Self {
        let d = perm.d();
        let mut top_start = vec![S::zero(); d];
        let mut bottom_start = vec![S::zero(); d];
        let mut acc = S::zero();
        for &a in perm.top_order() {
            top_start[a] = acc.clone();
            acc = acc + lambda[a].clone();
        }
        let total = acc;
        let mut acc = S::zero();
        for &a in perm.bottom_order() {
            bottom_start[a] = acc.clone();
            acc = acc + lambda[a].clone();
        }
        Iet {
            perm,
            lambda,
            total,
            top_start,
            bottom_start,
        }
    }

    pub fn d(&self) -> usize {
        self.perm.d()
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    pub fn lambda(&self) -> &[S] {
        &self.lambda
    }

    pub fn total_length(&self) -> &S {
        &self.total
    }

    /// Left endpoint of `I_a` before the exchange.
    pub fn top_start(&self, a: Letter) -> &S {
        &self.top_start[a]
    }

    /// Left endpoint of `T(I_a)`.
    pub fn bottom_start(&self, a: Letter) -> &S {
        &self.bottom_start[a]
    }

    /// Translation applied to `I_a`.
    pub fn translation(&self, a: Letter) -> S {
        self.bottom_start[a].clone() - self.top_start[a].clone()
    }

    pub fn contains(&self, x: &S) -> bool {
        *x >= S::zero() && *x < self.total
    }

    fn check_domain(&self, x: &S) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                value: x.to_exact_string(),
                bound: self.total.to_exact_string(),
            })
        }
    }

    /// Letter whose interval (before exchange) contains `x`; `x` must be in the domain.
    pub fn letter_at(&self, x: &S) -> Letter {
        let order = self.perm.top_order();
        for &a in order.iter().rev() {
            if *x >= self.top_start[a] {
                return a;
            }
        }
        order[0]
    }

    /// Letter whose image interval contains `y`; `y` must be in the domain.
    pub fn image_letter_at(&self, y: &S) -> Letter {
        let order = self.perm.bottom_order();
        for &a in order.iter().rev() {
            if *y >= self.bottom_start[a] {
                return a;
            }
        }
        order[0]
    }

    pub fn apply(&self, x: &S) -> Result<S> {
        self.check_domain(x)?;
        Ok(self.apply_unchecked(x))
    }

    /// `T(x)` without the domain check.
    #[inline]
    pub fn apply_unchecked(&self, x: &S) -> S {
        let a = self.letter_at(x);
        x.clone() - self.top_start[a].clone() + self.bottom_start[a].clone()
    }

    pub fn apply_inverse(&self, y: &S) -> Result<S> {
        self.check_domain(y)?;
        Ok(self.apply_inverse_unchecked(y))
    }

    #[inline]
    pub fn apply_inverse_unchecked(&self, y: &S) -> S {
        let a = self.image_letter_at(y);
        y.clone() - self.bottom_start[a].clone() + self.top_start[a].clone()
    }

    /// `T^n(x)` for any integer `n`.
    pub fn iterate(&self, x: &S, n: i64) -> Result<S> {
        self.check_domain(x)?;
        let mut y = x.clone();
        if n >= 0 {
            for _ in 0..n {
                y = self.apply_unchecked(&y);
            }
        } else {
            for _ in 0..(-n) {
                y = self.apply_inverse_unchecked(&y);
            }
        }
        Ok(y)
    }

    /// The d−1 interior partition points, increasing.
    pub fn discontinuities(&self) -> Vec<S> {
        self.perm.top_order()[1..]
            .iter()
            .map(|&a| self.top_start[a].clone())
            .collect()
    }

    /// Interior breakpoints of `T⁻¹`, increasing.
    pub fn image_discontinuities(&self) -> Vec<S> {
        self.perm.bottom_order()[1..]
            .iter()
            .map(|&a| self.bottom_start[a].clone())
            .collect()
    }

    /// Converts to another scalar type through floats.
    pub fn to_f64(&self) -> Iet<f64> {
        let lambda = self.lambda.iter().map(|l| l.to_f64()).collect();
        Iet::from_parts(self.perm.clone(), lambda)
    }

    /// Rescaled copy with total length 1.
    pub fn normalized(&self) -> Self {
        let t = self.total.clone();
        Iet::from_parts(
            self.perm.clone(),
            self.lambda.iter().map(|l| l.clone() / t.clone()).collect(),
        )
    }
}

impl Iet<QuadSqrt5> {
    /// Two-interval exchange with lengths (φ−1, 2−φ), φ the golden ratio.
    pub fn golden() -> Self {
        let one = QuadSqrt5::one();
        let phi = QuadSqrt5::phi();
        let two = QuadSqrt5::from_i64(2);
        Iet::new(
            Permutation::reversal(2),
            vec![phi.clone() - one, two - phi],
            false,
        )
        .expect("valid")
    }

    /// Self-similar exchange of four intervals under the reversal permutation.
    ///
    /// Rauzy induction follows [`SELF_SIMILAR_LOOP`] forever: each pass
    /// returns to the reversal and scales the lengths by φ⁻⁶. The path matrix
    /// of the loop has eigenvalues φ^{±6} and φ^{±2}, so the top two exponents
    /// of the height cocycle are `6 ln φ` and `2 ln φ` per loop (10 Zorich blocks).
    pub fn self_similar_reversal4() -> Self {
        let lambda = ["9-4*sqrt5", "-13/2+3*sqrt5", "5/2-1*sqrt5", "-4+2*sqrt5"]
            .iter()
            .map(|s| QuadSqrt5::parse_literal(s).expect("literal"))
            .collect();
        Iet::new(Permutation::reversal(4), lambda, false).expect("valid")
    }
}

/// Rauzy types of the loop followed by [`Iet::self_similar_reversal4`] (`T` = top).
pub const SELF_SIMILAR_LOOP: &str = "TTBTTBBTBTBBTTTB";

impl Iet<Rational> {
    /// Rational truncation of the golden IET: lengths (F_{k−1}, F_{k−2}) / F_k.
    ///
    /// Its first `k − 3` Rauzy steps agree with the golden IET; the next one is degenerate.
    pub fn golden_surrogate(k: usize) -> Self {
        assert!(k >= 4, "surrogate depth must be at least 4");
        let fib = fibonacci(k);
        let den = fib[k].clone();
        let lambda = vec![
            Rational::new(fib[k - 1].clone(), den.clone()),
            Rational::new(fib[k - 2].clone(), den),
        ];
        Iet::new(Permutation::reversal(2), lambda, false).expect("valid")
    }
}

impl Iet<f64> {
    /// Float approximation of [`Iet::golden`].
    pub fn golden_f64() -> Self {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        Iet::new(Permutation::reversal(2), vec![phi - 1.0, 2.0 - phi], false).expect("valid")
    }
}

/// Fibonacci numbers F_0..=F_k with F_1 = F_2 = 1.
pub fn fibonacci(k: usize) -> Vec<num_bigint::BigInt> {
    let mut f = vec![num_bigint::BigInt::from(0), num_bigint::BigInt::from(1)];
    while f.len() <= k {
        let n = f.len();
        let next = &f[n - 1] + &f[n - 2];
        f.push(next);
    }
    f.truncate(k + 1);
    f
}
