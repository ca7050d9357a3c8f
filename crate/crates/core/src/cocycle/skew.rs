use serde::Serialize;

use super::StepCocycle;
use crate::error::{Error, Result};
use crate::iet::Iet;
use crate::scalar::{ser_exact, Accumulator, Scalar};

/// A point `(x, t)` of the strip `[0, 1) × ℝ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct StripPoint<S> {
    #[serde(serialize_with = "ser_exact")]
    pub x: S,
    #[serde(serialize_with = "ser_exact")]
    pub t: S,
}

impl<S: Scalar> StripPoint<S> {
    pub fn new(x: S, t: S) -> Self {
        StripPoint { x, t }
    }
}

/// `S_n f(x)`: `Σ_{i<n} f(Tⁱx)` for `n > 0`, `0` for `n = 0`, and
/// `−Σ_{i=n}^{−1} f(Tⁱx)` for `n < 0`.
pub fn birkhoff_sum<S: Scalar>(iet: &Iet<S>, f: &StepCocycle<S>, x: &S, n: i64) -> Result<S> {
    if !iet.contains(x) {
        return Err(Error::OutOfDomain {
            value: x.to_exact_string(),
            bound: iet.total_length().to_exact_string(),
        });
    }
    let mut acc = S::Acc::default();
    let mut y = x.clone();
    if n >= 0 {
        for _ in 0..n {
            acc.add(f.eval_unchecked(&y));
            y = iet.apply_unchecked(&y);
        }
        Ok(acc.value())
    } else {
        for _ in 0..(-n) {
            y = iet.apply_inverse_unchecked(&y);
            acc.add(f.eval_unchecked(&y));
        }
        Ok(-acc.value())
    }
}

/// `T_fⁿ(x, t) = (Tⁿx, t + S_n f(x))` for any integer `n`.
pub fn skew_apply<S: Scalar>(
    iet: &Iet<S>,
    f: &StepCocycle<S>,
    p: &StripPoint<S>,
    n: i64,
) -> Result<StripPoint<S>> {
    let s = birkhoff_sum(iet, f, &p.x, n)?;
    Ok(StripPoint {
        x: iet.iterate(&p.x, n)?,
        t: p.t.clone() + s,
    })
}

/// The forward skew orbit `(k, x_k, t_k)` for `k = 0..=n`.
pub fn skew_orbit<S: Scalar>(
    iet: &Iet<S>,
    f: &StepCocycle<S>,
    p: &StripPoint<S>,
    n: u64,
) -> Result<Vec<(u64, S, S)>> {
    if !iet.contains(&p.x) {
        return Err(Error::OutOfDomain {
            value: p.x.to_exact_string(),
            bound: iet.total_length().to_exact_string(),
        });
    }
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut x = p.x.clone();
    let mut acc = S::Acc::default();
    out.push((0, x.clone(), p.t.clone()));
    for k in 1..=n {
        acc.add(f.eval_unchecked(&x));
        x = iet.apply_unchecked(&x);
        out.push((k, x.clone(), p.t.clone() + acc.value()));
    }
    Ok(out)
}

/// First return of `T_f` to the band `[0, 1) × [−N, N]`: the smallest `k ≥ 1`
/// with `|t + S_k f(x)| ≤ N`, and the point reached.
pub fn strip_first_return<S: Scalar>(
    iet: &Iet<S>,
    f: &StepCocycle<S>,
    p: &StripPoint<S>,
    band: &S,
    cap: u64,
) -> Result<(StripPoint<S>, u64)> {
    if p.t.abs() > *band {
        return Err(Error::OutOfDomain {
            value: p.t.to_exact_string(),
            bound: band.to_exact_string(),
        });
    }
    if !iet.contains(&p.x) {
        return Err(Error::OutOfDomain {
            value: p.x.to_exact_string(),
            bound: iet.total_length().to_exact_string(),
        });
    }
    let mut x = p.x.clone();
    let mut acc = S::Acc::default();
    for k in 1..=cap {
        acc.add(f.eval_unchecked(&x));
        x = iet.apply_unchecked(&x);
        let t = p.t.clone() + acc.value();
        if t.abs() <= *band {
            return Ok((StripPoint { x, t }, k));
        }
    }
    Err(Error::CapExceeded { cap })
}

/// A step function on `[0, 1)` with no mean constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction<S> {
    starts: Vec<S>,
    values: Vec<S>,
}

impl<S: Scalar> StepFunction<S> {
    /// `starts` must begin at 0 and increase strictly.
    pub fn new(starts: Vec<S>, values: Vec<S>) -> Result<Self> {
        if starts.is_empty() || starts.len() != values.len() || !starts[0].is_zero() {
            return Err(Error::InvalidCocycle(
                "step function needs matching starts beginning at 0".into(),
            ));
        }
        if starts.windows(2).any(|w| w[0] >= w[1]) || starts.last().is_some_and(|s| *s >= S::one())
        {
            return Err(Error::InvalidCocycle(
                "step function starts must increase inside [0, 1)".into(),
            ));
        }
        Ok(StepFunction { starts, values })
    }

    pub fn eval(&self, x: &S) -> &S {
        let i = self.starts.partition_point(|s| s <= x).saturating_sub(1);
        &self.values[i]
    }

    /// `‖g‖_∞`.
    pub fn sup_norm(&self) -> S {
        self.values
            .iter()
            .fold(S::zero(), |a, v| S::max_of(&a, &v.abs()).clone())
    }
}

/// The coboundary `f = g∘T − g` as a step cocycle with bound `‖f‖_∞`.
///
/// Its Birkhoff sums telescope: `S_n f(x) = g(Tⁿx) − g(x)`.
pub fn coboundary<S: Scalar>(iet: &Iet<S>, g: &StepFunction<S>) -> Result<StepCocycle<S>> {
    if *iet.total_length() != S::one() {
        return Err(Error::InvalidCocycle(
            "coboundaries need an IET on [0, 1)".into(),
        ));
    }
    let mut cuts: Vec<S> = iet.discontinuities();
    for b in &g.starts[1..] {
        cuts.push(b.clone());
        cuts.push(iet.apply_inverse_unchecked(b));
    }
    cuts.retain(|c| !c.is_zero());
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("ordered scalars"));
    cuts.dedup();
    let mut starts = vec![S::zero()];
    starts.extend(cuts);
    let mut lengths = Vec::new();
    let mut values: Vec<S> = Vec::new();
    for (k, s) in starts.iter().enumerate() {
        let end = starts.get(k + 1).cloned().unwrap_or_else(S::one);
        let v = g.eval(&iet.apply_unchecked(s)).clone() - g.eval(s).clone();
        match values.last() {
            Some(last) if *last == v => {
                let l = lengths.pop().expect("parallel vectors");
                lengths.push(l + end - s.clone());
            }
            _ => {
                lengths.push(end - s.clone());
                values.push(v);
            }
        }
    }
    let bound = values
        .iter()
        .fold(S::zero(), |a, v| S::max_of(&a, &v.abs()).clone());
    StepCocycle::new(lengths, values, bound)
}
