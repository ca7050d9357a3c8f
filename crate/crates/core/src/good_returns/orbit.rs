use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iet::Iet;
use crate::scalar::Scalar;

/// Which closed one-sided neighbourhood of a point is meant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `[x − r, x]`
    Left,
    /// `[x, x + r]`
    Right,
}

fn check_domain<S: Scalar>(iet: &Iet<S>, x: &S) -> Result<()> {
    if iet.contains(x) {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            value: x.to_exact_string(),
            bound: iet.total_length().to_exact_string(),
        })
    }
}

/// Largest gap of `{Tⁱx}_{i<n}` in `[0, |λ|)`, counting the two boundary gaps.
/// A set is `ε`-dense exactly when this is at most `ε`.
pub fn orbit_density_gap<S: Scalar>(iet: &Iet<S>, x: &S, n: u64) -> Result<S> {
    check_domain(iet, x)?;
    let mut points = Vec::with_capacity(n as usize);
    let mut y = x.clone();
    for _ in 0..n {
        let next = iet.apply_unchecked(&y);
        points.push(y);
        y = next;
    }
    Ok(max_gap(points, iet.total_length()))
}

/// Largest gap of `points` in `[0, total)`, boundary gaps included.
pub fn max_gap<S: Scalar>(mut points: Vec<S>, total: &S) -> S {
    points.sort_by(|a, b| a.partial_cmp(b).expect("ordered scalars"));
    let Some(first) = points.first() else {
        return total.clone();
    };
    let mut worst = first.clone();
    for w in points.windows(2) {
        worst = S::max_of(&worst, &(w[1].clone() - w[0].clone())).clone();
    }
    let tail = total.clone() - points.last().expect("non-empty").clone();
    S::max_of(&worst, &tail).clone()
}

/// Room on either side of `x` on which `Tⁿ` is a translation:
/// `[x − r, x]` works for `r ≤ left`, `[x, x + r]` for `r < right`.
pub fn continuity_rooms<S: Scalar>(iet: &Iet<S>, x: &S, n: u64) -> Result<(S, S)> {
    check_domain(iet, x)?;
    let mut left: Option<S> = None;
    let mut right: Option<S> = None;
    let mut y = x.clone();
    for _ in 0..n.max(1) {
        let a = iet.letter_at(&y);
        let l = y.clone() - iet.top_start(a).clone();
        let r = iet.top_start(a).clone() + iet.lambda()[a].clone() - y.clone();
        left = Some(left.map_or(l.clone(), |v| S::min_of(&v, &l).clone()));
        right = Some(right.map_or(r.clone(), |v| S::min_of(&v, &r).clone()));
        y = y + iet.translation(a);
    }
    Ok((left.expect("n ≥ 1"), right.expect("n ≥ 1")))
}

/// The side with more room for `Tⁿ` to stay continuous, and that room: the
/// distance from `x` to the nearest breakpoint of `Tⁿ` on that side. For
/// `n = 0` the map is the identity and the rooms of `T` are reported.
pub fn continuity_interval<S: Scalar>(iet: &Iet<S>, x: &S, n: u64) -> Result<(Side, S)> {
    let (left, right) = continuity_rooms(iet, x, n)?;
    Ok(if right > left {
        (Side::Right, right)
    } else {
        (Side::Left, left)
    })
}
