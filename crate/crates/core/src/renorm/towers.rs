use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::matrix::ser_bigint;
use super::InductionState;
use crate::error::{Error, Result};
use crate::iet::{Iet, Letter};
use crate::scalar::{ser_exact, Scalar};

/// One continuity piece of the first-return map to `[0, c)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct ReturnPiece<S> {
    #[serde(serialize_with = "ser_exact")]
    pub left: S,
    #[serde(serialize_with = "ser_exact")]
    pub right: S,
    /// Left endpoint of the image under the return map.
    #[serde(serialize_with = "ser_exact")]
    pub image_left: S,
    pub time: u64,
    /// Letter of the interval of `T` containing the piece.
    pub letter: Letter,
    /// `visits[β]`: number of iterates `T^i(piece)`, `0 ≤ i < time`, inside `I_β`.
    pub visits: Vec<u64>,
}

struct Pending<S> {
    left: S,
    right: S,
    shift: S,
    time: u64,
    letter: Letter,
    visits: Vec<u64>,
}

/// First-return map of `iet` to `[0, c)`, computed by pushing intervals forward
/// and splitting them at breakpoints of `T` and at `c`. Pieces are sorted by
/// left endpoint.
pub fn first_return_pieces<S: Scalar>(
    iet: &Iet<S>,
    c: &S,
    horizon: u64,
) -> Result<Vec<ReturnPiece<S>>> {
    let d = iet.d();
    let mut pending: Vec<Pending<S>> = Vec::new();
    for &a in iet.perm().top_order() {
        let left = iet.top_start(a).clone();
        if left >= *c {
            break;
        }
        let end = left.clone() + iet.lambda()[a].clone();
        let right = S::min_of(&end, c).clone();
        pending.push(Pending {
            left,
            right,
            shift: S::zero(),
            time: 0,
            letter: a,
            visits: vec![0; d],
        });
    }
    let mut done = Vec::new();
    while let Some(p) = pending.pop() {
        if p.time >= horizon {
            return Err(Error::HorizonExceeded { horizon });
        }
        // current image of the domain piece
        let cur_left = p.left.clone() + p.shift.clone();
        let cur_right = p.right.clone() + p.shift.clone();
        let mut cursor = cur_left;
        while cursor < cur_right {
            let beta = iet.letter_at(&cursor);
            let end_beta = iet.top_start(beta).clone() + iet.lambda()[beta].clone();
            let seg_right = S::min_of(&end_beta, &cur_right).clone();
            let mut visits = p.visits.clone();
            visits[beta] += 1;
            let shift = p.shift.clone() + iet.translation(beta);
            let img_left = cursor.clone() + iet.translation(beta);
            let img_right = seg_right.clone() + iet.translation(beta);
            let dom_left = cursor.clone() - p.shift.clone();
            let dom_right = seg_right.clone() - p.shift.clone();
            if img_left < *c {
                let split = S::min_of(&img_right, c).clone();
                let dom_split = split.clone() - shift.clone();
                done.push(ReturnPiece {
                    left: dom_left.clone(),
                    right: dom_split.clone(),
                    image_left: img_left.clone(),
                    time: p.time + 1,
                    letter: p.letter,
                    visits: visits.clone(),
                });
                if img_right > *c {
                    pending.push(Pending {
                        left: dom_split,
                        right: dom_right,
                        shift,
                        time: p.time + 1,
                        letter: p.letter,
                        visits,
                    });
                }
            } else {
                pending.push(Pending {
                    left: dom_left,
                    right: dom_right,
                    shift,
                    time: p.time + 1,
                    letter: p.letter,
                    visits,
                });
            }
            cursor = seg_right;
        }
    }
    done.sort_by(|a, b| a.left.partial_cmp(&b.left).expect("ordered scalars"));
    Ok(done)
}

/// Return times of the continuity pieces of the first-return map to `[0, c)`,
/// left to right, by direct iteration.
pub fn heights_bruteforce<S: Scalar>(iet: &Iet<S>, c: &S, horizon: u64) -> Result<Vec<u64>> {
    Ok(first_return_pieces(iet, c, horizon)?
        .into_iter()
        .map(|p| p.time)
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct Tower<S> {
    pub letter: Letter,
    #[serde(serialize_with = "ser_exact")]
    pub base_left: S,
    #[serde(serialize_with = "ser_exact")]
    pub base_right: S,
    #[serde(serialize_with = "ser_bigint")]
    pub height: BigInt,
}

/// Rokhlin towers over the intervals of an induced IET.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct TowerDecomposition<S> {
    pub towers: Vec<Tower<S>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct Floor<S> {
    pub letter: Letter,
    pub level: u64,
    #[serde(serialize_with = "ser_exact")]
    pub left: S,
    #[serde(serialize_with = "ser_exact")]
    pub right: S,
}

impl<S: Scalar> TowerDecomposition<S> {
    /// `Σ_α |base_α| · height_α`.
    pub fn area(&self) -> S {
        self.towers.iter().fold(S::zero(), |acc, t| {
            acc + (t.base_right.clone() - t.base_left.clone()) * S::from_bigint(&t.height)
        })
    }

    pub fn total_floors(&self) -> BigInt {
        self.towers.iter().map(|t| t.height.clone()).sum()
    }

    /// Enumerates every floor `T^i(base_α)`; `cap` bounds the total number of floors.
    ///
    /// Fails with `HorizonExceeded` if some floor is not an interval of
    /// continuity of `T` (or the cap is hit).
    pub fn floors(&self, iet: &Iet<S>, cap: u64) -> Result<Vec<Floor<S>>> {
        let total = self.total_floors().to_u64().unwrap_or(u64::MAX);
        if total > cap {
            return Err(Error::HorizonExceeded { horizon: cap });
        }
        let mut out = Vec::with_capacity(total as usize);
        for t in &self.towers {
            let h = t.height.to_u64().expect("checked above");
            let mut left = t.base_left.clone();
            let len = t.base_right.clone() - t.base_left.clone();
            for i in 0..h {
                out.push(Floor {
                    letter: t.letter,
                    level: i,
                    left: left.clone(),
                    right: left.clone() + len.clone(),
                });
                if i + 1 < h {
                    let beta = iet.letter_at(&left);
                    let end = iet.top_start(beta).clone() + iet.lambda()[beta].clone();
                    if left.clone() + len.clone() > end {
                        return Err(Error::HorizonExceeded { horizon: i });
                    }
                    left = left + iet.translation(beta);
                }
            }
        }
        Ok(out)
    }

    /// True when the floors tile `[0, |I|)` exactly: sorted, contiguous, no overlap.
    pub fn verify_partition(&self, iet: &Iet<S>, cap: u64) -> Result<bool> {
        let mut floors = self.floors(iet, cap)?;
        floors.sort_by(|a, b| a.left.partial_cmp(&b.left).expect("ordered scalars"));
        let mut cursor = S::zero();
        for f in &floors {
            if f.left != cursor {
                return Ok(false);
            }
            cursor = f.right.clone();
        }
        Ok(cursor == *iet.total_length())
    }
}

/// Towers over the intervals of the current induced IET of `state`.
pub fn towers<S: Scalar>(state: &InductionState<S>) -> TowerDecomposition<S> {
    let cur = state.current();
    let towers = (0..cur.d())
        .map(|a| Tower {
            letter: a,
            base_left: cur.top_start(a).clone(),
            base_right: cur.top_start(a).clone() + cur.lambda()[a].clone(),
            height: state.heights()[a].clone(),
        })
        .collect();
    TowerDecomposition { towers }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iet::Permutation;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn return_times_to_two_thirds() {
        let t = Iet::new(Permutation::reversal(2), vec![q(2, 3), q(1, 3)], false).unwrap();
        assert_eq!(heights_bruteforce(&t, &q(2, 3), 100).unwrap(), vec![1, 2]);
        let pieces = first_return_pieces(&t, &q(2, 3), 100).unwrap();
        assert_eq!(pieces[1].left, q(1, 3));
        assert_eq!(pieces[1].visits, vec![1, 1]);
    }

    #[test]
    fn full_interval_returns_immediately() {
        let t = Iet::new(
            Permutation::reversal(4),
            vec![q(1, 10), q(2, 10), q(3, 10), q(4, 10)],
            false,
        )
        .unwrap();
        assert_eq!(heights_bruteforce(&t, &q(1, 1), 10).unwrap(), vec![1; 4]);
    }

    #[test]
    fn horizon_is_enforced() {
        let t = Iet::new(
            Permutation::reversal(2),
            vec![q(999, 1000), q(1, 1000)],
            false,
        )
        .unwrap();
        assert!(matches!(
            heights_bruteforce(&t, &q(1, 1000), 10),
            Err(Error::HorizonExceeded { .. })
        ));
        assert_eq!(
            heights_bruteforce(&t, &q(1, 1000), 2000).unwrap(),
            vec![1000]
        );
    }
}
