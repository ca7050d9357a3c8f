use std::fmt;

use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{parse_scalar, Scalar};

/// Finite union of disjoint half-open intervals `[a, b) ⊂ [0, 1)`, sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalSet<S> {
    pieces: Vec<(S, S)>,
}

impl<S: Scalar> IntervalSet<S> {
    /// Sorts the pieces and merges touching ones; rejects empty pieces,
    /// overlaps and anything outside `[0, 1)`.
    pub fn new(mut pieces: Vec<(S, S)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::BadConfig("interval set is empty".into()));
        }
        pieces.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("ordered scalars"));
        let mut merged: Vec<(S, S)> = Vec::with_capacity(pieces.len());
        for (a, b) in pieces {
            if a >= b || a < S::zero() || b > S::one() {
                return Err(Error::BadConfig(format!(
                    "[{a}, {b}) is not a non-empty subinterval of [0, 1)"
                )));
            }
            match merged.last_mut() {
                Some(last) if a < last.1 => {
                    return Err(Error::BadConfig(format!(
                        "[{a}, {b}) overlaps [{}, {})",
                        last.0, last.1
                    )))
                }
                Some(last) if a == last.1 => last.1 = b,
                _ => merged.push((a, b)),
            }
        }
        Ok(IntervalSet { pieces: merged })
    }

    pub fn full() -> Self {
        IntervalSet {
            pieces: vec![(S::zero(), S::one())],
        }
    }

    /// Parses `"a:b,c:d"`; endpoints are scalar literals of `S`.
    pub fn parse(s: &str) -> Result<Self> {
        let pieces = s
            .split(',')
            .map(|p| {
                let (a, b) = p.split_once(':').ok_or_else(|| {
                    Error::Parse(format!("interval {p:?} is not of the form a:b"))
                })?;
                Ok((parse_scalar::<S>(a)?, parse_scalar::<S>(b)?))
            })
            .collect::<Result<Vec<_>>>()?;
        IntervalSet::new(pieces)
    }

    pub fn pieces(&self) -> &[(S, S)] {
        &self.pieces
    }

    pub fn contains(&self, x: &S) -> bool {
        let i = self.pieces.partition_point(|(a, _)| a <= x);
        i > 0 && *x < self.pieces[i - 1].1
    }

    pub fn measure(&self) -> S {
        self.pieces
            .iter()
            .fold(S::zero(), |acc, (a, b)| acc + (b.clone() - a.clone()))
    }

    /// A point drawn uniformly from a 53-bit grid, exact in `S`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> S {
        let total = self.measure();
        let k: i64 = rng.gen_range(0..(1i64 << 53));
        let mut t = total * S::from_ratio(k, 1i64 << 53);
        for (a, b) in &self.pieces {
            let len = b.clone() - a.clone();
            if t < len {
                return a.clone() + t;
            }
            t = t - len;
        }
        let (a, _) = self.pieces.last().expect("non-empty");
        a.clone()
    }
}

impl<S: Scalar> fmt::Display for IntervalSet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .pieces
            .iter()
            .map(|(a, b)| format!("{}:{}", a.to_exact_string(), b.to_exact_string()))
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// Serialized in the same `"a:b,c:d"` form that [`IntervalSet::parse`] reads.
impl<S: Scalar> Serialize for IntervalSet<S> {
    fn serialize<Z: Serializer>(&self, z: Z) -> std::result::Result<Z::Ok, Z::Error> {
        z.serialize_str(&self.to_string())
    }
}
