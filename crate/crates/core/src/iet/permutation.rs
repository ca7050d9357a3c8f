use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Letter of the alphabet, stored as an index `0..d`.
pub type Letter = usize;

/// Display name of a letter: `A`, `B`, ... then `L26`, `L27`, ...
pub fn letter_name(a: Letter) -> String {
    if a < 26 {
        ((b'A' + a as u8) as char).to_string()
    } else {
        format!("L{a}")
    }
}

/// Pair of bijections from the alphabet to positions, before (top) and after
/// (bottom) the exchange. Ranks are stored zero-based.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PermutationRepr", into = "PermutationRepr")]
pub struct Permutation {
    top: Vec<usize>,
    bottom: Vec<usize>,
    top_order: Vec<Letter>,
    bottom_order: Vec<Letter>,
}

/// Serialized form: one-based ranks indexed by letter.
#[derive(Serialize, Deserialize)]
struct PermutationRepr {
    pi0: Vec<usize>,
    pi1: Vec<usize>,
}

impl TryFrom<PermutationRepr> for Permutation {
    type Error = Error;
    fn try_from(r: PermutationRepr) -> Result<Self> {
        Permutation::from_one_based(&r.pi0, &r.pi1)
    }
}

impl From<Permutation> for PermutationRepr {
    fn from(p: Permutation) -> Self {
        let (pi0, pi1) = p.one_based();
        PermutationRepr { pi0, pi1 }
    }
}

fn invert(ranks: &[usize]) -> Option<Vec<Letter>> {
    let d = ranks.len();
    let mut order = vec![usize::MAX; d];
    for (letter, &r) in ranks.iter().enumerate() {
        if r >= d || order[r] != usize::MAX {
            return None;
        }
        order[r] = letter;
    }
    Some(order)
}

impl Permutation {
    /// Builds a permutation from zero-based ranks indexed by letter.
    pub fn new(top: Vec<usize>, bottom: Vec<usize>) -> Result<Self> {
        let d = top.len();
        if d < 2 {
            return Err(Error::NotBijective { d });
        }
        if bottom.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bottom.len(),
            });
        }
        let top_order = invert(&top).ok_or(Error::NotBijective { d })?;
        let bottom_order = invert(&bottom).ok_or(Error::NotBijective { d })?;
        Ok(Permutation {
            top,
            bottom,
            top_order,
            bottom_order,
        })
    }

    /// Builds a permutation from one-based ranks indexed by letter.
    pub fn from_one_based(pi0: &[usize], pi1: &[usize]) -> Result<Self> {
        let shift = |v: &[usize]| -> Result<Vec<usize>> {
            v.iter()
                .map(|&r| r.checked_sub(1).ok_or(Error::NotBijective { d: v.len() }))
                .collect()
        };
        Permutation::new(shift(pi0)?, shift(pi1)?)
    }

    /// Builds a permutation from the letter orders of the two rows.
    pub fn from_orders(top_order: &[Letter], bottom_order: &[Letter]) -> Result<Self> {
        let d = top_order.len();
        let top = invert(top_order).ok_or(Error::NotBijective { d })?;
        let bottom = invert(bottom_order).ok_or(Error::NotBijective { d })?;
        Permutation::new(top, bottom)
    }

    /// Top row in alphabetical order, bottom row reversed: the class of rotations for d = 2.
    pub fn reversal(d: usize) -> Self {
        let top: Vec<usize> = (0..d).collect();
        let bottom: Vec<usize> = (0..d).rev().collect();
        Permutation::new(top, bottom).expect("reversal is bijective")
    }

    pub fn d(&self) -> usize {
        self.top.len()
    }

    /// Zero-based position of `a` before the exchange.
    pub fn top_rank(&self, a: Letter) -> usize {
        self.top[a]
    }

    /// Zero-based position of `a` after the exchange.
    pub fn bottom_rank(&self, a: Letter) -> usize {
        self.bottom[a]
    }

    pub fn top_letter(&self, rank: usize) -> Letter {
        self.top_order[rank]
    }

    pub fn bottom_letter(&self, rank: usize) -> Letter {
        self.bottom_order[rank]
    }

    pub fn top_order(&self) -> &[Letter] {
        &self.top_order
    }

    pub fn bottom_order(&self) -> &[Letter] {
        &self.bottom_order
    }

    pub fn one_based(&self) -> (Vec<usize>, Vec<usize>) {
        (
            self.top.iter().map(|r| r + 1).collect(),
            self.bottom.iter().map(|r| r + 1).collect(),
        )
    }

    /// Smallest k in 1..d whose first k top letters are also the first k bottom letters.
    pub fn invariant_prefix(&self) -> Option<usize> {
        let mut max_bottom = 0;
        for k in 1..self.d() {
            max_bottom = max_bottom.max(self.bottom[self.top_order[k - 1]]);
            if max_bottom == k - 1 {
                return Some(k);
            }
        }
        None
    }

    pub fn is_irreducible(&self) -> bool {
        self.invariant_prefix().is_none()
    }

    pub fn ensure_irreducible(&self) -> Result<()> {
        match self.invariant_prefix() {
            Some(k) => Err(Error::ReduciblePermutation { k }),
            None => Ok(()),
        }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |order: &[Letter]| {
            order
                .iter()
                .map(|&a| letter_name(a))
                .collect::<Vec<_>>()
                .join(" ")
        };
        write!(
            f,
            "({} / {})",
            row(&self.top_order),
            row(&self.bottom_order)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_reducible(p: &Permutation) -> bool {
        (1..p.d()).any(|k| {
            let top: std::collections::BTreeSet<_> = p.top_order()[..k].iter().collect();
            let bottom: std::collections::BTreeSet<_> = p.bottom_order()[..k].iter().collect();
            top == bottom
        })
    }

    fn all_perms(d: usize) -> Vec<Vec<usize>> {
        if d == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in all_perms(d - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, d - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn irreducibility_matches_brute_force_up_to_six() {
        for d in 2..=6 {
            let top: Vec<usize> = (0..d).collect();
            for bottom in all_perms(d) {
                let p = Permutation::from_orders(&top, &bottom).unwrap();
                assert_eq!(p.is_irreducible(), !brute_reducible(&p), "{p}");
            }
        }
    }

    #[test]
    fn identity_is_reducible_and_reversal_is_not() {
        let id = Permutation::new(vec![0, 1], vec![0, 1]).unwrap();
        assert_eq!(
            id.ensure_irreducible(),
            Err(Error::ReduciblePermutation { k: 1 })
        );
        for d in 2..8 {
            assert!(Permutation::reversal(d).is_irreducible());
        }
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(matches!(
            Permutation::new(vec![0, 0], vec![0, 1]),
            Err(Error::NotBijective { .. })
        ));
        assert!(matches!(
            Permutation::from_one_based(&[1, 3], &[2, 1]),
            Err(Error::NotBijective { .. })
        ));
        assert!(Permutation::new(vec![0], vec![0]).is_err());
    }

    #[test]
    fn serde_uses_one_based_ranks() {
        let p = Permutation::reversal(3);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"pi0":[1,2,3],"pi1":[3,2,1]}"#);
        let back: Permutation = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
