use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use super::towers::first_return_pieces;
use super::IntMatrix;
use crate::error::{Error, Result};
use crate::iet::{Iet, Letter, Permutation};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepType {
    #[serde(rename = "T")]
    Top,
    #[serde(rename = "B")]
    Bottom,
}

impl StepType {
    pub fn opposite(self) -> Self {
        match self {
            StepType::Top => StepType::Bottom,
            StepType::Bottom => StepType::Top,
        }
    }
}

impl fmt::Display for StepType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepType::Top => "T",
            StepType::Bottom => "B",
        })
    }
}

/// Winner and loser letters of a step of the given type at `perm`.
///
/// Top: the last top letter wins against the last bottom letter; Bottom: the reverse.
pub fn winner_loser(perm: &Permutation, ty: StepType) -> (Letter, Letter) {
    let d = perm.d();
    let top_last = perm.top_letter(d - 1);
    let bottom_last = perm.bottom_letter(d - 1);
    match ty {
        StepType::Top => (top_last, bottom_last),
        StepType::Bottom => (bottom_last, top_last),
    }
}

type SuccessorCache = RwLock<HashMap<(Permutation, StepType), Permutation>>;

fn cache() -> &'static SuccessorCache {
    static CACHE: OnceLock<SuccessorCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Permutation reached from `perm` by a step of type `ty`.
///
/// Computed once per `(perm, ty)` from the first-return map of a concrete IET
/// whose lengths force the requested type, then memoized.
pub fn successor(perm: &Permutation, ty: StepType) -> Permutation {
    let key = (perm.clone(), ty);
    if let Some(p) = cache().read().expect("cache lock").get(&key) {
        return p.clone();
    }
    let p = derive_successor(perm, ty);
    cache().write().expect("cache lock").insert(key, p.clone());
    p
}

fn derive_successor(perm: &Permutation, ty: StepType) -> Permutation {
    let d = perm.d();
    let (w, l) = winner_loser(perm, ty);
    let mut lambda = vec![Rational::one(); d];
    lambda[w] = Rational::from_i64(2);
    let iet = Iet::from_parts(perm.clone(), lambda.clone());
    let c = iet.total_length().clone() - lambda[l].clone();
    let pieces =
        first_return_pieces(&iet, &c, 3).expect("a Rauzy step returns within two iterates");
    assert_eq!(pieces.len(), d, "induced map must exchange d intervals");
    let labels: Vec<Letter> = pieces
        .iter()
        .map(|p| if p.time == 2 { l } else { p.letter })
        .collect();
    let top_order = labels.clone();
    let mut by_image: Vec<usize> = (0..d).collect();
    by_image.sort_by(|&a, &b| {
        pieces[a]
            .image_left
            .partial_cmp(&pieces[b].image_left)
            .expect("ordered")
    });
    let bottom_order: Vec<Letter> = by_image.into_iter().map(|k| labels[k]).collect();
    Permutation::from_orders(&top_order, &bottom_order).expect("labels form a bijection")
}

/// One edge of the Rauzy graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub from: Permutation,
    pub step_type: StepType,
    pub to: Permutation,
    pub winner: Letter,
    pub loser: Letter,
}

impl Arrow {
    pub fn new(from: Permutation, step_type: StepType) -> Self {
        let (winner, loser) = winner_loser(&from, step_type);
        let to = successor(&from, step_type);
        Arrow {
            from,
            step_type,
            to,
            winner,
            loser,
        }
    }

    /// Path factor `I + E_{winner, loser}`: the inverse of the step's length matrix.
    pub fn matrix_factor(&self) -> IntMatrix {
        IntMatrix::elementary(self.from.d(), self.winner, self.loser)
    }
}

#[derive(Serialize, Deserialize)]
struct ArrowRepr {
    perm: Permutation,
    #[serde(rename = "type")]
    step_type: StepType,
}

impl Serialize for Arrow {
    fn serialize<Ser: serde::Serializer>(
        &self,
        s: Ser,
    ) -> std::result::Result<Ser::Ok, Ser::Error> {
        ArrowRepr {
            perm: self.from.clone(),
            step_type: self.step_type,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Arrow {
    fn deserialize<De: serde::Deserializer<'de>>(de: De) -> std::result::Result<Self, De::Error> {
        let r = ArrowRepr::deserialize(de)?;
        Ok(Arrow::new(r.perm, r.step_type))
    }
}

/// A walk in the Rauzy graph with its accumulated non-negative matrix.
///
/// Serialized as the JSON list of its arrows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RauzyPath {
    arrows: Vec<Arrow>,
    matrix: IntMatrix,
}

impl Serialize for RauzyPath {
    fn serialize<Ser: serde::Serializer>(
        &self,
        s: Ser,
    ) -> std::result::Result<Ser::Ok, Ser::Error> {
        self.arrows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RauzyPath {
    fn deserialize<De: serde::Deserializer<'de>>(de: De) -> std::result::Result<Self, De::Error> {
        let arrows = Vec::<Arrow>::deserialize(de)?;
        let d = arrows
            .first()
            .map(|a| a.from.d())
            .ok_or_else(|| serde::de::Error::custom("an empty path has no dimension"))?;
        RauzyPath::from_arrows(d, arrows).map_err(serde::de::Error::custom)
    }
}

impl RauzyPath {
    pub fn empty(d: usize) -> Self {
        RauzyPath {
            arrows: Vec::new(),
            matrix: IntMatrix::identity(d),
        }
    }

    /// Builds a path, checking that consecutive arrows chain.
    pub fn from_arrows(d: usize, arrows: Vec<Arrow>) -> Result<Self> {
        let matrix = path_matrix_of(d, &arrows)?;
        Ok(RauzyPath { arrows, matrix })
    }

    /// Follows `types` starting at `start`.
    pub fn from_types(start: &Permutation, types: &[StepType]) -> Self {
        let mut path = RauzyPath::empty(start.d());
        let mut perm = start.clone();
        for &ty in types {
            let arrow = Arrow::new(perm, ty);
            perm = arrow.to.clone();
            path.push_unchecked(arrow);
        }
        path
    }

    pub(crate) fn push_unchecked(&mut self, arrow: Arrow) {
        self.matrix.add_col(arrow.loser, arrow.winner);
        self.arrows.push(arrow);
    }

    pub fn push(&mut self, arrow: Arrow) -> Result<()> {
        if let Some(last) = self.arrows.last() {
            if last.to != arrow.from {
                return Err(Error::BrokenChain {
                    index: self.arrows.len(),
                });
            }
        }
        self.push_unchecked(arrow);
        Ok(())
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty()
    }

    pub fn d(&self) -> usize {
        self.matrix.d()
    }

    /// Product of the arrows' factors in path order.
    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn is_positive(&self) -> bool {
        self.matrix.is_positive()
    }

    pub fn start(&self) -> Option<&Permutation> {
        self.arrows.first().map(|a| &a.from)
    }

    pub fn end(&self) -> Option<&Permutation> {
        self.arrows.last().map(|a| &a.to)
    }

    pub fn types(&self) -> Vec<StepType> {
        self.arrows.iter().map(|a| a.step_type).collect()
    }

    /// Number of maximal same-type runs (Zorich blocks when the path is
    /// followed from a block boundary).
    pub fn type_runs(&self) -> usize {
        let t = self.types();
        if t.is_empty() {
            return 0;
        }
        1 + t.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Concatenation `self ∗ other`.
    pub fn concat(&self, other: &RauzyPath) -> Result<RauzyPath> {
        let mut arrows = self.arrows.clone();
        arrows.extend(other.arrows.iter().cloned());
        RauzyPath::from_arrows(self.d(), arrows)
    }

    pub fn prefix(&self, n: usize) -> RauzyPath {
        let mut p = RauzyPath::empty(self.d());
        for a in &self.arrows[..n] {
            p.push_unchecked(a.clone());
        }
        p
    }
}

fn path_matrix_of(d: usize, arrows: &[Arrow]) -> Result<IntMatrix> {
    let mut m = IntMatrix::identity(d);
    for (i, a) in arrows.iter().enumerate() {
        if a.from.d() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: a.from.d(),
            });
        }
        if i > 0 && arrows[i - 1].to != a.from {
            return Err(Error::BrokenChain { index: i });
        }
        m.add_col(a.loser, a.winner);
    }
    Ok(m)
}

/// Ordered product of the single-step factors of `arrows`.
pub fn path_matrix(d: usize, arrows: &[Arrow]) -> Result<IntMatrix> {
    path_matrix_of(d, arrows)
}

/// `γ ∗ (|γ| arrows of the type opposite to γ's last arrow)`.
///
/// After the appended block, the orbit cannot resume `γ` for `|γ| − 1` steps.
pub fn extend_no_return(path: &RauzyPath) -> Result<RauzyPath> {
    let last = path.arrows.last().ok_or(Error::BrokenChain { index: 0 })?;
    let ty = last.step_type.opposite();
    let tail = RauzyPath::from_types(&last.to, &vec![ty; path.len()]);
    path.concat(&tail)
}
