//! Exact orbit arithmetic through the tower hierarchy of Rauzy–Veech induction.
//!
//! Level `s` is the induced IET `T_s` after `s` Rauzy steps together with its
//! Rokhlin towers. A point is located at level `s` by its tower letter, floor
//! index and offset inside the floor; a step of induction stacks two towers of
//! level `s` into one of level `s + 1`. With the Birkhoff sums of `f` along
//! full towers stored as step functions of the offset, `Tⁿx` and `S_n f(x)`
//! cost `O(depth)` operations instead of `n`.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::induction::{induce_once, StepDecision};
use super::path::StepType;
use crate::cocycle::StepCocycle;
use crate::error::{Error, Result};
use crate::iet::{Iet, Letter};
use crate::scalar::{Accumulator, Scalar, DEFAULT_FLOAT_TOL};

/// Default cap on tower jumps in one walk.
pub const DEFAULT_JUMP_CAP: u64 = 10_000_000;

/// Piecewise constant function of the offset on `[0, len)`.
#[derive(Clone, Debug, PartialEq)]
struct Steps<S> {
    starts: Vec<S>,
    values: Vec<S>,
}

impl<S: Scalar> Steps<S> {
    fn zero() -> Self {
        Steps {
            starts: vec![S::zero()],
            values: vec![S::zero()],
        }
    }

    fn eval(&self, o: &S) -> &S {
        let i = self.starts.partition_point(|s| s <= o).saturating_sub(1);
        &self.values[i]
    }

    fn restrict(&self, len: &S) -> Self {
        let keep = self.starts.partition_point(|s| s < len).max(1);
        Steps {
            starts: self.starts[..keep].to_vec(),
            values: self.values[..keep].to_vec(),
        }
    }

    /// `o ↦ self(o) + other(o + shift)` on `[0, len)`.
    fn add_shifted(&self, other: &Self, shift: &S, len: &S) -> Self {
        let mut cuts: Vec<S> = self.starts.iter().filter(|s| *s < len).cloned().collect();
        cuts.extend(
            other
                .starts
                .iter()
                .filter(|s| *s > shift)
                .map(|s| s.clone() - shift.clone())
                .filter(|s| s < len),
        );
        cuts.sort_by(|a, b| a.partial_cmp(b).expect("ordered scalars"));
        cuts.dedup();
        let mut out = Steps {
            starts: Vec::with_capacity(cuts.len()),
            values: Vec::with_capacity(cuts.len()),
        };
        for c in cuts {
            let v = self.eval(&c).clone() + other.eval(&(c.clone() + shift.clone())).clone();
            if out.values.last() != Some(&v) {
                out.starts.push(c);
                out.values.push(v);
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
struct Level<S> {
    iet: Iet<S>,
    heights: Vec<BigInt>,
    /// Birkhoff sum of `f` along the full tower over each offset of the base.
    tower_sums: Vec<Steps<S>>,
    min_height: BigInt,
}

/// A point at some level: `T^floor(base_start(letter) + offset)`, with
/// `prefix = S_floor f` from the base point.
#[derive(Clone, Debug, PartialEq)]
pub struct Located<S> {
    pub level: usize,
    pub letter: Letter,
    pub floor: BigInt,
    pub offset: S,
    pub prefix: S,
}

/// Outcome of [`Hierarchy::walk`].
#[derive(Clone, Debug, PartialEq)]
pub struct Walk<S> {
    pub point: S,
    pub birkhoff: S,
    /// `Tⁿ` is continuous on `[x − r, x]` for every `r ≤ left_room`.
    pub left_room: S,
    /// `Tⁿ` is continuous on `[x, x + r]` for every `r < right_room`.
    pub right_room: S,
    pub jumps: u64,
}

/// The first `depth` levels of induction of an IET, optionally carrying tower
/// Birkhoff sums of a cocycle on `[0, 1)`.
#[derive(Clone, Debug)]
pub struct Hierarchy<S> {
    levels: Vec<Level<S>>,
    steps: Vec<StepDecision>,
    jump_cap: u64,
}

impl<S: Scalar> Hierarchy<S> {
    /// Runs `depth` Rauzy steps. Fails with `DegenerateLengths` if the
    /// induction stops earlier.
    pub fn build(iet: &Iet<S>, cocycle: Option<&StepCocycle<S>>, depth: usize) -> Result<Self> {
        if cocycle.is_some() && *iet.total_length() != S::one() {
            return Err(Error::InvalidCocycle(
                "cocycles live on [0, 1); normalize the IET".into(),
            ));
        }
        let d = iet.d();
        let tower_sums = (0..d)
            .map(|a| match cocycle {
                Some(f) => base_sums(f, iet.top_start(a), &iet.lambda()[a]),
                None => Steps::zero(),
            })
            .collect();
        let mut levels = vec![Level {
            iet: iet.clone(),
            heights: vec![BigInt::from(1); d],
            tower_sums,
            min_height: BigInt::from(1),
        }];
        let mut steps = Vec::with_capacity(depth);
        for s in 0..depth {
            let cur = &levels[s];
            let (next, dec) = induce_once(&cur.iet, DEFAULT_FLOAT_TOL, s)?;
            let (w, l) = (dec.winner, dec.loser);
            let delta = next.lambda()[w].clone();
            let mut heights = cur.heights.clone();
            heights[l] = &heights[l] + &heights[w];
            let mut sums = cur.tower_sums.clone();
            sums[l] = cur.tower_sums[l].add_shifted(&cur.tower_sums[w], &delta, &next.lambda()[l]);
            sums[w] = cur.tower_sums[w].restrict(&delta);
            let min_height = heights.iter().min().cloned().expect("d ≥ 2");
            levels.push(Level {
                iet: next,
                heights,
                tower_sums: sums,
                min_height,
            });
            steps.push(dec);
        }
        Ok(Hierarchy {
            levels,
            steps,
            jump_cap: DEFAULT_JUMP_CAP,
        })
    }

    pub fn with_jump_cap(mut self, cap: u64) -> Self {
        self.jump_cap = cap;
        self
    }

    pub fn depth(&self) -> usize {
        self.steps.len()
    }

    pub fn origin(&self) -> &Iet<S> {
        &self.levels[0].iet
    }

    pub fn level_iet(&self, s: usize) -> &Iet<S> {
        &self.levels[s].iet
    }

    pub fn heights(&self, s: usize) -> &[BigInt] {
        &self.levels[s].heights
    }

    pub fn min_height(&self, s: usize) -> &BigInt {
        &self.levels[s].min_height
    }

    /// Birkhoff sum of the cocycle along the full tower `letter` of level `s`,
    /// starting at `offset` in its base.
    pub fn tower_sum(&self, s: usize, letter: Letter, offset: &S) -> S {
        self.levels[s].tower_sums[letter].eval(offset).clone()
    }

    /// Number of pieces of the tower sum functions at level `s`.
    pub fn tower_sum_pieces(&self, s: usize) -> usize {
        self.levels[s]
            .tower_sums
            .iter()
            .map(|f| f.starts.len())
            .sum()
    }

    /// Position of `x` in the towers of level `s`.
    pub fn locate(&self, x: &S, s: usize) -> Result<Located<S>> {
        let base = self.origin();
        if !base.contains(x) {
            return Err(Error::OutOfDomain {
                value: x.to_exact_string(),
                bound: base.total_length().to_exact_string(),
            });
        }
        if s > self.depth() {
            return Err(Error::BadConfig(format!(
                "level {s} beyond hierarchy depth {}",
                self.depth()
            )));
        }
        let letter = base.letter_at(x);
        let mut loc = Located {
            level: 0,
            letter,
            floor: BigInt::zero(),
            offset: x.clone() - base.top_start(letter).clone(),
            prefix: S::zero(),
        };
        while loc.level < s {
            loc = self.ascend(&loc);
        }
        Ok(loc)
    }

    /// The same point one level up.
    pub fn ascend(&self, loc: &Located<S>) -> Located<S> {
        let s = loc.level;
        let dec = self.steps[s];
        let (w, l) = (dec.winner, dec.loser);
        let delta = &self.levels[s + 1].iet.lambda()[w];
        let lower = &self.levels[s];
        let mut up = Located {
            level: s + 1,
            ..loc.clone()
        };
        match dec.step_type {
            StepType::Top if loc.letter == w && loc.offset >= *delta => {
                let o = loc.offset.clone() - delta.clone();
                up.prefix = loc.prefix.clone() + lower.tower_sums[l].eval(&o).clone();
                up.letter = l;
                up.floor = &lower.heights[l] + &loc.floor;
                up.offset = o;
            }
            StepType::Bottom if loc.letter == l => {
                let shifted = loc.offset.clone() + delta.clone();
                up.prefix = loc.prefix.clone() + lower.tower_sums[w].eval(&shifted).clone();
                up.floor = &lower.heights[w] + &loc.floor;
            }
            StepType::Bottom if loc.letter == w && loc.offset >= *delta => {
                up.letter = l;
                up.offset = loc.offset.clone() - delta.clone();
            }
            _ => {}
        }
        up
    }

    /// The same point one level down.
    pub fn descend(&self, loc: &Located<S>) -> Located<S> {
        assert!(loc.level > 0, "cannot descend below level 0");
        let s = loc.level - 1;
        let dec = self.steps[s];
        let (w, l) = (dec.winner, dec.loser);
        let delta = &self.levels[s + 1].iet.lambda()[w];
        let lower = &self.levels[s];
        let mut down = Located {
            level: s,
            ..loc.clone()
        };
        if loc.letter != l {
            return down;
        }
        match dec.step_type {
            StepType::Top => {
                if loc.floor >= lower.heights[l] {
                    down.prefix =
                        loc.prefix.clone() - lower.tower_sums[l].eval(&loc.offset).clone();
                    down.letter = w;
                    down.floor = &loc.floor - &lower.heights[l];
                    down.offset = loc.offset.clone() + delta.clone();
                }
            }
            StepType::Bottom => {
                let shifted = loc.offset.clone() + delta.clone();
                if loc.floor < lower.heights[w] {
                    down.letter = w;
                    down.offset = shifted;
                } else {
                    down.prefix = loc.prefix.clone() - lower.tower_sums[w].eval(&shifted).clone();
                    down.floor = &loc.floor - &lower.heights[w];
                }
            }
        }
        down
    }

    /// Coordinate of a located point in `[0, |λ|)`.
    pub fn point(&self, loc: &Located<S>) -> S {
        let mut cur = loc.clone();
        while cur.level > 0 {
            cur = self.descend(&cur);
        }
        debug_assert!(cur.floor.is_zero());
        self.origin().top_start(cur.letter).clone() + cur.offset
    }

    /// Leaves the tower of `loc` through its top: returns the base point of
    /// the next tower and the Birkhoff sum collected on the way.
    fn jump(&self, loc: &Located<S>) -> (Located<S>, S, BigInt) {
        let lvl = &self.levels[loc.level];
        let a = loc.letter;
        let sum = lvl.tower_sums[a].eval(&loc.offset).clone() - loc.prefix.clone();
        let steps = &lvl.heights[a] - &loc.floor;
        let y = lvl.iet.top_start(a).clone() + loc.offset.clone() + lvl.iet.translation(a);
        let b = lvl.iet.letter_at(&y);
        let next = Located {
            level: loc.level,
            letter: b,
            floor: BigInt::zero(),
            offset: y - lvl.iet.top_start(b).clone(),
            prefix: S::zero(),
        };
        (next, sum, steps)
    }

    fn ascend_while(&self, mut loc: Located<S>, remaining: &BigInt) -> Located<S> {
        while loc.level < self.depth() && *remaining >= self.levels[loc.level + 1].min_height {
            loc = self.ascend(&loc);
        }
        loc
    }

    /// `Tⁿx`, `S_n f(x)` and one-sided continuity rooms of `Tⁿ` at `x`.
    ///
    /// The rooms are certified lower bounds: every recorded segment of the
    /// orbit runs inside one floor of one level, which `Tⁿ` moves by a translation.
    pub fn walk(&self, x: &S, n: &BigInt) -> Result<Walk<S>> {
        if n.is_negative() {
            return Err(Error::BadConfig("walks go forward only".into()));
        }
        let mut remaining = n.clone();
        let mut loc = self.ascend_while(self.locate(x, 0)?, &remaining);
        let mut acc = S::Acc::default();
        let mut left_room: Option<S> = None;
        let mut right_room: Option<S> = None;
        let mut settled = false;
        let mut jumps = 0u64;
        let mut record = |loc: &Located<S>, lvl: &Level<S>| {
            let right = lvl.iet.lambda()[loc.letter].clone() - loc.offset.clone();
            left_room = Some(match left_room.take() {
                Some(r) => S::min_of(&r, &loc.offset).clone(),
                None => loc.offset.clone(),
            });
            right_room = Some(match right_room.take() {
                Some(r) => S::min_of(&r, &right).clone(),
                None => right,
            });
        };
        loop {
            let lvl = &self.levels[loc.level];
            if &loc.floor + &remaining < lvl.heights[loc.letter] {
                if !settled {
                    record(&loc, lvl);
                    settled = true;
                }
                if remaining.is_zero() {
                    break;
                }
                loc = self.descend(&loc);
                continue;
            }
            if !settled {
                record(&loc, lvl);
            }
            jumps += 1;
            if jumps > self.jump_cap {
                return Err(Error::HorizonExceeded {
                    horizon: self.jump_cap,
                });
            }
            let (next, sum, used) = self.jump(&loc);
            acc.add(&sum);
            remaining -= used;
            loc = if settled {
                next
            } else {
                self.ascend_while(next, &remaining)
            };
        }
        Ok(Walk {
            point: self.point(&loc),
            birkhoff: acc.value(),
            left_room: left_room.expect("recorded at least once"),
            right_room: right_room.expect("recorded at least once"),
            jumps,
        })
    }

    /// Base offsets at which the orbit `x, …, T^{n−1}x` runs through a whole
    /// tower of level `s`, per letter. `None` if more than `cap` passes are needed.
    pub fn full_passes(
        &self,
        x: &S,
        n: &BigInt,
        s: usize,
        cap: u64,
    ) -> Result<Option<Vec<Vec<S>>>> {
        let lvl = &self.levels[s];
        let mut loc = self.locate(x, s)?;
        let mut passes = vec![Vec::new(); lvl.iet.d()];
        let first = &lvl.heights[loc.letter] - &loc.floor;
        if first > *n {
            return Ok(Some(passes));
        }
        let mut remaining = n - first;
        loc = self.jump(&loc).0;
        let mut count = 0u64;
        while remaining >= lvl.heights[loc.letter] {
            count += 1;
            if count > cap {
                return Ok(None);
            }
            passes[loc.letter].push(loc.offset.clone());
            remaining -= &lvl.heights[loc.letter];
            loc = self.jump(&loc).0;
        }
        Ok(Some(passes))
    }

    /// Upper bound on the largest gap of `{Tⁱx}_{i<n}` in `[0, |λ|)` read off
    /// the full tower passes at level `s`; `None` if some tower is never fully
    /// traversed or the pass count exceeds `cap`.
    pub fn gap_bound_at(&self, x: &S, n: &BigInt, s: usize, cap: u64) -> Result<Option<S>> {
        let Some(mut passes) = self.full_passes(x, n, s, cap)? else {
            return Ok(None);
        };
        if passes.iter().any(|p| p.is_empty()) {
            return Ok(None);
        }
        let lambda = self.levels[s].iet.lambda();
        let mut worst = S::zero();
        let mut tail = S::zero();
        let mut head = S::zero();
        for (a, offs) in passes.iter_mut().enumerate() {
            offs.sort_by(|p, q| p.partial_cmp(q).expect("ordered scalars"));
            for w in offs.windows(2) {
                worst = S::max_of(&worst, &(w[1].clone() - w[0].clone())).clone();
            }
            let last = offs.last().expect("non-empty").clone();
            tail = S::max_of(&tail, &(lambda[a].clone() - last)).clone();
            head = S::max_of(&head, &offs[0]).clone();
        }
        Ok(Some(S::max_of(&worst, &(tail + head)).clone()))
    }

    /// Smallest [`gap_bound_at`](Self::gap_bound_at) over the two shallowest
    /// levels whose pass count fits within `cap`.
    pub fn gap_bound(&self, x: &S, n: &BigInt, cap: u64) -> Result<Option<S>> {
        let mut best: Option<S> = None;
        let mut tried = 0;
        for s in 0..=self.depth() {
            let lvl = &self.levels[s];
            let estimate = n / &lvl.min_height;
            if estimate > BigInt::from(cap) {
                continue;
            }
            let max_h = lvl.heights.iter().max().expect("d ≥ 2");
            if n < &(max_h * 2) {
                break;
            }
            if let Some(g) = self.gap_bound_at(x, n, s, cap)? {
                best = Some(match best {
                    Some(b) => S::min_of(&b, &g).clone(),
                    None => g,
                });
            }
            tried += 1;
            if tried == 2 {
                break;
            }
        }
        Ok(best)
    }
}

fn base_sums<S: Scalar>(f: &StepCocycle<S>, start: &S, len: &S) -> Steps<S> {
    let end = start.clone() + len.clone();
    let mut out = Steps {
        starts: vec![S::zero()],
        values: vec![f.eval_unchecked(start).clone()],
    };
    for (k, b) in f.starts().iter().enumerate() {
        if b > start && *b < end {
            out.starts.push(b.clone() - start.clone());
            out.values.push(f.values()[k].clone());
        }
    }
    out
}
