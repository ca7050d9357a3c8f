use serde::{Deserialize, Serialize};

use super::{Iet, Permutation};
use crate::error::{Error, Result};
use crate::scalar::{parse_scalar, Mode, Scalar};

/// A scalar as it appears in JSON: an exact string ("num/den", decimal) or a number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarLiteral {
    Text(String),
    Number(serde_json::Number),
}

impl ScalarLiteral {
    pub fn parse<S: Scalar>(&self) -> Result<S> {
        match self {
            ScalarLiteral::Text(s) => parse_scalar(s),
            ScalarLiteral::Number(n) => parse_scalar(&n.to_string()),
        }
    }

    pub fn from_scalar<S: Scalar>(v: &S) -> Self {
        ScalarLiteral::Text(v.to_exact_string())
    }
}

/// JSON form of an IET. Ranks are one-based and indexed by letter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IetDescriptor {
    pub d: usize,
    pub pi0: Vec<usize>,
    pub pi1: Vec<usize>,
    pub lambda: Vec<ScalarLiteral>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default)]
    pub normalize: bool,
}

fn default_mode() -> Mode {
    Mode::Rational
}

impl IetDescriptor {
    pub fn permutation(&self) -> Result<Permutation> {
        if self.pi0.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: self.pi0.len(),
            });
        }
        Permutation::from_one_based(&self.pi0, &self.pi1)
    }

    /// Builds the IET in scalar type `S`, ignoring the declared mode.
    pub fn build<S: Scalar>(&self) -> Result<Iet<S>> {
        let perm = self.permutation()?;
        let lambda = self
            .lambda
            .iter()
            .map(|l| l.parse::<S>())
            .collect::<Result<Vec<_>>>()?;
        Iet::new(perm, lambda, self.normalize)
    }

    pub fn from_iet<S: Scalar>(iet: &Iet<S>) -> Self {
        let (pi0, pi1) = iet.perm().one_based();
        IetDescriptor {
            d: iet.d(),
            pi0,
            pi1,
            lambda: iet
                .lambda()
                .iter()
                .map(ScalarLiteral::from_scalar)
                .collect(),
            mode: S::MODE,
            normalize: false,
        }
    }
}
