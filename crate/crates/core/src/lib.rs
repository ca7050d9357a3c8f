//! Interval exchange transformations, their Rauzy–Veech renormalization, and
//! skew products over piecewise-constant cocycles.
//!
//! Exact arithmetic ([`scalar::Rational`], [`scalar::QuadSqrt5`]) drives every
//! renormalization decision; `f64` is used for long orbit simulations.

pub mod cocycle;
pub mod ergolab;
pub mod error;
pub mod good_returns;
pub mod iet;
pub mod io;
pub mod par;
pub mod renorm;
pub mod scalar;
pub mod spectrum;

pub use error::{Error, Result};
pub use iet::{Iet, Permutation};
pub use scalar::{Mode, QuadSqrt5, Rational, Scalar};
