use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

/// Square integer matrix with arbitrary precision entries, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    d: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(d: usize) -> Self {
        IntMatrix {
            d,
            data: vec![BigInt::zero(); d * d],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = IntMatrix::zeros(d);
        for i in 0..d {
            m.data[i * d + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Self {
        let d = rows.len();
        let mut m = IntMatrix::zeros(d);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), d, "matrix must be square");
            for (c, v) in row.iter().enumerate() {
                m.data[r * d + c] = v.clone().into();
            }
        }
        m
    }

    /// `I + E_{r,c}`: the elementary factor of one Rauzy step.
    pub fn elementary(d: usize, r: usize, c: usize) -> Self {
        let mut m = IntMatrix::identity(d);
        m.data[r * d + c] += 1;
        m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.d + c]
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        self.data.chunks(self.d).map(|r| r.to_vec()).collect()
    }

    /// `self += factor · row src` applied to row `dst`.
    pub fn add_row(&mut self, dst: usize, src: usize, factor: i64) {
        let d = self.d;
        for c in 0..d {
            let v = &self.data[src * d + c] * factor;
            self.data[dst * d + c] += v;
        }
    }

    /// `column dst += column src`.
    pub fn add_col(&mut self, dst: usize, src: usize) {
        let d = self.d;
        for r in 0..d {
            let v = self.data[r * d + src].clone();
            self.data[r * d + dst] += v;
        }
    }

    pub fn transpose(&self) -> Self {
        let d = self.d;
        let mut m = IntMatrix::zeros(d);
        for r in 0..d {
            for c in 0..d {
                m.data[c * d + r] = self.data[r * d + c].clone();
            }
        }
        m
    }

    pub fn col_sums(&self) -> Vec<BigInt> {
        (0..self.d)
            .map(|c| (0..self.d).map(|r| self.get(r, c)).sum())
            .collect()
    }

    pub fn row_sums(&self) -> Vec<BigInt> {
        self.data.chunks(self.d).map(|r| r.iter().sum()).collect()
    }

    /// Operator norm induced by the l1 vector norm: the largest absolute column sum.
    pub fn norm(&self) -> BigInt {
        (0..self.d)
            .map(|c| (0..self.d).map(|r| self.get(r, c).abs()).sum::<BigInt>())
            .max()
            .unwrap_or_default()
    }

    pub fn entry_sum(&self) -> BigInt {
        self.data.iter().sum()
    }

    pub fn min_entry(&self) -> BigInt {
        self.data.iter().min().cloned().unwrap_or_default()
    }

    pub fn is_positive(&self) -> bool {
        self.data.iter().all(|v| v.is_positive())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|v| !v.is_negative())
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        self.data
            .chunks(self.d)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(IntMatrix::identity(self.d), |acc, _| &acc * self)
    }

    /// Entries converted to floats (saturating for huge values).
    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.d)
            .map(|r| {
                r.iter()
                    .map(|v| v.to_f64().unwrap_or(f64::INFINITY))
                    .collect()
            })
            .collect()
    }
}

impl std::ops::Mul for &IntMatrix {
    type Output = IntMatrix;
    fn mul(self, o: &IntMatrix) -> IntMatrix {
        assert_eq!(self.d, o.d);
        let d = self.d;
        let mut m = IntMatrix::zeros(d);
        for r in 0..d {
            for k in 0..d {
                let a = &self.data[r * d + k];
                if a.is_zero() {
                    continue;
                }
                for c in 0..d {
                    let v = a * &o.data[k * d + c];
                    m.data[r * d + c] += v;
                }
            }
        }
        m
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .data
            .chunks(self.d)
            .map(|r| {
                r.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            })
            .map(|r| format!("[{r}]"))
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

/// Serializes as nested JSON arrays of (arbitrary size) integers.
impl Serialize for IntMatrix {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        let mut seq = s.serialize_seq(Some(self.d))?;
        for row in self.data.chunks(self.d) {
            let row: Vec<serde_json::Number> = row.iter().map(big_number).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

/// JSON number holding an arbitrary precision integer.
pub fn big_number(v: &BigInt) -> serde_json::Number {
    serde_json::Number::from_str(&v.to_string()).expect("integer literal")
}

pub fn ser_bigint<Z: Serializer>(v: &BigInt, z: Z) -> Result<Z::Ok, Z::Error> {
    big_number(v).serialize(z)
}

pub fn ser_bigint_vec<Z: Serializer>(v: &[BigInt], z: Z) -> Result<Z::Ok, Z::Error> {
    v.iter().map(big_number).collect::<Vec<_>>().serialize(z)
}
