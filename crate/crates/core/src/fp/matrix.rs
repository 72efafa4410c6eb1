use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::number::{rational_serde, round_p, FpNumber, Rational};
use super::ops::{fp_mul, iter_add};
use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, v: T) -> Self {
        Self { rows, cols, data: vec![v; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn try_from_fn<E>(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> std::result::Result<T, E>,
    ) -> std::result::Result<Self, E> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j)?);
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn into_entries(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn try_map<U: Clone, E>(
        &self,
        f: impl FnMut(&T) -> std::result::Result<U, E>,
    ) -> std::result::Result<Matrix<U>, E> {
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect::<std::result::Result<_, _>>()?,
        })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }
}

/// Numeric mode of a matrix: p-bit floats or exact rationals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    PBit(u32),
    ExactRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FpMatrix {
    PBit { p: u32, m: Matrix<FpNumber> },
    Exact(Matrix<Rational>),
}

impl FpMatrix {
    pub fn pbit(m: Matrix<FpNumber>) -> Result<Self> {
        let p =
            m.entries().first().map(FpNumber::precision).ok_or_else(|| Error::ShapeMismatch("empty matrix".into()))?;
        if let Some(x) = m.entries().iter().find(|x| x.precision() != p) {
            return Err(Error::PrecisionMismatch(p, x.precision()));
        }
        Ok(Self::PBit { p, m })
    }

    pub fn exact(m: Matrix<Rational>) -> Self {
        Self::Exact(m)
    }

    /// Rounds (or keeps, in exact mode) every rational entry.
    pub fn from_rationals(m: &Matrix<Rational>, mode: Mode) -> Result<Self> {
        match mode {
            Mode::PBit(p) => Ok(Self::PBit { p, m: m.try_map(|q| round_p(q, p))? }),
            Mode::ExactRational => Ok(Self::Exact(m.clone())),
        }
    }

    pub fn zeros(rows: usize, cols: usize, mode: Mode) -> Self {
        match mode {
            Mode::PBit(p) => Self::PBit { p, m: Matrix::filled(rows, cols, FpNumber::zero(p)) },
            Mode::ExactRational => Self::Exact(Matrix::filled(rows, cols, Rational::zero())),
        }
    }

    pub fn identity(n: usize, mode: Mode) -> Self {
        let q = Matrix::from_fn(n, n, |i, j| if i == j { Rational::one() } else { Rational::zero() });
        Self::from_rationals(&q, mode).expect("0 and 1 are representable")
    }

    pub fn mode(&self) -> Mode {
        match self {
            Self::PBit { p, .. } => Mode::PBit(*p),
            Self::Exact(_) => Mode::ExactRational,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            Self::PBit { m, .. } => m.shape(),
            Self::Exact(m) => m.shape(),
        }
    }

    pub fn rows(&self) -> usize {
        self.shape().0
    }

    pub fn cols(&self) -> usize {
        self.shape().1
    }

    pub fn rational(&self, i: usize, j: usize) -> Rational {
        match self {
            Self::PBit { m, .. } => m.get(i, j).to_rational(),
            Self::Exact(m) => m.get(i, j).clone(),
        }
    }

    pub fn to_rationals(&self) -> Matrix<Rational> {
        match self {
            Self::PBit { m, .. } => m.map(FpNumber::to_rational),
            Self::Exact(m) => m.clone(),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        match self {
            Self::PBit { m, .. } => m.map(FpNumber::to_f64),
            Self::Exact(m) => m.map(rational_to_f64),
        }
    }

    /// Re-expresses the entries in another mode; exact when moving to
    /// `ExactRational`, rounded otherwise.
    pub fn convert(&self, mode: Mode) -> Result<Self> {
        if self.mode() == mode {
            return Ok(self.clone());
        }
        Self::from_rationals(&self.to_rationals(), mode)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::PBit { m, .. } => m.entries().iter().all(FpNumber::is_zero),
            Self::Exact(m) => m.entries().iter().all(Zero::is_zero),
        }
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

fn same_mode(a: &FpMatrix, b: &FpMatrix) -> Result<Mode> {
    if a.mode() != b.mode() {
        return Err(Error::ModeMismatch(format!("{:?} vs {:?}", a.mode(), b.mode())));
    }
    Ok(a.mode())
}

/// Entry `(i, j)` is one iterated addition over the rounded products.
pub fn matmul(a: &FpMatrix, b: &FpMatrix) -> Result<FpMatrix> {
    same_mode(a, b)?;
    if a.cols() != b.rows() {
        return Err(Error::ShapeMismatch(format!("{:?} x {:?}", a.shape(), b.shape())));
    }
    let (n, k, m) = (a.rows(), a.cols(), b.cols());
    match (a, b) {
        (FpMatrix::PBit { m: x, p }, FpMatrix::PBit { m: y, .. }) => {
            let out = Matrix::try_from_fn(n, m, |i, j| {
                let terms = (0..k).map(|t| fp_mul(x.get(i, t), y.get(t, j))).collect::<Result<Vec<_>>>()?;
                iter_add(&terms)
            })?;
            Ok(FpMatrix::PBit { p: *p, m: out })
        }
        (FpMatrix::Exact(x), FpMatrix::Exact(y)) => Ok(FpMatrix::Exact(Matrix::from_fn(n, m, |i, j| {
            (0..k).fold(Rational::zero(), |acc, t| acc + x.get(i, t) * y.get(t, j))
        }))),
        _ => unreachable!("modes checked"),
    }
}

pub fn hadamard(a: &FpMatrix, b: &FpMatrix) -> Result<FpMatrix> {
    same_mode(a, b)?;
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    let (n, m) = a.shape();
    match (a, b) {
        (FpMatrix::PBit { m: x, p }, FpMatrix::PBit { m: y, .. }) => {
            Ok(FpMatrix::PBit { p: *p, m: Matrix::try_from_fn(n, m, |i, j| fp_mul(x.get(i, j), y.get(i, j)))? })
        }
        (FpMatrix::Exact(x), FpMatrix::Exact(y)) => {
            Ok(FpMatrix::Exact(Matrix::from_fn(n, m, |i, j| x.get(i, j) * y.get(i, j))))
        }
        _ => unreachable!("modes checked"),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EntryRepr {
    Float(FpNumber),
    Exact(#[serde(with = "rational_serde")] Rational),
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    mode: Mode,
    entries: Vec<EntryRepr>,
}

impl Serialize for FpMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = match self {
            Self::PBit { m, .. } => m.entries().iter().cloned().map(EntryRepr::Float).collect(),
            Self::Exact(m) => m.entries().iter().cloned().map(EntryRepr::Exact).collect(),
        };
        MatrixRepr { rows: self.rows(), cols: self.cols(), mode: self.mode(), entries }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FpMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = MatrixRepr::deserialize(d)?;
        match r.mode {
            Mode::PBit(p) => {
                let xs = r
                    .entries
                    .into_iter()
                    .map(|e| match e {
                        EntryRepr::Float(x) if x.precision() == p => Ok(x),
                        EntryRepr::Float(x) => {
                            Err(D::Error::custom(format!("entry precision {} in a p={p} matrix", x.precision())))
                        }
                        EntryRepr::Exact(_) => Err(D::Error::custom("rational entry in a p-bit matrix")),
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                let m = Matrix::from_vec(r.rows, r.cols, xs).map_err(D::Error::custom)?;
                Ok(Self::PBit { p, m })
            }
            Mode::ExactRational => {
                let xs = r
                    .entries
                    .into_iter()
                    .map(|e| match e {
                        EntryRepr::Exact(q) => Ok(q),
                        EntryRepr::Float(x) => Ok(x.to_rational()),
                    })
                    .collect::<std::result::Result<Vec<_>, D::Error>>()?;
                Ok(Self::Exact(Matrix::from_vec(r.rows, r.cols, xs).map_err(D::Error::custom)?))
            }
        }
    }
}
