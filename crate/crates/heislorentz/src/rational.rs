//! Exact rational linear algebra for lattice and deck computations.
//!
//! Small dense matrices over `BigRational` with Gauss-Jordan solves: no
//! tolerances, so "preserves the lattice" can be certified rather than
//! approximated.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

pub type Rat = BigRational;

/// Parse "p/q" or "p" into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let num_err = |_| Error::Numerical(format!("cannot parse rational from {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(num_err)?;
            let q: BigInt = q.trim().parse().map_err(num_err)?;
            if q.is_zero() {
                return Err(Error::Numerical(format!("zero denominator in {s:?}")));
            }
            Ok(Rat::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().map_err(num_err)?;
            Ok(Rat::from_integer(p))
        }
    }
}

/// Canonical "p/q" (or "p") rendering, used in JSON reports.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_i64(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_int(p: i64) -> Rat {
    Rat::from_integer(BigInt::from(p))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    // good enough for the magnitudes that appear in lattice bases
    let p = r.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
    let q = r.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
    p / q
}

/// Dense column-major matrix over exact rationals.
#[derive(Clone, Debug, PartialEq)]
pub struct RatMat {
    pub nrows: usize,
    pub ncols: usize,
    data: Vec<Rat>,
}

impl RatMat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, data: vec![Rat::zero(); nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, f: impl Fn(usize, usize) -> Rat) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        for c in 0..ncols {
            for r in 0..nrows {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn from_columns(cols: &[Vec<Rat>]) -> Result<Self> {
        let nrows = cols.first().map(|c| c.len()).unwrap_or(0);
        if cols.iter().any(|c| c.len() != nrows) {
            return Err(Error::DimensionMismatch("ragged columns".into()));
        }
        Ok(Self::from_fn(nrows, cols.len(), |r, c| cols[c][r].clone()))
    }

    pub fn column(&self, c: usize) -> Vec<Rat> {
        (0..self.nrows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn mul(&self, rhs: &RatMat) -> Result<RatMat> {
        if self.ncols != rhs.nrows {
            return Err(Error::DimensionMismatch("matrix product shapes".into()));
        }
        let mut out = RatMat::zeros(self.nrows, rhs.ncols);
        for c in 0..rhs.ncols {
            for k in 0..self.ncols {
                let v = &rhs[(k, c)];
                if v.is_zero() {
                    continue;
                }
                for r in 0..self.nrows {
                    let add = &self[(r, k)] * v;
                    out[(r, c)] += add;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Result<Vec<Rat>> {
        if self.ncols != v.len() {
            return Err(Error::DimensionMismatch("matrix-vector shapes".into()));
        }
        let mut out = vec![Rat::zero(); self.nrows];
        for (k, vk) in v.iter().enumerate() {
            if vk.is_zero() {
                continue;
            }
            for r in 0..self.nrows {
                out[r] += &self[(r, k)] * vk;
            }
        }
        Ok(out)
    }

    /// Solve `self * x = b` for each column of `b` by exact Gauss-Jordan.
    pub fn solve(&self, b: &RatMat) -> Result<RatMat> {
        if self.nrows != self.ncols {
            return Err(Error::DimensionMismatch("solve needs a square matrix".into()));
        }
        if b.nrows != self.nrows {
            return Err(Error::DimensionMismatch("rhs rows".into()));
        }
        let n = self.nrows;
        let mut a = self.clone();
        let mut x = b.clone();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a[(r, col)].is_zero())
                .ok_or_else(|| Error::Singular("exact solve: zero pivot column".into()))?;
            if pivot != col {
                for c in 0..n {
                    a.data.swap(c * n + pivot, c * n + col);
                }
                for c in 0..x.ncols {
                    x.data.swap(c * n + pivot, c * n + col);
                }
            }
            let inv = a[(col, col)].recip();
            for c in 0..n {
                let v = &a[(col, c)] * &inv;
                a[(col, c)] = v;
            }
            for c in 0..x.ncols {
                let v = &x[(col, c)] * &inv;
                x[(col, c)] = v;
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let factor = a[(r, col)].clone();
                for c in 0..n {
                    let sub = &a[(col, c)] * &factor;
                    a[(r, c)] -= sub;
                }
                for c in 0..x.ncols {
                    let sub = &x[(col, c)] * &factor;
                    x[(r, c)] -= sub;
                }
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<RatMat> {
        self.solve(&RatMat::identity(self.nrows))
    }

    /// Integer power, using the exact inverse for negative exponents.
    pub fn pow(&self, e: i64) -> Result<RatMat> {
        if self.nrows != self.ncols {
            return Err(Error::DimensionMismatch("pow needs a square matrix".into()));
        }
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut out = RatMat::identity(self.nrows);
        for _ in 0..e.unsigned_abs() {
            out = out.mul(&base)?;
        }
        Ok(out)
    }

    pub fn is_integer(&self) -> bool {
        self.data.iter().all(|v| v.denom().is_one())
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.nrows, self.ncols, |r, c| rat_to_f64(&self[(r, c)]))
    }
}

impl std::ops::Index<(usize, usize)> for RatMat {
    type Output = Rat;
    fn index(&self, (r, c): (usize, usize)) -> &Rat {
        &self.data[c * self.nrows + r]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Rat {
        &mut self.data[c * self.nrows + r]
    }
}

/// True if every entry is an integer; otherwise the first fractional entry.
pub fn integrality_witness(v: &[Rat]) -> Option<(usize, Rat)> {
    v.iter().enumerate().find(|(_, r)| !r.denom().is_one()).map(|(i, r)| (i, r.clone()))
}

/// Exact absolute value of the largest entry, as f64 (diagnostics only).
pub fn max_abs_f64(v: &[Rat]) -> f64 {
    v.iter().map(|r| rat_to_f64(&r.abs())).fold(0.0, f64::max)
}
