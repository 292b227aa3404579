use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Square matrix with arbitrary-precision integer entries, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    n: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(n: usize) -> Self {
        IntMatrix {
            n,
            entries: vec![BigInt::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn scalar(n: usize, c: i64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = BigInt::from(c);
        }
        m
    }

    pub fn diagonal(diag: &[i64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = BigInt::from(*d);
        }
        m
    }

    /// Builds a matrix from rows of machine integers. Fails unless the rows
    /// form a non-empty square array.
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let big: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Self::from_big_rows(big)
    }

    pub fn from_big_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::input("matrix must have at least one row"));
        }
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            Error::check_dim(n, row.len())?;
            entries.extend(row);
        }
        Ok(IntMatrix { n, entries })
    }

    /// Companion matrix of a monic polynomial given by its low-to-high
    /// coefficients (the leading 1 is implicit).
    pub fn companion(lower_coeffs: &[i64]) -> Result<Self> {
        let n = lower_coeffs.len();
        if n == 0 {
            return Err(Error::input("companion matrix needs degree >= 1"));
        }
        let mut m = Self::zeros(n);
        for i in 1..n {
            m[(i, i - 1)] = BigInt::one();
        }
        for (i, c) in lower_coeffs.iter().enumerate() {
            m[(i, n - 1)] = BigInt::from(-c);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.n).map(|i| self[(i, j)].clone()).collect()
    }

    /// Rows as `i64`, if every entry fits.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|x| x.to_i64()).collect())
            .collect()
    }

    pub fn trace(&self) -> BigInt {
        (0..self.n).map(|i| &self[(i, i)]).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    pub fn max_abs_entry(&self) -> BigInt {
        self.entries
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn checked_mul(&self, rhs: &IntMatrix) -> Result<IntMatrix> {
        Error::check_dim(self.n, rhs.n)?;
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out.entries[i * n + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn checked_add(&self, rhs: &IntMatrix) -> Result<IntMatrix> {
        Error::check_dim(self.n, rhs.n)?;
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(IntMatrix { n: self.n, entries })
    }

    pub fn checked_sub(&self, rhs: &IntMatrix) -> Result<IntMatrix> {
        Error::check_dim(self.n, rhs.n)?;
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a - b)
            .collect();
        Ok(IntMatrix { n: self.n, entries })
    }

    pub fn scale(&self, c: &BigInt) -> IntMatrix {
        IntMatrix {
            n: self.n,
            entries: self.entries.iter().map(|x| x * c).collect(),
        }
    }

    pub fn neg(&self) -> IntMatrix {
        self.scale(&BigInt::from(-1))
    }

    pub fn pow(&self, mut k: u32) -> IntMatrix {
        let mut base = self.clone();
        let mut acc = Self::identity(self.n);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        Error::check_dim(self.n, v.len())?;
        Ok((0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn commutes_with(&self, other: &IntMatrix) -> Result<bool> {
        Ok(self.checked_mul(other)? == other.checked_mul(self)?)
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kronecker(&self, rhs: &IntMatrix) -> IntMatrix {
        let (p, q) = (self.n, rhs.n);
        let mut out = Self::zeros(p * q);
        for i in 0..p {
            for j in 0..p {
                let a = &self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..q {
                    for l in 0..q {
                        out[(i * q + k, j * q + l)] = a * &rhs[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Block-diagonal sum `self ⊕ rhs`.
    pub fn direct_sum(&self, rhs: &IntMatrix) -> IntMatrix {
        let n = self.n + rhs.n;
        let mut out = Self::zeros(n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(i, j)] = self[(i, j)].clone();
            }
        }
        for i in 0..rhs.n {
            for j in 0..rhs.n {
                out[(self.n + i, self.n + j)] = rhs[(i, j)].clone();
            }
        }
        out
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;

    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.entries[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.entries[i * self.n + j]
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;

    /// Panics on a size mismatch; use [`IntMatrix::checked_mul`] for
    /// fallible products.
    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        self.checked_mul(rhs).expect("matrix size mismatch")
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.n).map(|i| self.row(i).iter().map(ToString::to_string).collect::<Vec<_>>()))
            .finish()
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}
