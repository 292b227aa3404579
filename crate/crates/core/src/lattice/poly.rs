use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::matrix::IntMatrix;
use crate::error::{Error, Result};

/// Integer polynomial, coefficients stored from the constant term upwards.
///
/// Always canonical: the last stored coefficient is nonzero, and the zero
/// polynomial has no coefficients at all.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPolynomial { coeffs: Vec::new() }
    }

    /// `(x - root)^mult`
    pub fn linear_power(root: i64, mult: u32) -> Self {
        let lin = Self::from_i64(&[-root, 1]);
        (0..mult).fold(Self::from_i64(&[1]), |acc, _| acc.mul(&lin))
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn mul(&self, rhs: &IntPolynomial) -> IntPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn derivative(&self) -> IntPolynomial {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// Evaluates the polynomial at a square matrix by Horner's scheme.
    pub fn eval_matrix(&self, m: &IntMatrix) -> IntMatrix {
        let n = m.dim();
        let mut acc = IntMatrix::zeros(n);
        for c in self.coeffs.iter().rev() {
            acc = &acc * m;
            for i in 0..n {
                acc[(i, i)] += c;
            }
        }
        acc
    }

    /// Divides out the gcd of the coefficients and makes the leading
    /// coefficient positive.
    pub fn primitive(&self) -> IntPolynomial {
        if self.is_zero() {
            return Self::zero();
        }
        let g = self
            .coeffs
            .iter()
            .fold(BigInt::zero(), |g, c| g.gcd(c));
        let sign = if self.leading().is_some_and(|l| l.is_negative()) {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        let d = g * sign;
        Self::new(self.coeffs.iter().map(|c| c / &d).collect())
    }

    /// Exact division; `None` when `divisor` does not divide `self` over
    /// the integers.
    pub fn div_exact(&self, divisor: &IntPolynomial) -> Option<IntPolynomial> {
        let (q, r) = rat_divmod(&to_rational(self), &to_rational(divisor))?;
        if !r.is_empty() {
            return None;
        }
        from_rational_integral(&q)
    }

    /// Product of the distinct irreducible factors: same roots, all simple.
    pub fn squarefree_part(&self) -> IntPolynomial {
        if self.degree().unwrap_or(0) == 0 {
            return self.primitive();
        }
        let f = to_rational(&self.primitive());
        let g = rat_gcd(f.clone(), to_rational(&self.derivative()));
        let (q, r) = rat_divmod(&f, &g).expect("gcd is nonzero");
        debug_assert!(r.is_empty());
        IntPolynomial::from_rational_scaled(&q)
    }

    /// Clears denominators of a rational polynomial and takes the
    /// primitive part.
    fn from_rational_scaled(p: &[BigRational]) -> IntPolynomial {
        let lcm = p
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        IntPolynomial::new(
            p.iter()
                .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
                .collect(),
        )
        .primitive()
    }

    /// Coefficients as `f64`, failing if any of them overflows.
    pub fn to_f64_coeffs(&self) -> Result<Vec<f64>> {
        self.coeffs
            .iter()
            .map(|c| {
                c.to_f64()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::numeric(format!("coefficient {c} does not fit in f64")))
            })
            .collect()
    }
}

fn to_rational(p: &IntPolynomial) -> Vec<BigRational> {
    p.coeffs
        .iter()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect()
}

fn from_rational_integral(p: &[BigRational]) -> Option<IntPolynomial> {
    p.iter()
        .map(|c| c.is_integer().then(|| c.to_integer()))
        .collect::<Option<Vec<_>>>()
        .map(IntPolynomial::new)
}

fn trim(p: &mut Vec<BigRational>) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn rat_divmod(a: &[BigRational], b: &[BigRational]) -> Option<(Vec<BigRational>, Vec<BigRational>)> {
    let mut b = b.to_vec();
    trim(&mut b);
    let lead = b.last()?.clone();
    let mut r = a.to_vec();
    trim(&mut r);
    if r.len() < b.len() {
        return Some((Vec::new(), r));
    }
    let mut q = vec![BigRational::zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let factor = r.last().unwrap() / &lead;
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= &factor * c;
        }
        q[shift] = factor;
        r.pop();
        trim(&mut r);
    }
    trim(&mut q);
    Some((q, r))
}

fn rat_gcd(mut a: Vec<BigRational>, mut b: Vec<BigRational>) -> Vec<BigRational> {
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let (_, r) = rat_divmod(&a, &b).expect("nonzero divisor");
        a = b;
        b = r;
    }
    if let Some(lead) = a.last().cloned() {
        for c in a.iter_mut() {
            *c /= &lead;
        }
    }
    a
}

/// Characteristic polynomial `det(λI − M)` by the Faddeev–LeVerrier
/// recurrence, run entirely over the integers.
///
/// Each step divides a trace by `k`; the division is exact for integer
/// matrices and a nonzero remainder is reported as a numeric error.
pub fn char_poly(m: &IntMatrix) -> Result<IntPolynomial> {
    let n = m.dim();
    // coeffs[n - k] holds c_k in λ^n + c_1 λ^{n-1} + ... + c_n
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[n] = BigInt::one();
    let mut aux = IntMatrix::identity(n);
    for k in 1..=n {
        let am = m.checked_mul(&aux)?;
        let (c, rem) = (-am.trace()).div_rem(&BigInt::from(k));
        if !rem.is_zero() {
            return Err(Error::numeric(format!(
                "Faddeev-LeVerrier step {k} produced a non-integral coefficient"
            )));
        }
        coeffs[n - k] = c.clone();
        aux = am;
        for i in 0..n {
            aux[(i, i)] += &c;
        }
    }
    if !aux.is_zero() {
        return Err(Error::numeric("Faddeev-LeVerrier residual matrix is nonzero"));
    }
    Ok(IntPolynomial::new(coeffs))
}

impl fmt::Debug for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let (sign, abs) = (c.is_negative(), c.abs());
            if first {
                if sign {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if sign { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = i == 0 || !abs.is_one();
            if show_coeff {
                write!(f, "{abs}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn identity_2x2() {
        let p = char_poly(&IntMatrix::identity(2)).unwrap();
        assert_eq!(p, IntPolynomial::linear_power(1, 2));
    }

    #[test]
    fn trace_determinant_2x2() {
        let p = char_poly(&m(&[vec![0, -1], vec![1, 3]])).unwrap();
        assert_eq!(p, IntPolynomial::from_i64(&[1, -3, 1]));
    }

    #[test]
    fn unipotent_upper_triangular() {
        let p = char_poly(&m(&[vec![1, 4, -2], vec![0, 1, 7], vec![0, 0, 1]])).unwrap();
        assert_eq!(p, IntPolynomial::linear_power(1, 3));
    }

    #[test]
    fn squarefree_part_removes_multiplicity() {
        let p = IntPolynomial::linear_power(1, 3).mul(&IntPolynomial::linear_power(-2, 2));
        assert_eq!(p.squarefree_part(), IntPolynomial::from_i64(&[-2, 1, 1]));
        let q = IntPolynomial::from_i64(&[1, -3, 1]);
        assert_eq!(q.squarefree_part(), q);
    }

    #[test]
    fn exact_division() {
        let a = IntPolynomial::from_i64(&[1, -3, 1]);
        let b = IntPolynomial::from_i64(&[5, 0, 2]);
        assert_eq!(a.mul(&b).div_exact(&a), Some(b.clone()));
        assert_eq!(b.div_exact(&a), None);
        assert_eq!(IntPolynomial::from_i64(&[1, 1]).div_exact(&IntPolynomial::from_i64(&[0, 2])), None);
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(IntPolynomial::from_i64(&[1, -3, 1]).to_string(), "x^2 - 3x + 1");
        assert_eq!(IntPolynomial::zero().to_string(), "0");
    }
}
