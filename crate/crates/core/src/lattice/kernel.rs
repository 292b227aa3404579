//! Integer kernels and exact rational solves for sublattice computations.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::matrix::IntMatrix;
use crate::error::{Error, Result};

/// Integral basis of `{x ∈ Z^n : A x = 0}` for an `rows × n` integer matrix.
///
/// Row-reduces `[Aᵀ | I]` with unimodular integer row operations; rows whose
/// `Aᵀ` part vanishes carry kernel vectors in their identity part, and since
/// the transform is unimodular they span the full (saturated) kernel.
pub fn integer_kernel(a: &[Vec<BigInt>], n: usize) -> Result<Vec<Vec<BigInt>>> {
    for row in a {
        Error::check_dim(n, row.len())?;
    }
    let rows = a.len();
    // work[i] = (column i of A) ++ (row i of I_n)
    let mut work: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let mut r: Vec<BigInt> = a.iter().map(|row| row[i].clone()).collect();
            r.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            r
        })
        .collect();

    let mut pivot_row = 0;
    for col in 0..rows {
        if pivot_row == n {
            break;
        }
        loop {
            // smallest nonzero |entry| at or below the pivot row
            let best = (pivot_row..n)
                .filter(|&r| !work[r][col].is_zero())
                .min_by(|&x, &y| work[x][col].abs().cmp(&work[y][col].abs()));
            let Some(best) = best else { break };
            work.swap(pivot_row, best);
            let mut done = true;
            for r in pivot_row + 1..n {
                if work[r][col].is_zero() {
                    continue;
                }
                let q = &work[r][col] / &work[pivot_row][col];
                if !q.is_zero() {
                    let (head, tail) = work.split_at_mut(r);
                    for (x, p) in tail[0].iter_mut().zip(&head[pivot_row]) {
                        *x -= &q * p;
                    }
                }
                if !work[r][col].is_zero() {
                    done = false;
                }
            }
            if done {
                pivot_row += 1;
                break;
            }
        }
    }
    Ok(work[pivot_row..]
        .iter()
        .filter(|r| r[..rows].iter().all(Zero::is_zero))
        .map(|r| r[rows..].to_vec())
        .collect())
}

/// Solves `B X = C` exactly for `X` where `B` is `n × r` of full column rank
/// (given as `r` column vectors) and `C` is `n × s` (given as `s` columns).
/// Returns `X` as `r` rows of length `s`, or an error if no exact rational
/// solution exists.
pub fn solve_columns(basis: &[Vec<BigInt>], targets: &[Vec<BigInt>]) -> Result<Vec<Vec<BigRational>>> {
    let r = basis.len();
    let Some(n) = basis.first().map(Vec::len) else {
        return Ok(Vec::new());
    };
    let s = targets.len();
    for v in basis.iter().chain(targets) {
        Error::check_dim(n, v.len())?;
    }
    // augmented n × (r + s) system
    let mut aug: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            basis
                .iter()
                .chain(targets)
                .map(|col| BigRational::from_integer(col[i].clone()))
                .collect()
        })
        .collect();

    let mut pivots = Vec::with_capacity(r);
    let mut row = 0;
    for col in 0..r {
        let Some(p) = (row..n).find(|&i| !aug[i][col].is_zero()) else {
            return Err(Error::input("basis columns are linearly dependent"));
        };
        aug.swap(row, p);
        let inv = aug[row][col].recip();
        for x in aug[row].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != row && !aug[i][col].is_zero() {
                let f = aug[i][col].clone();
                let (pr, target) = if i < row {
                    let (a, b) = aug.split_at_mut(row);
                    (&b[0], &mut a[i])
                } else {
                    let (a, b) = aug.split_at_mut(i);
                    (&a[row], &mut b[0])
                };
                for (t, p) in target.iter_mut().zip(pr.iter()) {
                    *t -= &f * p;
                }
            }
        }
        pivots.push(row);
        row += 1;
    }
    if aug[row..].iter().any(|r| r[r.len() - s..].iter().any(|x| !x.is_zero())) {
        return Err(Error::contract("target columns are not in the span of the basis"));
    }
    Ok(pivots
        .iter()
        .map(|&p| aug[p][r..].to_vec())
        .collect())
}

/// Matrix of `action` restricted to the sublattice spanned by `basis`
/// (columns), expressed in that basis. Fails if the sublattice is not
/// invariant or the restriction is not integral.
pub fn restrict_to_sublattice(action: &IntMatrix, basis: &[Vec<BigInt>]) -> Result<IntMatrix> {
    if basis.is_empty() {
        return Err(Error::input("cannot restrict to the zero sublattice"));
    }
    let images: Vec<Vec<BigInt>> = basis
        .iter()
        .map(|b| action.mul_vec(b))
        .collect::<Result<_>>()?;
    let coords = solve_columns(basis, &images)?;
    let r = basis.len();
    let mut rows = vec![vec![BigInt::zero(); r]; r];
    for (i, row) in coords.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if !x.is_integer() {
                return Err(Error::contract(format!(
                    "restricted action has non-integral entry {x} at ({i}, {j})"
                )));
            }
            rows[i][j] = x.to_integer();
        }
    }
    IntMatrix::from_big_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(rows: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    #[test]
    fn kernel_of_swap_minus_identity() {
        // swap - I = [[-1, 1], [1, -1]]
        let k = integer_kernel(&big(&[vec![-1, 1], vec![1, -1]]), 2).unwrap();
        assert_eq!(k.len(), 1);
        let v = &k[0];
        assert_eq!(v[0].abs(), BigInt::one());
        assert_eq!(v[0], v[1]);
    }

    #[test]
    fn kernel_is_saturated() {
        // 2x - 4y = 0 has kernel generated by (2, 1), not (4, 2)
        let k = integer_kernel(&big(&[vec![2, -4]]), 2).unwrap();
        assert_eq!(k.len(), 1);
        let v: Vec<i64> = k[0].iter().map(|x| i64::try_from(x).unwrap()).collect();
        assert!(v == vec![2, 1] || v == vec![-2, -1], "{v:?}");
    }

    #[test]
    fn kernel_of_zero_map_is_everything() {
        let k = integer_kernel(&big(&[vec![0, 0, 0]]), 3).unwrap();
        assert_eq!(k.len(), 3);
    }

    #[test]
    fn restriction_to_diagonal() {
        let action = IntMatrix::from_rows(&[vec![0, 2], vec![2, 0]]).unwrap();
        let r = restrict_to_sublattice(&action, &big(&[vec![1, 1]])).unwrap();
        assert_eq!(r, IntMatrix::from_rows(&[vec![2]]).unwrap());
    }

    #[test]
    fn restriction_rejects_non_invariant_sublattice() {
        let action = IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).unwrap();
        assert!(restrict_to_sublattice(&action, &big(&[vec![0, 1]])).is_err());
    }
}
