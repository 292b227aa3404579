//! Transfer from a surface model to `Hilbⁿ` through box powers.
//!
//! On `Sⁿ` the δ′ values of `Φ^{⊠n}` are `n`-th powers (Künneth), and the
//! class action is `[Φ]^{⊗n}`. The induced functor on the Hilbert scheme
//! acts on the `Sym(n)`-invariant part, whose eigenvalues are a subset of
//! products of `n` eigenvalues of `[Φ]` and include `ρ([Φ])ⁿ`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::autoeq::LogRho;
use crate::error::{Error, Result};
use crate::lattice::IntMatrix;
use crate::series::{DeltaEntry, DeltaSeries, Verdict};

/// Largest dimension a Kronecker power may reach.
pub const TENSOR_POWER_LIMIT: usize = 10_000;

/// `lower(m) ↦ lower(m)ⁿ`, `upper(m) ↦ upper(m)ⁿ`.
pub fn kunneth_power_series(s: &DeltaSeries, n: u32) -> Result<DeltaSeries> {
    if n == 0 {
        return Err(Error::input("number of points must be positive"));
    }
    let entries = s
        .entries
        .iter()
        .map(|e| DeltaEntry {
            m: e.m,
            lower: e.lower.powi(n as i32),
            upper: e.upper.map(|u| u.powi(n as i32)),
            lower_exact: e.lower_exact.as_ref().map(|x| x.pow(n)),
            upper_exact: e.upper_exact.as_ref().map(|x| x.pow(n)),
        })
        .collect();
    Ok(DeltaSeries { t: s.t, entries })
}

/// Kronecker power `M^{⊗n}`.
pub fn tensor_power_matrix(m: &IntMatrix, n: u32) -> Result<IntMatrix> {
    if n == 0 {
        return Err(Error::input("tensor power must be positive"));
    }
    let dim = (m.dim() as u128).checked_pow(n).unwrap_or(u128::MAX);
    if dim > TENSOR_POWER_LIMIT as u128 {
        return Err(Error::Resource(format!(
            "tensor power of rank {} to the {n} has dimension {dim} > {TENSOR_POWER_LIMIT}",
            m.dim()
        )));
    }
    let mut acc = m.clone();
    for _ in 1..n {
        acc = acc.kronecker(m);
    }
    Ok(acc)
}

/// Non-decreasing `n`-tuples over `0..rank`, in lexicographic order. These
/// index the orbit-sum basis of the symmetric tensors.
pub fn symmetric_basis(rank: usize, n: u32) -> Vec<Vec<usize>> {
    fn go(rank: usize, left: u32, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..rank {
            cur.push(i);
            go(rank, left - 1, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(rank, n, 0, &mut Vec::new(), &mut out);
    out
}

/// Distinct permutations of a sorted multiset.
fn orbit(sorted: &[usize]) -> Vec<Vec<usize>> {
    let mut cur = sorted.to_vec();
    let mut out = vec![cur.clone()];
    // next lexicographic permutation
    loop {
        let Some(i) = (0..cur.len().saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            return out;
        };
        let j = (i + 1..cur.len()).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
        out.push(cur.clone());
    }
}

/// Matrix of `M^{⊗n}` on `Symⁿ`, in the orbit-sum basis
/// `e_α = Σ_{i ∈ Sym(n)·α} e_{i_1} ⊗ ... ⊗ e_{i_n}` indexed by
/// [`symmetric_basis`]. Entry `(β, α)` is `Σ_{i ∈ Sym(n)·α} Π_j M[β_j, i_j]`.
pub fn sym_invariant_restriction(m: &IntMatrix, n: u32) -> Result<IntMatrix> {
    if n == 0 {
        return Err(Error::input("number of points must be positive"));
    }
    let basis = symmetric_basis(m.dim(), n);
    let size = basis.len();
    if size > TENSOR_POWER_LIMIT {
        return Err(Error::Resource(format!(
            "symmetric power has dimension {size} > {TENSOR_POWER_LIMIT}"
        )));
    }
    let orbits: Vec<Vec<Vec<usize>>> = basis.iter().map(|a| orbit(a)).collect();
    let mut out = IntMatrix::zeros(size);
    for (r, beta) in basis.iter().enumerate() {
        for (c, orb) in orbits.iter().enumerate() {
            let mut sum = BigInt::zero();
            for i in orb {
                let mut prod = BigInt::one();
                for (&b, &ij) in beta.iter().zip(i) {
                    prod *= &m[(b, ij)];
                    if prod.is_zero() {
                        break;
                    }
                }
                sum += prod;
            }
            out[(r, c)] = sum;
        }
    }
    Ok(out)
}

/// `n` points on a surface with autoequivalence `Φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbScenario {
    n: u32,
    base_matrix: IntMatrix,
    base_series: DeltaSeries,
    base_entropy_lower: f64,
}

impl HilbScenario {
    pub fn new(n: u32, base_matrix: IntMatrix, base_series: DeltaSeries, base_entropy_lower: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("number of points must be positive"));
        }
        if let Some(e) = base_series.entries.iter().find(|e| !(e.lower > 0.0)) {
            return Err(Error::input(format!("base series lower bound at m = {} is not positive", e.m)));
        }
        if !(base_entropy_lower >= 0.0) || !base_entropy_lower.is_finite() {
            return Err(Error::input("base entropy bound must be finite and nonnegative"));
        }
        Ok(HilbScenario {
            n,
            base_matrix,
            base_series,
            base_entropy_lower,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn base_matrix(&self) -> &IntMatrix {
        &self.base_matrix
    }

    pub fn base_series(&self) -> &DeltaSeries {
        &self.base_series
    }

    pub fn t(&self) -> f64 {
        self.base_series.t
    }

    pub fn base_entropy_lower(&self) -> f64 {
        self.base_entropy_lower
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HilbVerdict {
    pub entropy_lower: f64,
    pub log_rho: LogRho,
    pub base_log_rho: LogRho,
    pub series: DeltaSeries,
    pub verdict: Verdict,
}

/// Scales the base bounds by `n`: `h_cat(Ψ) = n h_cat(Φ)` and
/// `log ρ([Ψ]) = n log ρ([Φ])`.
///
/// The `Sym(n)` restriction is computed when its dimension fits the guard
/// and used to confirm exact unipotence; the numeric `log ρ` stays the
/// scaled base value.
pub fn hilb_transfer_verdict(sc: &HilbScenario, tol: f64) -> Result<HilbVerdict> {
    if !(tol > 0.0) {
        return Err(Error::input(format!("tolerance must be positive, got {tol}")));
    }
    let n = sc.n as f64;
    let base_log_rho = LogRho::of_matrix(&sc.base_matrix, tol)?;
    let exact_zero = if base_log_rho.exact_zero {
        true
    } else {
        match sym_invariant_restriction(&sc.base_matrix, sc.n) {
            Ok(sym) => LogRho::of_matrix(&sym, tol)?.exact_zero,
            Err(Error::Resource(_)) => false,
            Err(e) => return Err(e),
        }
    };
    let log_rho = LogRho {
        value: if exact_zero { 0.0 } else { n * base_log_rho.value },
        exact_zero,
    };
    let entropy_lower = n * sc.base_entropy_lower;
    let verdict = Verdict::decide(entropy_lower, log_rho.value, log_rho.exact_zero, tol * n);
    Ok(HilbVerdict {
        entropy_lower,
        log_rho,
        base_log_rho,
        series: kunneth_power_series(&sc.base_series, sc.n)?,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{char_poly, spectral_radius};
    use num_bigint::BigUint;

    #[test]
    fn kunneth_of_geometric_series() {
        let s = DeltaSeries::from_exact(0.0, &[2u32, 4, 8, 16].map(BigUint::from));
        let p = kunneth_power_series(&s, 2).unwrap();
        let got: Vec<_> = p.entries.iter().map(|e| e.lower_exact.clone().unwrap()).collect();
        assert_eq!(got, [4u32, 16, 64, 256].map(BigUint::from));
        assert_eq!(kunneth_power_series(&s, 1).unwrap(), s);
        assert!((p.log_slope(1, 4).unwrap() - 2.0 * s.log_slope(1, 4).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn kronecker_of_diagonal() {
        let m = IntMatrix::diagonal(&[2, 3]);
        assert_eq!(tensor_power_matrix(&m, 2).unwrap(), IntMatrix::diagonal(&[4, 6, 6, 9]));
        assert_eq!(tensor_power_matrix(&m, 1).unwrap(), m);
    }

    #[test]
    fn tensor_power_guard() {
        let m = IntMatrix::identity(11);
        assert!(matches!(tensor_power_matrix(&m, 4), Err(Error::Resource(_))));
        assert!(tensor_power_matrix(&IntMatrix::identity(10), 4).is_ok());
    }

    #[test]
    fn symmetric_square_of_diagonal() {
        let m = IntMatrix::diagonal(&[2, 3]);
        assert_eq!(sym_invariant_restriction(&m, 2).unwrap(), IntMatrix::diagonal(&[4, 6, 9]));
    }

    #[test]
    fn symmetric_power_of_identity() {
        for (rank, n, dim) in [(3usize, 2u32, 6usize), (3, 3, 10), (4, 2, 10), (2, 4, 5)] {
            let s = sym_invariant_restriction(&IntMatrix::identity(rank), n).unwrap();
            assert_eq!(s, IntMatrix::identity(dim));
        }
    }

    #[test]
    fn symmetric_power_of_permutation() {
        // swap on Z^2: Sym^2 basis (00, 01, 11) is permuted as 00 <-> 11
        let m = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        let s = sym_invariant_restriction(&m, 2).unwrap();
        let want = IntMatrix::from_rows(&[vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]).unwrap();
        assert_eq!(s, want);
    }

    #[test]
    fn symmetric_char_poly_divides_tensor_char_poly() {
        let m = IntMatrix::from_rows(&[vec![2, 1, 0], vec![1, 1, 1], vec![0, -1, 3]]).unwrap();
        for n in 2..=3 {
            let full = char_poly(&tensor_power_matrix(&m, n).unwrap()).unwrap();
            let sym = char_poly(&sym_invariant_restriction(&m, n).unwrap()).unwrap();
            assert!(full.div_exact(&sym).is_some(), "n = {n}");
        }
    }

    #[test]
    fn symmetric_radius_scales() {
        let m = IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]]).unwrap();
        let rho = spectral_radius(&m, 1e-12).unwrap();
        let s = sym_invariant_restriction(&m, 3).unwrap();
        let r3 = spectral_radius(&s, 1e-12).unwrap();
        assert!((r3 - rho.powi(3)).abs() < 1e-9 * rho.powi(3));
    }

    #[test]
    fn verdict_scales_base() {
        let base = DeltaSeries::from_exact(0.0, &[7u32, 49, 343].map(BigUint::from));
        let sc = HilbScenario::new(3, IntMatrix::identity(3), base, 7f64.ln()).unwrap();
        let v = hilb_transfer_verdict(&sc, 1e-9).unwrap();
        assert!((v.entropy_lower - 3.0 * 7f64.ln()).abs() < 1e-12);
        assert!(v.log_rho.exact_zero);
        assert_eq!(v.verdict, Verdict::GyViolated);
    }

    #[test]
    fn equality_case_stays_without_gap() {
        let m = IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]]).unwrap();
        let rho = spectral_radius(&m, 1e-12).unwrap();
        let base = DeltaSeries::from_exact(0.0, &[3u32, 7, 18].map(BigUint::from));
        for n in [1, 2] {
            let sc = HilbScenario::new(n, m.clone(), base.clone(), rho.ln()).unwrap();
            let v = hilb_transfer_verdict(&sc, 1e-9).unwrap();
            assert_eq!(v.verdict, Verdict::NoGapCertified);
        }
    }

    #[test]
    fn scenario_rejects_nonpositive_series() {
        let base = DeltaSeries::from_exact(0.0, &[BigUint::zero()]);
        assert!(HilbScenario::new(2, IntMatrix::identity(1), base, 1.0).is_err());
    }
}
