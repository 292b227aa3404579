//! Exact integer lattices with pairings, integer matrices, characteristic
//! polynomials and spectral radii.

mod kernel;
mod matrix;
mod poly;
mod spectral;

pub use kernel::{integer_kernel, restrict_to_sublattice, solve_columns};
pub use matrix::IntMatrix;
pub use poly::{char_poly, IntPolynomial};
pub use spectral::{max_root_modulus, spectral_radius, spectral_radius_bracket, RadiusBracket, DEFAULT_TOL};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};

/// Whether the Gram matrix must be symmetric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymmetryKind {
    Symmetric,
    /// Euler-type pairings `χ(E, F)`, which need not be symmetric.
    EulerGeneral,
}

/// How the stored pairing relates to the Euler pairing `χ`.
///
/// Under `Euler` the Gram matrix is `χ` itself and spherical classes have
/// self-pairing `+2`. Under `Mukai` the Gram matrix is `-χ` (the Mukai
/// pairing) and spherical classes have self-pairing `-2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairingConvention {
    Euler,
    Mukai,
}

impl PairingConvention {
    /// Factor `s` with `χ(v, w) = s * pairing(v, w)`.
    pub fn euler_sign(self) -> i64 {
        match self {
            PairingConvention::Euler => 1,
            PairingConvention::Mukai => -1,
        }
    }

    /// Self-pairing of a spherical class under this convention.
    pub fn spherical_self_pairing(self) -> i64 {
        2 * self.euler_sign()
    }
}

/// Element of a lattice, given by integer coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeVector(pub Vec<BigInt>);

impl LatticeVector {
    pub fn from_i64(coords: &[i64]) -> Self {
        LatticeVector(coords.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zero(rank: usize) -> Self {
        LatticeVector(vec![BigInt::zero(); rank])
    }

    pub fn basis(rank: usize, i: usize) -> Self {
        let mut v = Self::zero(rank);
        v.0[i] = BigInt::from(1);
        v
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

/// Finite-rank integer lattice with a (possibly non-symmetric) integer
/// pairing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BilinearLattice {
    gram: IntMatrix,
    symmetry: SymmetryKind,
    convention: PairingConvention,
}

impl BilinearLattice {
    pub fn new(gram: IntMatrix, symmetry: SymmetryKind, convention: PairingConvention) -> Result<Self> {
        if symmetry == SymmetryKind::Symmetric && !gram.is_symmetric() {
            return Err(Error::input("gram matrix declared symmetric but is not"));
        }
        Ok(BilinearLattice {
            gram,
            symmetry,
            convention,
        })
    }

    pub fn symmetric(gram: IntMatrix) -> Result<Self> {
        Self::new(gram, SymmetryKind::Symmetric, PairingConvention::Euler)
    }

    /// Rank-3 Mukai lattice `H^0 ⊕ Z·H ⊕ H^4` of a polarised K3 surface with
    /// `H² = h_squared`, coordinates `(r, c, s)` for the Mukai vector
    /// `(r, c·H, s)`.
    pub fn k3_mukai(h_squared: i64) -> Self {
        let gram = IntMatrix::from_rows(&[vec![0, 0, -1], vec![0, h_squared, 0], vec![-1, 0, 0]])
            .expect("3x3 literal");
        BilinearLattice {
            gram,
            symmetry: SymmetryKind::Symmetric,
            convention: PairingConvention::Mukai,
        }
    }

    pub fn rank(&self) -> usize {
        self.gram.dim()
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn symmetry(&self) -> SymmetryKind {
        self.symmetry
    }

    pub fn convention(&self) -> PairingConvention {
        self.convention
    }

    pub fn check_vector(&self, v: &LatticeVector) -> Result<()> {
        Error::check_dim(self.rank(), v.rank())
    }

    /// `vᵀ · gram · w`
    pub fn pairing(&self, v: &LatticeVector, w: &LatticeVector) -> Result<BigInt> {
        self.check_vector(v)?;
        self.check_vector(w)?;
        let gw = self.gram.mul_vec(&w.0)?;
        Ok(v.0.iter().zip(&gw).map(|(a, b)| a * b).sum())
    }

    /// Euler pairing `χ(v, w)` recovered from the stored convention.
    pub fn euler_pairing(&self, v: &LatticeVector, w: &LatticeVector) -> Result<BigInt> {
        Ok(self.pairing(v, w)? * BigInt::from(self.convention.euler_sign()))
    }

    pub fn is_spherical_class(&self, e: &LatticeVector) -> Result<bool> {
        Ok(self.pairing(e, e)? == BigInt::from(self.convention.spherical_self_pairing()))
    }
}

/// `vᵀ · gram · w`
pub fn pairing_eval(lattice: &BilinearLattice, v: &LatticeVector, w: &LatticeVector) -> Result<BigInt> {
    lattice.pairing(v, w)
}

/// Exact test that `(M - I)^n = 0` for an `n × n` matrix.
pub fn is_unipotent(m: &IntMatrix) -> bool {
    let n = m.dim();
    let shifted = m
        .checked_sub(&IntMatrix::identity(n))
        .expect("same size");
    shifted.pow(n as u32).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_basis_pairing() {
        let l = BilinearLattice::symmetric(IntMatrix::identity(2)).unwrap();
        let v = LatticeVector::from_i64(&[1, 0]);
        let w = LatticeVector::from_i64(&[0, 1]);
        assert_eq!(pairing_eval(&l, &v, &w).unwrap(), BigInt::from(0));
    }

    #[test]
    fn hyperbolic_pairing() {
        let l = BilinearLattice::symmetric(IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap()).unwrap();
        let v = LatticeVector::from_i64(&[1, 0]);
        let w = LatticeVector::from_i64(&[0, 1]);
        assert_eq!(pairing_eval(&l, &v, &w).unwrap(), BigInt::from(1));
    }

    #[test]
    fn structure_sheaf_of_k3_has_mukai_square_minus_two() {
        // hand expansion: (1,0,1)·G·(1,0,1) = 1·(-1) + 1·(-1) = -2
        let l = BilinearLattice::k3_mukai(10);
        let o = LatticeVector::from_i64(&[1, 0, 1]);
        assert_eq!(pairing_eval(&l, &o, &o).unwrap(), BigInt::from(-2));
        assert_eq!(l.euler_pairing(&o, &o).unwrap(), BigInt::from(2));
        assert!(l.is_spherical_class(&o).unwrap());
    }

    #[test]
    fn pairing_rejects_wrong_rank() {
        let l = BilinearLattice::k3_mukai(10);
        let v = LatticeVector::from_i64(&[1, 0]);
        assert!(matches!(
            pairing_eval(&l, &v, &v),
            Err(Error::DimensionMismatch { expected: 3, actual: 2 })
        ));
    }

    #[test]
    fn symmetric_declaration_is_checked() {
        let g = IntMatrix::from_rows(&[vec![1, 2], vec![0, 1]]).unwrap();
        assert!(BilinearLattice::symmetric(g.clone()).is_err());
        assert!(BilinearLattice::new(g, SymmetryKind::EulerGeneral, PairingConvention::Euler).is_ok());
    }

    #[test]
    fn unipotence() {
        assert!(is_unipotent(&IntMatrix::identity(4)));
        assert!(is_unipotent(&IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).unwrap()));
        assert!(!is_unipotent(&IntMatrix::diagonal(&[2, 1])));
        assert!(!is_unipotent(&IntMatrix::scalar(2, -1)));
    }
}
