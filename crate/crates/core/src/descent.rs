//! Descent through a cyclic cover `π: X → Y` with deck generator `g`.
//!
//! The quotient inherits the cover's entropy bound. Its class action is the
//! cover action restricted to the `g*`-invariant sublattice, so its spectral
//! radius is squeezed between 1 and the cover's when the latter is unipotent.

use num_bigint::BigInt;

use crate::autoeq::{induced_matrix, ActionGenerator, ActionWord, LogRho};
use crate::error::{Error, Result};
use crate::lattice::{integer_kernel, restrict_to_sublattice, IntMatrix};
use crate::series::Verdict;

/// Largest deck order accepted.
pub const MAX_DECK_ORDER: u32 = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct CoverScenario {
    word: ActionWord,
    deck: IntMatrix,
    order: u32,
    cover_entropy_bound: f64,
}

impl CoverScenario {
    /// Checks `deckᵈ = I` exactly, with `d = order` minimal only in the
    /// sense that it is the order the caller claims.
    pub fn new(word: ActionWord, deck: IntMatrix, order: u32, cover_entropy_bound: f64) -> Result<Self> {
        Error::check_dim(word.lattice().rank(), deck.dim())?;
        if order == 0 || order > MAX_DECK_ORDER {
            return Err(Error::input(format!("deck order {order} out of range 1..={MAX_DECK_ORDER}")));
        }
        if !deck.pow(order).is_identity() {
            return Err(Error::input(format!("deck matrix to the power {order} is not the identity")));
        }
        if !(cover_entropy_bound >= 0.0) || !cover_entropy_bound.is_finite() {
            return Err(Error::input("cover entropy bound must be finite and nonnegative"));
        }
        Ok(CoverScenario {
            word,
            deck,
            order,
            cover_entropy_bound,
        })
    }

    pub fn word(&self) -> &ActionWord {
        &self.word
    }

    pub fn deck(&self) -> &IntMatrix {
        &self.deck
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn cover_entropy_bound(&self) -> f64 {
        self.cover_entropy_bound
    }

    /// Tensor generators that do not commute with the deck action, i.e.
    /// polarizations that are not `g*`-invariant.
    pub fn non_invariant_tensors(&self) -> Result<Vec<usize>> {
        let mut bad = Vec::new();
        for (i, g) in self.word.generators().iter().enumerate() {
            if let ActionGenerator::Tensor(u) = g {
                if !u.commutes_with(&self.deck)? {
                    bad.push(i);
                }
            }
        }
        Ok(bad)
    }
}

/// Whether the word's induced action commutes with `g*`.
pub fn check_equivariant_commutation(sc: &CoverScenario) -> Result<bool> {
    induced_matrix(&sc.word)?.commutes_with(&sc.deck)
}

/// Saturated basis of `ker(g* − I)` and the word's action in that basis.
pub fn invariant_sublattice(sc: &CoverScenario) -> Result<(Vec<Vec<BigInt>>, IntMatrix)> {
    let action = induced_matrix(&sc.word)?;
    if !action.commutes_with(&sc.deck)? {
        return Err(Error::contract("word action does not commute with the deck transformation"));
    }
    let shifted = sc.deck.checked_sub(&IntMatrix::identity(sc.deck.dim()))?;
    let basis = integer_kernel(&shifted.rows(), sc.deck.dim())?;
    if basis.is_empty() {
        return Err(Error::contract("deck transformation has no invariant classes"));
    }
    let restricted = restrict_to_sublattice(&action, &basis)?;
    Ok((basis, restricted))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuotientVerdict {
    pub entropy_lower: f64,
    pub log_rho: LogRho,
    pub cover_log_rho: LogRho,
    pub invariant_rank: usize,
    pub verdict: Verdict,
}

pub fn quotient_verdict(sc: &CoverScenario, tol: f64) -> Result<QuotientVerdict> {
    if !(tol > 0.0) {
        return Err(Error::input(format!("tolerance must be positive, got {tol}")));
    }
    let (basis, restricted) = invariant_sublattice(sc)?;
    let cover_log_rho = LogRho::of_matrix(&induced_matrix(&sc.word)?, tol)?;
    let log_rho = LogRho::of_matrix(&restricted, tol)?;
    if cover_log_rho.exact_zero && !log_rho.exact_zero {
        return Err(Error::contract("restriction of a unipotent action is not unipotent"));
    }
    if !cover_log_rho.exact_zero && log_rho.value > cover_log_rho.value + 10.0 * tol {
        return Err(Error::contract(format!(
            "quotient log rho {} exceeds cover log rho {}",
            log_rho.value, cover_log_rho.value
        )));
    }
    let entropy_lower = sc.cover_entropy_bound;
    Ok(QuotientVerdict {
        entropy_lower,
        verdict: Verdict::decide(entropy_lower, log_rho.value, log_rho.exact_zero, tol),
        log_rho,
        cover_log_rho,
        invariant_rank: basis.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoeq::SphericalCheck;
    use crate::lattice::BilinearLattice;

    fn swap() -> IntMatrix {
        IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap()
    }

    fn plane() -> BilinearLattice {
        BilinearLattice::symmetric(IntMatrix::identity(2)).unwrap()
    }

    fn word(gens: Vec<ActionGenerator>) -> ActionWord {
        ActionWord::new(plane(), gens, SphericalCheck::Enforce).unwrap()
    }

    #[test]
    fn deck_order_is_checked() {
        assert!(CoverScenario::new(word(vec![]), swap(), 2, 1.0).is_ok());
        assert!(CoverScenario::new(word(vec![]), swap(), 3, 1.0).is_err());
        assert!(CoverScenario::new(word(vec![]), swap(), 0, 1.0).is_err());
        assert!(CoverScenario::new(word(vec![]), IntMatrix::identity(3), 1, 1.0).is_err());
    }

    #[test]
    fn p_twist_commutes() {
        let sc = CoverScenario::new(word(vec![ActionGenerator::PTwist]), swap(), 2, 1.0).unwrap();
        assert!(check_equivariant_commutation(&sc).unwrap());
    }

    #[test]
    fn non_invariant_polarization_fails() {
        let u = IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).unwrap();
        // U swap = [[1,1],[1,0]], swap U = [[0,1],[1,1]]
        assert_ne!(&u * &swap(), &swap() * &u);
        let sc = CoverScenario::new(word(vec![ActionGenerator::Tensor(u)]), swap(), 2, 1.0).unwrap();
        assert!(!check_equivariant_commutation(&sc).unwrap());
        assert_eq!(sc.non_invariant_tensors().unwrap(), vec![0]);
        assert!(matches!(invariant_sublattice(&sc), Err(Error::Contract(_))));
    }

    #[test]
    fn trivial_deck_keeps_everything() {
        let u = IntMatrix::from_rows(&[vec![1, 0], vec![3, 1]]).unwrap();
        let sc = CoverScenario::new(word(vec![ActionGenerator::Tensor(u.clone())]), IntMatrix::identity(2), 1, 1.0).unwrap();
        let (basis, r) = invariant_sublattice(&sc).unwrap();
        assert_eq!(basis.len(), 2);
        // standard basis up to a unimodular change: the restriction is conjugate to u
        assert_eq!(r.trace(), u.trace());
        assert!(crate::lattice::is_unipotent(&r));
    }

    #[test]
    fn swap_invariants() {
        let sc = CoverScenario::new(word(vec![]), swap(), 2, 1.0).unwrap();
        let (basis, r) = invariant_sublattice(&sc).unwrap();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0][0], basis[0][1]);
        assert_eq!(r, IntMatrix::identity(1));
    }

    #[test]
    fn swap_times_two_restricts_to_two() {
        let m = &swap() * &IntMatrix::scalar(2, 2);
        let sc = CoverScenario::new(word(vec![ActionGenerator::Explicit(m.clone())]), swap(), 2, 1.0).unwrap();
        let (basis, r) = invariant_sublattice(&sc).unwrap();
        let image = m.mul_vec(&basis[0]).unwrap();
        let doubled: Vec<BigInt> = basis[0].iter().map(|x| x * 2).collect();
        assert_eq!(image, doubled);
        assert_eq!(r, IntMatrix::scalar(1, 2));
    }

    #[test]
    fn unipotent_cover_gives_exact_zero() {
        let u = IntMatrix::from_rows(&[vec![1, 0], vec![2, 1]]).unwrap();
        let sc = CoverScenario::new(word(vec![ActionGenerator::PTwist, ActionGenerator::Tensor(u)]), IntMatrix::identity(2), 1, 2f64.ln()).unwrap();
        let v = quotient_verdict(&sc, 1e-9).unwrap();
        assert!(v.log_rho.exact_zero);
        assert_eq!(v.entropy_lower, 2f64.ln());
        assert_eq!(v.verdict, Verdict::GyViolated);
    }

    #[test]
    fn zero_bound_claims_nothing() {
        let sc = CoverScenario::new(word(vec![ActionGenerator::PTwist]), swap(), 2, 0.0).unwrap();
        assert_eq!(quotient_verdict(&sc, 1e-9).unwrap().verdict, Verdict::NoGapCertified);
    }

    #[test]
    fn non_unipotent_restriction_is_bounded() {
        // diag(3, 3) on the swap-invariant line gives 3; cover radius is 3
        let m = IntMatrix::from_rows(&[vec![2, 1], vec![1, 2]]).unwrap();
        let sc = CoverScenario::new(word(vec![ActionGenerator::Explicit(m)]), swap(), 2, 1.0).unwrap();
        let v = quotient_verdict(&sc, 1e-9).unwrap();
        assert!(!v.log_rho.exact_zero);
        assert!(v.log_rho.value <= v.cover_log_rho.value + 1e-8);
        assert!((v.log_rho.value - 3f64.ln()).abs() < 1e-9);
    }
}
