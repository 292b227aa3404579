//! Autoequivalence words and their induced integer actions on a lattice.
//!
//! A word `[g1, g2, ..., gk]` stands for the composite `g1 ∘ g2 ∘ ... ∘ gk`,
//! so the last generator acts first and the induced matrix is the product
//! `M1 · M2 · ... · Mk`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lattice::{is_unipotent, spectral_radius, BilinearLattice, IntMatrix, LatticeVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionGenerator {
    /// The shift `[1]`, acting as `-1` on classes.
    Shift,
    /// Tensoring by a line bundle, stored as its unipotent class action.
    Tensor(IntMatrix),
    /// Spherical twist `T_E` along a class `e`.
    SphericalTwist(LatticeVector),
    /// ℙⁿ-twist; the identity on classes.
    PTwist,
    Explicit(IntMatrix),
}

/// Whether spherical-twist generators must have spherical self-pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SphericalCheck {
    #[default]
    Enforce,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionWord {
    lattice: BilinearLattice,
    generators: Vec<ActionGenerator>,
}

impl ActionWord {
    pub fn new(lattice: BilinearLattice, generators: Vec<ActionGenerator>, check: SphericalCheck) -> Result<Self> {
        let rank = lattice.rank();
        for (i, g) in generators.iter().enumerate() {
            match g {
                ActionGenerator::Tensor(u) => {
                    Error::check_dim(rank, u.dim())?;
                    if !is_unipotent(u) {
                        return Err(Error::input(format!("tensor generator #{i} is not unipotent")));
                    }
                }
                ActionGenerator::SphericalTwist(e) => {
                    lattice.check_vector(e)?;
                    if check == SphericalCheck::Enforce && !lattice.is_spherical_class(e)? {
                        return Err(Error::input(format!(
                            "twist generator #{i}: class has self-pairing {}, expected {}",
                            lattice.pairing(e, e)?,
                            lattice.convention().spherical_self_pairing()
                        )));
                    }
                }
                ActionGenerator::Explicit(m) => Error::check_dim(rank, m.dim())?,
                ActionGenerator::Shift | ActionGenerator::PTwist => {}
            }
        }
        Ok(ActionWord { lattice, generators })
    }

    pub fn empty(lattice: BilinearLattice) -> Self {
        ActionWord {
            lattice,
            generators: Vec::new(),
        }
    }

    pub fn lattice(&self) -> &BilinearLattice {
        &self.lattice
    }

    pub fn generators(&self) -> &[ActionGenerator] {
        &self.generators
    }

    /// `self ∘ other` as a word.
    pub fn compose(&self, other: &ActionWord) -> Result<ActionWord> {
        if self.lattice != other.lattice {
            return Err(Error::input("cannot compose words on different lattices"));
        }
        let mut generators = self.generators.clone();
        generators.extend(other.generators.iter().cloned());
        Ok(ActionWord {
            lattice: self.lattice.clone(),
            generators,
        })
    }

    /// Whether every generator is a shift, a ℙⁿ-twist or a tensor class.
    pub fn is_unipotent_up_to_sign_by_construction(&self) -> bool {
        self.generators.iter().all(|g| {
            matches!(
                g,
                ActionGenerator::Shift | ActionGenerator::PTwist | ActionGenerator::Tensor(_)
            )
        })
    }
}

/// Class action of the spherical twist along `e`:
/// `[T_E(F)] = [F] − χ(E, F)·[E]`, with `χ` read through the lattice's
/// pairing convention.
pub fn twist_class_action(lattice: &BilinearLattice, e: &LatticeVector) -> Result<IntMatrix> {
    lattice.check_vector(e)?;
    let rank = lattice.rank();
    let mut m = IntMatrix::identity(rank);
    for j in 0..rank {
        let chi = lattice.euler_pairing(e, &LatticeVector::basis(rank, j))?;
        if chi.is_zero() {
            continue;
        }
        for i in 0..rank {
            m[(i, j)] -= &chi * &e.0[i];
        }
    }
    Ok(m)
}

pub fn p_twist_class_action(lattice: &BilinearLattice) -> IntMatrix {
    IntMatrix::identity(lattice.rank())
}

pub fn shift_class_action(lattice: &BilinearLattice) -> IntMatrix {
    IntMatrix::scalar(lattice.rank(), -1)
}

fn generator_matrix(lattice: &BilinearLattice, g: &ActionGenerator) -> Result<IntMatrix> {
    Ok(match g {
        ActionGenerator::Shift => shift_class_action(lattice),
        ActionGenerator::PTwist => p_twist_class_action(lattice),
        ActionGenerator::Tensor(u) | ActionGenerator::Explicit(u) => u.clone(),
        ActionGenerator::SphericalTwist(e) => twist_class_action(lattice, e)?,
    })
}

pub fn induced_matrix(word: &ActionWord) -> Result<IntMatrix> {
    let mut acc = IntMatrix::identity(word.lattice.rank());
    for g in &word.generators {
        acc = acc.checked_mul(&generator_matrix(&word.lattice, g)?)?;
    }
    Ok(acc)
}

/// `exp(N)` for a nilpotent integer matrix `N`, required to be integral.
///
/// Used to build tensor-class actions `e^{c₁}` from the nilpotent
/// "cup with c₁" matrix.
pub fn unipotent_exp(nilpotent: &IntMatrix) -> Result<IntMatrix> {
    let n = nilpotent.dim();
    if !nilpotent.pow(n as u32).is_zero() {
        return Err(Error::input("exponential requires a nilpotent matrix"));
    }
    let mut sum: Vec<BigRational> = IntMatrix::identity(n)
        .rows()
        .into_iter()
        .flatten()
        .map(BigRational::from_integer)
        .collect();
    let mut power = IntMatrix::identity(n);
    let mut factorial = BigInt::one();
    for k in 1..n {
        power = &power * nilpotent;
        if power.is_zero() {
            break;
        }
        factorial *= BigInt::from(k);
        for (s, x) in sum.iter_mut().zip(power.rows().into_iter().flatten()) {
            *s += BigRational::new(x, factorial.clone());
        }
    }
    let rows = sum
        .chunks(n)
        .map(|row| {
            row.iter()
                .map(|x| {
                    x.is_integer()
                        .then(|| x.to_integer())
                        .ok_or_else(|| Error::input(format!("exponential has non-integral entry {x}")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    IntMatrix::from_big_rows(rows)
}

/// `log ρ` of an induced action, flagged exact when it is certified by an
/// integer unipotence test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRho {
    pub value: f64,
    /// `(M²)` is unipotent, so every eigenvalue is `±1` and `log ρ = 0`
    /// holds exactly.
    pub exact_zero: bool,
}

impl LogRho {
    pub fn of_matrix(m: &IntMatrix, tol: f64) -> Result<LogRho> {
        let square = m.checked_mul(m)?;
        if is_unipotent(m) || is_unipotent(&square) {
            return Ok(LogRho {
                value: 0.0,
                exact_zero: true,
            });
        }
        let rho = spectral_radius(m, tol)?;
        let value = if rho == 0.0 { f64::NEG_INFINITY } else { rho.ln() };
        Ok(LogRho {
            value,
            exact_zero: false,
        })
    }
}

pub fn word_log_rho(word: &ActionWord, tol: f64) -> Result<f64> {
    word_log_rho_certified(word, tol).map(|l| l.value)
}

pub fn word_log_rho_certified(word: &ActionWord, tol: f64) -> Result<LogRho> {
    if !(tol > 0.0) {
        return Err(Error::input(format!("tolerance must be positive, got {tol}")));
    }
    LogRho::of_matrix(&induced_matrix(word)?, tol)
}

/// Tensor by `O(-H)` on the rank-3 Mukai lattice of a K3 with `H² = h_squared`:
/// `(r, c, s) ↦ (r, c − r, s − H²c + r·H²/2)`.
pub fn k3_tensor_minus_h(h_squared: i64) -> Result<IntMatrix> {
    // nilpotent cup with -H: (r, c, s) -> (0, -r, -H^2 c)
    let n = IntMatrix::from_rows(&[vec![0, 0, 0], vec![-1, 0, 0], vec![0, -h_squared, 0]])?;
    unipotent_exp(&n)
}

/// Tensor by `O(-H)` on the divided-power lattice spanned by
/// `e_i = H^i / i!`, `i = 0..=top`. The matrix is lower triangular with
/// entry `(-1)^k C(i+k, k)` at row `i + k`, column `i`.
pub fn divided_power_tensor_minus_h(top: usize) -> IntMatrix {
    let n = top + 1;
    let mut m = IntMatrix::zeros(n);
    for i in 0..n {
        let mut binom = BigInt::one();
        for k in 0..n - i {
            if k > 0 {
                binom = binom * BigInt::from(i + k) / BigInt::from(k);
            }
            m[(i + k, i)] = if k % 2 == 0 { binom.clone() } else { -binom.clone() };
        }
    }
    m
}
