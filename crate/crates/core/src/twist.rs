//! Dimension-level dynamics of `Φ = P ∘ (− ⊗ O(−H))` on a hyperkähler
//! model, where `P` is the ℙⁿ-twist along `O_X`.
//!
//! Notation follows the objects the recurrence manipulates:
//!
//! * `A_m(k, l) = Φ^m(O(−k)) ⊗ O(−l)`
//! * `C^k_1 = Cone(RHom^{*−2}(O, O(−k−1)) ⊗ O → RHom^*(O, O(−k−1)) ⊗ O)`,
//!   `C^k_m = Φ^{m−1}(C^k_1)`
//! * `D^k_{m+1}` the same two-term cone built on `C^k_m(−1)`
//!
//! and the exact triangles
//!
//! * `D^k_{m+1}(−l) → C^k_m(−1−l) → C^k_{m+1}(−l)`
//! * `C^k_{m+1}(−l) → A_m(k+1, l) → A_{m+1}(k, l)`
//!
//! Every profile is computed by [`cone_bounds`] from the profiles one step
//! earlier. Nothing about the shape of the answer is assumed: the top
//! degrees are required to *come out* exact and are then compared with the
//! closed forms `h^{2n(m+1)}(A_m(k, l)) = d_{k+1} d_l d_1^{m−1}`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::autoeq::{
    divided_power_tensor_minus_h, k3_tensor_minus_h, word_log_rho_certified, ActionGenerator, ActionWord, LogRho,
    SphericalCheck,
};
use crate::error::{CollapseFailure, Error, Result};
use crate::graded::{cone_bounds, GradedDim, GradedDimInterval};
use crate::lattice::{BilinearLattice, IntMatrix, PairingConvention, SymmetryKind};
use crate::series::{DeltaEntry, DeltaSeries, Verdict};

/// How `d_i = h^0(O(i)) = χ(O(i))` is produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RrRule {
    /// `d_i = C(i²q/2 + n + 1, n)`, the Riemann–Roch polynomial of a
    /// `K3^[n]`-type manifold with `q = q_X(c₁(H))`.
    Binomial { q: u64 },
    /// Explicit values `d_1, d_2, ...`.
    Table(Vec<BigUint>),
    /// `d_i = Σ_k c_k i^k`.
    Polynomial(Vec<i64>),
}

/// Indices checked for `d_i > 1` and monotonicity when the rule is not a
/// finite table.
const RULE_CHECK_HORIZON: u64 = 64;

/// Hyperkähler model of complex dimension `2n` with its Riemann–Roch rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HkModel {
    n: u32,
    rule: RrRule,
}

impl HkModel {
    pub fn new(n: u32, rule: RrRule) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("half dimension n must be positive"));
        }
        if let RrRule::Binomial { q } = rule {
            if q == 0 || q % 2 != 0 {
                return Err(Error::input(format!("q = {q} must be a positive even integer")));
            }
        }
        if let RrRule::Table(t) = &rule {
            if t.is_empty() {
                return Err(Error::input("d-table is empty"));
            }
        }
        let model = HkModel { n, rule };
        let horizon = match &model.rule {
            RrRule::Table(t) => t.len() as u64,
            _ => RULE_CHECK_HORIZON,
        };
        let one = BigUint::one();
        let mut prev = BigUint::zero();
        for i in 1..=horizon {
            let d = model.d(i)?;
            if d <= one {
                return Err(Error::input(format!("d_{i} = {d} violates d_i > 1")));
            }
            if d < prev {
                return Err(Error::input(format!("d_{i} = {d} is smaller than d_{} = {prev}", i - 1)));
            }
            prev = d;
        }
        Ok(model)
    }

    pub fn k3(q: u64) -> Result<Self> {
        Self::new(1, RrRule::Binomial { q })
    }

    pub fn half_dim(&self) -> u32 {
        self.n
    }

    pub fn rule(&self) -> &RrRule {
        &self.rule
    }

    /// Complex dimension `2n`, which is also the only degree where
    /// `O(−j)`, `j ≥ 1`, has cohomology.
    pub fn top_degree(&self) -> i64 {
        2 * self.n as i64
    }

    /// Number of summands `2n + 1` of the generators `G`, `G′`.
    pub fn generator_len(&self) -> u32 {
        2 * self.n + 1
    }

    /// `d_i` for `i ≥ 1`.
    pub fn d(&self, i: u64) -> Result<BigUint> {
        if i == 0 {
            return Err(Error::input("d_i is only modelled for i >= 1"));
        }
        match &self.rule {
            RrRule::Binomial { q } => {
                let top = BigUint::from(i) * BigUint::from(i) * BigUint::from(q / 2) + BigUint::from(self.n + 1);
                Ok(binomial(&top, self.n))
            }
            RrRule::Table(t) => t.get(i as usize - 1).cloned().ok_or_else(|| {
                Error::input(format!("d-table has {} entries but d_{i} is required", t.len()))
            }),
            RrRule::Polynomial(c) => {
                let x = num_bigint::BigInt::from(i);
                let v = c
                    .iter()
                    .rev()
                    .fold(num_bigint::BigInt::zero(), |acc, &ck| acc * &x + ck);
                v.to_biguint()
                    .ok_or_else(|| Error::input(format!("polynomial rule gives negative d_{i} = {v}")))
            }
        }
    }

    /// Largest index `d_i` the recurrence may ask for, if bounded.
    pub fn max_index(&self) -> Option<u64> {
        match &self.rule {
            RrRule::Table(t) => Some(t.len() as u64),
            _ => None,
        }
    }
}

fn binomial(top: &BigUint, k: u32) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (top - BigUint::from(i)) / BigUint::from(i + 1);
    }
    acc
}

/// `h^*(O(−j))` for `j ≥ 1`: Kodaira vanishing and Serre duality leave
/// only `h^{2n} = d_j`.
pub fn negative_line_bundle_profile(model: &HkModel, j: u64) -> Result<GradedDim> {
    if j == 0 {
        return Err(Error::input("j = 0 is the trivial bundle; use trivial_bundle_profile"));
    }
    Ok(GradedDim::single(model.top_degree(), model.d(j)?))
}

/// `h^*(O_X) = {0: 1, 2: 1, ..., 2n: 1}`.
pub fn trivial_bundle_profile(model: &HkModel) -> GradedDim {
    GradedDim::from_pairs((0..=model.half_dim() as i64).map(|i| (2 * i, BigUint::one())))
}

/// The inner two-term cone of the ℙⁿ-twist, tensored with a line bundle:
/// `Cone(RHom^{*−2}(O, E) ⊗ L → RHom^*(O, E) ⊗ L)`, given `h^*(E)` and
/// `h^*(L)`. Returns the two terms and the cone.
pub fn p_twist_inner_cone(e: &GradedDimInterval, line: &GradedDim) -> Result<TwoTermCone> {
    let unshifted = e.convolve_exact(line);
    let shifted = unshifted.shift(-2);
    let cone = cone_bounds(&shifted, &unshifted)?;
    Ok(TwoTermCone {
        shifted,
        unshifted,
        cone,
    })
}

/// The columns of a cohomology table for a two-term cone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoTermCone {
    /// `RHom^{*−2}(O, E) ⊗ L`
    pub shifted: GradedDimInterval,
    /// `RHom^*(O, E) ⊗ L`
    pub unshifted: GradedDimInterval,
    pub cone: GradedDimInterval,
}

/// `P(E) ⊗ L` from `h^*(E)` and `h^*(E ⊗ L)`.
pub fn p_twist_profile(e: &GradedDimInterval, e_twisted: &GradedDimInterval, line: &GradedDim) -> Result<GradedDimInterval> {
    let inner = p_twist_inner_cone(e, line)?;
    cone_bounds(&inner.cone, e_twisted)
}

/// `T_O(E) ⊗ L = Cone(RHom(O, E) ⊗ L → E ⊗ L)` from `h^*(E)` and
/// `h^*(E ⊗ L)`.
pub fn spherical_twist_profile(e: &GradedDimInterval, e_twisted: &GradedDimInterval, line: &GradedDim) -> Result<GradedDimInterval> {
    cone_bounds(&e.convolve_exact(line), e_twisted)
}

/// Closed form for `A_1(k, l)`:
/// `{2n: d_{k+l+1}, 4n−1: d_{k+1} d_l, 4n: d_{k+1} d_l}`.
pub fn a1_closed_form(model: &HkModel, k: u64, l: u64) -> Result<GradedDim> {
    let top = model.top_degree();
    let prod = model.d(k + 1)? * model.d(l)?;
    Ok(GradedDim::from_pairs([
        (top, model.d(k + l + 1)?),
        (2 * top - 1, prod.clone()),
        (2 * top, prod),
    ]))
}

/// Profiles of `C^k_1(−l)` and `A_1(k, l)` from the triangle machinery.
fn first_step(model: &HkModel, k: u64, l: u64) -> Result<(GradedDimInterval, GradedDimInterval)> {
    let e = negative_line_bundle_profile(model, k + 1)?.to_interval();
    let line = negative_line_bundle_profile(model, l)?;
    let c = p_twist_inner_cone(&e, &line)?.cone;
    let target = negative_line_bundle_profile(model, k + l + 1)?.to_interval();
    let a = cone_bounds(&c, &target)?;
    Ok((c, a))
}

/// `h^*(A_1(k, l))`, computed through two cones and required to collapse to
/// exact values; the closed form is then used as a cross-check.
pub fn compute_a1(model: &HkModel, k: u64, l: u64) -> Result<GradedDim> {
    if k == 0 || l == 0 {
        return Err(Error::input("k and l must be positive"));
    }
    let (_, a) = first_step(model, k, l)?;
    let exact = require_exact(&a, &format!("A_1({k}, {l})"))?;
    let closed = a1_closed_form(model, k, l)?;
    if exact != closed {
        return Err(Error::contract(format!(
            "A_1({k}, {l}) = {exact} disagrees with closed form {closed}"
        )));
    }
    Ok(exact)
}

fn require_exact(g: &GradedDimInterval, object: &str) -> Result<GradedDim> {
    if let Some(exact) = g.to_exact() {
        return Ok(exact);
    }
    let (degree, iv) = g
        .iter()
        .find(|(_, iv)| iv.exact_value().is_none())
        .expect("non-exact profile has a non-exact degree");
    Err(Error::Collapse(Box::new(CollapseFailure {
        object: object.to_string(),
        degree,
        found: iv.to_string(),
        expected: "an exact value".to_string(),
    })))
}

/// Requires `g` to be exactly `value` at `degree` and exactly zero above.
fn require_top(g: &GradedDimInterval, object: &str, degree: i64, value: &BigUint) -> Result<()> {
    let fail = |d: i64, expected: String| {
        Err(Error::Collapse(Box::new(CollapseFailure {
            object: object.to_string(),
            degree: d,
            found: g.get(d).to_string(),
            expected,
        })))
    };
    if let Some(max) = g.max_degree() {
        if max > degree {
            let first = g.iter().map(|(j, _)| j).find(|&j| j > degree).unwrap();
            return fail(first, "0".to_string());
        }
    }
    match g.get(degree).exact_value() {
        Some(v) if v == value => Ok(()),
        _ => fail(degree, value.to_string()),
    }
}

/// Cohomology table of `D^k_{m}(−l)`: its two terms and the cone.
pub type DTable = TwoTermCone;

/// Profiles of every `A_m(k, l)` and `C^k_m(−l)` for `k ≤ k_max`,
/// `l ≤ l_max` at a fixed step `m`.
///
/// Advancing consumes one index of each band, since `A_{m+1}(k, ·)` needs
/// `A_m(k+1, ·)` and `C^k_{m+1}(−l)` needs `C^k_m(−l−1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistState {
    m: u32,
    k_max: u64,
    l_max: u64,
    a: BTreeMap<(u64, u64), GradedDimInterval>,
    c: BTreeMap<(u64, u64), GradedDimInterval>,
    /// `D^k_m(−l)` tables from the step that produced this state.
    d: BTreeMap<(u64, u64), DTable>,
}

impl TwistState {
    /// State at `m = 1` for the given bands.
    pub fn initial(model: &HkModel, k_max: u64, l_max: u64) -> Result<Self> {
        if k_max == 0 || l_max == 0 {
            return Err(Error::input("bands must contain at least one index"));
        }
        if let Some(max) = model.max_index() {
            let need = k_max + l_max + 1;
            if need > max {
                return Err(Error::input(format!(
                    "d-table has {max} entries but the requested window needs d_{need}"
                )));
            }
        }
        let mut a = BTreeMap::new();
        let mut c = BTreeMap::new();
        let four_n = 2 * model.top_degree();
        for k in 1..=k_max {
            for l in 1..=l_max {
                let (c1, a1) = first_step(model, k, l)?;
                let expected = model.d(k + 1)? * model.d(l)?;
                require_top(&c1, &format!("C^{k}_1(-{l})"), four_n + 1, &expected)?;
                require_top(&a1, &format!("A_1({k}, {l})"), four_n, &expected)?;
                c.insert((k, l), c1);
                a.insert((k, l), a1);
            }
        }
        Ok(TwistState {
            m: 1,
            k_max,
            l_max,
            a,
            c,
            d: BTreeMap::new(),
        })
    }

    /// Initial state wide enough to reach step `m_max` with the full
    /// generator window `k, l ∈ 1..=2n+1`.
    pub fn for_window(model: &HkModel, m_max: u32) -> Result<Self> {
        let w = model.generator_len() as u64 + m_max.saturating_sub(1) as u64;
        Self::initial(model, w, w)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k_max(&self) -> u64 {
        self.k_max
    }

    pub fn l_max(&self) -> u64 {
        self.l_max
    }

    /// `h^*(A_m(k, l))`
    pub fn a(&self, k: u64, l: u64) -> Option<&GradedDimInterval> {
        self.a.get(&(k, l))
    }

    /// `h^*(C^k_m(−l))`
    pub fn c(&self, k: u64, l: u64) -> Option<&GradedDimInterval> {
        self.c.get(&(k, l))
    }

    /// Cohomology table of `D^k_m(−l)`, available for `m ≥ 2`.
    pub fn d_table(&self, k: u64, l: u64) -> Option<&DTable> {
        self.d.get(&(k, l))
    }

    /// Closed form `d_{k+1} d_l d_1^{m−1}` for the top cohomology at step `m`.
    pub fn expected_top(model: &HkModel, m: u32, k: u64, l: u64) -> Result<BigUint> {
        Ok(model.d(k + 1)? * model.d(l)? * model.d(1)?.pow(m - 1))
    }

    /// Step `m → m + 1` through the two triangles, checking that every top
    /// degree collapses to the closed form and everything above vanishes.
    pub fn advance(&self, model: &HkModel) -> Result<TwistState> {
        if self.k_max < 2 || self.l_max < 2 {
            return Err(Error::input(format!(
                "band exhausted at m = {} (k_max = {}, l_max = {})",
                self.m, self.k_max, self.l_max
            )));
        }
        let next_m = self.m + 1;
        let two_n = model.top_degree();
        let top_a = two_n * (next_m as i64 + 1);
        let (k_max, l_max) = (self.k_max - 1, self.l_max - 1);

        let mut a = BTreeMap::new();
        let mut c = BTreeMap::new();
        let mut d = BTreeMap::new();
        for k in 1..=k_max {
            let c_minus_one = &self.c[&(k, 1)];
            for l in 1..=l_max {
                let line = negative_line_bundle_profile(model, l)?;
                let expected = Self::expected_top(model, next_m, k, l)?;

                let table = p_twist_inner_cone(c_minus_one, &line)?;
                let tag = |name: &str| format!("{name}(k={k}, l={l}, m={next_m})");
                require_top(&table.cone, &tag("D"), top_a + 2, &expected)?;
                require_top(&table.shifted, &tag("RHom^{*-2}(O, C(-1)) (x) O(-l)"), top_a + 3, &expected)?;
                require_top(&table.unshifted, &tag("RHom^*(O, C(-1)) (x) O(-l)"), top_a + 1, &expected)?;

                let c_next = cone_bounds(&table.cone, &self.c[&(k, l + 1)])?;
                require_top(&c_next, &tag("C"), top_a + 1, &expected)?;

                let a_next = cone_bounds(&c_next, &self.a[&(k + 1, l)])?;
                require_top(&a_next, &tag("A"), top_a, &expected)?;

                d.insert((k, l), table);
                c.insert((k, l), c_next);
                a.insert((k, l), a_next);
            }
        }
        Ok(TwistState {
            m: next_m,
            k_max,
            l_max,
            a,
            c,
            d,
        })
    }

    /// δ′ contribution `Σ_{k,l ≤ 2n+1} h^*(A_m(k, l))` weighted by `e^{−jt}`.
    pub fn delta_entry(&self, model: &HkModel, t: f64) -> Result<DeltaEntry> {
        let g = model.generator_len() as u64;
        if self.k_max < g || self.l_max < g {
            return Err(Error::input("state band narrower than the generator window"));
        }
        let profiles: Vec<&GradedDimInterval> = (1..=g)
            .flat_map(|k| (1..=g).map(move |l| (k, l)))
            .map(|key| &self.a[&key])
            .collect();
        Ok(DeltaEntry::from_profiles(self.m, t, profiles))
    }
}

/// All states `m = 1..=m_max` for the full generator window.
pub fn run_states(model: &HkModel, m_max: u32) -> Result<Vec<TwistState>> {
    if m_max == 0 {
        return Err(Error::input("m_max must be at least 1"));
    }
    let mut states = vec![TwistState::for_window(model, m_max)?];
    for _ in 1..m_max {
        let next = states.last().unwrap().advance(model)?;
        states.push(next);
    }
    Ok(states)
}

/// Lower and upper bounds on `δ′(G, Φ^m(G′))` for `m = 1..=m_max`, with
/// `G = O(1) ⊕ ... ⊕ O(2n+1)` and `G′ = O(−2n−1) ⊕ ... ⊕ O(−1)`.
pub fn delta_prime_lower_series(model: &HkModel, m_max: u32, t: f64) -> Result<DeltaSeries> {
    let mut series = DeltaSeries::new(t);
    let mut state = TwistState::for_window(model, m_max)?;
    series.entries.push(state.delta_entry(model, t)?);
    for _ in 1..m_max {
        state = state.advance(model)?;
        series.entries.push(state.delta_entry(model, t)?);
    }
    Ok(series)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyBound {
    /// `log d_1`, certified by the growth of the top cohomology.
    pub certified: f64,
    /// Least-squares slope of `log lower(m)` over the last half of the
    /// window; informative only.
    pub empirical_slope: Option<f64>,
    pub series: DeltaSeries,
}

pub fn entropy_lower_bound(model: &HkModel, m_max: u32) -> Result<EntropyBound> {
    if m_max < 3 {
        return Err(Error::input("m_max must be at least 3"));
    }
    let series = delta_prime_lower_series(model, m_max, 0.0)?;
    Ok(EntropyBound {
        certified: crate::series::ln_big(&model.d(1)?),
        empirical_slope: series.tail_log_slope(),
        series,
    })
}

/// Default class-level model for `[P, − ⊗ O(−H)]`.
///
/// For a K3 surface given by `q = H²` this is the Mukai lattice with the
/// Chern-character action of `O(−H)`. Otherwise it is the divided-power
/// lattice `e_i = H^i / i!`, `i = 0..=2n`, with the antidiagonal pairing
/// `⟨e_i, e_{2n−i}⟩ = (−1)^i`.
pub fn default_hk_word(model: &HkModel) -> Result<ActionWord> {
    let (lattice, tensor) = match (model.half_dim(), model.rule()) {
        (1, RrRule::Binomial { q }) => {
            let q = i64::try_from(*q).map_err(|_| Error::input("q too large"))?;
            (BilinearLattice::k3_mukai(q), k3_tensor_minus_h(q)?)
        }
        (n, _) => {
            let top = 2 * n as usize;
            let mut gram = IntMatrix::zeros(top + 1);
            for i in 0..=top {
                gram[(i, top - i)] = if i % 2 == 0 { 1.into() } else { (-1).into() };
            }
            let lattice = BilinearLattice::new(gram, SymmetryKind::Symmetric, PairingConvention::Euler)?;
            (lattice, divided_power_tensor_minus_h(top))
        }
    };
    ActionWord::new(
        lattice,
        vec![ActionGenerator::PTwist, ActionGenerator::Tensor(tensor)],
        SphericalCheck::Enforce,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct HkVerdict {
    pub log_rho: LogRho,
    pub entropy: EntropyBound,
    /// `certified − log ρ`
    pub gap: f64,
    pub verdict: Verdict,
}

/// Compares the certified entropy bound of `Φ` with `log ρ([Φ])`.
pub fn gy_verdict_hk(model: &HkModel, m_max: u32, word: Option<&ActionWord>, tol: f64) -> Result<HkVerdict> {
    let default;
    let word = match word {
        Some(w) => w,
        None => {
            default = default_hk_word(model)?;
            &default
        }
    };
    let log_rho = word_log_rho_certified(word, tol)?;
    let entropy = entropy_lower_bound(model, m_max)?;
    if entropy.certified <= 0.0 {
        return Err(Error::contract("certified entropy bound is not positive"));
    }
    let verdict = Verdict::decide(entropy.certified, log_rho.value, log_rho.exact_zero, tol);
    Ok(HkVerdict {
        gap: entropy.certified - log_rho.value,
        log_rho,
        entropy,
        verdict,
    })
}

/// Interval-level iteration of `Φ = T_O ∘ (− ⊗ O(−1))` on a K3 model,
/// returning bounds on `Σ_j h^j(Φ^m(O(−k)) ⊗ O(−l)) e^{−jt}`.
///
/// Uses `Φ^m(O(−k)) ⊗ O(−l) = Cone(RHom(O, A_{m−1}(k, 1)) ⊗ O(−l) → A_{m−1}(k, l+1))`.
pub fn spherical_twist_iterate(model: &HkModel, k: u64, l: u64, m_max: u32, t: f64) -> Result<DeltaSeries> {
    if model.half_dim() != 1 {
        return Err(Error::input("spherical twist iteration needs a surface model (n = 1)"));
    }
    if k == 0 || l == 0 || m_max == 0 {
        return Err(Error::input("k, l and m_max must be positive"));
    }
    let width = l + m_max as u64;
    // profiles[l'] = h^*(A_m(k, l')) for l' = 1..=width - m
    let mut profiles: Vec<GradedDimInterval> = (0..=width)
        .map(|lp| {
            if lp == 0 {
                Ok(GradedDimInterval::zero())
            } else {
                negative_line_bundle_profile(model, k + lp).map(|g| g.to_interval())
            }
        })
        .collect::<Result<_>>()?;
    let mut series = DeltaSeries::new(t);
    for m in 1..=m_max {
        let rhom = profiles[1].clone();
        let reach = width - m as u64;
        let mut next = vec![GradedDimInterval::zero(); reach as usize + 1];
        for lp in 1..=reach {
            let line = negative_line_bundle_profile(model, lp)?;
            next[lp as usize] = spherical_twist_profile(&rhom, &profiles[lp as usize + 1], &line)?;
        }
        profiles = next;
        let current = &profiles[l as usize];
        if current.upper_profile().is_none() && current.lower_profile().is_zero() {
            return Err(Error::numeric(format!("interval blow-up at m = {m}")));
        }
        series.entries.push(DeltaEntry::from_profiles(m, t, [current]));
    }
    Ok(series)
}
