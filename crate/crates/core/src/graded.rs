//! Graded dimension vectors and interval-valued profiles.
//!
//! A [`GradedDim`] records `h^j` of a complex for finitely many degrees. A
//! [`GradedDimInterval`] records only bounds `lo <= h^j <= hi`, which is what
//! a long exact sequence gives when the ranks of the maps are unknown.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact graded dimensions `degree -> dim`, zero entries never stored.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct GradedDim {
    support: BTreeMap<i64, BigUint>,
}

impl GradedDim {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(degree: i64, dim: impl Into<BigUint>) -> Self {
        let mut g = Self::zero();
        g.set(degree, dim.into());
        g
    }

    pub fn from_pairs<D: Into<BigUint>>(pairs: impl IntoIterator<Item = (i64, D)>) -> Self {
        let mut g = Self::zero();
        for (j, d) in pairs {
            let d = d.into() + g.get(j);
            g.set(j, d);
        }
        g
    }

    pub fn set(&mut self, degree: i64, dim: BigUint) {
        if dim.is_zero() {
            self.support.remove(&degree);
        } else {
            self.support.insert(degree, dim);
        }
    }

    pub fn get(&self, degree: i64) -> BigUint {
        self.support.get(&degree).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &BigUint)> {
        self.support.iter().map(|(j, d)| (*j, d))
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.support.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.support.keys().next_back().copied()
    }

    /// Total dimension `Σ_j h^j`.
    pub fn total(&self) -> BigUint {
        self.support.values().sum()
    }

    /// Euler characteristic `Σ_j (-1)^j h^j`.
    pub fn euler_characteristic(&self) -> BigInt {
        self.support
            .iter()
            .map(|(j, d)| signed(*j, d))
            .sum()
    }

    /// Profile of `E[s]`: `h^j(E[s]) = h^{j+s}(E)`.
    pub fn shift(&self, s: i64) -> GradedDim {
        GradedDim {
            support: self.support.iter().map(|(j, d)| (j - s, d.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &BigUint) -> GradedDim {
        if c.is_zero() {
            return Self::zero();
        }
        GradedDim {
            support: self.support.iter().map(|(j, d)| (*j, d * c)).collect(),
        }
    }

    pub fn direct_sum(&self, other: &GradedDim) -> GradedDim {
        let mut out = self.clone();
        for (j, d) in other.iter() {
            let v = out.get(j) + d;
            out.set(j, v);
        }
        out
    }

    pub fn to_interval(&self) -> GradedDimInterval {
        GradedDimInterval {
            support: self
                .support
                .iter()
                .map(|(j, d)| (*j, DimInterval::exact(d.clone())))
                .collect(),
        }
    }

    /// `Σ_k h^k e^{-kt}`; at `t = 0` this is the exact total dimension.
    pub fn delta_value(&self, t: f64) -> f64 {
        if t == 0.0 {
            return big_to_f64(&self.total());
        }
        self.support
            .iter()
            .map(|(k, d)| big_to_f64(d) * (-(*k as f64) * t).exp())
            .sum()
    }
}

fn signed(degree: i64, d: &BigUint) -> BigInt {
    let sign = if degree.rem_euclid(2) == 0 { Sign::Plus } else { Sign::Minus };
    BigInt::from_biguint(sign, d.clone())
}

pub(crate) fn big_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Künneth convolution `(g1 * g2)(k) = Σ_{i+j=k} g1(i) g2(j)`.
pub fn convolve(g1: &GradedDim, g2: &GradedDim) -> GradedDim {
    let mut out = GradedDim::zero();
    for (i, a) in g1.iter() {
        for (j, b) in g2.iter() {
            let v = out.get(i + j) + a * b;
            out.set(i + j, v);
        }
    }
    out
}

/// `Σ_k g(k) e^{-kt}`.
pub fn delta_value(g: &GradedDim, t: f64) -> f64 {
    g.delta_value(t)
}

/// Upper end of a dimension interval; `Unknown` is absorbing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bound {
    Finite(BigUint),
    Unknown,
}

impl Bound {
    pub fn finite(&self) -> Option<&BigUint> {
        match self {
            Bound::Finite(x) => Some(x),
            Bound::Unknown => None,
        }
    }

    fn add(&self, other: &Bound) -> Bound {
        match (self, other) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a + b),
            _ => Bound::Unknown,
        }
    }

    fn mul(&self, c: &BigUint) -> Bound {
        match self {
            _ if c.is_zero() => Bound::Finite(BigUint::zero()),
            Bound::Finite(a) => Bound::Finite(a * c),
            Bound::Unknown => Bound::Unknown,
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Bound::Finite(x) if x.is_zero())
    }
}

/// `lo <= dim <= hi`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DimInterval {
    pub lo: BigUint,
    pub hi: Bound,
}

impl DimInterval {
    pub fn exact(d: impl Into<BigUint>) -> Self {
        let d = d.into();
        DimInterval {
            lo: d.clone(),
            hi: Bound::Finite(d),
        }
    }

    pub fn new(lo: impl Into<BigUint>, hi: Bound) -> Result<Self> {
        let lo = lo.into();
        if let Bound::Finite(h) = &hi {
            if &lo > h {
                return Err(Error::input(format!("interval lower bound {lo} exceeds upper bound {h}")));
            }
        }
        Ok(DimInterval { lo, hi })
    }

    pub fn zero() -> Self {
        Self::exact(BigUint::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }

    pub fn exact_value(&self) -> Option<&BigUint> {
        match &self.hi {
            Bound::Finite(h) if *h == self.lo => Some(h),
            _ => None,
        }
    }

    pub fn contains(&self, d: &BigUint) -> bool {
        &self.lo <= d && self.hi.finite().is_none_or(|h| d <= h)
    }

    fn add(&self, other: &DimInterval) -> DimInterval {
        DimInterval {
            lo: &self.lo + &other.lo,
            hi: self.hi.add(&other.hi),
        }
    }

    fn scale(&self, c: &BigUint) -> DimInterval {
        DimInterval {
            lo: &self.lo * c,
            hi: self.hi.mul(c),
        }
    }
}

impl fmt::Display for DimInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.hi, self.exact_value()) {
            (_, Some(x)) => write!(f, "{x}"),
            (Bound::Finite(h), None) => write!(f, "[{}, {}]", self.lo, h),
            (Bound::Unknown, _) => write!(f, "[{}, ?]", self.lo),
        }
    }
}

/// Interval-valued graded profile. Degrees outside the support are exactly
/// zero.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct GradedDimInterval {
    support: BTreeMap<i64, DimInterval>,
}

impl GradedDimInterval {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_intervals(pairs: impl IntoIterator<Item = (i64, DimInterval)>) -> Self {
        let mut g = Self::zero();
        for (j, iv) in pairs {
            g.set(j, iv);
        }
        g
    }

    pub fn set(&mut self, degree: i64, iv: DimInterval) {
        if iv.is_zero() {
            self.support.remove(&degree);
        } else {
            self.support.insert(degree, iv);
        }
    }

    pub fn get(&self, degree: i64) -> DimInterval {
        self.support.get(&degree).cloned().unwrap_or_else(DimInterval::zero)
    }

    pub fn lo(&self, degree: i64) -> BigUint {
        self.support.get(&degree).map(|iv| iv.lo.clone()).unwrap_or_default()
    }

    pub fn hi(&self, degree: i64) -> Bound {
        self.support
            .get(&degree)
            .map(|iv| iv.hi.clone())
            .unwrap_or(Bound::Finite(BigUint::zero()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &DimInterval)> {
        self.support.iter().map(|(j, iv)| (*j, iv))
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.support.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.support.keys().next_back().copied()
    }

    /// The exact profile, if every degree is pinned down.
    pub fn to_exact(&self) -> Option<GradedDim> {
        let mut g = GradedDim::zero();
        for (j, iv) in &self.support {
            g.set(*j, iv.exact_value()?.clone());
        }
        Some(g)
    }

    pub fn lower_profile(&self) -> GradedDim {
        let mut g = GradedDim::zero();
        for (j, iv) in &self.support {
            g.set(*j, iv.lo.clone());
        }
        g
    }

    /// Upper profile, `None` if any degree is unbounded.
    pub fn upper_profile(&self) -> Option<GradedDim> {
        let mut g = GradedDim::zero();
        for (j, iv) in &self.support {
            g.set(*j, iv.hi.finite()?.clone());
        }
        Some(g)
    }

    /// Whether the exact profile `g` is consistent with these bounds.
    pub fn contains(&self, g: &GradedDim) -> bool {
        g.iter().all(|(j, _)| self.support.contains_key(&j) || g.get(j).is_zero())
            && self
                .support
                .iter()
                .all(|(j, iv)| iv.contains(&g.get(*j)))
    }

    pub fn shift(&self, s: i64) -> GradedDimInterval {
        GradedDimInterval {
            support: self.support.iter().map(|(j, iv)| (j - s, iv.clone())).collect(),
        }
    }

    pub fn direct_sum(&self, other: &GradedDimInterval) -> GradedDimInterval {
        let mut out = self.clone();
        for (j, iv) in other.iter() {
            let v = out.get(j).add(iv);
            out.set(j, v);
        }
        out
    }

    /// Convolution with an exact profile: the profile of `V ⊗ F` where `V`
    /// is a graded vector space with interval dimensions.
    pub fn convolve_exact(&self, g: &GradedDim) -> GradedDimInterval {
        let mut out = GradedDimInterval::zero();
        for (i, iv) in self.iter() {
            for (j, d) in g.iter() {
                let v = out.get(i + j).add(&iv.scale(d));
                out.set(i + j, v);
            }
        }
        out
    }

    /// Interval on the Euler characteristic, `None` if unbounded.
    pub fn euler_range(&self) -> Option<(BigInt, BigInt)> {
        let mut lo = BigInt::zero();
        let mut hi = BigInt::zero();
        for (j, iv) in &self.support {
            let h = iv.hi.finite()?;
            if j.rem_euclid(2) == 0 {
                lo += BigInt::from(iv.lo.clone());
                hi += BigInt::from(h.clone());
            } else {
                lo -= BigInt::from(h.clone());
                hi -= BigInt::from(iv.lo.clone());
            }
        }
        Some((lo, hi))
    }

    /// Sum of lower bounds weighted by `e^{-jt}`.
    pub fn delta_lower(&self, t: f64) -> f64 {
        self.lower_profile().delta_value(t)
    }

    /// Sum of upper bounds weighted by `e^{-jt}`, `None` if unbounded.
    pub fn delta_upper(&self, t: f64) -> Option<f64> {
        self.upper_profile().map(|g| g.delta_value(t))
    }

    /// Tightens the bounds with the constraint `χ ∈ [target_lo, target_hi]`
    /// until nothing changes. Returns an error if the constraint is
    /// infeasible.
    fn tighten_with_euler(&mut self, target_lo: &BigInt, target_hi: &BigInt) -> Result<()> {
        const MAX_PASSES: usize = 16;
        for _ in 0..MAX_PASSES {
            let Some((lo_sum, hi_sum)) = self.euler_range() else {
                return Ok(());
            };
            if &hi_sum < target_lo || &lo_sum > target_hi {
                return Err(Error::contract(format!(
                    "Euler characteristic range [{lo_sum}, {hi_sum}] misses required [{target_lo}, {target_hi}]"
                )));
            }
            // Each update only uses the constraint and the other degrees'
            // current bounds, so a whole pass against stale sums stays sound.
            let mut changed = false;
            let updates: Vec<(i64, DimInterval)> = self
                .support
                .iter()
                .filter_map(|(&j, iv)| {
                    let lo = BigInt::from(iv.lo.clone());
                    let hi = BigInt::from(iv.hi.finite()?.clone());
                    let even = j.rem_euclid(2) == 0;
                    // contribution of degree j to χ
                    let (c_lo, c_hi) = if even { (lo.clone(), hi.clone()) } else { (-&hi, -&lo) };
                    let (r_lo, r_hi) = (&lo_sum - &c_lo, &hi_sum - &c_hi);
                    let new_c_lo = std::cmp::max(c_lo, target_lo - &r_hi);
                    let new_c_hi = std::cmp::min(c_hi, target_hi - &r_lo);
                    let (new_lo, new_hi) = if even { (new_c_lo, new_c_hi) } else { (-new_c_hi, -new_c_lo) };
                    let new_lo = std::cmp::max(new_lo, BigInt::zero());
                    (new_lo != lo || new_hi != hi).then(|| {
                        (
                            j,
                            DimInterval {
                                lo: new_lo.to_biguint().unwrap_or_default(),
                                hi: Bound::Finite(new_hi.to_biguint().unwrap_or_default()),
                            },
                        )
                    })
                })
                .collect();
            for (j, iv) in updates {
                if let Bound::Finite(h) = &iv.hi {
                    if iv.lo > *h {
                        return Err(Error::contract(format!("Euler constraint empties degree {j}")));
                    }
                }
                changed = true;
                self.set(j, iv);
            }
            if !changed {
                return Ok(());
            }
        }
        Ok(())
    }
}

/// Bounds on `h^*(C)` for an exact triangle `A → B → C → A[1]` given bounds
/// on `h^*(A)` and `h^*(B)`.
///
/// From the long exact sequence `A^j → B^j → C^j → A^{j+1} → B^{j+1}`:
///
/// * `hi_C(j) = hi_B(j) + hi_A(j+1)`
/// * `lo_C(j) = max(0, lo_B(j) − hi_A(j)) + max(0, lo_A(j+1) − hi_B(j+1))`
///
/// and then additivity of Euler characteristics, `χ(C) = χ(B) − χ(A)`, is
/// used to tighten the result whenever all bounds are finite.
pub fn cone_bounds(a: &GradedDimInterval, b: &GradedDimInterval) -> Result<GradedDimInterval> {
    let mut degrees: Vec<i64> = b.support.keys().copied().collect();
    degrees.extend(a.support.keys().map(|j| j - 1));
    degrees.sort_unstable();
    degrees.dedup();

    let mut c = GradedDimInterval::zero();
    for j in degrees {
        let hi = b.hi(j).add(&a.hi(j + 1));
        let left = saturating_sub(&b.lo(j), &a.hi(j));
        let right = saturating_sub(&a.lo(j + 1), &b.hi(j + 1));
        c.set(j, DimInterval { lo: left + right, hi });
    }

    if let (Some((a_lo, a_hi)), Some((b_lo, b_hi))) = (a.euler_range(), b.euler_range()) {
        c.tighten_with_euler(&(b_lo - a_hi), &(b_hi - a_lo))?;
    }
    Ok(c)
}

fn saturating_sub(x: &BigUint, y: &Bound) -> BigUint {
    match y {
        Bound::Finite(y) if x > y => x - y,
        _ => BigUint::zero(),
    }
}

/// Exact `h^*(C)` for a triangle `A → B → C` when the ranks of the maps
/// `H^j(A) → H^j(B)` are known:
/// `C(j) = (b(j) − r(j)) + (a(j+1) − r(j+1))`.
pub fn cone_exact_from_map_rank(a: &GradedDim, b: &GradedDim, ranks: &BTreeMap<i64, BigUint>) -> Result<GradedDim> {
    for (j, r) in ranks {
        let cap = a.get(*j).min(b.get(*j));
        if *r > cap {
            return Err(Error::input(format!(
                "rank {r} at degree {j} exceeds min(dim A^j, dim B^j) = {cap}"
            )));
        }
    }
    let rank = |j: i64| ranks.get(&j).cloned().unwrap_or_default();
    let mut degrees: Vec<i64> = b.iter().map(|(j, _)| j).chain(a.iter().map(|(j, _)| j - 1)).collect();
    degrees.sort_unstable();
    degrees.dedup();
    let mut c = GradedDim::zero();
    for j in degrees {
        let v = (b.get(j) - rank(j)) + (a.get(j + 1) - rank(j + 1));
        c.set(j, v);
    }
    Ok(c)
}

impl fmt::Debug for GradedDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GradedDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (j, d)) in self.support.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{j}: {d}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for GradedDimInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GradedDimInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (j, iv)) in self.support.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{j}: {iv}")?;
        }
        write!(f, "}}")
    }
}

/// The unit `{0: 1}` for convolution.
pub fn unit() -> GradedDim {
    GradedDim::single(0, BigUint::one())
}
