//! Spectral radius of an integer matrix from its exact characteristic
//! polynomial.
//!
//! The polynomial is reduced to its square-free part (so every root is
//! simple), roots are located with the Aberth–Ehrlich iteration, and the
//! result is certified with Weierstrass inclusion disks: every root lies in
//! the union of the disks `D(z_i, deg * |W_i|)`, and a connected component
//! made of `k` disks holds exactly `k` roots. The returned value is only
//! accepted when the resulting bracket on the maximum modulus is narrower
//! than the requested tolerance.

use num_complex::Complex64;
use num_bigint::BigInt;
use num_traits::{Float, ToPrimitive, Zero};

use super::matrix::IntMatrix;
use super::poly::{char_poly, IntPolynomial};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;

const MAX_ITERATIONS: usize = 800;
const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;
/// Fractional bits tried, in order, when double precision cannot separate
/// clustered roots.
const REFINE_PRECISIONS: [usize; 4] = [128, 256, 512, 1024];
const REFINE_SWEEPS: usize = 80;

/// Certified enclosure of the largest root modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusBracket {
    pub lower: f64,
    pub upper: f64,
    pub estimate: f64,
}

impl RadiusBracket {
    fn exact(r: f64) -> Self {
        RadiusBracket {
            lower: r,
            upper: r,
            estimate: r,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Largest modulus of an eigenvalue of `m`, accurate to `±tol`.
pub fn spectral_radius(m: &IntMatrix, tol: f64) -> Result<f64> {
    spectral_radius_bracket(m, tol).map(|b| b.estimate)
}

pub fn spectral_radius_bracket(m: &IntMatrix, tol: f64) -> Result<RadiusBracket> {
    if !(tol > 0.0) {
        return Err(Error::input(format!("tolerance must be positive, got {tol}")));
    }
    let p = char_poly(m)?;
    max_root_modulus(&p, tol)
}

/// Largest modulus of a root of `p`, accurate to `±tol`.
pub fn max_root_modulus(p: &IntPolynomial, tol: f64) -> Result<RadiusBracket> {
    if p.is_zero() {
        return Err(Error::input("the zero polynomial has no well-defined roots"));
    }
    let mut sf = p.squarefree_part();
    // Strip a root at the origin; it never attains the maximum unless alone.
    if sf.coeffs().first().is_some_and(Zero::is_zero) {
        sf = IntPolynomial::new(sf.coeffs()[1..].to_vec());
    }
    match sf.degree() {
        None | Some(0) => return Ok(RadiusBracket::exact(0.0)),
        Some(1) => {
            let c = sf.coeffs();
            let r = (c[0].to_f64().unwrap_or(f64::INFINITY) / c[1].to_f64().unwrap_or(f64::INFINITY)).abs();
            if !r.is_finite() {
                return Err(Error::numeric("linear root overflows f64"));
            }
            return Ok(RadiusBracket::exact(r));
        }
        _ => {}
    }

    let coeffs = sf.to_f64_coeffs()?;
    let cauchy = cauchy_bound(&coeffs);
    let roots = aberth(&coeffs, cauchy)?;
    let mut bracket = certify(&sf, &roots, cauchy)?;
    for bits in REFINE_PRECISIONS {
        if bracket.width() <= 2.0 * tol {
            break;
        }
        bracket = refine_and_certify(&sf, &roots, bits, cauchy)?;
    }
    if bracket.width() > 2.0 * tol {
        return Err(Error::numeric(format!(
            "spectral radius bracket [{:.17e}, {:.17e}] wider than 2*tol = {:.3e} for {}",
            bracket.lower,
            bracket.upper,
            2.0 * tol,
            sf
        )));
    }
    Ok(bracket)
}

/// `1 + max |a_i / a_d|`: every root has modulus at most this.
fn cauchy_bound(coeffs: &[f64]) -> f64 {
    let lead = coeffs[coeffs.len() - 1].abs();
    1.0 + coeffs[..coeffs.len() - 1]
        .iter()
        .map(|c| c.abs() / lead)
        .fold(0.0, f64::max)
}

/// Horner evaluation of `p` and `p'` plus a running bound on the rounding
/// error of `p(z)`.
fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    let mut abs_sum = 0.0;
    let r = z.norm();
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
        abs_sum = abs_sum * r + c.abs();
    }
    let deg = (coeffs.len() - 1) as f64;
    // Horner error plus the relative error of rounding each coefficient.
    let err = (4.0 * deg + 2.0) * UNIT_ROUNDOFF * abs_sum * 1.01;
    (p, dp, err)
}

fn aberth(coeffs: &[f64], cauchy: f64) -> Result<Vec<Complex64>> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    // Start on a circle sized by the geometric mean of the roots.
    let radius = (coeffs[0].abs() / lead.abs())
        .powf(1.0 / deg as f64)
        .clamp(1e-3, cauchy);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();

    let mut last_step = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let mut max_step: f64 = 0.0;
        for k in 0..deg {
            let (p, dp, err) = horner(coeffs, z[k]);
            if p.norm() <= err {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..deg)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / z[k].norm().max(1.0));
            } else {
                // Perturb off a degenerate configuration.
                let bump = Complex64::new(1e-7, 1e-7) * z[k].norm().max(1.0);
                z[k] += bump;
                max_step = f64::INFINITY;
            }
        }
        last_step = max_step;
        if max_step < 4.0 * f64::EPSILON {
            return Ok(z);
        }
    }
    // A stalled last step at rounding level is still usable; the inclusion
    // disks decide whether it is accurate enough.
    if last_step < 1e-10 {
        return Ok(z);
    }
    Err(Error::numeric(format!(
        "Aberth iteration did not converge in {MAX_ITERATIONS} sweeps (last relative step {last_step:.3e}, degree {deg})"
    )))
}

/// `|p(z)|` evaluated exactly over the Gaussian dyadic rationals and
/// rounded once at the end, so the inclusion radii carry no Horner error.
fn exact_modulus(p: &IntPolynomial, z: Complex64) -> f64 {
    let (re_m, re_e) = dyadic(z.re);
    let (im_m, im_e) = dyadic(z.im);
    // z = (x + i y) / 2^e
    let e = (-re_e).max(-im_e).max(0);
    let z = GaussInt {
        re: re_m << (re_e + e) as usize,
        im: im_m << (im_e + e) as usize,
    };
    let coeffs = p.coeffs();
    let d = coeffs.len() - 1;
    let mut acc = GaussInt {
        re: coeffs[d].clone(),
        im: BigInt::zero(),
    };
    for (k, c) in coeffs.iter().enumerate().rev().skip(1) {
        acc = acc.mul(&z);
        acc.re += c << (e as usize * (d - k));
    }
    // |p(z)| = |acc| / 2^{e d}
    let (m, top) = acc.modulus_scaled();
    m * 2f64.powi((top - e * d as i64) as i32)
}

/// `x = m * 2^e` exactly.
fn dyadic(x: f64) -> (BigInt, i64) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let (mantissa, exponent, sign) = x.integer_decode();
    (BigInt::from(mantissa) * sign, exponent as i64)
}

/// `x ≈ m * 2^e` with `|m| < 2^63`.
fn scaled(x: &BigInt) -> (f64, i64) {
    let bits = x.bits() as i64;
    if bits <= 62 {
        return (x.to_f64().unwrap_or(0.0), 0);
    }
    let shift = bits - 62;
    ((x >> shift as usize).to_f64().unwrap_or(0.0), shift)
}

/// Gaussian integer `re + i im`.
#[derive(Clone)]
struct GaussInt {
    re: BigInt,
    im: BigInt,
}

impl GaussInt {
    fn from_dyadic(z: Complex64, bits: usize) -> GaussInt {
        let fixed = |x: f64| {
            let (m, e) = dyadic(x);
            let shift = e + bits as i64;
            if shift >= 0 {
                m << shift as usize
            } else {
                m >> (-shift) as usize
            }
        };
        GaussInt {
            re: fixed(z.re),
            im: fixed(z.im),
        }
    }

    fn mul(&self, o: &GaussInt) -> GaussInt {
        GaussInt {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn sub(&self, o: &GaussInt) -> GaussInt {
        GaussInt {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }

    /// `|self| ≈ m * 2^e`.
    fn modulus_scaled(&self) -> (f64, i64) {
        let (mr, er) = scaled(&self.re);
        let (mi, ei) = scaled(&self.im);
        let top = er.max(ei);
        ((mr * 2f64.powi((er - top) as i32)).hypot(mi * 2f64.powi((ei - top) as i32)), top)
    }

    fn to_complex(&self, bits: i64) -> Complex64 {
        let part = |x: &BigInt| {
            let (m, e) = scaled(x);
            m * 2f64.powi((e - bits) as i32)
        };
        Complex64::new(part(&self.re), part(&self.im))
    }
}

/// Simultaneous Weierstrass iteration `z_i ← z_i − W_i` in fixed point
/// with `bits` fractional bits, where
/// `W_i = p(z_i) / (a_d Π_{j≠i} (z_i − z_j))`, followed by the inclusion
/// disks `D(z_i, deg |W_i|)` evaluated from the same exact integers.
fn refine_and_certify(p: &IntPolynomial, start: &[Complex64], bits: usize, cauchy: f64) -> Result<RadiusBracket> {
    let deg = start.len();
    let coeffs = p.coeffs();
    let lead = coeffs[deg].clone();
    let mut z: Vec<GaussInt> = start.iter().map(|&r| GaussInt::from_dyadic(r, bits)).collect();

    // returns (2^bits W_i numerator, denominator) as Gaussian / integer
    let correction = |z: &[GaussInt], i: usize| -> Option<(GaussInt, BigInt)> {
        // 2^{bits d} p(z_i)
        let mut acc = GaussInt {
            re: lead.clone(),
            im: BigInt::zero(),
        };
        for (k, c) in coeffs.iter().enumerate().rev().skip(1) {
            acc = acc.mul(&z[i]);
            acc.re += c << (bits * (deg - k));
        }
        // 2^{bits (d-1)} Π (z_i - z_j)
        let mut denom = GaussInt {
            re: lead.clone(),
            im: BigInt::zero(),
        };
        for j in (0..deg).filter(|&j| j != i) {
            denom = denom.mul(&z[i].sub(&z[j]));
        }
        let norm = &denom.re * &denom.re + &denom.im * &denom.im;
        if norm.is_zero() {
            return None;
        }
        // acc * conj(denom)
        let num = GaussInt {
            re: &acc.re * &denom.re + &acc.im * &denom.im,
            im: &acc.im * &denom.re - &acc.re * &denom.im,
        };
        Some((num, norm))
    };

    for _ in 0..REFINE_SWEEPS {
        let mut moved = false;
        for i in 0..deg {
            let Some((num, norm)) = correction(&z, i) else {
                return Err(Error::numeric("coincident root approximations; cannot certify"));
            };
            let step = GaussInt {
                re: &num.re / &norm,
                im: &num.im / &norm,
            };
            if step.re.bits() > 1 || step.im.bits() > 1 {
                moved = true;
            }
            z[i] = z[i].sub(&step);
        }
        if !moved {
            break;
        }
    }

    let b = bits as i64;
    let centers: Vec<Complex64> = z.iter().map(|g| g.to_complex(b)).collect();
    let mut radii = Vec::with_capacity(deg);
    for i in 0..deg {
        let Some((num, norm)) = correction(&z, i) else {
            return Err(Error::numeric("coincident root approximations; cannot certify"));
        };
        // |W_i| = |num| / (norm 2^bits)
        let (mn, en) = num.modulus_scaled();
        let (md, ed) = scaled(&norm);
        let w = mn / md * 2f64.powi((en - ed - b) as i32);
        // rounding the centers to f64 moves them by at most eps |z_i|
        radii.push(deg as f64 * w * (1.0 + 1e-12) + 2.0 * f64::EPSILON * centers[i].norm());
    }
    bracket_from_disks(&centers, &radii, cauchy)
}

fn certify(p: &IntPolynomial, roots: &[Complex64], cauchy: f64) -> Result<RadiusBracket> {
    let deg = roots.len();
    let lead = p.leading().and_then(ToPrimitive::to_f64).unwrap_or(f64::INFINITY).abs();
    let radii: Vec<f64> = (0..deg)
        .map(|i| {
            let denom: f64 = (0..deg)
                .filter(|&j| j != i)
                .map(|j| (roots[i] - roots[j]).norm())
                .product::<f64>()
                * lead;
            // only the denominator carries rounding error, of relative size
            // about deg * eps
            deg as f64 * exact_modulus(p, roots[i]) / denom * (1.0 + 1e-12)
        })
        .collect();
    bracket_from_disks(roots, &radii, cauchy)
}

fn bracket_from_disks(roots: &[Complex64], radii: &[f64], cauchy: f64) -> Result<RadiusBracket> {
    let deg = roots.len();
    if radii.iter().any(|r| !r.is_finite()) {
        return Err(Error::numeric("coincident root approximations; cannot certify"));
    }

    // Union-find over overlapping disks.
    let mut parent: Vec<usize> = (0..deg).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for i in 0..deg {
        for j in i + 1..deg {
            if (roots[i] - roots[j]).norm() <= radii[i] + radii[j] {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut component_min = vec![f64::INFINITY; deg];
    for i in 0..deg {
        let c = find(&mut parent, i);
        component_min[c] = component_min[c].min(roots[i].norm() - radii[i]);
    }
    let lower = component_min
        .iter()
        .filter(|v| v.is_finite())
        .fold(0.0_f64, |a, &b| a.max(b));
    let upper = (0..deg)
        .map(|i| roots[i].norm() + radii[i])
        .fold(0.0_f64, f64::max)
        .min(cauchy);
    let estimate = roots
        .iter()
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max)
        .clamp(lower, upper.max(lower));
    Ok(RadiusBracket {
        lower,
        upper: upper.max(lower),
        estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn identity_radius_is_one() {
        assert_eq!(spectral_radius(&IntMatrix::identity(5), DEFAULT_TOL).unwrap(), 1.0);
    }

    #[test]
    fn golden_ratio_squared() {
        let c = IntMatrix::companion(&[1, -3]).unwrap();
        let expected = (3.0 + 5f64.sqrt()) / 2.0;
        let got = spectral_radius(&c, DEFAULT_TOL).unwrap();
        assert!((got - expected).abs() <= DEFAULT_TOL, "{got} vs {expected}");
    }

    #[test]
    fn unipotent_radius_is_one() {
        let u = m(&[vec![1, 3, -4, 2], vec![0, 1, 5, 1], vec![0, 0, 1, 9], vec![0, 0, 0, 1]]);
        assert_eq!(spectral_radius(&u, DEFAULT_TOL).unwrap(), 1.0);
    }

    #[test]
    fn nilpotent_radius_is_zero() {
        let n = m(&[vec![0, 1], vec![0, 0]]);
        assert_eq!(spectral_radius(&n, DEFAULT_TOL).unwrap(), 0.0);
    }

    #[test]
    fn complex_pair_on_circle() {
        // rotation by 90 degrees: roots ±i
        let r = m(&[vec![0, -1], vec![1, 0]]);
        let got = spectral_radius(&r, DEFAULT_TOL).unwrap();
        assert!((got - 1.0).abs() <= DEFAULT_TOL);
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        assert!(matches!(
            spectral_radius(&IntMatrix::identity(2), 0.0),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn separates_clustered_dominant_roots() {
        // -2 x^6 (x - 100)^2 + 1: two roots within about 1e-6 of 100
        let p = IntPolynomial::from_i64(&[1, 0, 0, 0, 0, 0, -20000, 400, -2]);
        let b = max_root_modulus(&p, 1e-11).unwrap();
        assert!(b.width() <= 2e-11, "{b:?}");
        let r = b.estimate;
        assert!((r - 100.0).abs() < 1e-5);
        let residual = -2.0 * r.powi(6) * (r - 100.0).powi(2) + 1.0;
        assert!(residual.abs() < 1e-3);
    }

    #[test]
    fn bracket_contains_known_root() {
        // x^3 - 2: radius 2^{1/3}
        let p = IntPolynomial::from_i64(&[-2, 0, 0, 1]);
        let b = max_root_modulus(&p, 1e-12).unwrap();
        let exact = 2f64.cbrt();
        assert!(b.lower <= exact + 1e-15 && exact <= b.upper + 1e-15, "{b:?}");
    }
}
