//! δ′ series `m ↦ (lower, upper)` and Gromov–Yomdin verdicts.

use num_bigint::BigUint;

use crate::graded::{big_to_f64, GradedDimInterval};

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaEntry {
    pub m: u32,
    pub lower: f64,
    /// `None` when some upper bound is unknown.
    pub upper: Option<f64>,
    /// Exact integer values, present when `t = 0`.
    pub lower_exact: Option<BigUint>,
    pub upper_exact: Option<BigUint>,
}

impl DeltaEntry {
    /// Sums the lower and upper δ′ contributions of a family of profiles.
    pub fn from_profiles<'a>(m: u32, t: f64, profiles: impl IntoIterator<Item = &'a GradedDimInterval>) -> Self {
        let mut lower = 0.0;
        let mut upper = Some(0.0);
        let mut lower_exact = BigUint::default();
        let mut upper_exact = Some(BigUint::default());
        for p in profiles {
            lower += p.delta_lower(t);
            upper = upper.zip(p.delta_upper(t)).map(|(a, b)| a + b);
            let lo = p.lower_profile().total();
            lower_exact += lo;
            upper_exact = upper_exact.zip(p.upper_profile()).map(|(a, b)| a + b.total());
        }
        let exact = t == 0.0;
        if exact {
            lower = big_to_f64(&lower_exact);
            upper = upper_exact.as_ref().map(big_to_f64);
        }
        DeltaEntry {
            m,
            lower,
            upper,
            lower_exact: exact.then_some(lower_exact),
            upper_exact: if exact { upper_exact } else { None },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSeries {
    pub t: f64,
    pub entries: Vec<DeltaEntry>,
}

impl DeltaSeries {
    pub fn new(t: f64) -> Self {
        DeltaSeries { t, entries: Vec::new() }
    }

    /// Series of exact values `lower = upper = values[i]` for `m = 1, 2, ...`.
    pub fn from_exact(t: f64, values: &[BigUint]) -> Self {
        DeltaSeries {
            t,
            entries: values
                .iter()
                .enumerate()
                .map(|(i, v)| DeltaEntry {
                    m: i as u32 + 1,
                    lower: big_to_f64(v),
                    upper: Some(big_to_f64(v)),
                    lower_exact: Some(v.clone()),
                    upper_exact: Some(v.clone()),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, m: u32) -> Option<&DeltaEntry> {
        self.entries.iter().find(|e| e.m == m)
    }

    /// Least-squares slope of `ln lower(m)` against `m` over entries with
    /// `m` in `[from, to]`.
    pub fn log_slope(&self, from: u32, to: u32) -> Option<f64> {
        let points: Vec<(f64, f64)> = self
            .entries
            .iter()
            .filter(|e| (from..=to).contains(&e.m) && e.lower > 0.0)
            .map(|e| (e.m as f64, log_of_entry(e)))
            .collect();
        least_squares_slope(&points)
    }

    /// Slope over the last half of the recorded window.
    pub fn tail_log_slope(&self) -> Option<f64> {
        let last = self.entries.last()?.m;
        let first = self.entries.first()?.m;
        let start = first + (last - first) / 2;
        self.log_slope(start, last)
    }
}

/// `ln lower`, taken from the exact value when available so huge integers
/// do not overflow `f64`.
fn log_of_entry(e: &DeltaEntry) -> f64 {
    match &e.lower_exact {
        Some(x) => ln_big(x),
        None => e.lower.ln(),
    }
}

pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return big_to_f64(x).ln();
    }
    let shift = bits - 900;
    big_to_f64(&(x >> shift)).ln() + shift as f64 * std::f64::consts::LN_2
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Outcome of comparing an entropy lower bound against `log ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Certified `h_cat > log ρ`.
    GyViolated,
    /// No gap can be claimed from the available bounds.
    NoGapCertified,
}

impl Verdict {
    /// A gap is certified when the entropy lower bound beats `log ρ` by more
    /// than `10 * tol`, or when `log ρ` is exactly zero (unipotent action)
    /// and the bound is positive.
    pub fn decide(entropy_lower: f64, log_rho: f64, log_rho_exact_zero: bool, tol: f64) -> Verdict {
        let gap = entropy_lower > log_rho + 10.0 * tol || (log_rho_exact_zero && entropy_lower > 0.0);
        if gap {
            Verdict::GyViolated
        } else {
            Verdict::NoGapCertified
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::GyViolated => "GY violated",
            Verdict::NoGapCertified => "no gap certified",
        }
    }
}
