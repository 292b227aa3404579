use num_bigint::BigUint;

use catent_core::graded::{DimInterval, GradedDim};
use catent_core::twist::{
    compute_a1, delta_prime_lower_series, entropy_lower_bound, negative_line_bundle_profile, p_twist_profile, run_states, HkModel,
    RrRule, TwistState,
};

fn rules(n: u32) -> Vec<HkModel> {
    // binomial rule, an explicit table from a different q, and a polynomial
    let binom = HkModel::new(n, RrRule::Binomial { q: 2 }).unwrap();
    let other = HkModel::new(n, RrRule::Binomial { q: 6 }).unwrap();
    let table = HkModel::new(n, RrRule::Table((1..=40).map(|i| other.d(i).unwrap()).collect())).unwrap();
    let poly = HkModel::new(n, RrRule::Polynomial(vec![3, 1, 2])).unwrap();
    vec![binom, table, poly]
}

/// `d` values read straight off the rule, independent of the model type.
fn oracle_d(rule: &RrRule, n: u32, i: u64) -> BigUint {
    match rule {
        RrRule::Binomial { q } => {
            // C(i^2 q / 2 + n + 1, n) as a falling product
            let top = i * i * q / 2 + n as u64 + 1;
            let mut num = BigUint::from(1u32);
            let mut den = BigUint::from(1u32);
            for k in 0..n as u64 {
                num *= top - k;
                den *= k + 1;
            }
            num / den
        }
        RrRule::Table(t) => t[i as usize - 1].clone(),
        RrRule::Polynomial(c) => {
            let v: i64 = c.iter().enumerate().map(|(k, ck)| ck * (i as i64).pow(k as u32)).sum();
            BigUint::from(v as u64)
        }
    }
}

#[test]
fn first_step_matches_closed_form_for_all_rules() {
    for n in 1..=3u32 {
        for model in rules(n) {
            let top = 2 * n as i64;
            for k in 1..=5u64 {
                for l in 1..=5u64 {
                    let d = |i| oracle_d(model.rule(), n, i);
                    let want = GradedDim::from_pairs([
                        (top, d(k + l + 1)),
                        (2 * top - 1, d(k + 1) * d(l)),
                        (2 * top, d(k + 1) * d(l)),
                    ]);
                    assert_eq!(compute_a1(&model, k, l).unwrap(), want, "n={n} k={k} l={l}");
                }
            }
        }
    }
}

#[test]
fn top_degrees_follow_closed_form() {
    for n in 1..=2u32 {
        for model in rules(n) {
            let states = run_states(&model, 6).unwrap();
            let d1 = oracle_d(model.rule(), n, 1);
            for s in &states {
                let m = s.m();
                let top = 2 * n as i64 * (m as i64 + 1);
                for k in 1..=3u64 {
                    for l in 1..=3u64 {
                        let want = oracle_d(model.rule(), n, k + 1) * oracle_d(model.rule(), n, l) * d1.pow(m - 1);
                        let a = s.a(k, l).unwrap();
                        assert_eq!(a.get(top).exact_value(), Some(&want), "n={n} m={m} k={k} l={l}");
                        assert_eq!(a.max_degree(), Some(top));
                        let c = s.c(k, l).unwrap();
                        assert_eq!(c.get(top + 1).exact_value(), Some(&want));
                        assert_eq!(c.max_degree(), Some(top + 1));
                        if m >= 2 {
                            let table = s.d_table(k, l).unwrap();
                            assert_eq!(table.cone.get(top + 2).exact_value(), Some(&want));
                            assert_eq!(table.shifted.get(top + 3).exact_value(), Some(&want));
                            assert_eq!(table.unshifted.get(top + 1).exact_value(), Some(&want));
                        }
                    }
                }
            }
        }
    }
}

fn overlaps(a: &DimInterval, b: &DimInterval) -> bool {
    let lo = (&a.lo).max(&b.lo);
    [&a.hi, &b.hi].iter().all(|h| h.finite().is_none_or(|h| lo <= h))
}

#[test]
fn direct_twist_route_agrees_on_top_degree() {
    // A_{m+1}(k, l) = P(A_m(k, 1)) ⊗ O(-l), with A_m(k, 1) ⊗ O(-l) = A_m(k, l + 1)
    let model = HkModel::k3(10).unwrap();
    let states = run_states(&model, 4).unwrap();
    for pair in states.windows(2) {
        let (cur, next) = (&pair[0], &pair[1]);
        let top = 2 * (next.m() as i64 + 1);
        for k in 1..=2u64 {
            for l in 1..=2u64 {
                let line = negative_line_bundle_profile(&model, l).unwrap();
                let direct = p_twist_profile(cur.a(k, 1).unwrap(), cur.a(k, l + 1).unwrap(), &line).unwrap();
                let recurrence = next.a(k, l).unwrap();
                assert_eq!(direct.get(top).exact_value(), recurrence.get(top).exact_value());
                assert_eq!(direct.max_degree(), recurrence.max_degree());
                // both are sound enclosures of the same object
                for j in recurrence.min_degree().unwrap()..=top {
                    assert!(overlaps(&direct.get(j), &recurrence.get(j)), "degree {j}");
                }
            }
        }
    }
}

#[test]
fn lower_series_beats_pure_power() {
    for n in 1..=3u32 {
        let model = HkModel::new(n, RrRule::Binomial { q: 2 }).unwrap();
        let s = delta_prime_lower_series(&model, 10, 0.0).unwrap();
        let d1 = model.d(1).unwrap();
        for e in &s.entries {
            assert!(e.lower_exact.as_ref().unwrap() >= &d1.pow(e.m + 1), "n={n} m={}", e.m);
        }
    }
}

#[test]
fn positive_t_series_is_ordered() {
    let model = HkModel::k3(10).unwrap();
    let s = delta_prime_lower_series(&model, 5, 0.3).unwrap();
    for e in &s.entries {
        assert!(e.lower > 0.0);
        assert!(e.lower <= e.upper.unwrap());
        assert!(e.lower_exact.is_none());
    }
}

#[test]
fn collapse_window_reports_band() {
    let model = HkModel::k3(10).unwrap();
    let s = TwistState::initial(&model, 2, 2).unwrap();
    let s = s.advance(&model).unwrap();
    assert_eq!((s.k_max(), s.l_max()), (1, 1));
    assert!(s.advance(&model).is_err());
}

#[test]
fn tail_slope_approaches_log_d1() {
    // windows long enough to leave the early transient of the lower degrees
    let cases = [
        (HkModel::k3(10).unwrap(), 9),
        (HkModel::k3(10).unwrap(), 12),
        (HkModel::new(2, RrRule::Binomial { q: 2 }).unwrap(), 10),
    ];
    for (model, m_max) in cases {
        let b = entropy_lower_bound(&model, m_max).unwrap();
        let slope = b.empirical_slope.unwrap();
        assert!(slope >= b.certified - 0.05, "m_max={m_max}: {slope} vs {}", b.certified);
    }
}
