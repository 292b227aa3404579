//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use catent_cli::config::load_config;
use catent_cli::run::random_unimodular;
use catent_cli::{
    emit_batch, list_builtin_models, preset, run_batch, run_scenario, Format, RunOptions, ScenarioConfig,
};
use catent_core::autoeq::{divided_power_tensor_minus_h, ActionGenerator, ActionWord, SphericalCheck};
use catent_core::descent::{check_equivariant_commutation, CoverScenario};
use catent_core::graded::{cone_bounds, cone_exact_from_map_rank, GradedDim};
use catent_core::hilb::{kunneth_power_series, sym_invariant_restriction};
use catent_core::lattice::{char_poly, is_unipotent, spectral_radius, BilinearLattice, IntMatrix};
use catent_core::series::{DeltaSeries, Verdict};
use catent_core::twist::{
    compute_a1, default_hk_word, delta_prime_lower_series, entropy_lower_bound, run_states, HkModel, RrRule,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn rules(n: u32) -> Vec<HkModel> {
    let other = HkModel::new(n, RrRule::Binomial { q: 6 }).unwrap();
    vec![
        HkModel::new(n, RrRule::Binomial { q: 2 }).unwrap(),
        HkModel::new(n, RrRule::Table((1..=40).map(|i| other.d(i).unwrap()).collect())).unwrap(),
        HkModel::new(n, RrRule::Polynomial(vec![3, 1, 2])).unwrap(),
    ]
}

/// `d_i` read directly off the rule.
fn oracle_d(rule: &RrRule, n: u32, i: u64) -> BigUint {
    match rule {
        RrRule::Binomial { q } => {
            let top = i * i * q / 2 + n as u64 + 1;
            let (mut num, mut den) = (BigUint::from(1u32), BigUint::from(1u32));
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

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    for n in 1..=3u32 {
        let top = 2 * n as i64;
        for model in rules(n) {
            let d = |i| oracle_d(model.rule(), n, i);
            for k in 1..=5u64 {
                for l in 1..=5u64 {
                    let want = GradedDim::from_pairs([
                        (top, d(k + l + 1)),
                        (2 * top - 1, d(k + 1) * d(l)),
                        (2 * top, d(k + 1) * d(l)),
                    ]);
                    let got = compute_a1(&model, k, l).map_err(|e| e.to_string())?;
                    check(got == want, || format!("n={n} k={k} l={l}: got {got}, want {want}"))?;
                    cases += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("{cases} first-step profiles exact in {elapsed:.0?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for n in 1..=3u32 {
        for model in rules(n) {
            let states = run_states(&model, 6).map_err(|e| e.to_string())?;
            let d = |i| oracle_d(model.rule(), n, i);
            for s in &states {
                let m = s.m();
                let top = 2 * n as i64 * (m as i64 + 1);
                for k in 1..=s.k_max().min(3) {
                    for l in 1..=s.l_max().min(3) {
                        let want = d(k + 1) * d(l) * d(1).pow(m - 1);
                        let tag = format!("n={n} m={m} k={k} l={l}");
                        let a = s.a(k, l).ok_or_else(|| format!("{tag}: A missing"))?;
                        check(a.get(top).exact_value() == Some(&want), || format!("{tag}: top of A is {}", a.get(top)))?;
                        check(a.max_degree() == Some(top), || format!("{tag}: A nonzero above {top}"))?;
                        if m >= 2 {
                            let t = s.d_table(k, l).ok_or_else(|| format!("{tag}: D table missing"))?;
                            let rows = [(&t.unshifted, top + 1), (&t.cone, top + 2), (&t.shifted, top + 3)];
                            for (col, j) in rows {
                                check(col.get(j).exact_value() == Some(&want), || format!("{tag}: D row {j} is {}", col.get(j)))?;
                                check(col.max_degree() == Some(j), || format!("{tag}: D column nonzero above {j}"))?;
                            }
                        }
                        checked += 1;
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("{checked} top-degree and table checks for m <= 6 in {elapsed:.0?}"))
}

fn criterion_3() -> Outcome {
    let mut lines = Vec::new();
    for n in 1..=3u32 {
        let model = HkModel::new(n, RrRule::Binomial { q: 2 }).unwrap();
        let s = delta_prime_lower_series(&model, 10, 0.0).map_err(|e| e.to_string())?;
        let d1 = model.d(1).unwrap();
        for e in &s.entries {
            let lower = e.lower_exact.as_ref().ok_or("missing exact value")?;
            check(lower >= &d1.pow(e.m + 1), || format!("n={n} m={}: {lower} < d_1^(m+1)", e.m))?;
        }
    }
    for name in ["k3-q10", "hk-2n"] {
        let cfg = preset(name).map_err(|e| e.to_string())?;
        let model = catent_cli::run::build_model(cfg.model.as_ref().unwrap()).map_err(|e| e.to_string())?;
        let s = delta_prime_lower_series(&model, 10, 0.0).map_err(|e| e.to_string())?;
        let d1 = model.d(1).unwrap();
        for e in &s.entries {
            check(e.lower_exact.as_ref().unwrap() >= &d1.pow(e.m + 1), || format!("{name} m={}", e.m))?;
        }
        let slope = s.log_slope(5, 10).ok_or("no slope")?;
        let target = catent_core::series::ln_big(&d1);
        check((slope - target).abs() <= 0.05, || {
            format!("{name}: slope over m in [5, 10] is {slope}, log d1 = {target}")
        })?;
        lines.push(format!("{name} slope {slope:.5} vs {target:.5}"));
    }
    Ok(format!("lower(m) >= d1^(m+1) for m <= 10; {}", lines.join(", ")))
}

fn criterion_4() -> Outcome {
    let r = run_scenario(&preset("k3-q10").map_err(|e| e.to_string())?, RunOptions::default())
        .map_err(|e| e.to_string())?;
    let e = r.entropy.as_ref().ok_or("no entropy")?;
    let l = r.log_rho.as_ref().ok_or("no log rho")?;
    check((e.certified_lower - 7f64.ln()).abs() < 1e-12, || format!("bound {}", e.certified_lower))?;
    check(l.exact_zero && l.value == Some(0.0), || format!("log rho {l:?}"))?;
    // unipotence checked on the integer matrix directly
    let model = HkModel::k3(10).unwrap();
    let m = catent_core::autoeq::induced_matrix(&default_hk_word(&model).unwrap()).unwrap();
    check(is_unipotent(&m), || "induced matrix is not unipotent".into())?;
    check(r.verdict.as_deref() == Some(Verdict::GyViolated.label()), || format!("verdict {:?}", r.verdict))?;
    check(r.rederive_verdict() == Some(Verdict::GyViolated), || "verdict not re-derivable".into())?;
    Ok("bound log 7, log rho 0 exact, GY violated".into())
}

fn random_matrix(rng: &mut ChaCha8Rng, rank: usize, range: i64) -> IntMatrix {
    let rows: Vec<Vec<i64>> = (0..rank).map(|_| (0..rank).map(|_| rng.gen_range(-range..=range)).collect()).collect();
    IntMatrix::from_rows(&rows).unwrap()
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let rank = rng.gen_range(1..=4);
        let m = random_matrix(&mut rng, rank, 3);
        let rho = spectral_radius(&m, 1e-9).map_err(|e| e.to_string())?;
        for n in 1..=3u32 {
            let sym = sym_invariant_restriction(&m, n).map_err(|e| e.to_string())?;
            let rho_sym = spectral_radius(&sym, 1e-9).map_err(|e| e.to_string())?;
            let want = rho.powi(n as i32);
            let err = (rho_sym - want).abs() / want.max(1.0);
            worst = worst.max(err);
            check(err <= 1e-6, || format!("case {case} n={n}: {rho_sym} vs {want}"))?;
        }
    }
    for (a, r) in [(3u32, 2u32), (1, 7), (5, 6)] {
        let values: Vec<BigUint> = (1..=10).map(|m| BigUint::from(a) * BigUint::from(r).pow(m)).collect();
        let s = DeltaSeries::from_exact(0.0, &values);
        let base = s.log_slope(1, 10).unwrap();
        for n in 1..=3u32 {
            let p = kunneth_power_series(&s, n).map_err(|e| e.to_string())?;
            let slope = p.log_slope(1, 10).unwrap();
            check((slope - n as f64 * base).abs() <= 1e-9, || format!("ratio {r} n={n}: {slope} vs {}", n as f64 * base))?;
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!("50 matrices, worst relative error {worst:.1e}; geometric slopes scale by n; {elapsed:.0?}"))
}

fn random_profile(rng: &mut ChaCha8Rng, degrees: &[i64]) -> GradedDim {
    GradedDim::from_pairs(degrees.iter().map(|&j| (j, BigUint::from(rng.gen_range(0u32..=6)))))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let window: Vec<i64> = (-3..=3).collect();
    for case in 0..10_000 {
        let a = random_profile(&mut rng, &window);
        let b = random_profile(&mut rng, &window);
        let mut ranks = BTreeMap::new();
        for &j in &window {
            let cap = a.get(j).min(b.get(j));
            let r = BigUint::from(rng.gen_range(0u32..=6)).min(cap);
            ranks.insert(j, r);
        }
        let c = cone_exact_from_map_rank(&a, &b, &ranks).map_err(|e| e.to_string())?;
        let bounds = cone_bounds(&a.to_interval(), &b.to_interval()).map_err(|e| e.to_string())?;
        check(bounds.contains(&c), || format!("case {case}: {c} outside {bounds}"))?;
    }
    // A in even degrees and B in odd degrees: no map and no connecting map
    // can be nonzero, so the bounds must be exact
    for case in 0..1000 {
        let a = random_profile(&mut rng, &[-4, -2, 0, 2, 4]);
        let b = random_profile(&mut rng, &[-3, -1, 1, 3]);
        let bounds = cone_bounds(&a.to_interval(), &b.to_interval()).map_err(|e| e.to_string())?;
        let exact = cone_exact_from_map_rank(&a, &b, &BTreeMap::new()).map_err(|e| e.to_string())?;
        let collapsed = bounds.to_exact();
        check(collapsed.as_ref() == Some(&exact), || format!("case {case}: {bounds} did not collapse to {exact}"))?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!("10000 realized cones inside bounds, 1000 disjoint windows exact; {elapsed:.0?}"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..100 {
        let rank = rng.gen_range(1..=6);
        let m = random_matrix(&mut rng, rank, 4);
        let p = char_poly(&m).map_err(|e| e.to_string())?;
        check(p.eval_matrix(&m).is_zero(), || format!("case {case}: p(M) != 0"))?;
    }
    let mut worst = 0.0f64;
    for case in 0..100 {
        let rank = rng.gen_range(2..=5);
        let m = random_matrix(&mut rng, rank, 3);
        let (c, inv) = random_unimodular(rank, &mut rng);
        check(c.checked_mul(&inv).unwrap().is_identity(), || "bad inverse".into())?;
        let conj = c.checked_mul(&m).and_then(|x| x.checked_mul(&inv)).map_err(|e| e.to_string())?;
        let r1 = spectral_radius(&m, 1e-8).map_err(|e| e.to_string())?;
        let r2 = spectral_radius(&conj, 1e-8).map_err(|e| e.to_string())?;
        worst = worst.max((r1 - r2).abs());
        check((r1 - r2).abs() <= 1e-8, || format!("case {case}: {r1} vs {r2}"))?;
    }
    for case in 0..50 {
        let rank = rng.gen_range(1..=4);
        let m = random_matrix(&mut rng, rank, 3);
        let rho = spectral_radius(&m, 1e-9).map_err(|e| e.to_string())?;
        for k in 2..=4u32 {
            let rk = spectral_radius(&m.pow(k), 1e-9).map_err(|e| e.to_string())?;
            let want = rho.powi(k as i32);
            check((rk - want).abs() <= 1e-8 * want.max(1.0), || format!("case {case} k={k}: {rk} vs {want}"))?;
        }
    }
    Ok(format!("Cayley-Hamilton on 100 matrices, 100 conjugations (worst {worst:.1e}), powers k <= 4"))
}

fn criterion_8() -> Outcome {
    let cfg = preset("enriques-over-hk").map_err(|e| e.to_string())?;
    let r = run_scenario(&cfg, RunOptions::default()).map_err(|e| e.to_string())?;
    check(r.error.is_none(), || format!("preset failed: {:?}", r.error))?;
    check(r.details.get("commutes") == Some(&serde_json::Value::Bool(true)), || "commutation not reported".into())?;
    let l = r.log_rho.as_ref().ok_or("no log rho")?;
    check(l.exact_zero, || format!("quotient log rho {l:?}"))?;
    let model = catent_cli::run::build_model(cfg.model.as_ref().unwrap()).map_err(|e| e.to_string())?;
    let cover = entropy_lower_bound(&model, cfg.m_max()).map_err(|e| e.to_string())?;
    let bound = r.entropy.as_ref().ok_or("no entropy")?.certified_lower;
    check(bound == cover.certified, || format!("quotient bound {bound} vs cover {}", cover.certified))?;

    // same cover, but the polarization shears the swapped classes
    let base = default_hk_word(&model).unwrap();
    let extra = IntMatrix::from_rows(&[vec![-2, 0], vec![0, -2]]).unwrap();
    let lattice = BilinearLattice::symmetric(base.lattice().gram().direct_sum(&extra)).unwrap();
    let shear = IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).unwrap();
    let tensor = divided_power_tensor_minus_h(4).direct_sum(&shear);
    let word = ActionWord::new(
        lattice,
        vec![ActionGenerator::PTwist, ActionGenerator::Tensor(tensor)],
        SphericalCheck::Enforce,
    )
    .unwrap();
    let swap = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
    let deck = IntMatrix::identity(5).direct_sum(&swap);
    let sc = CoverScenario::new(word, deck, 2, cover.certified).map_err(|e| e.to_string())?;
    let commutes = check_equivariant_commutation(&sc).map_err(|e| e.to_string())?;
    check(!commutes, || "counterexample commutes".into())?;
    check(sc.non_invariant_tensors().unwrap() == [1], || "non-invariant generator not located".into())?;

    // and the front end reports it as a contract violation
    let mut text = toml_without_word(&cfg);
    text.push_str("\n[[word]]\nop = \"p_twist\"\n\n[[word]]\nop = \"tensor\"\nmatrix = ");
    let rows: Vec<String> = sc
        .word()
        .generators()
        .iter()
        .find_map(|g| match g {
            ActionGenerator::Tensor(t) => t.to_i64_rows(),
            _ => None,
        })
        .unwrap()
        .iter()
        .map(|r| format!("{r:?}"))
        .collect();
    text.push_str(&format!("[{}]\n", rows.join(", ")));
    let bad = load_config(&text).map_err(|e| e.to_string())?;
    let r = run_scenario(&bad, RunOptions::default()).map_err(|e| e.to_string())?;
    check(r.exit_code() == 3, || format!("counterexample exit code {}", r.exit_code()))?;
    Ok("preset commutes, quotient log rho 0 exact, bound equals cover bound; sheared polarization rejected".into())
}

fn criterion_9() -> Outcome {
    let cfgs: Vec<_> = list_builtin_models()
        .iter()
        .map(|p| preset(p.name).map(|c| c.with_overrides(None, None, Some(42))))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let first = emit_batch(&run_batch(&cfgs, RunOptions::default()).map_err(|e| e.to_string())?, Format::Json);
    let second = emit_batch(&run_batch(&cfgs, RunOptions::default()).map_err(|e| e.to_string())?, Format::Json);
    check(first == second, || "batch output differs between runs".into())?;
    Ok(format!("{} presets, {} bytes identical across two runs", cfgs.len(), first.len()))
}

/// TOML for a scenario with its word removed.
fn toml_without_word(cfg: &ScenarioConfig) -> String {
    let mut c = cfg.clone();
    c.word = None;
    toml::to_string(&c).unwrap()
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("first-step closed form", criterion_1),
        ("top cohomology and D table for m <= 6", criterion_2),
        ("lower bound series and slope", criterion_3),
        ("k3-q10 verdict", criterion_4),
        ("symmetric and tensor power scaling", criterion_5),
        ("cone bound soundness", criterion_6),
        ("spectral radius invariants", criterion_7),
        ("descent to the quotient", criterion_8),
        ("deterministic batch output", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
