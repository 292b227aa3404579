//! Turns validated configs into report records.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use catent_core::autoeq::{
    divided_power_tensor_minus_h, induced_matrix, k3_tensor_minus_h, ActionGenerator, ActionWord, LogRho,
    SphericalCheck,
};
use catent_core::descent::{check_equivariant_commutation, quotient_verdict, CoverScenario};
use catent_core::hilb::{hilb_transfer_verdict, symmetric_basis, HilbScenario};
use catent_core::lattice::{
    char_poly, spectral_radius, BilinearLattice, IntMatrix, LatticeVector, PairingConvention, SymmetryKind,
};
use catent_core::series::{DeltaSeries, Verdict};
use catent_core::twist::{
    default_hk_word, delta_prime_lower_series, entropy_lower_bound, gy_verdict_hk, spherical_twist_iterate, HkModel,
    RrRule,
};
use catent_core::Error;

use crate::config::{validate, Convention, GeneratorConfig, GeneratorOp, Kind, LatticeConfig, ModelConfig, ScenarioConfig, Symmetry};
use crate::report::{series_rows, AuditRecord, EntropyRecord, LogRhoRecord, ReportRecord, Status};
use crate::CliError;

const AUDIT_CONJUGATIONS: u32 = 8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Adds wall-clock time to reports, which makes them nondeterministic.
    pub timing: bool,
}

/// Validates and runs one scenario. Config problems are returned as errors;
/// engine failures are recorded in the report.
pub fn run_scenario(cfg: &ScenarioConfig, opts: RunOptions) -> Result<ReportRecord, CliError> {
    let violations = validate(cfg);
    if !violations.is_empty() {
        return Err(CliError::Invalid(violations));
    }
    let cfg = cfg.normalized();
    let start = Instant::now();
    let mut report = ReportRecord::new(cfg.clone());
    let outcome = match cfg.kind {
        Kind::Hk => run_hk(&cfg, &mut report),
        Kind::Hilb => run_hilb(&cfg, &mut report),
        Kind::Enriques => run_enriques(&cfg, &mut report),
        Kind::LatticeWord => run_lattice_word(&cfg, &mut report),
        Kind::SurfaceTwist => run_surface_twist(&cfg, &mut report),
    };
    let mut report = match outcome {
        Ok(matrix) => {
            report.audit = Some(audit(&matrix, cfg.seed(), cfg.tol()).unwrap_or_else(|_| AuditRecord {
                seed: cfg.seed(),
                conjugations: 0,
                char_poly_invariant: false,
                max_radius_deviation: f64::NAN,
            }));
            report
        }
        Err(e) => ReportRecord::failed(cfg, &e),
    };
    if opts.timing {
        report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(report)
}

/// Runs scenarios on a worker pool; reports come back in input order.
pub fn run_batch(cfgs: &[ScenarioConfig], opts: RunOptions) -> Result<Vec<ReportRecord>, CliError> {
    let mut violations = Vec::new();
    for (i, cfg) in cfgs.iter().enumerate() {
        for mut v in validate(cfg) {
            v.field = format!("scenario[{i}].{}", v.field);
            violations.push(v);
        }
    }
    if !violations.is_empty() {
        return Err(CliError::Invalid(violations));
    }
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(cfgs.len()).max(1);
    let next = AtomicUsize::new(0);
    let mut done: Vec<(usize, Result<ReportRecord, CliError>)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut out = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= cfgs.len() {
                            break out;
                        }
                        out.push((i, run_scenario(&cfgs[i], opts)));
                    }
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });
    done.sort_by_key(|(i, _)| *i);
    done.into_iter().map(|(_, r)| r).collect()
}

pub fn build_model(m: &ModelConfig) -> Result<HkModel, Error> {
    let n = m.n.ok_or_else(|| Error::Input("model.n is required".into()))?;
    let rule = match (m.q, &m.d_table, &m.rr_polynomial) {
        (Some(q), None, None) => RrRule::Binomial { q },
        (None, Some(t), None) => RrRule::Table(t.iter().map(|&d| d.into()).collect()),
        (None, None, Some(c)) => RrRule::Polynomial(c.clone()),
        _ => return Err(Error::Input("exactly one of q, d_table, rr_polynomial is required".into())),
    };
    HkModel::new(n, rule)
}

pub fn build_lattice(l: &LatticeConfig) -> Result<BilinearLattice, Error> {
    let gram = IntMatrix::from_rows(l.gram.as_deref().unwrap_or_default())?;
    let symmetry = match l.symmetry.unwrap_or(Symmetry::Symmetric) {
        Symmetry::Symmetric => SymmetryKind::Symmetric,
        Symmetry::EulerGeneral => SymmetryKind::EulerGeneral,
    };
    let convention = match l.convention.unwrap_or(Convention::Euler) {
        Convention::Euler => PairingConvention::Euler,
        Convention::Mukai => PairingConvention::Mukai,
    };
    BilinearLattice::new(gram, symmetry, convention)
}

pub fn build_word(lattice: BilinearLattice, gens: &[GeneratorConfig]) -> Result<ActionWord, Error> {
    let generators = gens
        .iter()
        .map(|g| {
            let matrix = || IntMatrix::from_rows(g.matrix.as_deref().unwrap_or_default());
            Ok(match g.op {
                GeneratorOp::Shift => ActionGenerator::Shift,
                GeneratorOp::PTwist => ActionGenerator::PTwist,
                GeneratorOp::Tensor => ActionGenerator::Tensor(matrix()?),
                GeneratorOp::Explicit => ActionGenerator::Explicit(matrix()?),
                GeneratorOp::SphericalTwist => {
                    ActionGenerator::SphericalTwist(LatticeVector::from_i64(g.class.as_deref().unwrap_or_default()))
                }
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    ActionWord::new(lattice, generators, SphericalCheck::Enforce)
}

fn model_of(cfg: &ScenarioConfig) -> Result<HkModel, Error> {
    build_model(cfg.model.as_ref().ok_or_else(|| Error::Input("model is required".into()))?)
}

fn set_verdict(r: &mut ReportRecord, entropy: EntropyRecord, log_rho: &LogRho, verdict: Verdict) {
    r.gap = Some(entropy.certified_lower - log_rho.value).filter(|g| g.is_finite());
    r.entropy = Some(entropy);
    r.log_rho = Some(LogRhoRecord::from_core(log_rho));
    r.verdict = Some(verdict.label().to_string());
    r.status = Status::Ok;
}

fn series_at(cfg: &ScenarioConfig, model: &HkModel, at_zero: &DeltaSeries) -> Result<DeltaSeries, Error> {
    if cfg.t() == 0.0 {
        Ok(at_zero.clone())
    } else {
        delta_prime_lower_series(model, cfg.m_max(), cfg.t())
    }
}

fn run_hk(cfg: &ScenarioConfig, r: &mut ReportRecord) -> Result<IntMatrix, Error> {
    let model = model_of(cfg)?;
    let default = default_hk_word(&model)?;
    let word = match &cfg.word {
        Some(gens) => build_word(default.lattice().clone(), gens)?,
        None => default,
    };
    let v = gy_verdict_hk(&model, cfg.m_max(), Some(&word), cfg.tol())?;
    r.series = series_rows(&series_at(cfg, &model, &v.entropy.series)?);
    r.details.insert("d1".into(), json!(model.d(1)?.to_string()));
    r.details.insert("lattice_rank".into(), json!(word.lattice().rank()));
    let entropy = EntropyRecord {
        certified_lower: v.entropy.certified,
        empirical_slope: v.entropy.empirical_slope,
    };
    set_verdict(r, entropy, &v.log_rho, v.verdict);
    induced_matrix(&word)
}

fn run_hilb(cfg: &ScenarioConfig, r: &mut ReportRecord) -> Result<IntMatrix, Error> {
    let model = model_of(cfg)?;
    let points = cfg.points.ok_or_else(|| Error::Input("points is required".into()))?;
    let base = entropy_lower_bound(&model, cfg.m_max())?;
    let base_matrix = induced_matrix(&default_hk_word(&model)?)?;
    let base_series = series_at(cfg, &model, &base.series)?;
    let sc = HilbScenario::new(points, base_matrix.clone(), base_series, base.certified)?;
    let v = hilb_transfer_verdict(&sc, cfg.tol())?;
    r.series = series_rows(&v.series);
    r.details.insert("points".into(), json!(points));
    r.details.insert("base_entropy_lower".into(), json!(base.certified));
    r.details.insert("base_log_rho".into(), json!(LogRhoRecord::from_core(&v.base_log_rho)));
    r.details.insert("sym_rank".into(), json!(symmetric_basis(base_matrix.dim(), points).len()));
    let entropy = EntropyRecord {
        certified_lower: v.entropy_lower,
        empirical_slope: v.series.tail_log_slope(),
    };
    set_verdict(r, entropy, &v.log_rho, v.verdict);
    Ok(base_matrix)
}

/// Cover lattice: the model's default lattice with the deck's extra classes
/// appended orthogonally.
fn cover_word(cfg: &ScenarioConfig, model: &HkModel) -> Result<ActionWord, Error> {
    let base = default_hk_word(model)?;
    let deck = cfg.deck.as_ref().ok_or_else(|| Error::Input("deck is required".into()))?;
    let extra = IntMatrix::from_rows(deck.extra_gram.as_deref().unwrap_or_default())?;
    let gram = base.lattice().gram().direct_sum(&extra);
    let lattice = BilinearLattice::new(gram, base.lattice().symmetry(), base.lattice().convention())?;
    match &cfg.word {
        Some(gens) => build_word(lattice, gens),
        None => {
            let top = base.lattice().rank();
            let tensor = match model.rule() {
                RrRule::Binomial { q } if model.half_dim() == 1 => {
                    k3_tensor_minus_h(i64::try_from(*q).map_err(|_| Error::Input("q too large".into()))?)?
                }
                _ => divided_power_tensor_minus_h(top - 1),
            };
            let tensor = tensor.direct_sum(&IntMatrix::identity(extra.dim()));
            ActionWord::new(
                lattice,
                vec![ActionGenerator::PTwist, ActionGenerator::Tensor(tensor)],
                SphericalCheck::Enforce,
            )
        }
    }
}

fn run_enriques(cfg: &ScenarioConfig, r: &mut ReportRecord) -> Result<IntMatrix, Error> {
    let model = model_of(cfg)?;
    let deck_cfg = cfg.deck.as_ref().ok_or_else(|| Error::Input("deck is required".into()))?;
    let deck = IntMatrix::from_rows(deck_cfg.matrix.as_deref().unwrap_or_default())?;
    let order = deck_cfg.order.unwrap_or(0);
    let word = cover_word(cfg, &model)?;
    let cover = entropy_lower_bound(&model, cfg.m_max())?;
    let sc = CoverScenario::new(word, deck, order, cover.certified)?;
    if !check_equivariant_commutation(&sc)? {
        return Err(Error::Contract(format!(
            "word does not commute with the deck transformation; non-invariant tensor generators at word positions {:?}",
            sc.non_invariant_tensors()?
        )));
    }
    let v = quotient_verdict(&sc, cfg.tol())?;
    r.series = series_rows(&series_at(cfg, &model, &cover.series)?);
    r.details.insert("commutes".into(), json!(true));
    r.details.insert("cover_log_rho".into(), json!(LogRhoRecord::from_core(&v.cover_log_rho)));
    r.details.insert("deck_order".into(), json!(order));
    r.details.insert("invariant_rank".into(), json!(v.invariant_rank));
    let entropy = EntropyRecord {
        certified_lower: v.entropy_lower,
        empirical_slope: cover.empirical_slope,
    };
    set_verdict(r, entropy, &v.log_rho, v.verdict);
    induced_matrix(sc.word())
}

fn run_lattice_word(cfg: &ScenarioConfig, r: &mut ReportRecord) -> Result<IntMatrix, Error> {
    let lattice = build_lattice(cfg.lattice.as_ref().ok_or_else(|| Error::Input("lattice is required".into()))?)?;
    let word = build_word(lattice, cfg.word.as_deref().unwrap_or_default())?;
    let matrix = induced_matrix(&word)?;
    let log_rho = LogRho::of_matrix(&matrix, cfg.tol())?;
    let bound = cfg.entropy_lower.unwrap_or(0.0);
    if !(bound >= 0.0) || !bound.is_finite() {
        return Err(Error::Input("entropy_lower must be finite and nonnegative".into()));
    }
    r.details.insert("lattice_rank".into(), json!(matrix.dim()));
    let entropy = EntropyRecord {
        certified_lower: bound,
        empirical_slope: None,
    };
    let verdict = Verdict::decide(bound, log_rho.value, log_rho.exact_zero, cfg.tol());
    set_verdict(r, entropy, &log_rho, verdict);
    Ok(matrix)
}

/// `T_O ∘ (− ⊗ O(−H))` on a K3 surface. No entropy bound is certified; the
/// series and its slope are reported for comparison with `log ρ`.
fn run_surface_twist(cfg: &ScenarioConfig, r: &mut ReportRecord) -> Result<IntMatrix, Error> {
    let model = model_of(cfg)?;
    let (k, l) = (cfg.k.unwrap_or(1), cfg.l.unwrap_or(1));
    let series = spherical_twist_iterate(&model, k, l, cfg.m_max(), cfg.t())?;
    let q = cfg.model.as_ref().and_then(|m| m.q).ok_or_else(|| Error::Input("model.q is required".into()))?;
    let q = i64::try_from(q).map_err(|_| Error::Input("q too large".into()))?;
    let word = ActionWord::new(
        BilinearLattice::k3_mukai(q),
        vec![
            ActionGenerator::SphericalTwist(LatticeVector::from_i64(&[1, 0, 1])),
            ActionGenerator::Tensor(k3_tensor_minus_h(q)?),
        ],
        SphericalCheck::Enforce,
    )?;
    let matrix = induced_matrix(&word)?;
    let log_rho = LogRho::of_matrix(&matrix, cfg.tol())?;
    r.series = series_rows(&series);
    r.details.insert("k".into(), json!(k));
    r.details.insert("l".into(), json!(l));
    let entropy = EntropyRecord {
        certified_lower: 0.0,
        empirical_slope: series.tail_log_slope(),
    };
    let verdict = Verdict::decide(0.0, log_rho.value, log_rho.exact_zero, cfg.tol());
    set_verdict(r, entropy, &log_rho, verdict);
    Ok(matrix)
}

/// Random unimodular `C` and its inverse, built from elementary row
/// operations with coefficients `±1`.
pub fn random_unimodular(rank: usize, rng: &mut ChaCha8Rng) -> (IntMatrix, IntMatrix) {
    let mut c = IntMatrix::identity(rank);
    let mut inv = IntMatrix::identity(rank);
    if rank < 2 {
        return (c, inv);
    }
    for _ in 0..2 * rank {
        let i = rng.gen_range(0..rank);
        let mut j = rng.gen_range(0..rank - 1);
        if j >= i {
            j += 1;
        }
        let s = BigInt::from(if rng.gen_bool(0.5) { 1 } else { -1 });
        // C ← (I + s e_ij) C, C⁻¹ ← C⁻¹ (I − s e_ij)
        for col in 0..rank {
            let add = &s * &c[(j, col)];
            c[(i, col)] += add;
        }
        for row in 0..rank {
            let sub = &s * &inv[(row, i)];
            inv[(row, j)] -= sub;
        }
    }
    (c, inv)
}

fn audit(m: &IntMatrix, seed: u64, tol: f64) -> Result<AuditRecord, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let poly = char_poly(m)?;
    let rho = spectral_radius(m, tol)?;
    let mut invariant = true;
    let mut deviation = 0.0f64;
    for _ in 0..AUDIT_CONJUGATIONS {
        let (c, inv) = random_unimodular(m.dim(), &mut rng);
        let conj = c.checked_mul(m)?.checked_mul(&inv)?;
        invariant &= char_poly(&conj)? == poly;
        deviation = deviation.max((spectral_radius(&conj, tol)? - rho).abs());
    }
    Ok(AuditRecord {
        seed,
        conjugations: AUDIT_CONJUGATIONS,
        char_poly_invariant: invariant,
        max_radius_deviation: deviation,
    })
}
