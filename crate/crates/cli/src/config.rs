//! Scenario configuration files.
//!
//! A config is a TOML document with a `schema_version` and a `kind`. Parsing
//! happens in two passes: `toml` rejects malformed documents and wrong
//! value types, then [`validate`] collects every semantic violation at once,
//! each tagged with the dotted field name it concerns.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_M_MAX: u32 = 8;
pub const DEFAULT_TOL: f64 = 1e-9;

const MAX_HALF_DIM: u32 = 4;
const MAX_M: u32 = 40;
const MAX_POINTS: u32 = 8;
const MAX_RANK: usize = 30;
const MAX_TWIST_INDEX: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Hk,
    Hilb,
    Enriques,
    LatticeWord,
    SurfaceTwist,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Hk => "hk",
            Kind::Hilb => "hilb",
            Kind::Enriques => "enriques",
            Kind::LatticeWord => "lattice_word",
            Kind::SurfaceTwist => "surface_twist",
        }
    }
}

/// Riemann–Roch data: exactly one of `q`, `d_table`, `rr_polynomial`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    /// `d_1, d_2, ...`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_table: Option<Vec<u64>>,
    /// Coefficients `c_0, c_1, ...` of `d_i = Σ c_k i^k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rr_polynomial: Option<Vec<i64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    Symmetric,
    EulerGeneral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    Euler,
    Mukai,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<Symmetry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<Convention>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorOp {
    Shift,
    PTwist,
    Tensor,
    SphericalTwist,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub op: GeneratorOp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<Vec<i64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeckConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    /// Gram matrix of classes appended to the cover's divided-power lattice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra_gram: Option<Vec<Vec<i64>>>,
}

/// A scenario as written in the file. Also used as the echo in reports,
/// after [`ScenarioConfig::normalized`] fills defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Certified entropy lower bound supplied by the user (`lattice_word`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entropy_lower: Option<f64>,
    /// Number of points (`hilb`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<u32>,
    /// Summand indices of the spherical twist iteration (`surface_twist`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word: Option<Vec<GeneratorConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deck: Option<DeckConfig>,
}

impl ScenarioConfig {
    pub fn m_max(&self) -> u32 {
        self.m_max.unwrap_or(DEFAULT_M_MAX)
    }

    pub fn t(&self) -> f64 {
        self.t.unwrap_or(0.0)
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// Copy with every defaulted top-level field written out.
    pub fn normalized(&self) -> ScenarioConfig {
        ScenarioConfig {
            schema_version: Some(self.schema_version.unwrap_or(SCHEMA_VERSION)),
            m_max: Some(self.m_max()),
            t: Some(self.t()),
            tol: Some(self.tol()),
            seed: Some(self.seed()),
            ..self.clone()
        }
    }

    /// Command line overrides.
    pub fn with_overrides(mut self, tol: Option<f64>, m_max: Option<u32>, seed: Option<u64>) -> Self {
        if tol.is_some() {
            self.tol = tol;
        }
        if m_max.is_some() {
            self.m_max = m_max;
        }
        if seed.is_some() {
            self.seed = seed;
        }
        self
    }
}

/// One semantic problem with a config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Default)]
struct Violations(Vec<Violation>);

impl Violations {
    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.0.push(Violation {
            field: field.into(),
            message: message.into(),
        });
    }

    fn missing(&mut self, field: &str) {
        self.push(field, format!("missing required field \"{field}\""));
    }

    fn unused(&mut self, field: &str, kind: Kind) {
        self.push(field, format!("not used by kind \"{}\"", kind.as_str()));
    }
}

/// Parses and validates a single scenario.
pub fn load_config(text: &str) -> Result<ScenarioConfig, CliError> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let violations = validate(&cfg);
    if violations.is_empty() {
        Ok(cfg)
    } else {
        Err(CliError::Invalid(violations))
    }
}

pub fn load_config_file(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    load_config(&text)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BatchFile {
    schema_version: Option<u32>,
    scenario: Vec<toml::Value>,
}

/// A batch file holds `[[scenario]]` tables, each a full scenario config.
/// Violations are reported with a `scenario[i].` prefix.
pub fn load_batch(text: &str) -> Result<Vec<ScenarioConfig>, CliError> {
    let batch: BatchFile = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let mut all = Violations::default();
    if let Some(v) = batch.schema_version {
        if v != SCHEMA_VERSION {
            all.push("schema_version", format!("unsupported version {v}, expected {SCHEMA_VERSION}"));
        }
    }
    let mut out = Vec::with_capacity(batch.scenario.len());
    for (i, value) in batch.scenario.into_iter().enumerate() {
        match value.try_into::<ScenarioConfig>() {
            Ok(cfg) => {
                for v in validate(&cfg) {
                    all.push(format!("scenario[{i}].{}", v.field), v.message);
                }
                out.push(cfg);
            }
            Err(e) => all.push(format!("scenario[{i}]"), e.to_string()),
        }
    }
    if out.is_empty() && all.0.is_empty() {
        all.push("scenario", "batch contains no scenarios");
    }
    if all.0.is_empty() {
        Ok(out)
    } else {
        Err(CliError::Invalid(all.0))
    }
}

/// Every violation of the schema's semantic rules.
pub fn validate(cfg: &ScenarioConfig) -> Vec<Violation> {
    let mut v = Violations::default();
    let kind = cfg.kind;

    if let Some(s) = cfg.schema_version {
        if s != SCHEMA_VERSION {
            v.push("schema_version", format!("unsupported version {s}, expected {SCHEMA_VERSION}"));
        }
    }
    let m_min = if matches!(kind, Kind::Hk | Kind::Hilb | Kind::Enriques) { 3 } else { 1 };
    if let Some(m) = cfg.m_max {
        if !(m_min..=MAX_M).contains(&m) {
            v.push("m_max", format!("must lie in {m_min}..={MAX_M}, got {m}"));
        }
    }
    if let Some(t) = cfg.t {
        if !t.is_finite() {
            v.push("t", "must be finite");
        }
    }
    if let Some(tol) = cfg.tol {
        if !(tol > 0.0 && tol <= 1e-2) {
            v.push("tol", format!("must lie in (0, 1e-2], got {tol}"));
        }
    }
    if let Some(e) = cfg.entropy_lower {
        if !(e.is_finite() && e >= 0.0) {
            v.push("entropy_lower", "must be finite and nonnegative");
        }
    }

    let needs_model = !matches!(kind, Kind::LatticeWord);
    match (&cfg.model, needs_model) {
        (Some(m), true) => validate_model(m, cfg, &mut v),
        (None, true) => v.missing("model"),
        (Some(_), false) => v.unused("model", kind),
        (None, false) => {}
    }

    match kind {
        Kind::Hilb => match cfg.points {
            None => v.missing("points"),
            Some(p) if !(1..=MAX_POINTS).contains(&p) => {
                v.push("points", format!("must lie in 1..={MAX_POINTS}, got {p}"))
            }
            _ => {}
        },
        _ if cfg.points.is_some() => v.unused("points", kind),
        _ => {}
    }

    for (name, value) in [("k", cfg.k), ("l", cfg.l)] {
        match (kind, value) {
            (Kind::SurfaceTwist, None) => v.missing(name),
            (Kind::SurfaceTwist, Some(x)) if !(1..=MAX_TWIST_INDEX).contains(&x) => {
                v.push(name, format!("must lie in 1..={MAX_TWIST_INDEX}, got {x}"))
            }
            (Kind::SurfaceTwist, _) | (_, None) => {}
            (_, Some(_)) => v.unused(name, kind),
        }
    }

    if kind != Kind::LatticeWord && cfg.entropy_lower.is_some() {
        v.unused("entropy_lower", kind);
    }

    let mut lattice_rank = None;
    match (kind, &cfg.lattice) {
        (Kind::LatticeWord, None) => v.missing("lattice"),
        (Kind::LatticeWord, Some(l)) => lattice_rank = validate_lattice(l, &mut v),
        (_, Some(_)) => v.unused("lattice", kind),
        _ => {}
    }

    match (kind, &cfg.word) {
        (Kind::LatticeWord, None) => v.missing("word"),
        (Kind::LatticeWord | Kind::Hk | Kind::Enriques, Some(w)) => {
            let rank = match kind {
                Kind::Hk => cfg.model.as_ref().and_then(default_lattice_rank),
                // cover lattice: default lattice plus the deck's extra classes
                Kind::Enriques => cfg.model.as_ref().and_then(default_lattice_rank).map(|r| {
                    r + cfg.deck.as_ref().and_then(|d| d.extra_gram.as_ref()).map_or(0, Vec::len)
                }),
                _ => lattice_rank,
            };
            validate_word(w, rank, &mut v);
        }
        (_, Some(_)) => v.unused("word", kind),
        _ => {}
    }

    match (kind, &cfg.deck) {
        (Kind::Enriques, None) => v.missing("deck"),
        (Kind::Enriques, Some(d)) => validate_deck(d, cfg.model.as_ref(), &mut v),
        (_, Some(_)) => v.unused("deck", kind),
        _ => {}
    }

    v.0
}

/// Rank of the default lattice attached to an `hk` model.
fn default_lattice_rank(m: &ModelConfig) -> Option<usize> {
    let n = m.n?;
    Some(if n == 1 && m.q.is_some() { 3 } else { 2 * n as usize + 1 })
}

fn validate_model(m: &ModelConfig, cfg: &ScenarioConfig, v: &mut Violations) {
    let kind = cfg.kind;
    match m.n {
        None => v.missing("model.n"),
        Some(n) if !(1..=MAX_HALF_DIM).contains(&n) => {
            v.push("model.n", format!("must lie in 1..={MAX_HALF_DIM}, got {n}"))
        }
        Some(n) if n != 1 && matches!(kind, Kind::Hilb | Kind::SurfaceTwist) => v.push(
            "model.n",
            format!("kind \"{}\" needs a surface model (n = 1), got {n}", kind.as_str()),
        ),
        _ => {}
    }
    let given = [m.q.is_some(), m.d_table.is_some(), m.rr_polynomial.is_some()]
        .iter()
        .filter(|&&b| b)
        .count();
    if given != 1 {
        v.push("model", "exactly one of q, d_table, rr_polynomial is required");
    }
    if kind == Kind::SurfaceTwist && m.q.is_none() {
        v.missing("model.q");
    }
    if let Some(q) = m.q {
        if q == 0 || q % 2 != 0 || q > 1_000_000 {
            v.push("model.q", format!("must be a positive even integer at most 1000000, got {q}"));
        }
    }
    if let Some(t) = &m.d_table {
        for (i, &d) in t.iter().enumerate() {
            if d <= 1 {
                v.push(format!("model.d_table[{i}]"), format!("d_{} = {d} violates d_i > 1", i + 1));
            }
        }
        if let Some(i) = t.windows(2).position(|w| w[1] < w[0]) {
            v.push(
                format!("model.d_table[{}]", i + 1),
                format!("d_{} = {} is smaller than d_{} = {}", i + 2, t[i + 1], i + 1, t[i]),
            );
        }
        if let Some(n) = m.n {
            let need = needed_d_index(kind, n, cfg.m_max(), cfg);
            if (t.len() as u64) < need {
                v.push(
                    "model.d_table",
                    format!("{} entries given but this scenario reads d_1..d_{need}", t.len()),
                );
            }
        }
    }
    if let Some(c) = &m.rr_polynomial {
        if c.is_empty() || c.len() > 12 {
            v.push("model.rr_polynomial", "needs between 1 and 12 coefficients");
        } else {
            let eval = |i: i64| c.iter().rev().try_fold(0i64, |acc, &ck| acc.checked_mul(i)?.checked_add(ck));
            let mut prev = 0;
            for i in 1..=64i64 {
                match eval(i) {
                    Some(d) if d <= 1 => {
                        v.push("model.rr_polynomial", format!("d_{i} = {d} violates d_i > 1"));
                        break;
                    }
                    Some(d) if d < prev => {
                        v.push("model.rr_polynomial", format!("d_{i} = {d} is smaller than d_{}", i - 1));
                        break;
                    }
                    Some(d) => prev = d,
                    None => {
                        v.push("model.rr_polynomial", format!("d_{i} overflows 64 bits"));
                        break;
                    }
                }
            }
        }
    }
}

/// Largest `i` with `d_i` read by the scenario.
fn needed_d_index(kind: Kind, n: u32, m_max: u32, cfg: &ScenarioConfig) -> u64 {
    match kind {
        Kind::SurfaceTwist => cfg.k.unwrap_or(1) + cfg.l.unwrap_or(1) + m_max as u64,
        _ => {
            let w = 2 * n as u64 + 1 + m_max.saturating_sub(1) as u64;
            2 * w + 1
        }
    }
}

fn validate_square(field: &str, rows: &[Vec<i64>], v: &mut Violations) -> Option<usize> {
    let r = rows.len();
    if r == 0 || r > MAX_RANK {
        v.push(field, format!("rank must lie in 1..={MAX_RANK}, got {r}"));
        return None;
    }
    if let Some(i) = rows.iter().position(|row| row.len() != r) {
        v.push(format!("{field}[{i}]"), format!("row has {} entries, expected {r}", rows[i].len()));
        return None;
    }
    Some(r)
}

fn validate_lattice(l: &LatticeConfig, v: &mut Violations) -> Option<usize> {
    let Some(gram) = &l.gram else {
        v.missing("lattice.gram");
        return None;
    };
    let rank = validate_square("lattice.gram", gram, v)?;
    let symmetric = (0..rank).all(|i| (0..rank).all(|j| gram[i][j] == gram[j][i]));
    if l.symmetry.unwrap_or(Symmetry::Symmetric) == Symmetry::Symmetric && !symmetric {
        v.push("lattice.gram", "symmetry = \"symmetric\" requires a symmetric Gram matrix");
    }
    Some(rank)
}

fn validate_word(word: &[GeneratorConfig], rank: Option<usize>, v: &mut Violations) {
    for (i, g) in word.iter().enumerate() {
        let field = format!("word[{i}]");
        let needs_matrix = matches!(g.op, GeneratorOp::Tensor | GeneratorOp::Explicit);
        let needs_class = g.op == GeneratorOp::SphericalTwist;
        match (&g.matrix, needs_matrix) {
            (None, true) => v.missing(&format!("{field}.matrix")),
            (Some(m), true) => {
                if let (Some(r), Some(rank)) = (validate_square(&format!("{field}.matrix"), m, v), rank) {
                    if r != rank {
                        v.push(format!("{field}.matrix"), format!("rank {r} differs from lattice rank {rank}"));
                    }
                }
            }
            (Some(_), false) => v.push(format!("{field}.matrix"), "only tensor and explicit generators take a matrix"),
            (None, false) => {}
        }
        match (&g.class, needs_class) {
            (None, true) => v.missing(&format!("{field}.class")),
            (Some(c), true) => {
                if let Some(rank) = rank {
                    if c.len() != rank {
                        v.push(format!("{field}.class"), format!("length {} differs from lattice rank {rank}", c.len()));
                    }
                }
            }
            (Some(_), false) => v.push(format!("{field}.class"), "only spherical_twist generators take a class"),
            (None, false) => {}
        }
    }
}

fn validate_deck(d: &DeckConfig, model: Option<&ModelConfig>, v: &mut Violations) {
    let extra = match &d.extra_gram {
        Some(g) => {
            let r = validate_square("deck.extra_gram", g, v);
            if r.is_some() && !(0..g.len()).all(|i| (0..g.len()).all(|j| g[i][j] == g[j][i])) {
                v.push("deck.extra_gram", "must be symmetric");
            }
            r
        }
        None => Some(0),
    };
    match d.order {
        None => v.missing("deck.order"),
        Some(0) => v.push("deck.order", "must be positive"),
        _ => {}
    }
    match &d.matrix {
        None => v.missing("deck.matrix"),
        Some(m) => {
            let rank = validate_square("deck.matrix", m, v);
            let base = model.and_then(|m| m.n).map(|n| 2 * n as usize + 1);
            if let (Some(r), Some(base), Some(extra)) = (rank, base, extra) {
                if r != base + extra {
                    v.push(
                        "deck.matrix",
                        format!("rank {r} differs from cover lattice rank {} = {base} + {extra}", base + extra),
                    );
                }
            }
        }
    }
}
