//! Versioned report records and their json, table and csv renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use catent_core::series::{DeltaSeries, Verdict};

use crate::config::ScenarioConfig;
use crate::exit;

pub const REPORT_VERSION: u32 = 1;
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "table" => Ok(Format::Table),
            _ => Err(format!("unknown format \"{s}\" (expected json or table)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    /// One of `input`, `numeric`, `resource`, `contract`, `collapse`.
    pub class: String,
    pub message: String,
}

impl ErrorRecord {
    pub fn from_engine(e: &catent_core::Error) -> Self {
        use catent_core::Error as E;
        let class = match e {
            E::Input(_) | E::DimensionMismatch { .. } => "input",
            E::Numeric(_) => "numeric",
            E::Resource(_) => "resource",
            E::Contract(_) => "contract",
            E::Collapse(_) => "collapse",
        };
        ErrorRecord {
            class: class.to_string(),
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.class.as_str() {
            "numeric" | "resource" => exit::NUMERIC,
            "contract" | "collapse" => exit::CONTRACT,
            _ => exit::INPUT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub m: u32,
    pub lower: f64,
    /// `None` when some upper bound is unknown.
    pub upper: Option<f64>,
    /// Exact decimal values, present at `t = 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_exact: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_exact: Option<String>,
}

pub fn series_rows(s: &DeltaSeries) -> Vec<SeriesRow> {
    s.entries
        .iter()
        .map(|e| SeriesRow {
            m: e.m,
            lower: e.lower,
            upper: e.upper.filter(|u| u.is_finite()),
            lower_exact: e.lower_exact.as_ref().map(ToString::to_string),
            upper_exact: e.upper_exact.as_ref().map(ToString::to_string),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyRecord {
    pub certified_lower: f64,
    /// Least-squares slope of `ln lower(m)` over the last half of the
    /// window. Informative only.
    pub empirical_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRhoRecord {
    /// `None` when the action is nilpotent (`log 0`).
    pub value: Option<f64>,
    pub exact_zero: bool,
}

impl LogRhoRecord {
    pub fn from_core(l: &catent_core::autoeq::LogRho) -> Self {
        LogRhoRecord {
            value: l.value.is_finite().then_some(l.value),
            exact_zero: l.exact_zero,
        }
    }

    fn as_f64(&self) -> f64 {
        self.value.unwrap_or(f64::NEG_INFINITY)
    }
}

/// Spectral radius invariance under seeded random unimodular conjugations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub seed: u64,
    pub conjugations: u32,
    pub char_poly_invariant: bool,
    pub max_radius_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub report_version: u32,
    pub engine_version: String,
    pub scenario: ScenarioConfig,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
    pub t: f64,
    pub series: Vec<SeriesRow>,
    pub entropy: Option<EntropyRecord>,
    pub log_rho: Option<LogRhoRecord>,
    pub gap: Option<f64>,
    pub verdict: Option<String>,
    /// Kind-specific values, keyed by name.
    pub details: BTreeMap<String, serde_json::Value>,
    pub audit: Option<AuditRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl ReportRecord {
    pub fn new(scenario: ScenarioConfig) -> Self {
        ReportRecord {
            report_version: REPORT_VERSION,
            engine_version: ENGINE_VERSION.to_string(),
            t: scenario.t(),
            scenario,
            status: Status::Ok,
            error: None,
            series: Vec::new(),
            entropy: None,
            log_rho: None,
            gap: None,
            verdict: None,
            details: BTreeMap::new(),
            audit: None,
            timing_ms: None,
        }
    }

    pub fn failed(scenario: ScenarioConfig, e: &catent_core::Error) -> Self {
        ReportRecord {
            status: Status::Error,
            error: Some(ErrorRecord::from_engine(e)),
            ..ReportRecord::new(scenario)
        }
    }

    pub fn exit_code(&self) -> u8 {
        self.error.as_ref().map_or(exit::SUCCESS, ErrorRecord::exit_code)
    }

    /// Recomputes the verdict from the report's own entropy and `log ρ`
    /// fields.
    pub fn rederive_verdict(&self) -> Option<Verdict> {
        let e = self.entropy.as_ref()?;
        let l = self.log_rho.as_ref()?;
        Some(Verdict::decide(e.certified_lower, l.as_f64(), l.exact_zero, self.scenario.tol()))
    }
}

pub fn emit_report(r: &ReportRecord, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Table => table(r),
    }
}

#[derive(Serialize)]
struct Batch<'a> {
    report_version: u32,
    engine_version: &'a str,
    reports: &'a [ReportRecord],
}

pub fn emit_batch(reports: &[ReportRecord], format: Format) -> String {
    match format {
        Format::Json => {
            let batch = Batch {
                report_version: REPORT_VERSION,
                engine_version: ENGINE_VERSION,
                reports,
            };
            let mut s = serde_json::to_string_pretty(&batch).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Table => reports.iter().map(table).collect::<Vec<_>>().join("\n"),
    }
}

fn exact_or_float(exact: Option<&String>, x: Option<f64>) -> String {
    match (exact, x) {
        (Some(e), _) => e.clone(),
        (None, Some(x)) => format!("{x:.6e}"),
        (None, None) => "inf".to_string(),
    }
}

fn table(r: &ReportRecord) -> String {
    let mut out = String::new();
    let name = r.scenario.name.as_deref().unwrap_or("-");
    let _ = writeln!(out, "{:<20}{} ({})", "scenario", name, r.scenario.kind.as_str());
    match &r.error {
        Some(e) => {
            let _ = writeln!(out, "{:<20}error ({})", "status", e.class);
            let _ = writeln!(out, "{:<20}{}", "message", e.message);
            return out;
        }
        None => {
            let _ = writeln!(out, "{:<20}ok", "status");
        }
    }
    if let Some(v) = &r.verdict {
        let _ = writeln!(out, "{:<20}{v}", "verdict");
    }
    if let Some(e) = &r.entropy {
        let _ = writeln!(out, "{:<20}{} (certified lower bound)", "entropy", e.certified_lower);
        if let Some(s) = e.empirical_slope {
            let _ = writeln!(out, "{:<20}{s} (empirical)", "slope");
        }
    }
    if let Some(l) = &r.log_rho {
        let text = match (l.exact_zero, l.value) {
            (true, _) => "0 (exact, unipotent)".to_string(),
            (false, Some(v)) => v.to_string(),
            (false, None) => "-inf (nilpotent)".to_string(),
        };
        let _ = writeln!(out, "{:<20}{text}", "log rho");
    }
    if let Some(g) = r.gap {
        let _ = writeln!(out, "{:<20}{g}", "gap");
    }
    let _ = writeln!(out, "{:<20}{:e}", "tolerance", r.scenario.tol());
    for (k, v) in &r.details {
        match v {
            serde_json::Value::String(s) => writeln!(out, "{k:<20}{s}"),
            _ => writeln!(out, "{k:<20}{v}"),
        }
        .ok();
    }
    if !r.series.is_empty() {
        let _ = writeln!(out, "\nt = {}", r.t);
        let _ = writeln!(out, "{:>4}  {:>24}  {:>24}", "m", "lower", "upper");
        for row in &r.series {
            let lower = exact_or_float(row.lower_exact.as_ref(), Some(row.lower));
            let upper = exact_or_float(row.upper_exact.as_ref(), row.upper);
            let _ = writeln!(out, "{:>4}  {:>24}  {:>24}", row.m, lower, upper);
        }
    }
    out
}

/// `m,lower,upper` with exact integers when available.
pub fn series_csv(r: &ReportRecord) -> String {
    let mut out = String::from("m,lower,upper\n");
    for row in &r.series {
        let lower = exact_or_float(row.lower_exact.as_ref(), Some(row.lower));
        let upper = exact_or_float(row.upper_exact.as_ref(), row.upper);
        let _ = writeln!(out, "{},{},{}", row.m, lower, upper);
    }
    out
}
