//! JSON and CSV renderers with fixed column order, and the `--schema` text
//! that documents them.

use eigenop_core::dynamics::ConstructionReport;
use eigenop_core::{Classification, LemmaReport, OrbitRecord};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::selftest::SelftestReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv(header: &[String], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

/// Shortest round-trip form, with exponent notation for very small or large values.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn strings(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

pub const CLASSIFY_COLUMNS: [&str; 4] = ["class", "verdict", "citation", "note"];
pub const CONSTRUCT_COLUMNS: [&str; 6] = ["target_id", "k", "mu_re", "mu_im", "basis_degree", "achieved_distance"];
pub const VERIFY_COLUMNS: [&str; 2] = ["field", "value"];
pub const SELFTEST_COLUMNS: [&str; 5] = ["module", "check", "passed", "value", "threshold"];

pub fn classify_csv(k: &Classification) -> CliResult<String> {
    let rows = [("hc", &k.hc), ("sc", &k.sc), ("hc_inf", &k.hc_inf), ("sc_inf", &k.sc_inf)]
        .iter()
        .map(|(name, v)| vec![name.to_string(), v.verdict.to_string(), v.citation.clone(), v.note.clone()])
        .collect::<Vec<_>>();
    csv(&strings(&CLASSIFY_COLUMNS), &rows)
}

pub fn orbit_csv(r: &OrbitRecord) -> CliResult<String> {
    csv(&r.csv_header(), &r.csv_rows())
}

pub fn construct_csv(r: &ConstructionReport) -> CliResult<String> {
    let rows = r
        .schedule
        .iter()
        .map(|e| {
            vec![
                e.target_id.clone(),
                e.k.to_string(),
                num(e.mu.re),
                num(e.mu.im),
                e.basis_degree.to_string(),
                num(e.achieved_distance),
            ]
        })
        .collect::<Vec<_>>();
    csv(&strings(&CONSTRUCT_COLUMNS), &rows)
}

pub fn verify_csv(r: &LemmaReport) -> CliResult<String> {
    let mut rows = vec![
        vec!["lemma".into(), r.lemma.clone()],
        vec!["checked".into(), r.checked.to_string()],
        vec!["violations".into(), r.violations.to_string()],
        vec!["worst_margin".into(), num(r.worst_margin)],
    ];
    rows.extend(r.parameters.iter().map(|(k, v)| vec![format!("param.{k}"), num(*v)]));
    rows.extend(r.notes.iter().map(|n| vec!["note".into(), n.clone()]));
    csv(&strings(&VERIFY_COLUMNS), &rows)
}

pub fn selftest_csv(r: &SelftestReport) -> CliResult<String> {
    let rows = r
        .checks
        .iter()
        .map(|c| vec![c.module.clone(), c.name.clone(), c.passed.to_string(), num(c.value), num(c.threshold)])
        .collect::<Vec<_>>();
    csv(&strings(&SELFTEST_COLUMNS), &rows)
}

pub const COMMANDS: [&str; 5] = ["classify", "orbit", "construct", "verify", "selftest"];

/// Schema document for one command.
pub fn schema(command: &str) -> Value {
    match command {
        "classify" => json!({
            "command": "classify",
            "json": "{hc, sc, hc_inf, sc_inf}: each {verdict: bool, citation: string, note: string}",
            "csv_columns": CLASSIFY_COLUMNS,
            "csv_rows": ["hc", "sc", "hc_inf", "sc_inf"],
        }),
        "orbit" => json!({
            "command": "orbit",
            "json": "{op, start, projective, seminorms, target_ids, entries: [{n, scalar, seminorm_values, target_distances}]}",
            "csv_columns": ["n", "scalar_re", "scalar_im", "<seminorm label>...", "dist_<target id>..."],
            "csv_notes": "one seminorm column per --seminorm entry in the given order, e.g. rho(1); one distance column per target in file order; one row per n = 0..=n_max",
        }),
        "construct" => json!({
            "command": "construct",
            "json": "{vector, schedule: [{target_id, k, mu, basis_degree, achieved_distance}], tolerance, seminorm, blocks}",
            "csv_columns": CONSTRUCT_COLUMNS,
            "round_trip": "the JSON report is accepted by `orbit --start`, which reads its `vector`",
        }),
        "verify" => json!({
            "command": "verify",
            "lemmas": eigenop_core::verify::lemma::ALL,
            "json": "{lemma, parameters: {name: number}, checked, violations, worst_margin, notes}",
            "csv_columns": VERIFY_COLUMNS,
            "csv_rows": "lemma, checked, violations, worst_margin, then param.<name> sorted by name, then one note row per note",
        }),
        "selftest" => json!({
            "command": "selftest",
            "json": "{seed, passed, checks: [{module, name, passed, value, threshold, error?}]}",
            "csv_columns": SELFTEST_COLUMNS,
        }),
        _ => Value::Null,
    }
}

pub fn all_schemas() -> Value {
    Value::Array(COMMANDS.iter().map(|c| schema(c)).collect())
}
