//! Parsing of operator, series, target and seminorm arguments.
//!
//! JSON-valued arguments take either a path or the JSON text itself (any
//! argument starting with `{` or `[` is read inline).

use eigenop_core::dynamics::Target;
use eigenop_core::{EigenOp, Seminorm, TruncatedSeries};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

fn read_json_arg<T: DeserializeOwned>(arg: &str, what: &str) -> CliResult<T> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| CliError::Io(format!("cannot read {what} `{arg}`: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{what} is not valid: {e}")))
}

/// `{"lambda": [re, im], "phi": {...}}`.
pub fn op(arg: &str) -> CliResult<EigenOp> {
    read_json_arg(arg, "operator")
}

#[derive(Deserialize)]
#[serde(untagged)]
enum StartInput {
    Series(TruncatedSeries),
    /// Anything carrying a `vector`, such as a construction report.
    Report { vector: TruncatedSeries },
}

/// A bare `[[re, im], ...]` array, or an object with a `vector` field.
pub fn start(arg: &str) -> CliResult<TruncatedSeries> {
    Ok(match read_json_arg::<StartInput>(arg, "start vector")? {
        StartInput::Series(s) | StartInput::Report { vector: s } => s,
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TargetInput {
    Named(Target),
    Bare(TruncatedSeries),
}

/// A JSON list whose entries are `{"id", "series"}` objects or bare series;
/// bare entries are named `t0`, `t1`, ... by position.
pub fn targets(arg: &str) -> CliResult<Vec<Target>> {
    let raw: Vec<TargetInput> = read_json_arg(arg, "targets")?;
    let targets: Vec<Target> = raw
        .into_iter()
        .enumerate()
        .map(|(i, t)| match t {
            TargetInput::Named(t) => t,
            TargetInput::Bare(s) => Target::new(format!("t{i}"), s),
        })
        .collect();
    let mut ids: Vec<&str> = targets.iter().map(|t| t.id.as_str()).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(CliError::Usage("target ids must be distinct".into()));
    }
    Ok(targets)
}

/// `rho:M`, `sup_disk:r`, or the label forms `rho(M)`, `sup_disk(r)`.
pub fn seminorm(text: &str) -> CliResult<Seminorm> {
    let text = text.trim();
    let (name, param) = if let Some(rest) = text.strip_suffix(')') {
        rest.split_once('(')
    } else {
        text.split_once(':')
    }
    .ok_or_else(|| CliError::Usage(format!("seminorm `{text}` should look like rho:1 or sup_disk:2")))?;
    let p: f64 = param
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("seminorm parameter `{param}` is not a number")))?;
    let s = match name.trim() {
        "rho" => Seminorm::rho(p)?,
        "sup_disk" => Seminorm::sup_disk(p)?,
        other => return Err(CliError::Usage(format!("unknown seminorm `{other}`"))),
    };
    Ok(s)
}

/// Comma-separated list of seminorms.
pub fn seminorms(text: &str) -> CliResult<Vec<Seminorm>> {
    text.split(',').filter(|s| !s.trim().is_empty()).map(seminorm).collect()
}
