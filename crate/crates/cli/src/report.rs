//! Bundles of invocations with expected values, read from a JSON file.
//!
//! ```json
//! {
//!   "bundles": [{
//!     "name": "quick",
//!     "runs": [{
//!       "name": "count-six",
//!       "args": ["count", "--bases", "2,3", "--n", "6"],
//!       "expect": [{ "path": "/count", "equals": "3" }]
//!     }]
//!   }]
//! }
//! ```
//!
//! `path` is a JSON pointer into the run's JSON output. An expectation may
//! combine `equals`, `value` with `tolerance` (absolute unless `relative`),
//! `min` and `max`. A run with `exit_code` other than 0 passes when the
//! invocation fails with that code.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::output::Output;
use crate::{invoke, CliError};

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// JSON file listing bundles of invocations.
    #[arg(long)]
    config: PathBuf,
    /// Run only this bundle.
    #[arg(long)]
    bundle: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    bundles: Vec<Bundle>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Bundle {
    name: String,
    #[serde(default)]
    description: Option<String>,
    runs: Vec<Run>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Run {
    name: String,
    args: Vec<String>,
    #[serde(default)]
    expect: Vec<Expectation>,
    #[serde(default)]
    exit_code: i32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Expectation {
    path: String,
    #[serde(default)]
    equals: Option<Value>,
    #[serde(default)]
    value: Option<f64>,
    #[serde(default)]
    tolerance: Option<f64>,
    #[serde(default)]
    relative: bool,
    #[serde(default)]
    min: Option<f64>,
    #[serde(default)]
    max: Option<f64>,
}

fn as_number(v: &Value) -> Option<f64> {
    match v {
        Value::Number(x) => x.as_f64(),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

impl Expectation {
    fn check(&self, observed: Option<&Value>) -> Result<(), String> {
        let observed = observed.ok_or_else(|| format!("no value at {}", self.path))?;
        if let Some(expected) = &self.equals {
            if observed != expected {
                return Err(format!("expected {expected}"));
            }
        }
        let numeric = self.value.is_some() || self.min.is_some() || self.max.is_some();
        if !numeric {
            return Ok(());
        }
        let x = as_number(observed).ok_or("value is not numeric")?;
        if let Some(v) = self.value {
            let tol = self.tolerance.unwrap_or(0.0) * if self.relative { v.abs() } else { 1.0 };
            if !((x - v).abs() <= tol) {
                return Err(format!("expected {v} ± {tol}"));
            }
        }
        if let Some(lo) = self.min {
            if !(x >= lo) {
                return Err(format!("below minimum {lo}"));
            }
        }
        if let Some(hi) = self.max {
            if !(x <= hi) {
                return Err(format!("above maximum {hi}"));
            }
        }
        Ok(())
    }
}

fn check_row(bundle: &str, run: &str, path: &str, observed: Value, outcome: Result<(), String>) -> Value {
    json!({
        "bundle": bundle,
        "run": run,
        "path": path,
        "observed": observed,
        "pass": outcome.is_ok(),
        "detail": outcome.err(),
    })
}

pub fn report(args: &ReportArgs) -> Result<Output, CliError> {
    let raw = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.config.display())))?;
    let config: Config =
        serde_json::from_str(&raw).map_err(|e| CliError::Usage(format!("invalid report config: {e}")))?;
    let bundles: Vec<&Bundle> =
        config.bundles.iter().filter(|b| args.bundle.as_ref().map_or(true, |name| &b.name == name)).collect();
    if bundles.is_empty() {
        return Err(CliError::Usage("no matching bundle in the report config".into()));
    }

    let mut checks = Vec::new();
    let mut text = Vec::new();
    for bundle in &bundles {
        if let Some(d) = &bundle.description {
            text.push(format!("# {}: {d}", bundle.name));
        }
        for run in &bundle.runs {
            if run.args.first().map(String::as_str) == Some("report") {
                return Err(CliError::Usage(format!("run `{}` nests another report", run.name)));
            }
            let start = Instant::now();
            let argv = std::iter::once("multibase".to_string()).chain(run.args.iter().cloned());
            let result = invoke(argv);
            let elapsed = start.elapsed().as_secs_f64();
            let mut rows = Vec::new();
            match result {
                Ok(output) if run.exit_code == 0 => {
                    for e in &run.expect {
                        let observed = output.json.pointer(&e.path);
                        let outcome = e.check(observed);
                        rows.push(check_row(&bundle.name, &run.name, &e.path, observed.cloned().unwrap_or(Value::Null), outcome));
                    }
                    if run.expect.is_empty() {
                        rows.push(check_row(&bundle.name, &run.name, "", Value::Null, Ok(())));
                    }
                }
                Ok(_) => rows.push(check_row(
                    &bundle.name,
                    &run.name,
                    "exit_code",
                    json!(0),
                    Err(format!("expected exit code {}", run.exit_code)),
                )),
                Err(err) => {
                    let code = err.exit_code();
                    let outcome = if code == run.exit_code { Ok(()) } else { Err(err.to_string()) };
                    rows.push(check_row(&bundle.name, &run.name, "exit_code", json!(code), outcome));
                }
            }
            for row in &rows {
                let status = if row["pass"] == json!(true) { "PASS" } else { "FAIL" };
                let detail = row["detail"].as_str().map(|d| format!(" ({d})")).unwrap_or_default();
                text.push(format!(
                    "{status} {}/{} {} = {}{detail} [{elapsed:.2}s]",
                    bundle.name, run.name, row["path"].as_str().unwrap_or(""), row["observed"]
                ));
            }
            checks.extend(rows);
        }
    }
    let failures = checks.iter().filter(|c| c["pass"] != json!(true)).count();
    text.push(format!("{} of {} checks passed", checks.len() - failures, checks.len()));
    let json = json!({
        "bundles": bundles.iter().map(|b| b.name.clone()).collect::<Vec<_>>(),
        "checks": checks.clone(),
        "failures": failures,
        "passed": failures == 0,
    });
    let mut output = Output::new(json).text(text.join("\n")).rows(checks);
    output.failures = failures;
    Ok(output)
}
