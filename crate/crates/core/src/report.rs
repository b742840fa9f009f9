//! Bound reports: one named inequality `lhs ≤ rhs` with its slack and provenance.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub slack: f64,
    pub satisfied: bool,
    pub tol: f64,
    pub inputs_digest: String,
    pub meta: Map<String, Value>,
}

impl BoundReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64, inputs_digest: &str) -> Self {
        let slack = rhs - lhs;
        BoundReport {
            name: name.into(),
            lhs,
            rhs,
            slack,
            satisfied: slack >= -tol,
            tol,
            inputs_digest: inputs_digest.to_string(),
            meta: Map::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.meta.insert(key.to_string(), v);
        self
    }

    /// Symbolic form of the inequality, e.g. `η_P ≤ η̂·f(η̂; d_A)`.
    pub fn with_relation(self, relation: &str) -> Self {
        self.with_meta("relation", relation)
    }

    /// The inequality with numbers substituted.
    pub fn with_expression(self, expression: String) -> Self {
        self.with_meta("expression", expression)
    }

    /// Reported for information only; does not count towards the exit status.
    pub fn informational(self) -> Self {
        self.with_meta("enforced", false)
    }

    pub fn enforced(&self) -> bool {
        self.meta.get("enforced").and_then(Value::as_bool).unwrap_or(true)
    }

    pub fn relation(&self) -> Option<&str> {
        self.meta.get("relation").and_then(Value::as_str)
    }

    pub fn expression(&self) -> Option<&str> {
        self.meta.get("expression").and_then(Value::as_str)
    }

    /// Human-readable line: substituted inequality and a check mark.
    pub fn human_line(&self) -> String {
        let mark = if self.satisfied { "✓" } else { "✗" };
        let body = match self.expression() {
            Some(e) => e.to_string(),
            None => format!("{:.6e} ≤ {:.6e}", self.lhs, self.rhs),
        };
        let note = if self.enforced() { "" } else { " (informational)" };
        format!("{:<34} {body} {mark}  slack {:+.3e}, tol {:.0e}{note}", self.name, self.slack, self.tol)
    }
}

/// Outcome of one scenario: its reports, or the reason it did not apply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub scenario: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub skipped: Option<String>,
    pub reports: Vec<BoundReport>,
}

impl ScenarioOutcome {
    pub fn new(scenario: &str, reports: Vec<BoundReport>) -> Self {
        ScenarioOutcome { scenario: scenario.to_string(), skipped: None, reports }
    }

    pub fn skipped(scenario: &str, reason: String) -> Self {
        ScenarioOutcome { scenario: scenario.to_string(), skipped: Some(reason), reports: Vec::new() }
    }

    /// Every enforced report holds.
    pub fn all_satisfied(&self) -> bool {
        self.reports.iter().filter(|r| r.enforced()).all(|r| r.satisfied)
    }

    pub fn report(&self, name: &str) -> Option<&BoundReport> {
        self.reports.iter().find(|r| r.name == name)
    }

    /// Marks every report informational.
    pub fn demote(mut self) -> Self {
        for r in &mut self.reports {
            r.meta.insert("enforced".into(), Value::Bool(false));
        }
        self
    }
}

/// Hex SHA-256 of the given parts, each terminated by a newline.
pub fn digest_parts(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

pub const CSV_HEADER: &str = "scenario,name,lhs,rhs,slack,satisfied,tol,enforced,inputs_digest";

/// One CSV row per report, header first.
pub fn to_csv(outcomes: &[ScenarioOutcome]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for o in outcomes {
        if let Some(reason) = &o.skipped {
            out.push_str(&format!("{},skipped,,,,,,,\"{}\"\n", o.scenario, reason.replace('"', "'")));
            continue;
        }
        for r in &o.reports {
            out.push_str(&format!(
                "{},{},{:e},{:e},{:e},{},{:e},{},{}\n",
                o.scenario,
                r.name,
                r.lhs,
                r.rhs,
                r.slack,
                r.satisfied,
                r.tol,
                r.enforced(),
                r.inputs_digest
            ));
        }
    }
    out
}
