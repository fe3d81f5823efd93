//! Experiment reports: JSON (schema `mot-report/1`) and plain text.

use serde_json::{json, Map, Value};

use crate::config::Config;

pub const SCHEMA: &str = "mot-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Disabled,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Disabled => "disabled",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assertion {
    pub id: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub experiment: String,
    pub inputs: Map<String, Value>,
    pub values: Map<String, Value>,
    pub assertions: Vec<Assertion>,
    pub notes: Vec<String>,
    disabled: Vec<String>,
}

impl Report {
    pub fn new(experiment: &str, config: &Config) -> Self {
        let disabled = config
            .disabled
            .iter()
            .filter_map(|d| {
                if d == experiment {
                    Some(String::from("*"))
                } else {
                    d.strip_prefix(&format!("{experiment}/")).map(String::from)
                }
            })
            .collect();
        Self {
            experiment: experiment.to_string(),
            inputs: Map::new(),
            values: Map::new(),
            assertions: Vec::new(),
            notes: Vec::new(),
            disabled,
        }
    }

    pub fn input(&mut self, key: &str, v: impl Into<Value>) {
        self.inputs.insert(key.to_string(), v.into());
    }

    pub fn value(&mut self, key: &str, v: impl Into<Value>) {
        self.values.insert(key.to_string(), v.into());
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn is_enabled(&self, id: &str) -> bool {
        !self.disabled.iter().any(|d| d == "*" || d == id)
    }

    /// Records an assertion; disabled ones are kept with their detail.
    pub fn check(&mut self, id: &str, passed: bool, detail: impl Into<String>) {
        let status = if !self.is_enabled(id) {
            Status::Disabled
        } else if passed {
            Status::Pass
        } else {
            Status::Fail
        };
        self.assertions.push(Assertion {
            id: id.to_string(),
            status,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.status != Status::Fail)
    }

    pub fn assertion(&self, id: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.id == id)
    }

    pub fn to_json(&self) -> Value {
        let assertions: Vec<Value> = self
            .assertions
            .iter()
            .map(|a| json!({"id": a.id, "status": a.status.as_str(), "detail": a.detail}))
            .collect();
        json!({
            "schema": SCHEMA,
            "experiment": self.experiment,
            "inputs": self.inputs,
            "values": self.values,
            "assertions": assertions,
            "notes": self.notes,
            "passed": self.passed(),
        })
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("serializable report");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("experiment {}\n", self.experiment);
        for (k, v) in &self.inputs {
            out.push_str(&format!("  input  {k} = {v}\n"));
        }
        for (k, v) in &self.values {
            out.push_str(&format!("  value  {k} = {v}\n"));
        }
        for a in &self.assertions {
            out.push_str(&format!("  [{}] {}: {}\n", a.status.as_str(), a.id, a.detail));
        }
        for n in &self.notes {
            out.push_str(&format!("  note   {n}\n"));
        }
        out.push_str(&format!("  result {}\n", if self.passed() { "pass" } else { "fail" }));
        out
    }
}

/// JSON number, or `null` for non-finite values.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disabled_assertions_are_reported() {
        let cfg = Config {
            disabled: vec!["demo/b".into()],
            ..Config::default()
        };
        let mut r = Report::new("demo", &cfg);
        r.check("a", true, "ok");
        r.check("b", false, "ignored");
        assert!(r.passed());
        assert_eq!(r.assertion("b").unwrap().status, Status::Disabled);
        let j = r.to_json();
        assert_eq!(j["schema"], SCHEMA);
        assert_eq!(j["assertions"][1]["status"], "disabled");
        r.check("c", false, "bad");
        assert!(!r.passed());
        assert!(r.to_text().contains("[fail] c: bad"));
    }

    #[test]
    fn whole_experiment_can_be_disabled() {
        let cfg = Config {
            disabled: vec!["demo".into()],
            ..Config::default()
        };
        let mut r = Report::new("demo", &cfg);
        r.check("a", false, "");
        assert!(r.passed());
    }

    #[test]
    fn non_finite_numbers_become_null() {
        assert_eq!(num(f64::NAN), Value::Null);
        assert_eq!(num(1.5), json!(1.5));
    }
}
