use serde::{Deserialize, Serialize};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// How a row is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    /// `rel_err ≤ tolerance`.
    #[default]
    Close,
    /// `measured > prediction`; the prediction is a lower bound.
    Exceeds,
}

/// One measured quantity with its prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueRecord {
    pub key: String,
    #[serde(default)]
    pub gate: GateKind,
    pub measured: f64,
    pub prediction: f64,
    pub abs_err: f64,
    /// Relative to `|prediction|`; equals `abs_err` when the prediction is 0.
    pub rel_err: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub paper_anchor: String,
}

impl ValueRecord {
    pub fn new(key: impl Into<String>, measured: f64, prediction: f64, tolerance: f64, anchor: impl Into<String>) -> Self {
        let abs_err = (measured - prediction).abs();
        let rel_err = if prediction == 0.0 { abs_err } else { abs_err / prediction.abs() };
        Self {
            key: key.into(),
            gate: GateKind::Close,
            measured,
            prediction,
            abs_err,
            rel_err,
            tolerance,
            pass: rel_err <= tolerance,
            paper_anchor: anchor.into(),
        }
    }

    /// One-sided gate `measured > bound`; the errors record the shortfall.
    pub fn exceeds(key: impl Into<String>, measured: f64, bound: f64, anchor: impl Into<String>) -> Self {
        let abs_err = (bound - measured).max(0.0);
        Self {
            key: key.into(),
            gate: GateKind::Exceeds,
            measured,
            prediction: bound,
            abs_err,
            rel_err: if bound == 0.0 { abs_err } else { abs_err / bound.abs() },
            tolerance: 0.0,
            pass: measured > bound,
            paper_anchor: anchor.into(),
        }
    }
}

/// Experiment output. The top-level numbers repeat the first failing row,
/// or the first row (the experiment's primary quantity) when all pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceReport {
    pub schema_version: u32,
    pub experiment: String,
    pub inputs: serde_json::Value,
    pub values: Vec<ValueRecord>,
    pub measured: f64,
    pub prediction: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub pass: bool,
    pub paper_anchor: String,
    #[serde(default)]
    pub timestamp: Option<String>,
}

impl TraceReport {
    pub fn new(experiment: impl Into<String>, inputs: serde_json::Value, values: Vec<ValueRecord>) -> Self {
        let headline = values.iter().find(|v| !v.pass).or(values.first());
        let (measured, prediction, abs_err, rel_err, paper_anchor) = match headline {
            Some(w) => (w.measured, w.prediction, w.abs_err, w.rel_err, w.paper_anchor.clone()),
            None => (0.0, 0.0, 0.0, 0.0, String::new()),
        };
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            experiment: experiment.into(),
            inputs,
            pass: values.iter().all(|v| v.pass),
            values,
            measured,
            prediction,
            abs_err,
            rel_err,
            paper_anchor,
            timestamp: None,
        }
    }

    pub fn get(&self, key: &str) -> Option<&ValueRecord> {
        self.values.iter().find(|v| v.key == key)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn headline_row_and_round_trip() {
        let r = TraceReport::new(
            "demo",
            serde_json::json!({"n": 4}),
            vec![
                ValueRecord::new("a", 1.01, 1.0, 0.02, "identity a"),
                ValueRecord::new("b", 0.5, 0.0, 1e-3, "identity b"),
            ],
        );
        assert!(!r.pass);
        assert_eq!(r.paper_anchor, "identity b");
        assert!(r.get("a").unwrap().pass);
        let ok = TraceReport::new("demo", serde_json::json!({}), vec![ValueRecord::new("a", 1.0, 1.0, 0.1, "first"), ValueRecord::new("b", 2.0, 2.0, 0.1, "second")]);
        assert!(ok.pass);
        assert_eq!(ok.paper_anchor, "first");
        assert!(ValueRecord::exceeds("g", 0.12, 0.10, "x").pass);
        assert!(!ValueRecord::exceeds("g", 0.10, 0.10, "x").pass);
        assert!(!ValueRecord::new("nan", f64::NAN, 1.0, 1.0, "x").pass);
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<TraceReport>(&s).unwrap(), r);
    }
}
