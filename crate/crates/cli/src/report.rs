use qdiv::haar::SamplerId;
use qdiv::scenarios::NamedState;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::args::{Format, RemapName, COMMANDS};

pub const ORIENTATION: &str = "text_consistent";

/// Machine-readable outcome of one command.
///
/// Fields serialize in declaration order, so `wall_time_ms` is always last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub eq6_orientation: String,
    pub config: ConfigEcho,
    pub passed: bool,
    pub result: Map<String, Value>,
    pub wall_time_ms: u64,
}

/// Effective configuration after defaults are applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    pub dim: u64,
    pub samples: u64,
    pub seed: u64,
    pub tolerance: f64,
    pub format: Format,
    pub shards: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<NamedState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remap: Option<RemapName>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("malformed report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid report: {0}")]
    Invalid(String),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

impl Report {
    /// Parses a JSON report and checks the invariants the schema cannot express.
    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        let report: Report = serde_json::from_str(text)?;
        report.validate()?;
        Ok(report)
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        let bad = |msg: String| Err(ReportError::Invalid(msg));
        if !COMMANDS.contains(&self.command.as_str()) {
            return bad(format!("unknown command '{}'", self.command));
        }
        if self.version.is_empty() {
            return bad("empty version".into());
        }
        if self.eq6_orientation != ORIENTATION {
            return bad(format!("eq6_orientation must be '{ORIENTATION}'"));
        }
        let c = &self.config;
        if c.dim < 2 {
            return bad(format!("dim {} < 2", c.dim));
        }
        if c.samples < 1 {
            return bad("samples must be positive".into());
        }
        if !(c.tolerance.is_finite() && c.tolerance > 0.0) {
            return bad(format!("tolerance {} must be positive", c.tolerance));
        }
        if c.shards < 1 {
            return bad("shards must be positive".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    /// Header row and value row of every scalar field, keyed by dotted path.
    /// Arrays are left out.
    pub fn to_csv(&self) -> Result<String, ReportError> {
        let value = serde_json::to_value(self)?;
        let mut cells = Vec::new();
        flatten_scalars("", &value, &mut cells);
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(cells.iter().map(|(k, _)| k.as_str()))?;
        w.write_record(cells.iter().map(|(_, v)| v.as_str()))?;
        let bytes = w.into_inner().map_err(|e| ReportError::Invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 input is utf-8"))
    }

    pub fn render(&self, format: Format) -> Result<String, ReportError> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }
}

fn flatten_scalars(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten_scalars(&key(k), v, out);
            }
        }
        Value::Array(_) => {}
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut result = Map::new();
        result.insert("value".into(), Value::from(1.0 / 3.0));
        result.insert("spectrum".into(), serde_json::json!([{"value": 1.0, "multiplicity": 1}]));
        result.insert("nested".into(), serde_json::json!({"a": 1, "b": "x,y"}));
        Report {
            command: "mean-divergence".into(),
            version: "0.1.0".into(),
            eq6_orientation: ORIENTATION.into(),
            config: ConfigEcho {
                dim: 2,
                samples: 10,
                seed: u64::MAX,
                tolerance: 1e-9,
                format: Format::Json,
                shards: 1,
                sampler: None,
                state: Some("bell_psi_minus".into()),
                spec: None,
                remap: None,
            },
            passed: true,
            result,
            wall_time_ms: 3,
        }
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let r = sample();
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.result["value"].as_f64().unwrap(), 1.0 / 3.0);
        assert_eq!(back.config.seed, u64::MAX);
    }

    #[test]
    fn wall_time_is_last() {
        let json = sample().to_json();
        let last_key = json.lines().rev().find(|l| l.contains(':')).unwrap();
        assert!(last_key.trim_start().starts_with("\"wall_time_ms\""));
    }

    #[test]
    fn csv_flattens_scalars_only() {
        let csv = sample().to_csv().unwrap();
        let mut rdr = csv::Reader::from_reader(csv.as_bytes());
        let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
        let row: Vec<String> = rdr.records().next().unwrap().unwrap().iter().map(String::from).collect();
        assert!(header.contains(&"config.dim".to_string()));
        assert!(header.contains(&"result.nested.b".to_string()));
        assert!(!header.iter().any(|h| h.contains("spectrum")));
        let at = |k: &str| row[header.iter().position(|h| h == k).unwrap()].clone();
        assert_eq!(at("result.nested.b"), "x,y");
        assert_eq!(at("result.value").parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(at("eq6_orientation"), ORIENTATION);
    }

    #[test]
    fn rejects_invalid_reports() {
        let mut r = sample();
        r.eq6_orientation = "printed".into();
        assert!(Report::from_json(&r.to_json()).is_err());

        let mut r = sample();
        r.command = "launch".into();
        assert!(Report::from_json(&r.to_json()).is_err());

        let mut r = sample();
        r.config.tolerance = 0.0;
        assert!(Report::from_json(&r.to_json()).is_err());

        let extra = sample().to_json().replacen('{', "{\"extra\": 1,", 1);
        assert!(Report::from_json(&extra).is_err());
        assert!(Report::from_json("not json").is_err());
    }
}
