//! The machine-readable report document. Every floating value in a report
//! carries a provenance tag: "exact" for values computed by finite exact
//! formulas, "sampled" for Monte-Carlo output, "corrected" for values
//! scaled by the detection/transmission factors.

use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Exact,
    Sampled,
    Corrected,
}

impl Provenance {
    fn as_str(self) -> &'static str {
        match self {
            Provenance::Exact => "exact",
            Provenance::Sampled => "sampled",
            Provenance::Corrected => "corrected",
        }
    }
}

/// Wrap every floating-point number in `value` as
/// `{"value": <number>, "provenance": <tag>}`. Integers (counts, seeds)
/// pass through untouched.
pub fn tag_floats(value: Value, provenance: Provenance) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let mut tagged = Map::new();
            tagged.insert("value".to_string(), Value::Number(n));
            tagged.insert(
                "provenance".to_string(),
                Value::String(provenance.as_str().to_string()),
            );
            Value::Object(tagged)
        }
        Value::Array(items) => Value::Array(
            items
                .into_iter()
                .map(|v| tag_floats(v, provenance))
                .collect(),
        ),
        Value::Object(fields) => Value::Object(
            fields
                .into_iter()
                .map(|(k, v)| (k, tag_floats(v, provenance)))
                .collect(),
        ),
        other => other,
    }
}

/// Serialize a value and tag all its floats in one step.
pub fn tagged<T: Serialize>(value: &T, provenance: Provenance) -> Value {
    tag_floats(
        serde_json::to_value(value).expect("report values serialize"),
        provenance,
    )
}

/// The envelope shared by every command.
#[derive(Debug)]
pub struct ReportDocument {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub config: Value,
    pub results: Value,
    pub warnings: Vec<String>,
}

impl ReportDocument {
    pub fn to_json(&self) -> String {
        let mut doc = Map::new();
        doc.insert("command".into(), json!(self.command));
        doc.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        if let Some(seed) = self.seed {
            doc.insert("seed".into(), json!(seed));
        }
        doc.insert("config".into(), self.config.clone());
        doc.insert("results".into(), self.results.clone());
        doc.insert("warnings".into(), json!(self.warnings));
        let mut out = serde_json::to_string_pretty(&Value::Object(doc)).expect("report serializes");
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_floats_but_not_integers() {
        let value = json!({"count": 7, "e": 0.5, "nested": [1.25, 3]});
        let tagged = tag_floats(value, Provenance::Sampled);
        assert_eq!(tagged["count"], json!(7));
        assert_eq!(tagged["e"], json!({"value": 0.5, "provenance": "sampled"}));
        assert_eq!(
            tagged["nested"][0],
            json!({"value": 1.25, "provenance": "sampled"})
        );
        assert_eq!(tagged["nested"][1], json!(3));
    }
}
