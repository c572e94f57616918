//! Hand-authored descriptor documents.

use serde_json::Value;

/// The "High Education" node descriptor of the Ranking project, on the
/// default localhost:8000 host.
pub const HE: &str = include_str!("../fixtures/he.json");
/// Its bulk version, as the service is expected to generate it.
pub const BULK_HE: &str = include_str!("../fixtures/bulk_he.json");
/// Parent of HE.
pub const INSTITUTE: &str = include_str!("../fixtures/institute.json");

pub fn parse(text: &str) -> Value {
    serde_json::from_str(text).expect("fixture is valid JSON")
}

pub fn he() -> Value {
    parse(HE)
}

pub fn bulk_he() -> Value {
    parse(BULK_HE)
}

pub fn institute() -> Value {
    parse(INSTITUTE)
}

/// Compact serialization with object keys sorted.
pub fn canonical(value: &Value) -> String {
    fn sort(v: &Value) -> Value {
        match v {
            Value::Object(m) => {
                let mut keys: Vec<&String> = m.keys().collect();
                keys.sort();
                Value::Object(keys.into_iter().map(|k| (k.clone(), sort(&m[k]))).collect())
            }
            Value::Array(a) => Value::Array(a.iter().map(sort).collect()),
            other => other.clone(),
        }
    }
    sort(value).to_string()
}

/// Replaces `from` with `to` in every string of the document.
pub fn rehost(value: &Value, from: &str, to: &str) -> Value {
    match value {
        Value::String(s) => Value::String(s.replace(from, to)),
        Value::Array(a) => Value::Array(a.iter().map(|v| rehost(v, from, to)).collect()),
        Value::Object(m) => Value::Object(
            m.iter()
                .map(|(k, v)| (k.clone(), rehost(v, from, to)))
                .collect(),
        ),
        other => other.clone(),
    }
}

/// Three node descriptors whose `parents` form the cycle a → b → c → a.
/// Registration order decides which link closes the cycle.
pub fn cyclic_triple() -> [Value; 3] {
    let node = |title: &str, parent: &str| {
        serde_json::json!({
            "$schema": "http://localhost:8000/schemas/validators/node_validator.json#",
            "id": format!("http://localhost:8000/schemas/cycle/{title}.json#"),
            "title": title,
            "type": "object",
            "properties": {"id": {"type": "string"}, "name": {"type": "string"}},
            "required": ["id", "name"],
            "parents": [parent],
            "graph_element": "node"
        })
    };
    [node("a", "c"), node("b", "a"), node("c", "b")]
}
