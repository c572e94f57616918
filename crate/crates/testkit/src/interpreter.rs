//! Brute-force interpreter for the ref-free keyword subset
//! {type, enum, required, properties, additionalProperties, items,
//! minLength, maxLength, minimum, maximum}.
//!
//! Returns every violation as a `(json_pointer, keyword)` pair, sorted.

use serde_json::Value;

pub fn violations(schema: &Value, instance: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    walk(schema, instance, String::new(), &mut out);
    out.sort();
    out
}

pub fn accepts(schema: &Value, instance: &Value) -> bool {
    violations(schema, instance).is_empty()
}

fn child(path: &str, token: &str) -> String {
    let escaped = token.replace('~', "~0").replace('/', "~1");
    format!("{path}/{escaped}")
}

fn numbers_equal(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => x.as_f64() == y.as_f64(),
        (Value::Array(xs), Value::Array(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| numbers_equal(x, y))
        }
        (Value::Object(xs), Value::Object(ys)) => {
            xs.len() == ys.len()
                && xs
                    .iter()
                    .all(|(k, x)| ys.get(k).map(|y| numbers_equal(x, y)).unwrap_or(false))
        }
        _ => a == b,
    }
}

fn has_type(name: &str, v: &Value) -> bool {
    match name {
        "null" => v.is_null(),
        "boolean" => v.is_boolean(),
        "string" => v.is_string(),
        "array" => v.is_array(),
        "object" => v.is_object(),
        "number" => v.is_number(),
        "integer" => match v.as_f64() {
            Some(f) if v.is_number() => f.is_finite() && f.fract() == 0.0,
            _ => false,
        },
        _ => false,
    }
}

fn walk(schema: &Value, instance: &Value, path: String, out: &mut Vec<(String, String)>) {
    let Some(schema) = schema.as_object() else {
        return;
    };
    let mut report = |kw: &str| out.push((path.clone(), kw.to_string()));

    if let Some(t) = schema.get("type") {
        let ok = match t {
            Value::String(s) => has_type(s, instance),
            Value::Array(options) => options
                .iter()
                .filter_map(Value::as_str)
                .any(|s| has_type(s, instance)),
            _ => true,
        };
        if !ok {
            report("type");
        }
    }
    if let Some(Value::Array(options)) = schema.get("enum") {
        if !options.iter().any(|o| numbers_equal(o, instance)) {
            report("enum");
        }
    }
    if let Value::String(s) = instance {
        let len = s.chars().count() as u64;
        if let Some(min) = schema.get("minLength").and_then(Value::as_u64) {
            if len < min {
                report("minLength");
            }
        }
        if let Some(max) = schema.get("maxLength").and_then(Value::as_u64) {
            if len > max {
                report("maxLength");
            }
        }
    }
    if let Some(n) = instance.as_f64().filter(|_| instance.is_number()) {
        if let Some(min) = schema.get("minimum").and_then(Value::as_f64) {
            if n < min {
                report("minimum");
            }
        }
        if let Some(max) = schema.get("maximum").and_then(Value::as_f64) {
            if n > max {
                report("maximum");
            }
        }
    }
    if let Value::Object(members) = instance {
        if let Some(Value::Array(req)) = schema.get("required") {
            for name in req.iter().filter_map(Value::as_str) {
                if !members.contains_key(name) {
                    report("required");
                }
            }
        }
        let declared = schema.get("properties").and_then(Value::as_object);
        for (key, value) in members {
            let sub = declared.and_then(|d| d.get(key));
            match sub {
                Some(sub) => walk(sub, value, child(&path, key), out),
                None => match schema.get("additionalProperties") {
                    Some(Value::Bool(false)) => {
                        out.push((child(&path, key), "additionalProperties".to_string()))
                    }
                    Some(extra @ Value::Object(_)) => walk(extra, value, child(&path, key), out),
                    _ => {}
                },
            }
        }
    }
    if let (Value::Array(elements), Some(items)) = (instance, schema.get("items")) {
        for (i, element) in elements.iter().enumerate() {
            walk(items, element, child(&path, &i.to_string()), out);
        }
    }
}
