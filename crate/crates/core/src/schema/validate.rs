use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use regex::Regex;
use serde_json::{Map, Value};

use super::pointer::escape_token;
use super::registry::{Hop, SchemaError, SchemaRegistry};
use super::report::ValidationError;

thread_local! {
    static PATTERNS: RefCell<HashMap<String, Regex>> = RefCell::default();
}

const TYPE_NAMES: [&str; 7] = [
    "array", "boolean", "integer", "null", "number", "object", "string",
];

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(n) if is_integer(n) => "integer",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

/// Draft-04 integers: any number without a fractional part, so `2.0` counts.
fn is_integer(n: &serde_json::Number) -> bool {
    n.is_i64()
        || n.is_u64()
        || n.as_f64()
            .is_some_and(|f| f.is_finite() && f.fract() == 0.0)
}

fn matches_type(name: &str, v: &Value) -> bool {
    match (name, v) {
        ("number", Value::Number(_)) => true,
        ("integer", Value::Number(n)) => is_integer(n),
        _ => name == type_name(v) && name != "integer",
    }
}

/// Structural equality with numbers compared by value (`1 == 1.0`).
pub(crate) fn json_equal(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => x.as_f64() == y.as_f64(),
        (Value::Array(x), Value::Array(y)) => {
            x.len() == y.len() && x.iter().zip(y).all(|(a, b)| json_equal(a, b))
        }
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len()
                && x.iter()
                    .all(|(k, a)| y.get(k).is_some_and(|b| json_equal(a, b)))
        }
        _ => a == b,
    }
}

fn invalid(base: &str, keyword: &str, reason: impl Into<String>) -> SchemaError {
    SchemaError::InvalidKeyword {
        keyword: keyword.to_string(),
        schema_path: base.to_string(),
        reason: reason.into(),
    }
}

/// The keywords of one subschema, gathered in a single pass over its members.
#[derive(Default)]
struct Keywords<'s> {
    reference: Option<&'s Value>,
    type_: Option<&'s Value>,
    enum_: Option<&'s Value>,
    min_length: Option<&'s Value>,
    max_length: Option<&'s Value>,
    pattern: Option<&'s Value>,
    minimum: Option<&'s Value>,
    maximum: Option<&'s Value>,
    exclusive_minimum: Option<&'s Value>,
    exclusive_maximum: Option<&'s Value>,
    required: Option<&'s Value>,
    properties: Option<&'s Value>,
    additional_properties: Option<&'s Value>,
    items: Option<&'s Value>,
}

impl<'s> Keywords<'s> {
    fn scan(schema: &'s Map<String, Value>) -> Self {
        let mut kw = Keywords::default();
        for (key, value) in schema {
            let slot = match key.as_str() {
                "$ref" => &mut kw.reference,
                "type" => &mut kw.type_,
                "enum" => &mut kw.enum_,
                "minLength" => &mut kw.min_length,
                "maxLength" => &mut kw.max_length,
                "pattern" => &mut kw.pattern,
                "minimum" => &mut kw.minimum,
                "maximum" => &mut kw.maximum,
                "exclusiveMinimum" => &mut kw.exclusive_minimum,
                "exclusiveMaximum" => &mut kw.exclusive_maximum,
                "required" => &mut kw.required,
                "properties" => &mut kw.properties,
                "additionalProperties" => &mut kw.additional_properties,
                "items" => &mut kw.items,
                _ => continue,
            };
            *slot = Some(value);
        }
        kw
    }
}

/// One step of the instance location; borrowed so that descending costs no
/// allocation.
#[derive(Clone, Copy)]
enum Token<'i> {
    Key(&'i str),
    Index(usize),
}

pub(crate) struct Evaluator<'r, 'i> {
    registry: &'r SchemaRegistry,
    path: Vec<Token<'i>>,
    errors: Vec<ValidationError>,
    /// Resolved `$ref`s keyed by the address of the `$ref` member. A schema
    /// value belongs to exactly one document, so the address fixes the base.
    hops: Vec<(*const Value, Hop<'r>)>,
}

impl<'r, 'i> Evaluator<'r, 'i> {
    pub(crate) fn new(registry: &'r SchemaRegistry) -> Self {
        Self {
            registry,
            path: Vec::new(),
            errors: Vec::new(),
            hops: Vec::new(),
        }
    }

    pub(crate) fn into_errors(self) -> Vec<ValidationError> {
        self.errors
    }

    fn location(&self) -> String {
        let mut out = String::new();
        for token in &self.path {
            out.push('/');
            match token {
                Token::Key(k) => out.push_str(&escape_token(k)),
                Token::Index(i) => out.push_str(&i.to_string()),
            }
        }
        out
    }

    fn fail(&mut self, keyword: &str, message: String) {
        let location = self.location();
        self.errors
            .push(ValidationError::new(location, keyword, message));
    }

    fn hop(&mut self, base: &str, member: &'r Value) -> Result<Hop<'r>, SchemaError> {
        let key = member as *const Value;
        if let Some((_, hop)) = self.hops.iter().find(|(k, _)| *k == key) {
            return Ok(hop.clone());
        }
        let reference = member
            .as_str()
            .ok_or_else(|| invalid(base, "$ref", "must be a string"))?;
        let hop = self.registry.hop(base, reference)?;
        self.hops.push((key, hop.clone()));
        Ok(hop)
    }

    /// `chain` carries the `$ref` targets followed since the instance position
    /// last changed; descending into a child starts a fresh chain.
    pub(crate) fn evaluate(
        &mut self,
        base: &str,
        schema: &'r Value,
        instance: &'i Value,
        mut chain: Vec<Arc<str>>,
    ) -> Result<(), SchemaError> {
        let Value::Object(schema) = schema else {
            return Err(invalid(base, "(schema)", "subschema must be an object"));
        };
        let kw = Keywords::scan(schema);
        if let Some(member) = kw.reference {
            let hop = self.hop(base, member)?;
            self.registry.push_hop(&mut chain, hop.label)?;
            return self.evaluate(&hop.doc, hop.value, instance, chain);
        }

        if let Some(t) = kw.type_ {
            self.check_type(base, t, instance)?;
        }
        if let Some(options) = kw.enum_ {
            let options = options
                .as_array()
                .ok_or_else(|| invalid(base, "enum", "must be an array"))?;
            if !options.iter().any(|o| json_equal(o, instance)) {
                self.fail(
                    "enum",
                    format!("{instance} is not one of the allowed values"),
                );
            }
        }
        match instance {
            Value::String(s) => self.check_string(base, &kw, s)?,
            Value::Number(n) => self.check_number(base, &kw, n)?,
            Value::Object(members) => self.check_object(base, &kw, members)?,
            Value::Array(items) => self.check_array(base, &kw, items)?,
            _ => {}
        }
        Ok(())
    }

    fn check_type(&mut self, base: &str, t: &Value, instance: &Value) -> Result<(), SchemaError> {
        let known = |name: &str| {
            if TYPE_NAMES.contains(&name) {
                Ok(())
            } else {
                Err(invalid(base, "type", format!("unknown type {name:?}")))
            }
        };
        let matched = match t {
            Value::String(name) => {
                known(name)?;
                matches_type(name, instance)
            }
            Value::Array(items) => {
                let mut any = false;
                for item in items {
                    let name = item
                        .as_str()
                        .ok_or_else(|| invalid(base, "type", "entries must be strings"))?;
                    known(name)?;
                    any |= matches_type(name, instance);
                }
                any
            }
            _ => {
                return Err(invalid(
                    base,
                    "type",
                    "must be a string or an array of strings",
                ))
            }
        };
        if !matched {
            let names: Vec<&str> = match t {
                Value::Array(items) => items.iter().filter_map(Value::as_str).collect(),
                other => other.as_str().into_iter().collect(),
            };
            self.fail(
                "type",
                format!(
                    "expected {}, found {}",
                    names.join(" or "),
                    type_name(instance)
                ),
            );
        }
        Ok(())
    }

    fn check_string(&mut self, base: &str, kw: &Keywords<'r>, s: &str) -> Result<(), SchemaError> {
        let length_bound = |v: Option<&Value>, keyword: &str| {
            v.map(|v| {
                v.as_u64()
                    .ok_or_else(|| invalid(base, keyword, "must be a non-negative integer"))
            })
            .transpose()
        };
        let min = length_bound(kw.min_length, "minLength")?;
        let max = length_bound(kw.max_length, "maxLength")?;
        if min.is_some() || max.is_some() {
            let len = s.chars().count() as u64;
            if let Some(min) = min.filter(|m| len < *m) {
                self.fail("minLength", format!("length {len} is shorter than {min}"));
            }
            if let Some(max) = max.filter(|m| len > *m) {
                self.fail("maxLength", format!("length {len} is longer than {max}"));
            }
        }
        if let Some(pattern) = kw.pattern {
            let pattern = pattern
                .as_str()
                .ok_or_else(|| invalid(base, "pattern", "must be a string"))?;
            let matched = PATTERNS.with_borrow_mut(|cache| {
                if let Some(r) = cache.get(pattern) {
                    return Ok(r.is_match(s));
                }
                let r = Regex::new(pattern).map_err(|e| invalid(base, "pattern", e.to_string()))?;
                let matched = r.is_match(s);
                cache.insert(pattern.to_string(), r);
                Ok(matched)
            })?;
            if !matched {
                self.fail("pattern", format!("{s:?} does not match {pattern:?}"));
            }
        }
        Ok(())
    }

    fn check_number(
        &mut self,
        base: &str,
        kw: &Keywords<'r>,
        n: &serde_json::Number,
    ) -> Result<(), SchemaError> {
        let value = n.as_f64().unwrap_or(f64::NAN);
        let flag = |v: Option<&Value>, name: &str| -> Result<bool, SchemaError> {
            match v {
                None => Ok(false),
                Some(Value::Bool(b)) => Ok(*b),
                Some(_) => Err(invalid(base, name, "must be a boolean")),
            }
        };
        if let Some(min) = kw.minimum {
            let min = min
                .as_f64()
                .ok_or_else(|| invalid(base, "minimum", "must be a number"))?;
            let exclusive = flag(kw.exclusive_minimum, "exclusiveMinimum")?;
            if value < min || (exclusive && value == min) {
                let op = if exclusive {
                    "greater than"
                } else {
                    "at least"
                };
                self.fail("minimum", format!("{n} is not {op} {min}"));
            }
        }
        if let Some(max) = kw.maximum {
            let max = max
                .as_f64()
                .ok_or_else(|| invalid(base, "maximum", "must be a number"))?;
            let exclusive = flag(kw.exclusive_maximum, "exclusiveMaximum")?;
            if value > max || (exclusive && value == max) {
                let op = if exclusive { "less than" } else { "at most" };
                self.fail("maximum", format!("{n} is not {op} {max}"));
            }
        }
        Ok(())
    }

    fn check_object(
        &mut self,
        base: &str,
        kw: &Keywords<'r>,
        members: &'i Map<String, Value>,
    ) -> Result<(), SchemaError> {
        if let Some(required) = kw.required {
            let required = required
                .as_array()
                .ok_or_else(|| invalid(base, "required", "must be an array"))?;
            for name in required {
                let name = name
                    .as_str()
                    .ok_or_else(|| invalid(base, "required", "entries must be strings"))?;
                if !members.contains_key(name) {
                    self.fail("required", format!("missing required property {name:?}"));
                }
            }
        }
        let declared = match kw.properties {
            None => None,
            Some(Value::Object(p)) => Some(p),
            Some(_) => return Err(invalid(base, "properties", "must be an object")),
        };
        let additional = kw.additional_properties;
        if let Some(a) = additional {
            if !a.is_boolean() && !a.is_object() {
                return Err(invalid(
                    base,
                    "additionalProperties",
                    "must be a boolean or a schema",
                ));
            }
        }
        for (key, value) in members {
            let sub = declared.and_then(|d| d.get(key));
            match (sub, additional) {
                (Some(sub), _) => self.descend(base, Token::Key(key), sub, value)?,
                (None, Some(Value::Bool(false))) => {
                    self.path.push(Token::Key(key));
                    self.fail(
                        "additionalProperties",
                        format!("property {key:?} is not allowed"),
                    );
                    self.path.pop();
                }
                (None, Some(extra @ Value::Object(_))) => {
                    self.descend(base, Token::Key(key), extra, value)?
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn check_array(
        &mut self,
        base: &str,
        kw: &Keywords<'r>,
        items: &'i [Value],
    ) -> Result<(), SchemaError> {
        match kw.items {
            None => Ok(()),
            Some(sub @ Value::Object(_)) => {
                for (i, item) in items.iter().enumerate() {
                    self.descend(base, Token::Index(i), sub, item)?;
                }
                Ok(())
            }
            Some(_) => Err(invalid(
                base,
                "items",
                "only the single-schema form is supported",
            )),
        }
    }

    fn descend(
        &mut self,
        base: &str,
        token: Token<'i>,
        schema: &'r Value,
        instance: &'i Value,
    ) -> Result<(), SchemaError> {
        self.path.push(token);
        let result = self.evaluate(base, schema, instance, Vec::new());
        self.path.pop();
        result
    }
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use crate::schema::SchemaRegistry;

    const BASIC: &str = "http://localhost:8000/schemas/basic/basic_definitions.json";
    const HE: &str = "http://localhost:8000/schemas/ranking/he.json#";

    fn registry() -> SchemaRegistry {
        let mut r = SchemaRegistry::new();
        r.register(
            BASIC,
            json!({"definitions": {
                "id": {"type": "string", "minLength": 1},
                "default_property": {"type": ["string", "number", "boolean"]}
            }}),
        )
        .unwrap();
        r.register(
            HE,
            json!({
                "$schema": "http://localhost:8000/schemas/validators/node_validator.json#",
                "id": HE,
                "title": "HE",
                "type": "object",
                "properties": {
                    "id": {"$ref": "../basic/basic_definitions.json#/definitions/id"},
                    "name": {"type": "string", "maxLength": 1000, "minLength": 1}
                },
                "additionalProperties": {"$ref": "../basic/basic_definitions.json#/definitions/default_property"},
                "required": ["id", "name"],
                "parents": ["institute"],
                "graph_element": "node"
            }),
        )
        .unwrap();
        r.register("http://h/empty.json", json!({})).unwrap();
        r
    }

    #[test]
    fn he_accepts_minimal_instance() {
        let report = registry()
            .validate(HE, &json!({"id": "HU1", "name": "BME"}))
            .unwrap();
        assert!(report.valid, "{report}");
    }

    #[test]
    fn empty_schema_accepts_everything() {
        let r = registry();
        for v in [
            json!(null),
            json!(1),
            json!("x"),
            json!([1, {}]),
            json!({"a": {"b": []}}),
        ] {
            assert!(r.validate("http://h/empty.json", &v).unwrap().valid);
        }
    }

    #[test]
    fn empty_name_fails_min_length_at_name() {
        let report = registry()
            .validate(HE, &json!({"id": "HU1", "name": ""}))
            .unwrap();
        assert!(!report.valid);
        assert_eq!(
            report.locations(),
            vec![("/name".to_string(), "minLength".to_string())]
        );
    }

    #[test]
    fn missing_name_is_reported_at_root() {
        let report = registry().validate(HE, &json!({"id": "HU1"})).unwrap();
        assert_eq!(report.errors.len(), 1);
        let e = &report.errors[0];
        assert_eq!((e.path.as_str(), e.keyword.as_str()), ("", "required"));
        assert!(e.message.contains("\"name\""));
    }

    #[test]
    fn additional_properties_via_ref() {
        let r = registry();
        let ok = json!({"id": "a", "name": "b", "country": "DE", "rank": 3, "public": true});
        assert!(r.validate(HE, &ok).unwrap().valid);
        let nested = json!({"id": "a", "name": "b", "meta": {"x": 1}});
        let report = r.validate(HE, &nested).unwrap();
        assert_eq!(
            report.locations(),
            vec![("/meta".to_string(), "type".to_string())]
        );
    }

    #[test]
    fn errors_are_in_canonical_order() {
        let report = registry()
            .validate(HE, &json!({"name": 5, "b": [], "a": null}))
            .unwrap();
        let locs = report.locations();
        let mut sorted = locs.clone();
        sorted.sort();
        assert_eq!(locs, sorted);
        assert_eq!(locs[0], ("".to_string(), "required".to_string()));
    }

    #[test]
    fn numeric_keywords() {
        let mut r = SchemaRegistry::new();
        r.register(
            "http://h/n.json",
            json!({"type": "integer", "minimum": 0, "maximum": 10, "exclusiveMaximum": true}),
        )
        .unwrap();
        let check = |v| r.validate("http://h/n.json", &v).unwrap().locations();
        assert!(check(json!(0)).is_empty());
        assert!(check(json!(2.0)).is_empty());
        assert_eq!(check(json!(10))[0].1, "maximum");
        assert_eq!(check(json!(-1))[0].1, "minimum");
        assert_eq!(check(json!(1.5))[0].1, "type");
    }

    #[test]
    fn pattern_and_enum() {
        let mut r = SchemaRegistry::new();
        r.register(
            "http://h/p.json",
            json!({"properties": {
                "year": {"pattern": "^[0-9]{4}-[0-9]{2}$"},
                "direction": {"enum": ["single", "double", 1]}
            }}),
        )
        .unwrap();
        let check = |v| r.validate("http://h/p.json", &v).unwrap().locations();
        assert!(check(json!({"year": "2008-09", "direction": 1.0})).is_empty());
        assert_eq!(
            check(json!({"year": "2008", "direction": "both"})),
            vec![
                ("/direction".to_string(), "enum".to_string()),
                ("/year".to_string(), "pattern".to_string())
            ]
        );
    }

    #[test]
    fn ref_siblings_are_ignored() {
        let mut r = registry();
        r.register(
            "http://h/sib.json",
            json!({"$ref": "http://h/empty.json#", "type": "string"}),
        )
        .unwrap();
        assert!(r.validate("http://h/sib.json", &json!(42)).unwrap().valid);
    }

    #[test]
    fn recursive_schema_is_not_a_cycle() {
        let mut r = SchemaRegistry::new();
        r.register(
            "http://h/tree.json",
            json!({"type": "object", "properties": {"child": {"$ref": "#"}}, "required": ["v"]}),
        )
        .unwrap();
        let report = r
            .validate(
                "http://h/tree.json",
                &json!({"v": 1, "child": {"v": 2, "child": {}}}),
            )
            .unwrap();
        assert_eq!(
            report.locations(),
            vec![("/child/child".to_string(), "required".to_string())]
        );
    }

    #[test]
    fn malformed_keywords_are_schema_errors() {
        let mut r = SchemaRegistry::new();
        r.register("http://h/bad.json", json!({"minLength": -1}))
            .unwrap();
        r.register("http://h/bad2.json", json!({"type": "str"}))
            .unwrap();
        r.register("http://h/bad3.json", json!({"items": [{}]}))
            .unwrap();
        assert!(r.validate("http://h/bad.json", &json!("x")).is_err());
        assert!(r.validate("http://h/bad2.json", &json!("x")).is_err());
        assert!(r.validate("http://h/bad3.json", &json!([1])).is_err());
    }

    #[test]
    fn unknown_schema_uri() {
        let r = registry();
        assert!(r.validate("http://h/none.json", &json!(1)).is_err());
    }
}
