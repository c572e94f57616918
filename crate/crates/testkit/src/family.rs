//! Seeded generators for schema families and a bounded instance enumeration.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

const KEYS: [&str; 4] = ["a", "b", "id", "name"];
const TYPES: [&str; 7] = [
    "null", "boolean", "string", "number", "integer", "array", "object",
];

/// `count` schemas drawn from the supported keyword subset, reproducible by seed.
pub fn schema_family(seed: u64, count: usize) -> Vec<Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_schema(&mut rng, 2)).collect()
}

fn small_scalar<R: Rng>(rng: &mut R) -> Value {
    match rng.random_range(0..6) {
        0 => Value::Null,
        1 => json!(rng.random_bool(0.5)),
        2 => json!(rng.random_range(-2..4)),
        3 => json!(1.5),
        4 => json!(["", "a", "ab", "id"].choose(rng).unwrap()),
        _ => json!("name"),
    }
}

fn random_schema<R: Rng>(rng: &mut R, depth: u32) -> Value {
    let mut schema = Map::new();
    if rng.random_bool(0.6) {
        if rng.random_bool(0.75) {
            schema.insert("type".into(), json!(TYPES.choose(rng).unwrap()));
        } else {
            let picked: Vec<&str> = TYPES.choose_multiple(rng, 2).copied().collect();
            schema.insert("type".into(), json!(picked));
        }
    }
    if rng.random_bool(0.2) {
        let options: Vec<Value> = (0..rng.random_range(1..4))
            .map(|_| small_scalar(rng))
            .collect();
        schema.insert("enum".into(), Value::Array(options));
    }
    if rng.random_bool(0.3) {
        schema.insert("minLength".into(), json!(rng.random_range(0..3)));
    }
    if rng.random_bool(0.3) {
        schema.insert("maxLength".into(), json!(rng.random_range(0..3)));
    }
    if rng.random_bool(0.2) {
        schema.insert("minimum".into(), json!(rng.random_range(-1..2)));
    }
    if rng.random_bool(0.2) {
        schema.insert("maximum".into(), json!(rng.random_range(0..3)));
    }
    if rng.random_bool(0.35) {
        let amount = rng.random_range(1..3);
        let req: Vec<&str> = KEYS.choose_multiple(rng, amount).copied().collect();
        schema.insert("required".into(), json!(req));
    }
    if depth > 0 && rng.random_bool(0.5) {
        let mut props = Map::new();
        let amount = rng.random_range(1..4);
        let keys: Vec<&str> = KEYS.choose_multiple(rng, amount).copied().collect();
        for key in keys {
            props.insert(key.to_string(), random_schema(rng, depth - 1));
        }
        schema.insert("properties".into(), Value::Object(props));
    }
    if rng.random_bool(0.3) {
        let extra = if depth > 0 && rng.random_bool(0.5) {
            random_schema(rng, depth - 1)
        } else {
            json!(rng.random_bool(0.5))
        };
        schema.insert("additionalProperties".into(), extra);
    }
    if depth > 0 && rng.random_bool(0.3) {
        schema.insert("items".into(), random_schema(rng, depth - 1));
    }
    Value::Object(schema)
}

/// A fixed enumeration of small JSON values: scalars, short arrays of scalars
/// and objects over a four-key alphabet.
pub fn instance_pool() -> Vec<Value> {
    let scalars = vec![
        Value::Null,
        json!(true),
        json!(false),
        json!(0),
        json!(1),
        json!(-1),
        json!(2),
        json!(1.5),
        json!(2.0),
        json!(""),
        json!("a"),
        json!("ab"),
        json!("abc"),
        json!("id"),
        json!("é"),
    ];
    let mut pool = scalars.clone();
    pool.push(json!([]));
    for s in &scalars[..8] {
        pool.push(json!([s]));
    }
    pool.push(json!(["a", 1]));
    pool.push(json!([[], {}]));
    pool.push(json!({}));
    let values = [json!("a"), json!(""), json!(1), json!(null), json!([1])];
    for key in KEYS {
        for v in &values {
            pool.push(json!({ key: v }));
        }
    }
    pool.push(json!({"id": "x", "name": "y"}));
    pool.push(json!({"id": "", "name": "y", "a": 2}));
    pool.push(json!({"a": {"b": "ab"}, "b": [1, "a"]}));
    pool.push(json!({"a/b": 1, "c~d": "x"}));
    pool.push(json!({"id": 1, "name": 2, "a": true, "b": false}));
    pool
}
