//! The production validator must agree with the brute-force interpreter in
//! `schemagraph-testkit` on every (schema, instance) pair of a generated family.

use proptest::prelude::*;
use schemagraph_core::schema::SchemaRegistry;
use schemagraph_testkit::{family, interpreter};
use serde_json::{json, Value};

fn registry_for(schemas: &[Value]) -> SchemaRegistry {
    let mut registry = SchemaRegistry::new();
    for (i, s) in schemas.iter().enumerate() {
        registry
            .register(&format!("http://oracle.test/s{i}.json"), s.clone())
            .unwrap();
    }
    registry
}

#[test]
fn generated_family_agrees_with_interpreter() {
    let schemas = family::schema_family(0x5eed, 250);
    let instances = family::instance_pool();
    assert!(instances.len() >= 50, "pool has {}", instances.len());
    let registry = registry_for(&schemas);

    let mut mismatches = Vec::new();
    let mut rejected = 0usize;
    for (i, schema) in schemas.iter().enumerate() {
        let uri = format!("http://oracle.test/s{i}.json");
        for instance in &instances {
            let report = registry.validate(&uri, instance).unwrap();
            let expected = interpreter::violations(schema, instance);
            if report.locations() != expected {
                mismatches.push((
                    schema.clone(),
                    instance.clone(),
                    report.locations(),
                    expected,
                ));
            } else if !report.valid {
                rejected += 1;
            }
        }
    }
    assert!(
        mismatches.is_empty(),
        "first mismatch: {:#?}",
        mismatches.first()
    );
    // the family is only informative if it exercises both outcomes
    let total = schemas.len() * instances.len();
    assert!(
        rejected > total / 10 && rejected < total * 9 / 10,
        "{rejected}/{total}"
    );
}

fn arb_json() -> impl Strategy<Value = Value> {
    let leaf = prop_oneof![
        Just(Value::Null),
        any::<bool>().prop_map(Value::Bool),
        (-5i64..5).prop_map(|n| json!(n)),
        "[a-c]{0,3}".prop_map(Value::String),
    ];
    leaf.prop_recursive(3, 16, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..3).prop_map(Value::Array),
            prop::collection::btree_map("(a|b|id|name)", inner, 0..3)
                .prop_map(|m| Value::Object(m.into_iter().collect())),
        ]
    })
}

proptest! {
    #[test]
    fn arbitrary_instances_agree(seed in any::<u64>(), instance in arb_json()) {
        let schemas = family::schema_family(seed, 4);
        let registry = registry_for(&schemas);
        for (i, schema) in schemas.iter().enumerate() {
            let report = registry.validate(&format!("http://oracle.test/s{i}.json"), &instance).unwrap();
            prop_assert_eq!(report.locations(), interpreter::violations(schema, &instance));
            prop_assert_eq!(report.valid, report.errors.is_empty());
        }
    }

    #[test]
    fn validation_is_deterministic_and_pure(seed in any::<u64>(), instance in arb_json()) {
        let schemas = family::schema_family(seed, 3);
        let registry = registry_for(&schemas);
        let before = registry.fingerprint();
        let snapshot = instance.clone();
        for i in 0..schemas.len() {
            let uri = format!("http://oracle.test/s{i}.json");
            let first = registry.validate(&uri, &instance).unwrap();
            let second = registry.validate(&uri, &instance).unwrap();
            prop_assert_eq!(&first, &second);
            for e in &first.errors {
                prop_assert!(e.path.is_empty() || e.path.starts_with('/'));
            }
        }
        prop_assert_eq!(before, registry.fingerprint());
        prop_assert_eq!(snapshot, instance);
    }
}
