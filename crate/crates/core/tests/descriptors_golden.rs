use schemagraph_core::descriptor::{
    generate_bulk_descriptor, validate_descriptor, DescriptorRef, MetaSchema, Role, Shape,
};
use schemagraph_core::ontology::Ontology;
use schemagraph_testkit::fixtures::{self, canonical, rehost};
use serde_json::{json, Value};

fn check(
    candidate: &Value,
) -> Result<schemagraph_core::descriptor::Descriptor, schemagraph_core::descriptor::DescriptorError>
{
    let meta = MetaSchema::bundled();
    validate_descriptor(&meta, &meta.registry(), candidate)
}

#[test]
fn high_education_descriptor_is_accepted() {
    let d = check(&fixtures::he()).unwrap();
    assert_eq!(d.title, "HE");
    assert_eq!(d.role(), Role::Node);
    assert_eq!(
        d.shape,
        Shape::Node {
            parents: vec![DescriptorRef::Title("institute".into())]
        }
    );
}

#[test]
fn bulk_version_matches_golden_document() {
    let d = check(&fixtures::he()).unwrap();
    assert_eq!(
        canonical(&generate_bulk_descriptor(&d)),
        canonical(&fixtures::bulk_he())
    );
}

#[test]
fn bulk_version_follows_the_host_of_the_descriptor() {
    let moved = rehost(
        &fixtures::he(),
        "http://localhost:8000/",
        "https://graphs.example.org:9443/",
    );
    let d = check(&moved).unwrap();
    let bulk = generate_bulk_descriptor(&d);
    assert_eq!(
        bulk["id"],
        "https://graphs.example.org:9443/schemas/ranking/bulk_he.json#"
    );
    let back = rehost(
        &bulk,
        "https://graphs.example.org:9443/",
        "http://localhost:8000/",
    );
    assert_eq!(canonical(&back), canonical(&fixtures::bulk_he()));
}

#[test]
fn bulk_document_validates_arrays_of_the_descriptor() {
    let mut o = Ontology::default();
    o.register_descriptor(&fixtures::institute()).unwrap();
    let reg = o.register_descriptor(&fixtures::he()).unwrap();
    assert_eq!(reg.bulk_title, "Bulk HE");
    assert_eq!(
        canonical(&o.entry("HE").unwrap().bulk),
        canonical(&fixtures::bulk_he())
    );

    let ok = json!([{"id": "D  KONSTAN01", "name": "Konstanz"}, {"id": "K BATH01", "name": "Bath", "country": "UK"}]);
    assert!(o.validate_bulk("HE", &ok).unwrap().valid);
    let bad = json!([{"id": "D  KONSTAN01", "name": "Konstanz"}, {"id": "K BATH01", "name": ""}]);
    let report = o.validate_bulk("HE", &bad).unwrap();
    assert_eq!(
        report.locations(),
        [("/1/name".to_string(), "minLength".to_string())]
    );
    let nested = json!([{"id": "x", "name": "x", "tags": {"a": 1}}]);
    assert_eq!(
        o.validate_bulk("HE", &nested).unwrap().locations()[0].0,
        "/0/tags"
    );
}

fn mutated(f: impl FnOnce(&mut serde_json::Map<String, Value>)) -> Value {
    let mut doc = fixtures::he();
    f(doc.as_object_mut().unwrap());
    doc
}

fn mobility() -> Value {
    json!({
        "$schema": "http://localhost:8000/schemas/validators/edge_validator.json#",
        "id": "http://localhost:8000/schemas/ranking/mobility.json#",
        "title": "mobility",
        "type": "object",
        "properties": {
            "id": {"$ref": "../basic/basic_definitions.json#/definitions/id"},
            "name": {"type": "string", "minLength": 1},
            "source": {"type": "string"},
            "target": {"type": "string"}
        },
        "required": ["id", "name", "source", "target"],
        "direction": "single",
        "source_label": "./he.json#",
        "target_label": "./he.json#",
        "graph_element": "edge"
    })
}

#[test]
fn restriction_mutations_are_rejected_with_the_violated_rule() {
    let err = check(&mutated(|d| {
        d.insert("required".into(), json!(["id"]));
    }))
    .unwrap_err();
    assert_eq!(err.code(), "required_restriction");
    assert!(err.to_string().contains("name"));

    let err = check(&mutated(|d| {
        d.insert(
            "$schema".into(),
            json!("http://localhost:8000/schemas/validators/other.json#"),
        );
    }))
    .unwrap_err();
    assert_eq!(err.code(), "unknown_meta_schema");

    let err = check(&mutated(|d| {
        d.remove("graph_element");
    }))
    .unwrap_err();
    assert_eq!(err.code(), "missing_graph_element");

    let mut edge = mobility();
    edge["parents"] = json!(["institute"]);
    assert_eq!(check(&edge).unwrap_err().code(), "parents_on_edge");

    let mut edge = mobility();
    edge.as_object_mut().unwrap().remove("source_label");
    let err = check(&edge).unwrap_err();
    assert_eq!(err.code(), "meta_schema_violation");
    assert!(err.to_string().contains("source_label"), "{err}");
}

#[test]
fn edge_validator_requires_every_edge_keyword() {
    assert_eq!(check(&mobility()).unwrap().role(), Role::Edge);
    for keyword in ["direction", "source_label", "target_label"] {
        let mut edge = mobility();
        edge.as_object_mut().unwrap().remove(keyword);
        let err = check(&edge).unwrap_err();
        assert_eq!(err.code(), "meta_schema_violation");
        assert!(err.to_string().contains(keyword), "{keyword}: {err}");
    }
}

#[test]
fn node_schema_with_edge_validator_is_a_mismatch() {
    let err = check(&mutated(|d| {
        d.insert(
            "$schema".into(),
            json!("http://localhost:8000/schemas/validators/edge_validator.json#"),
        );
    }))
    .unwrap_err();
    assert_eq!(err.code(), "role_mismatch");
}
