use proptest::prelude::*;
use serde_json::json;

use super::*;

const NODE: &str = "http://localhost:8000/schemas/validators/node_validator.json#";
const EDGE: &str = "http://localhost:8000/schemas/validators/edge_validator.json#";

fn node_desc(title: &str, parents: &[&str]) -> Value {
    json!({
        "$schema": NODE,
        "id": format!("http://localhost:8000/schemas/ranking/{}.json#", title.to_lowercase()),
        "title": title,
        "type": "object",
        "properties": {"id": {"type": "string"}, "name": {"type": "string"}},
        "required": ["id", "name"],
        "parents": parents,
        "graph_element": "node"
    })
}

fn edge_desc(title: &str, direction: &str) -> Value {
    json!({
        "$schema": EDGE,
        "id": format!("http://localhost:8000/schemas/ranking/{title}.json#"),
        "title": title,
        "type": "object",
        "properties": {"id": {"type": "string"}},
        "required": ["id", "name", "source", "target"],
        "direction": direction,
        "source_label": "./he.json#",
        "target_label": "HE",
        "graph_element": "edge"
    })
}

fn ranking() -> Ontology {
    let mut o = Ontology::default();
    o.register_descriptor(&node_desc("institute", &[])).unwrap();
    o.register_descriptor(&node_desc("HE", &["institute"]))
        .unwrap();
    o.register_descriptor(&node_desc("country", &[])).unwrap();
    o.register_descriptor(&edge_desc("mobility", "single"))
        .unwrap();
    o.register_descriptor(&edge_desc("partner", "double"))
        .unwrap();
    o
}

fn obj(v: Value) -> Map<String, Value> {
    v.as_object().unwrap().clone()
}

#[test]
fn node_carries_inherited_labels() {
    let o = ranking();
    let mut g = KnowledgeGraph::new();
    let (key, writes) = upsert_node(
        &mut g,
        &o,
        "HE",
        &obj(json!({"id": "D  KONSTAN01", "name": "Konstanz"})),
    )
    .unwrap();
    assert_eq!(key, ElementKey::new("HE", "D  KONSTAN01"));
    assert_eq!(writes.len(), 1);
    let view = get_node(&g, &o, "HE", "D  KONSTAN01").unwrap().unwrap();
    assert_eq!(view.labels, ["HE", "institute"]);
    assert!(!view.stub);
}

#[test]
fn node_upsert_is_idempotent_and_merges() {
    let o = ranking();
    let mut g = KnowledgeGraph::new();
    let doc = obj(json!({"id": "D  KONSTAN01", "name": "Konstanz"}));
    upsert_node(&mut g, &o, "HE", &doc).unwrap();
    let once = g.clone();
    upsert_node(&mut g, &o, "HE", &doc).unwrap();
    assert_eq!(g, once);
    assert_eq!(g.node_count(), 1);

    upsert_node(
        &mut g,
        &o,
        "HE",
        &obj(json!({"id": "D  KONSTAN01", "country": "DE"})),
    )
    .unwrap();
    let props = &g.node("HE", "D  KONSTAN01").unwrap().properties;
    assert_eq!(props["name"], "Konstanz");
    assert_eq!(props["country"], "DE");
    upsert_node(
        &mut g,
        &o,
        "HE",
        &obj(json!({"id": "D  KONSTAN01", "name": "Uni Konstanz"})),
    )
    .unwrap();
    assert_eq!(
        g.node("HE", "D  KONSTAN01").unwrap().properties["name"],
        "Uni Konstanz"
    );
}

#[test]
fn same_id_under_different_labels_is_two_nodes() {
    let o = ranking();
    let mut g = KnowledgeGraph::new();
    upsert_node(&mut g, &o, "HE", &obj(json!({"id": "X", "name": "x"}))).unwrap();
    upsert_node(
        &mut g,
        &o,
        "institute",
        &obj(json!({"id": "X", "name": "x"})),
    )
    .unwrap();
    assert_eq!(g.node_count(), 2);
}

#[test]
fn edge_with_table_row_properties() {
    let o = ranking();
    let mut g = KnowledgeGraph::new();
    upsert_node(
        &mut g,
        &o,
        "HE",
        &obj(json!({"id": "D  KONSTAN01", "name": "Konstanz"})),
    )
    .unwrap();
    upsert_node(
        &mut g,
        &o,
        "HE",
        &obj(json!({"id": "K BATH01", "name": "Bath"})),
    )
    .unwrap();
    let doc = obj(json!({
        "id": "m1", "name": "m1", "source": "D  KONSTAN01", "target": "K BATH01",
        "year": "2008-09", "distance": 907
    }));
    let (key, writes) = upsert_edge(&mut g, &o, "mobility", &doc).unwrap();
    assert_eq!(writes.len(), 1, "no stubs needed");
    let edge = g.edge(&key.label, &key.id).unwrap();
    assert_eq!(edge.source, ElementKey::new("HE", "D  KONSTAN01"));
    assert_eq!(edge.target, ElementKey::new("HE", "K BATH01"));
    assert!(!edge.undirected);
    assert_eq!(edge.properties["distance"], 907);
    assert!(!edge.properties.contains_key("source"));

    upsert_edge(&mut g, &o, "mobility", &doc).unwrap();
    assert_eq!(g.edge_count(), 1);
}

#[test]
fn self_loop_creates_one_stub() {
    let o = ranking();
    let mut g = KnowledgeGraph::new();
    let doc = obj(json!({"id": "p1", "name": "p1", "source": "A", "target": "A"}));
    let (_, writes) = upsert_edge(&mut g, &o, "partner", &doc).unwrap();
    assert_eq!(writes.len(), 2);
    assert_eq!(g.stub_count(), 1);
}

#[test]
fn missing_endpoints_become_stubs() {
    let o = ranking();
    let mut g = KnowledgeGraph::new();
    let doc = obj(json!({"id": "p1", "name": "p1", "source": "A", "target": "B"}));
    let (_, writes) = upsert_edge(&mut g, &o, "partner", &doc).unwrap();
    assert_eq!(writes.len(), 3);
    assert_eq!(g.stub_count(), 2);
    let stub = get_node(&g, &o, "HE", "A").unwrap().unwrap();
    assert!(stub.stub);
    assert_eq!(stub.labels, ["HE", "institute"]);
    assert_eq!(stub.properties["name"], "A");

    upsert_node(&mut g, &o, "HE", &obj(json!({"id": "A", "name": "Alpha"}))).unwrap();
    assert_eq!(g.stub_count(), 1);
    assert_eq!(g.node("HE", "A").unwrap().properties["name"], "Alpha");

    // replaying a stub write over a real node changes nothing
    let before = g.clone();
    g.apply(&writes[0]);
    assert_eq!(g, before);

    let export = g.export();
    assert_eq!(export.edges[0].direction, Direction::Double);
}

#[test]
fn role_and_label_errors() {
    let o = ranking();
    let mut g = KnowledgeGraph::new();
    let doc = obj(json!({"id": "a", "name": "a", "source": "x", "target": "y"}));
    assert_eq!(
        upsert_node(&mut g, &o, "mobility", &doc)
            .unwrap_err()
            .code(),
        "wrong_role"
    );
    assert_eq!(
        upsert_edge(&mut g, &o, "HE", &doc).unwrap_err().code(),
        "wrong_role"
    );
    assert_eq!(
        upsert_node(&mut g, &o, "nope", &doc).unwrap_err().code(),
        "unknown_label"
    );
    let err = upsert_edge(
        &mut g,
        &o,
        "mobility",
        &obj(json!({"id": "a", "name": "a"})),
    )
    .unwrap_err();
    assert_eq!(err.code(), "invalid_document");
    let err = upsert_node(&mut g, &o, "HE", &obj(json!({"id": "a", "tags": ["x"]}))).unwrap_err();
    assert_eq!(err.code(), "invalid_document");
    assert_eq!(g.node_count(), 0);

    assert_eq!(
        get_node(&g, &o, "nope", "a").unwrap_err().code(),
        "unknown_label"
    );
    assert_eq!(get_node(&g, &o, "HE", "a").unwrap(), None);
}

#[test]
fn empty_export() {
    let bytes = KnowledgeGraph::new().export().to_bytes();
    assert_eq!(bytes, br#"{"nodes":[],"edges":[],"labels":[]}"#);
}

#[test]
fn export_is_ordered_by_label_then_id() {
    let o = ranking();
    let mut g = KnowledgeGraph::new();
    for (label, id) in [
        ("institute", "b"),
        ("HE", "z"),
        ("HE", "a"),
        ("country", "DE"),
    ] {
        upsert_node(&mut g, &o, label, &obj(json!({"id": id, "name": id}))).unwrap();
    }
    let export = g.export();
    let keys: Vec<(&str, &str)> = export
        .nodes
        .iter()
        .map(|n| (n.label.as_str(), n.id.as_str()))
        .collect();
    assert_eq!(
        keys,
        [
            ("HE", "a"),
            ("HE", "z"),
            ("country", "DE"),
            ("institute", "b")
        ]
    );
    assert_eq!(export.labels, ["HE", "country", "institute"]);
}

#[test]
fn log_file_round_trip() {
    let o = ranking();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("graph.log");
    let mut g = KnowledgeGraph::new();
    {
        let (mut log, existing) = GraphLog::open(&path, crate::FsyncPolicy::Never).unwrap();
        assert!(existing.is_empty());
        let (_, w) = upsert_edge(
            &mut g,
            &o,
            "mobility",
            &obj(json!({"id": "m", "name": "m", "source": "a", "target": "b"})),
        )
        .unwrap();
        log.append(&w).unwrap();
        let (_, w) = upsert_node(
            &mut g,
            &o,
            "HE",
            &obj(json!({"id": "a", "name": "A", "rank": 1.25})),
        )
        .unwrap();
        log.append(&w).unwrap();
        assert_eq!(log.next_seq(), 5);
    }
    let text = std::fs::read_to_string(&path).unwrap();
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["seq"], 1);
    assert_eq!(first["kind"], "node_upsert");
    assert_eq!(first["payload"]["stub"], true);

    let (log, records) = GraphLog::open(&path, crate::FsyncPolicy::Never).unwrap();
    assert_eq!(log.next_seq(), 5);
    assert_eq!(records, read_log(&path).unwrap());
    assert_eq!(replay_log(&records).unwrap(), g);
}

#[test]
fn replay_rejects_out_of_order() {
    let w = GraphWrite::Node {
        label: "HE".into(),
        labels: vec!["HE".into()],
        properties: obj(json!({"id": "a", "name": "a"})),
        stub: false,
    };
    let records = [
        GraphLogRecord::from_write(2, &w),
        GraphLogRecord::from_write(2, &w),
    ];
    assert!(matches!(
        replay_log(&records),
        Err(LogError::OutOfOrder { .. })
    ));
}

#[derive(Debug, Clone)]
enum Op {
    Node {
        label: usize,
        id: u8,
        extra: Option<(u8, i32)>,
    },
    Edge {
        label: usize,
        id: u8,
        source: u8,
        target: u8,
        weight: f64,
    },
}

fn arb_op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0..3usize, 0..6u8, proptest::option::of((0..3u8, -5..5i32)))
            .prop_map(|(label, id, extra)| Op::Node { label, id, extra }),
        (0..2usize, 0..4u8, 0..6u8, 0..6u8, -1e6..1e6f64).prop_map(
            |(label, id, source, target, weight)| Op::Edge {
                label,
                id,
                source,
                target,
                weight
            }
        ),
    ]
}

fn run(g: &mut KnowledgeGraph, o: &Ontology, op: &Op) -> Vec<GraphWrite> {
    match op {
        Op::Node { label, id, extra } => {
            let mut doc = json!({"id": format!("n{id}"), "name": format!("node {id}")});
            if let Some((k, v)) = extra {
                doc[format!("p{k}")] = json!(v);
            }
            upsert_node(g, o, ["HE", "institute", "country"][*label], &obj(doc))
                .unwrap()
                .1
        }
        Op::Edge {
            label,
            id,
            source,
            target,
            weight,
        } => {
            let doc = json!({
                "id": format!("e{id}"), "name": "e",
                "source": format!("n{source}"), "target": format!("n{target}"), "weight": weight
            });
            upsert_edge(g, o, ["mobility", "partner"][*label], &obj(doc))
                .unwrap()
                .1
        }
    }
}

proptest! {
    #[test]
    fn replay_of_logged_writes_equals_live_graph(ops in prop::collection::vec(arb_op(), 0..60)) {
        let o = ranking();
        let mut live = KnowledgeGraph::new();
        let mut records = Vec::new();
        for op in &ops {
            for w in run(&mut live, &o, op) {
                records.push(GraphLogRecord::from_write(records.len() as u64 + 1, &w));
            }
        }
        // through text, as the file would
        let reparsed: Vec<GraphLogRecord> = records
            .iter()
            .map(|r| serde_json::from_str(&serde_json::to_string(r).unwrap()).unwrap())
            .collect();
        let replayed = replay_log(&reparsed).unwrap();
        prop_assert_eq!(&replayed, &live);
        prop_assert_eq!(replayed.export().to_bytes(), live.export().to_bytes());
    }

    #[test]
    fn writes_are_idempotent_and_graph_stays_sound(ops in prop::collection::vec(arb_op(), 0..40)) {
        let o = ranking();
        let mut g = KnowledgeGraph::new();
        for op in &ops {
            for w in run(&mut g, &o, op) {
                let once = g.clone();
                g.apply(&w);
                prop_assert_eq!(&g, &once);
            }
        }
        for (_, edge) in g.edges() {
            prop_assert!(g.contains_node(&edge.source));
            prop_assert!(g.contains_node(&edge.target));
        }
        for (key, node) in g.nodes() {
            prop_assert_eq!(&node.labels, &o.isa_closure(&key.label).unwrap());
        }
        let titles: Vec<&str> = o.titles().collect();
        for label in g.export().labels {
            prop_assert!(titles.contains(&label.as_str()));
        }
    }
}
