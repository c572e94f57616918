//! Embedded labelled-property graph.
//!
//! Nodes are keyed by `(primary label, id)` and carry the primary label
//! followed by every inherited isa label. Edges are keyed by `(label, id)`
//! and carry exactly one label. All writes are upserts: absent keys create,
//! present keys merge properties with incoming values winning.
//!
//! The graph itself knows nothing about descriptors. [`upsert_node`] and
//! [`upsert_edge`] consult the [`Ontology`] and turn a data document into
//! [`GraphWrite`]s; [`KnowledgeGraph::apply`] is the only mutation path, which
//! makes log replay a plain fold.

mod log;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::descriptor::{Direction, Role};
use crate::ontology::{Ontology, Resolved};
use crate::schema::{escape_token, ValidationError};

pub use log::{read_log, replay_log, GraphLog, GraphLogRecord, LogError, RecordKind};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ElementKey {
    pub label: String,
    pub id: String,
}

impl ElementKey {
    pub fn new(label: impl Into<String>, id: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            id: id.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    /// Primary label first, then inherited labels in isa-closure order.
    pub labels: Vec<String>,
    pub properties: Map<String, Value>,
    /// Auto-created as an edge endpoint and not yet uploaded itself.
    pub stub: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub source: ElementKey,
    pub target: ElementKey,
    pub undirected: bool,
    pub properties: Map<String, Value>,
}

/// A single state transition of the graph.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphWrite {
    Node {
        label: String,
        labels: Vec<String>,
        properties: Map<String, Value>,
        stub: bool,
    },
    Edge {
        label: String,
        source: ElementKey,
        target: ElementKey,
        undirected: bool,
        properties: Map<String, Value>,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("no descriptor titled {0:?}")]
    UnknownLabel(String),
    #[error("{label:?} is not a {expected} descriptor")]
    WrongRole { label: String, expected: Role },
    #[error("data document is invalid: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Contract(Vec<ValidationError>),
}

impl GraphError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::UnknownLabel(_) => "unknown_label",
            Self::WrongRole { .. } => "wrong_role",
            Self::Contract(_) => "invalid_document",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KnowledgeGraph {
    nodes: BTreeMap<ElementKey, Node>,
    edges: BTreeMap<ElementKey, Edge>,
}

fn merge(into: &mut Map<String, Value>, from: Map<String, Value>) {
    for (k, v) in from {
        into.insert(k, v);
    }
}

fn id_of(properties: &Map<String, Value>) -> String {
    properties
        .get("id")
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string()
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Applies one write. Idempotent: applying the same write twice in a row
    /// leaves the same state as applying it once.
    pub fn apply(&mut self, write: &GraphWrite) {
        self.apply_owned(write.clone());
    }

    /// [`apply`](Self::apply) for a write the caller no longer needs.
    pub fn apply_owned(&mut self, write: GraphWrite) {
        match write {
            GraphWrite::Node {
                label,
                labels,
                properties,
                stub,
            } => {
                let key = ElementKey::new(label, id_of(&properties));
                match self.nodes.get_mut(&key) {
                    // a stub never overwrites anything that already exists
                    Some(_) if stub => {}
                    Some(node) => {
                        merge(&mut node.properties, properties);
                        node.labels = labels;
                        node.stub = false;
                    }
                    None => {
                        self.nodes.insert(
                            key,
                            Node {
                                labels,
                                properties,
                                stub,
                            },
                        );
                    }
                }
            }
            GraphWrite::Edge {
                label,
                source,
                target,
                undirected,
                properties,
            } => {
                let key = ElementKey::new(label, id_of(&properties));
                match self.edges.get_mut(&key) {
                    Some(edge) => {
                        merge(&mut edge.properties, properties);
                        edge.source = source;
                        edge.target = target;
                        edge.undirected = undirected;
                    }
                    None => {
                        self.edges.insert(
                            key,
                            Edge {
                                source,
                                target,
                                undirected,
                                properties,
                            },
                        );
                    }
                }
            }
        }
    }

    pub fn node(&self, label: &str, id: &str) -> Option<&Node> {
        self.nodes.get(&ElementKey::new(label, id))
    }

    pub fn edge(&self, label: &str, id: &str) -> Option<&Edge> {
        self.edges.get(&ElementKey::new(label, id))
    }

    pub fn contains_node(&self, key: &ElementKey) -> bool {
        self.nodes.contains_key(key)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&ElementKey, &Node)> {
        self.nodes.iter()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&ElementKey, &Edge)> {
        self.edges.iter()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn stub_count(&self) -> usize {
        self.nodes.values().filter(|n| n.stub).count()
    }

    /// Deterministic snapshot ordered by `(label, id)`.
    pub fn export(&self) -> GraphExport {
        let mut labels = BTreeSet::new();
        let nodes = self
            .nodes
            .iter()
            .map(|(key, node)| {
                labels.extend(node.labels.iter().cloned());
                NodeView::new(key, node)
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|(key, edge)| {
                labels.insert(key.label.clone());
                EdgeView {
                    label: key.label.clone(),
                    id: key.id.clone(),
                    source: edge.source.clone(),
                    target: edge.target.clone(),
                    direction: if edge.undirected {
                        Direction::Double
                    } else {
                        Direction::Single
                    },
                    properties: edge.properties.clone(),
                }
            })
            .collect();
        GraphExport {
            nodes,
            edges,
            labels: labels.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeView {
    pub label: String,
    pub id: String,
    pub labels: Vec<String>,
    pub stub: bool,
    pub properties: Map<String, Value>,
}

impl NodeView {
    fn new(key: &ElementKey, node: &Node) -> Self {
        Self {
            label: key.label.clone(),
            id: key.id.clone(),
            labels: node.labels.clone(),
            stub: node.stub,
            properties: node.properties.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeView {
    pub label: String,
    pub id: String,
    pub source: ElementKey,
    pub target: ElementKey,
    pub direction: Direction,
    pub properties: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphExport {
    pub nodes: Vec<NodeView>,
    pub edges: Vec<EdgeView>,
    pub labels: Vec<String>,
}

impl GraphExport {
    /// Compact JSON; member order is fixed, so equal graphs give equal bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("export serializes")
    }
}

fn is_scalar(v: &Value) -> bool {
    matches!(v, Value::String(_) | Value::Number(_) | Value::Bool(_))
}

/// Data-document rules the store relies on beyond the descriptor schema:
/// an object whose members are all scalars, with a non-empty string `id`;
/// edges additionally need non-empty string `source` and `target`.
pub fn check_document(
    ontology: &Ontology,
    label: &str,
    doc: &Value,
) -> Result<Vec<ValidationError>, GraphError> {
    let role = ontology
        .role(label)
        .ok_or_else(|| GraphError::UnknownLabel(label.to_string()))?;
    match doc.as_object() {
        Some(members) => Ok(check_members(role, members)),
        None => Ok(vec![ValidationError::new(
            "",
            "type",
            "data document must be an object",
        )]),
    }
}

fn check_members(role: Role, members: &Map<String, Value>) -> Vec<ValidationError> {
    let mut errors = Vec::new();
    for (key, value) in members {
        if !is_scalar(value) {
            errors.push(ValidationError::new(
                format!("/{}", escape_token(key)),
                "scalar",
                "property values must be strings, numbers or booleans",
            ));
        }
    }
    let mut need_string = |member: &str, keyword: &str| match members.get(member) {
        Some(Value::String(s)) if !s.is_empty() => {}
        Some(_) => errors.push(ValidationError::new(
            format!("/{member}"),
            keyword,
            format!("{member} must be a non-empty string"),
        )),
        None => errors.push(ValidationError::new(
            "",
            keyword,
            format!("missing required property {member:?}"),
        )),
    };
    need_string("id", "id");
    if role == Role::Edge {
        need_string("source", "endpoint");
        need_string("target", "endpoint");
    }
    errors
}

fn expect_role<'o>(
    ontology: &'o Ontology,
    label: &str,
    expected: Role,
) -> Result<&'o Resolved, GraphError> {
    let entry = ontology
        .entry(label)
        .ok_or_else(|| GraphError::UnknownLabel(label.to_string()))?;
    if entry.descriptor.role() != expected {
        return Err(GraphError::WrongRole {
            label: label.to_string(),
            expected,
        });
    }
    Ok(&entry.resolved)
}

fn contract(role: Role, doc: &Map<String, Value>) -> Result<(), GraphError> {
    let errors = check_members(role, doc);
    if errors.is_empty() {
        Ok(())
    } else {
        Err(GraphError::Contract(errors))
    }
}

fn node_labels(resolved: &Resolved) -> Vec<String> {
    match resolved {
        Resolved::Node { closure, .. } => closure.clone(),
        Resolved::Edge { .. } => Vec::new(),
    }
}

/// The writes that create or merge the node `(label, doc.id)`.
pub fn plan_node(
    ontology: &Ontology,
    label: &str,
    doc: Map<String, Value>,
) -> Result<(ElementKey, Vec<GraphWrite>), GraphError> {
    let resolved = expect_role(ontology, label, Role::Node)?;
    contract(Role::Node, &doc)?;
    let key = ElementKey::new(label, id_of(&doc));
    let write = GraphWrite::Node {
        label: label.to_string(),
        labels: node_labels(resolved),
        properties: doc,
        stub: false,
    };
    Ok((key, vec![write]))
}

/// The writes that create or merge the edge `(label, doc.id)`, preceded by
/// stub nodes for endpoints missing from `graph`.
pub fn plan_edge(
    graph: &KnowledgeGraph,
    ontology: &Ontology,
    label: &str,
    mut doc: Map<String, Value>,
) -> Result<(ElementKey, Vec<GraphWrite>), GraphError> {
    let Resolved::Edge {
        direction,
        source,
        target,
    } = expect_role(ontology, label, Role::Edge)?
    else {
        unreachable!("edge role checked")
    };
    contract(Role::Edge, &doc)?;

    let mut endpoint = |member: &str, endpoint_label: &str| match doc.remove(member) {
        Some(Value::String(id)) => ElementKey::new(endpoint_label, id),
        _ => unreachable!("contract requires string endpoints"),
    };
    let source_key = endpoint("source", source);
    let target_key = endpoint("target", target);

    let mut writes = Vec::with_capacity(3);
    let loop_edge = source_key == target_key;
    for key in [&source_key, &target_key]
        .into_iter()
        .take(if loop_edge { 1 } else { 2 })
    {
        if !graph.contains_node(key) {
            let labels = match ontology.entry(&key.label) {
                Some(entry) => node_labels(&entry.resolved),
                None => vec![key.label.clone()],
            };
            let mut properties = Map::new();
            properties.insert("id".into(), Value::String(key.id.clone()));
            properties.insert("name".into(), Value::String(key.id.clone()));
            writes.push(GraphWrite::Node {
                label: key.label.clone(),
                labels,
                properties,
                stub: true,
            });
        }
    }

    let key = ElementKey::new(label, id_of(&doc));
    writes.push(GraphWrite::Edge {
        label: label.to_string(),
        source: source_key,
        target: target_key,
        undirected: *direction == Direction::Double,
        properties: doc,
    });
    Ok((key, writes))
}

/// Creates or merges the node `(label, doc.id)`. Returns its key and the
/// writes that were applied.
pub fn upsert_node(
    graph: &mut KnowledgeGraph,
    ontology: &Ontology,
    label: &str,
    doc: &Map<String, Value>,
) -> Result<(ElementKey, Vec<GraphWrite>), GraphError> {
    let planned = plan_node(ontology, label, doc.clone())?;
    planned.1.iter().for_each(|w| graph.apply(w));
    Ok(planned)
}

/// Creates or merges the edge `(label, doc.id)`, first creating stub nodes
/// for endpoints that do not exist yet.
pub fn upsert_edge(
    graph: &mut KnowledgeGraph,
    ontology: &Ontology,
    label: &str,
    doc: &Map<String, Value>,
) -> Result<(ElementKey, Vec<GraphWrite>), GraphError> {
    let planned = plan_edge(graph, ontology, label, doc.clone())?;
    planned.1.iter().for_each(|w| graph.apply(w));
    Ok(planned)
}

/// The node `(label, id)` with its labels. `Err` for an unknown label is
/// distinct from `Ok(None)` for an unknown id.
pub fn get_node(
    graph: &KnowledgeGraph,
    ontology: &Ontology,
    label: &str,
    id: &str,
) -> Result<Option<NodeView>, GraphError> {
    expect_role(ontology, label, Role::Node)?;
    let key = ElementKey::new(label, id);
    Ok(graph.nodes.get(&key).map(|n| NodeView::new(&key, n)))
}

#[cfg(test)]
mod tests;
