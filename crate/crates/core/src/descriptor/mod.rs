//! Descriptors: JSON Schemas extended with graph keywords.
//!
//! Extension keywords:
//!
//! | keyword         | applies to | meaning                                   |
//! |-----------------|------------|-------------------------------------------|
//! | `graph_element` | all        | `"node"` or `"edge"`, mandatory           |
//! | `parents`       | nodes      | optional isa links to other node types    |
//! | `direction`     | edges      | `"single"` (directed) or `"double"`       |
//! | `source_label`  | edges      | node type of the source endpoint          |
//! | `target_label`  | edges      | node type of the target endpoint          |
//! | `settings`      | all        | list of `{function: attribute}` pairs     |
//!
//! On top of the meta-schema, `required` must name both `id` and `name`.

mod bulk;
mod meta;
mod settings;

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::schema::{SchemaError, SchemaRegistry, ValidationReport};

pub(crate) use bulk::file_name;
pub use bulk::{bulk_id, generate_bulk_descriptor};
pub use meta::{
    role_for_schema_uri, BundledSchema, MetaSchema, BASIC_DEFINITIONS_PATH, DEFAULT_SCHEMA_BASE,
    EDGE_VALIDATOR_PATH, NODE_VALIDATOR_PATH,
};
pub use settings::{validate_settings, KnownFunctions, Setting, SettingsWarning};

const EDGE_ONLY: [&str; 3] = ["direction", "source_label", "target_label"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Node,
    Edge,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Node => "node",
            Role::Edge => "edge",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Single,
    Double,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Single => "single",
            Direction::Double => "double",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A pointer at another descriptor: either its bare title (`"institute"`) or
/// a URI reference resolved against the referring descriptor's id
/// (`"./he.json#"`, `{"$ref": "./he.json#"}`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DescriptorRef {
    Title(String),
    Uri(String),
}

impl DescriptorRef {
    fn parse(value: &Value) -> Option<Self> {
        match value {
            Value::String(s) if s.is_empty() => None,
            Value::String(s) if s.contains(['/', '#']) || s.ends_with(".json") => {
                Some(Self::Uri(s.clone()))
            }
            Value::String(s) => Some(Self::Title(s.clone())),
            Value::Object(o) => o
                .get("$ref")
                .and_then(Value::as_str)
                .filter(|s| !s.is_empty())
                .map(|s| Self::Uri(s.to_string())),
            _ => None,
        }
    }
}

impl fmt::Display for DescriptorRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DescriptorRef::Title(t) => f.write_str(t),
            DescriptorRef::Uri(u) => write!(f, "<{u}>"),
        }
    }
}

/// Role-specific part of a descriptor.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Node {
        parents: Vec<DescriptorRef>,
    },
    Edge {
        direction: Direction,
        source_label: DescriptorRef,
        target_label: DescriptorRef,
    },
}

/// A validated descriptor. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    /// The `$schema` value as written.
    pub schema_uri: String,
    /// The `id` value as written.
    pub id: String,
    /// Graph label.
    pub title: String,
    pub shape: Shape,
    pub settings: Vec<Setting>,
    /// The original document.
    pub body: Value,
}

impl Descriptor {
    pub fn role(&self) -> Role {
        match self.shape {
            Shape::Node { .. } => Role::Node,
            Shape::Edge { .. } => Role::Edge,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DescriptorError {
    #[error("descriptor must be a JSON object")]
    NotAnObject,
    #[error("descriptor has no string $schema member")]
    MissingSchema,
    #[error("$schema {0:?} is neither node_validator.json nor edge_validator.json")]
    UnknownMetaSchema(String),
    #[error("graph_element is mandatory")]
    MissingGraphElement,
    #[error(
        "graph_element {declared:?} contradicts $schema, which selects the {schema_role} validator"
    )]
    RoleMismatch { declared: String, schema_role: Role },
    #[error("{keyword} is only allowed on edge descriptors")]
    EdgeKeywordOnNode { keyword: &'static str },
    #[error("parents is only allowed on node descriptors")]
    ParentsOnEdge,
    #[error("descriptor does not satisfy the {role} meta-schema: {report}")]
    MetaSchema {
        role: Role,
        report: ValidationReport,
    },
    #[error("required must contain {missing:?}")]
    RequiredRestriction { missing: &'static str },
    #[error("id {id:?} must be an absolute URI ending in a file name")]
    InvalidId { id: String },
    #[error("{keyword} contains an invalid descriptor reference")]
    InvalidReference { keyword: &'static str },
    #[error("malformed settings: {0}")]
    SettingsShape(String),
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

impl DescriptorError {
    /// Stable machine token.
    pub fn code(&self) -> &'static str {
        match self {
            Self::NotAnObject => "not_an_object",
            Self::MissingSchema => "missing_schema",
            Self::UnknownMetaSchema(_) => "unknown_meta_schema",
            Self::MissingGraphElement => "missing_graph_element",
            Self::RoleMismatch { .. } => "role_mismatch",
            Self::EdgeKeywordOnNode { .. } => "edge_keyword_on_node",
            Self::ParentsOnEdge => "parents_on_edge",
            Self::MetaSchema { .. } => "meta_schema_violation",
            Self::RequiredRestriction { .. } => "required_restriction",
            Self::InvalidId { .. } => "invalid_id",
            Self::InvalidReference { .. } => "invalid_reference",
            Self::SettingsShape(_) => "settings_shape",
            Self::Schema(_) => "schema_error",
        }
    }

    pub fn report(&self) -> Option<&ValidationReport> {
        match self {
            Self::MetaSchema { report, .. } => Some(report),
            _ => None,
        }
    }
}

/// Checks a candidate descriptor and parses it.
///
/// Order: role selection from `$schema`, the graph keywords that decide role
/// consistency, the selected meta-schema, then the `required` restriction and
/// reference/settings parsing. References are only checked for shape here;
/// resolving them needs the owning project.
pub fn validate_descriptor(
    meta: &MetaSchema,
    registry: &SchemaRegistry,
    candidate: &Value,
) -> Result<Descriptor, DescriptorError> {
    let doc = candidate.as_object().ok_or(DescriptorError::NotAnObject)?;
    let schema_uri = doc
        .get("$schema")
        .and_then(Value::as_str)
        .ok_or(DescriptorError::MissingSchema)?;
    let role = role_for_schema_uri(schema_uri)
        .ok_or_else(|| DescriptorError::UnknownMetaSchema(schema_uri.to_string()))?;

    let declared = doc
        .get("graph_element")
        .ok_or(DescriptorError::MissingGraphElement)?;
    let other = match role {
        Role::Node => Role::Edge,
        Role::Edge => Role::Node,
    };
    if declared.as_str() == Some(other.as_str()) {
        return Err(DescriptorError::RoleMismatch {
            declared: other.as_str().to_string(),
            schema_role: role,
        });
    }
    match role {
        Role::Node => {
            if let Some(keyword) = EDGE_ONLY.into_iter().find(|k| doc.contains_key(*k)) {
                return Err(DescriptorError::EdgeKeywordOnNode { keyword });
            }
        }
        Role::Edge => {
            if doc.contains_key("parents") {
                return Err(DescriptorError::ParentsOnEdge);
            }
        }
    }

    let report = registry.validate(&meta.validator_for(role).uri, candidate)?;
    if !report.valid {
        return Err(DescriptorError::MetaSchema { role, report });
    }

    let required: Vec<&str> = doc["required"]
        .as_array()
        .map(|r| r.iter().filter_map(Value::as_str).collect())
        .unwrap_or_default();
    for missing in ["id", "name"] {
        if !required.contains(&missing) {
            return Err(DescriptorError::RequiredRestriction { missing });
        }
    }

    let id = doc["id"].as_str().unwrap_or_default().to_string();
    if url::Url::parse(&id).is_err() || file_name(&id).is_empty() {
        return Err(DescriptorError::InvalidId { id });
    }

    let shape = match role {
        Role::Node => Shape::Node {
            parents: parse_refs(doc, "parents")?,
        },
        Role::Edge => Shape::Edge {
            direction: match doc["direction"].as_str() {
                Some("double") => Direction::Double,
                _ => Direction::Single,
            },
            source_label: parse_ref(doc, "source_label")?,
            target_label: parse_ref(doc, "target_label")?,
        },
    };
    let settings =
        settings::parse_settings(doc.get("settings")).map_err(DescriptorError::SettingsShape)?;

    Ok(Descriptor {
        schema_uri: schema_uri.to_string(),
        id,
        title: doc["title"].as_str().unwrap_or_default().to_string(),
        shape,
        settings,
        body: candidate.clone(),
    })
}

fn parse_ref(
    doc: &Map<String, Value>,
    keyword: &'static str,
) -> Result<DescriptorRef, DescriptorError> {
    doc.get(keyword)
        .and_then(DescriptorRef::parse)
        .ok_or(DescriptorError::InvalidReference { keyword })
}

fn parse_refs(
    doc: &Map<String, Value>,
    keyword: &'static str,
) -> Result<Vec<DescriptorRef>, DescriptorError> {
    match doc.get(keyword) {
        None => Ok(Vec::new()),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| DescriptorRef::parse(v).ok_or(DescriptorError::InvalidReference { keyword }))
            .collect(),
        Some(_) => Err(DescriptorError::InvalidReference { keyword }),
    }
}
