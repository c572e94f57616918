use serde_json::Value;

use crate::schema::{SchemaError, SchemaRegistry};

use super::Role;

/// Host prefix the bundled documents are published under.
pub const DEFAULT_SCHEMA_BASE: &str = "http://localhost:8000/schemas/";

pub const NODE_VALIDATOR_PATH: &str = "validators/node_validator.json";
pub const EDGE_VALIDATOR_PATH: &str = "validators/edge_validator.json";
pub const BASIC_DEFINITIONS_PATH: &str = "basic/basic_definitions.json";

const NODE_VALIDATOR_SRC: &str = include_str!("../../schemas/validators/node_validator.json");
const EDGE_VALIDATOR_SRC: &str = include_str!("../../schemas/validators/edge_validator.json");
const BASIC_DEFINITIONS_SRC: &str = include_str!("../../schemas/basic/basic_definitions.json");

/// One bundled document: where it is served and what it contains.
#[derive(Debug, Clone, PartialEq)]
pub struct BundledSchema {
    /// Path relative to the schema base, e.g. `validators/node_validator.json`.
    pub path: &'static str,
    pub uri: String,
    pub body: Value,
    /// The file exactly as shipped.
    pub source: &'static str,
}

/// The meta-schemas that validate descriptors, plus the shared definitions
/// descriptors reference.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaSchema {
    pub node_validator: BundledSchema,
    pub edge_validator: BundledSchema,
    pub basic_definitions: BundledSchema,
}

impl MetaSchema {
    /// The shipped documents under [`DEFAULT_SCHEMA_BASE`].
    pub fn bundled() -> Self {
        let load = |path: &'static str, source: &'static str| BundledSchema {
            path,
            uri: format!("{DEFAULT_SCHEMA_BASE}{path}"),
            body: serde_json::from_str(source).expect("bundled schema is valid JSON"),
            source,
        };
        Self {
            node_validator: load(NODE_VALIDATOR_PATH, NODE_VALIDATOR_SRC),
            edge_validator: load(EDGE_VALIDATOR_PATH, EDGE_VALIDATOR_SRC),
            basic_definitions: load(BASIC_DEFINITIONS_PATH, BASIC_DEFINITIONS_SRC),
        }
    }

    pub fn documents(&self) -> [&BundledSchema; 3] {
        [
            &self.node_validator,
            &self.edge_validator,
            &self.basic_definitions,
        ]
    }

    /// Looks a bundled document up by its path under the schema base.
    pub fn by_path(&self, path: &str) -> Option<&BundledSchema> {
        self.documents().into_iter().find(|d| d.path == path)
    }

    pub fn validator_for(&self, role: Role) -> &BundledSchema {
        match role {
            Role::Node => &self.node_validator,
            Role::Edge => &self.edge_validator,
        }
    }

    /// Registers all three documents.
    pub fn install(&self, registry: &mut SchemaRegistry) -> Result<(), SchemaError> {
        for doc in self.documents() {
            registry.register(&doc.uri, doc.body.clone())?;
        }
        Ok(())
    }

    /// A fresh registry holding only the bundled documents.
    pub fn registry(&self) -> SchemaRegistry {
        let mut registry = SchemaRegistry::new();
        self.install(&mut registry)
            .expect("bundled uris are absolute");
        registry
    }
}

impl Default for MetaSchema {
    fn default() -> Self {
        Self::bundled()
    }
}

/// Picks the descriptor role from a `$schema` value by path suffix, so any
/// host serving the validators is accepted. The trailing `#` is optional.
pub fn role_for_schema_uri(schema_uri: &str) -> Option<Role> {
    let trimmed = schema_uri.strip_suffix('#').unwrap_or(schema_uri);
    let matches = |path: &str| trimmed == path || trimmed.ends_with(&format!("/{path}"));
    if matches(NODE_VALIDATOR_PATH) {
        Some(Role::Node)
    } else if matches(EDGE_VALIDATOR_PATH) {
        Some(Role::Edge)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_documents_are_self_consistent() {
        let meta = MetaSchema::bundled();
        let registry = meta.registry();
        assert_eq!(registry.len(), 3);
        assert!(
            registry.unresolved_refs().is_empty(),
            "{:?}",
            registry.unresolved_refs()
        );
        for doc in meta.documents() {
            assert_eq!(doc.body["id"].as_str().unwrap(), format!("{}#", doc.uri));
        }
    }

    #[test]
    fn basic_definitions_shape() {
        let meta = MetaSchema::bundled();
        let registry = meta.registry();
        let id = format!("{}#/definitions/id", meta.basic_definitions.uri);
        let prop = format!(
            "{}#/definitions/default_property",
            meta.basic_definitions.uri
        );
        assert!(
            registry
                .validate(&id, &serde_json::json!("HU1"))
                .unwrap()
                .valid
        );
        assert!(
            !registry
                .validate(&id, &serde_json::json!(""))
                .unwrap()
                .valid
        );
        for ok in [
            serde_json::json!("x"),
            serde_json::json!(1.5),
            serde_json::json!(false),
        ] {
            assert!(registry.validate(&prop, &ok).unwrap().valid);
        }
        for bad in [
            serde_json::json!(null),
            serde_json::json!([]),
            serde_json::json!({}),
        ] {
            assert!(!registry.validate(&prop, &bad).unwrap().valid);
        }
    }

    #[test]
    fn role_selection_ignores_host() {
        assert_eq!(
            role_for_schema_uri("http://localhost:8000/schemas/validators/node_validator.json#"),
            Some(Role::Node)
        );
        assert_eq!(
            role_for_schema_uri("https://kg.example.org/v1/validators/edge_validator.json"),
            Some(Role::Edge)
        );
        assert_eq!(
            role_for_schema_uri("http://h/validators/my_node_validator.json#"),
            None
        );
        assert_eq!(
            role_for_schema_uri("http://json-schema.org/draft-04/schema#"),
            None
        );
    }
}
