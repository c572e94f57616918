//! Per-project descriptor store: concepts (node descriptors), roles (edge
//! descriptors) and the isa hierarchy declared through `parents`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;
use url::Url;

use crate::descriptor::{
    generate_bulk_descriptor, validate_descriptor, validate_settings, Descriptor, DescriptorError,
    DescriptorRef, Direction, KnownFunctions, MetaSchema, Role, SettingsWarning, Shape,
};
use crate::schema::{SchemaError, SchemaRegistry, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OntologyError {
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
    #[error("a descriptor titled {0:?} already exists")]
    DuplicateTitle(String),
    #[error("schema id {0} is already in use")]
    DuplicateId(String),
    #[error("{keyword} reference {reference} does not match any registered descriptor")]
    DanglingReference {
        keyword: &'static str,
        reference: String,
    },
    #[error("{keyword} must reference a node descriptor, but {title:?} is an edge descriptor")]
    NotANode {
        keyword: &'static str,
        title: String,
    },
    #[error("registering {title:?} would make it its own ancestor")]
    IsaCycle { title: String },
    #[error("descriptor contains an unresolvable $ref {reference:?}: {error}")]
    UnresolvedSchemaRef {
        reference: String,
        error: SchemaError,
    },
    #[error("no descriptor titled {0:?}")]
    UnknownTitle(String),
    #[error("{0:?} is an edge descriptor; isa applies to node descriptors only")]
    NotANodeDescriptor(String),
}

impl OntologyError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Descriptor(e) => e.code(),
            Self::DuplicateTitle(_) => "duplicate_title",
            Self::DuplicateId(_) => "duplicate_id",
            Self::DanglingReference { .. } => "dangling_reference",
            Self::NotANode { .. } => "not_a_node",
            Self::IsaCycle { .. } => "isa_cycle",
            Self::UnresolvedSchemaRef { .. } => "unresolved_ref",
            Self::UnknownTitle(_) => "unknown_descriptor",
            Self::NotANodeDescriptor(_) => "not_a_node_descriptor",
        }
    }
}

/// Descriptor references after resolution to titles.
#[derive(Debug, Clone, PartialEq)]
pub enum Resolved {
    Node {
        parents: Vec<String>,
        /// `isa_closure` of this title, fixed at registration.
        closure: Vec<String>,
    },
    Edge {
        direction: Direction,
        source: String,
        target: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub descriptor: Descriptor,
    pub bulk: Value,
    pub bulk_uri: String,
    pub resolved: Resolved,
    pub warnings: Vec<SettingsWarning>,
}

/// Result of a successful registration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Registration {
    pub title: String,
    pub role: Role,
    pub bulk_title: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<SettingsWarning>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RoleLink {
    pub label: String,
    pub source: String,
    pub target: String,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IsaLink {
    pub child: String,
    pub parent: String,
}

/// Schema-level graph of a project.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachabilityGraph {
    pub concepts: BTreeSet<String>,
    pub roles: BTreeSet<RoleLink>,
    #[serde(rename = "isa")]
    pub isa_links: BTreeSet<IsaLink>,
}

#[derive(Debug, Clone)]
pub struct Ontology {
    meta: MetaSchema,
    known: KnownFunctions,
    registry: SchemaRegistry,
    entries: BTreeMap<String, Entry>,
    order: Vec<String>,
    by_uri: BTreeMap<String, String>,
}

fn normalized(uri: &str) -> Option<String> {
    let mut url = Url::parse(uri).ok()?;
    url.set_fragment(None);
    Some(url.to_string())
}

impl Default for Ontology {
    fn default() -> Self {
        Self::new(MetaSchema::bundled(), KnownFunctions::default())
    }
}

impl Ontology {
    pub fn new(meta: MetaSchema, known: KnownFunctions) -> Self {
        let registry = meta.registry();
        Self {
            meta,
            known,
            registry,
            entries: BTreeMap::new(),
            order: Vec::new(),
            by_uri: BTreeMap::new(),
        }
    }

    pub fn registry(&self) -> &SchemaRegistry {
        &self.registry
    }

    pub fn meta(&self) -> &MetaSchema {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, title: &str) -> Option<&Entry> {
        self.entries.get(title)
    }

    pub fn descriptor(&self, title: &str) -> Option<&Descriptor> {
        self.entries.get(title).map(|e| &e.descriptor)
    }

    pub fn role(&self, title: &str) -> Option<Role> {
        self.descriptor(title).map(Descriptor::role)
    }

    /// Titles in registration order.
    pub fn titles(&self) -> impl Iterator<Item = &str> {
        self.order.iter().map(String::as_str)
    }

    /// Validates, resolves and stores `candidate`, generating its bulk variant.
    /// Nothing is stored when any step fails.
    pub fn register_descriptor(
        &mut self,
        candidate: &Value,
    ) -> Result<Registration, OntologyError> {
        let descriptor = validate_descriptor(&self.meta, &self.registry, candidate)?;
        if self.entries.contains_key(&descriptor.title) {
            return Err(OntologyError::DuplicateTitle(descriptor.title));
        }
        let bulk = generate_bulk_descriptor(&descriptor);
        let bulk_uri = bulk["id"].as_str().unwrap_or_default().to_string();
        for uri in [&descriptor.id, &bulk_uri] {
            if self.registry.contains(uri) {
                return Err(OntologyError::DuplicateId(uri.clone()));
            }
        }
        let own_key = normalized(&descriptor.id).ok_or_else(|| DescriptorError::InvalidId {
            id: descriptor.id.clone(),
        })?;

        let resolved = match &descriptor.shape {
            Shape::Node { parents } => {
                let mut titles = Vec::new();
                for parent in parents {
                    let title = self.resolve_node_ref(&descriptor, &own_key, parent, "parents")?;
                    if title == descriptor.title {
                        return Err(OntologyError::IsaCycle { title });
                    }
                    if self.ancestors(&title).contains(&descriptor.title) {
                        return Err(OntologyError::IsaCycle {
                            title: descriptor.title.clone(),
                        });
                    }
                    if !titles.contains(&title) {
                        titles.push(title);
                    }
                }
                let closure = self.closure_with(&descriptor.title, &titles);
                Resolved::Node {
                    parents: titles,
                    closure,
                }
            }
            Shape::Edge {
                direction,
                source_label,
                target_label,
            } => Resolved::Edge {
                direction: *direction,
                source: self.resolve_node_ref(
                    &descriptor,
                    &own_key,
                    source_label,
                    "source_label",
                )?,
                target: self.resolve_node_ref(
                    &descriptor,
                    &own_key,
                    target_label,
                    "target_label",
                )?,
            },
        };

        self.registry
            .register(&descriptor.id, descriptor.body.clone())
            .map_err(DescriptorError::from)?;
        if let Some((_, reference, error)) = self
            .registry
            .unresolved_refs_in(&descriptor.id)
            .into_iter()
            .next()
        {
            self.registry.unregister(&descriptor.id);
            return Err(OntologyError::UnresolvedSchemaRef { reference, error });
        }
        self.registry
            .register(&bulk_uri, bulk.clone())
            .map_err(DescriptorError::from)?;

        let warnings = validate_settings(&descriptor, &self.known);
        let registration = Registration {
            title: descriptor.title.clone(),
            role: descriptor.role(),
            bulk_title: bulk["title"].as_str().unwrap_or_default().to_string(),
            warnings: warnings.clone(),
        };
        self.by_uri.insert(own_key, descriptor.title.clone());
        self.order.push(descriptor.title.clone());
        self.entries.insert(
            descriptor.title.clone(),
            Entry {
                descriptor,
                bulk,
                bulk_uri,
                resolved,
                warnings,
            },
        );
        Ok(registration)
    }

    fn resolve_node_ref(
        &self,
        descriptor: &Descriptor,
        own_key: &str,
        reference: &DescriptorRef,
        keyword: &'static str,
    ) -> Result<String, OntologyError> {
        let dangling = || OntologyError::DanglingReference {
            keyword,
            reference: reference.to_string(),
        };
        let title = match reference {
            DescriptorRef::Title(t) if *t == descriptor.title => return Ok(t.clone()),
            DescriptorRef::Title(t) => t.clone(),
            DescriptorRef::Uri(u) => {
                let base = Url::parse(&descriptor.id).map_err(|_| dangling())?;
                let mut target = base.join(u).map_err(|_| dangling())?;
                target.set_fragment(None);
                if target.as_str() == own_key {
                    return Ok(descriptor.title.clone());
                }
                self.by_uri
                    .get(target.as_str())
                    .cloned()
                    .ok_or_else(dangling)?
            }
        };
        match self.role(&title) {
            None => Err(dangling()),
            Some(Role::Edge) => Err(OntologyError::NotANode { keyword, title }),
            Some(Role::Node) => Ok(title),
        }
    }

    fn parents_of(&self, title: &str) -> &[String] {
        match self.entries.get(title).map(|e| &e.resolved) {
            Some(Resolved::Node { parents, .. }) => parents,
            _ => &[],
        }
    }

    fn ancestors(&self, title: &str) -> Vec<String> {
        match self.entries.get(title).map(|e| &e.resolved) {
            Some(Resolved::Node { closure, .. }) => closure.clone(),
            _ => Vec::new(),
        }
    }

    /// Breadth-first from `start`; each node's parents are visited in
    /// lexicographic order.
    fn closure_with(&self, start: &str, start_parents: &[String]) -> Vec<String> {
        let mut seen = BTreeSet::from([start.to_string()]);
        let mut out = vec![start.to_string()];
        let mut queue = VecDeque::new();
        let mut first: Vec<&String> = start_parents.iter().collect();
        first.sort();
        queue.extend(first);
        while let Some(t) = queue.pop_front() {
            if !seen.insert(t.clone()) {
                continue;
            }
            out.push(t.clone());
            let mut next: Vec<&String> = self.parents_of(t).iter().collect();
            next.sort();
            queue.extend(next);
        }
        out
    }

    /// `title` followed by all of its transitive ancestors, breadth-first with
    /// lexicographic tie-breaking.
    pub fn isa_closure(&self, title: &str) -> Result<Vec<String>, OntologyError> {
        match self.entries.get(title).map(|e| &e.resolved) {
            None => Err(OntologyError::UnknownTitle(title.to_string())),
            Some(Resolved::Edge { .. }) => {
                Err(OntologyError::NotANodeDescriptor(title.to_string()))
            }
            Some(Resolved::Node { closure, .. }) => Ok(closure.clone()),
        }
    }

    pub fn reachability_graph(&self) -> ReachabilityGraph {
        let mut graph = ReachabilityGraph::default();
        for (title, entry) in &self.entries {
            match &entry.resolved {
                Resolved::Node { parents, .. } => {
                    graph.concepts.insert(title.clone());
                    for parent in parents {
                        graph.isa_links.insert(IsaLink {
                            child: title.clone(),
                            parent: parent.clone(),
                        });
                    }
                }
                Resolved::Edge {
                    direction,
                    source,
                    target,
                } => {
                    graph.roles.insert(RoleLink {
                        label: title.clone(),
                        source: source.clone(),
                        target: target.clone(),
                        direction: *direction,
                    });
                }
            }
        }
        graph
    }

    /// Validates one data document against the descriptor titled `title`.
    pub fn validate_instance(
        &self,
        title: &str,
        instance: &Value,
    ) -> Result<ValidationReport, OntologyError> {
        let entry = self
            .entries
            .get(title)
            .ok_or_else(|| OntologyError::UnknownTitle(title.to_string()))?;
        self.registry
            .validate(&entry.descriptor.id, instance)
            .map_err(|error| OntologyError::UnresolvedSchemaRef {
                reference: entry.descriptor.id.clone(),
                error,
            })
    }

    /// Validates an array of documents against the generated bulk descriptor.
    pub fn validate_bulk(
        &self,
        title: &str,
        instances: &Value,
    ) -> Result<ValidationReport, OntologyError> {
        let entry = self
            .entries
            .get(title)
            .ok_or_else(|| OntologyError::UnknownTitle(title.to_string()))?;
        self.registry
            .validate(&entry.bulk_uri, instances)
            .map_err(|error| OntologyError::UnresolvedSchemaRef {
                reference: entry.bulk_uri.clone(),
                error,
            })
    }
}
