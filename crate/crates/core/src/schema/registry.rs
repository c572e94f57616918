use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};
use std::path::Path;
use std::sync::Arc;

use percent_encoding::percent_decode_str;
use serde_json::Value;
use thiserror::Error;
use url::Url;

use super::pointer::resolve_pointer;
use super::report::ValidationReport;
use super::validate::Evaluator;

/// Longest chain of `$ref` hops followed without consuming any instance
/// structure before resolution gives up.
pub const MAX_REF_DEPTH: usize = 64;

/// Problems with schemas themselves, as opposed to instance invalidity.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemaError {
    #[error("malformed schema uri {uri:?}: {reason}")]
    MalformedUri { uri: String, reason: String },
    #[error("schema body for {uri} must be a JSON object")]
    NotAnObject { uri: String },
    #[error("no schema registered at {uri}")]
    UnknownDocument { uri: String },
    #[error("{uri} has no member at fragment {fragment:?}")]
    MissingFragment { uri: String, fragment: String },
    #[error(
        "unsupported fragment {fragment:?} in {reference}; only JSON Pointer fragments are allowed"
    )]
    UnsupportedFragment { reference: String, fragment: String },
    #[error("$ref cycle detected: {}", chain.join(" -> "))]
    RefCycle { chain: Vec<String> },
    #[error("$ref chain longer than {MAX_REF_DEPTH} hops starting at {start}")]
    RefDepthExceeded { start: String },
    #[error("invalid value for keyword {keyword:?} at {schema_path}: {reason}")]
    InvalidKeyword {
        keyword: String,
        schema_path: String,
        reason: String,
    },
    #[error("failed to load schema file {path}: {reason}")]
    Load { path: String, reason: String },
}

/// A registered schema: its absolute identifier and JSON body.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaDocument {
    pub uri: String,
    pub body: Value,
}

/// Local-only store of schema documents, keyed by absolute URI without fragment.
///
/// Registration is a setup-phase activity; once built, a registry is only read
/// and can be shared across threads for concurrent validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SchemaRegistry {
    documents: BTreeMap<Arc<str>, SchemaDocument>,
    /// Every `$ref` that currently resolves, by referencing document and ref
    /// text. Rebuilt whenever the document set changes.
    refs: HashMap<Arc<str>, HashMap<String, RefTarget>>,
    /// Document uris, with and without an empty fragment, as validation roots.
    roots: HashMap<String, RefTarget>,
}

/// A resolved `$ref`: the containing document, the target value and the
/// absolute target URI used for cycle detection.
#[derive(Debug, Clone)]
pub(crate) struct Hop<'s> {
    pub doc: Arc<str>,
    pub value: &'s Value,
    pub label: Arc<str>,
}

#[derive(Debug, Clone, PartialEq)]
struct RefTarget {
    /// Key of the target document.
    doc: Arc<str>,
    /// Decoded JSON Pointer into it.
    pointer: String,
    /// Absolute target uri including fragment, for cycle detection.
    label: Arc<str>,
}

/// Parses `uri` as absolute and drops its fragment.
pub(crate) fn document_key(uri: &str) -> Result<Url, SchemaError> {
    if uri.trim().is_empty() {
        return Err(SchemaError::MalformedUri {
            uri: uri.to_string(),
            reason: "empty identifier".into(),
        });
    }
    let mut url = Url::parse(uri).map_err(|e| SchemaError::MalformedUri {
        uri: uri.to_string(),
        reason: e.to_string(),
    })?;
    url.set_fragment(None);
    Ok(url)
}

impl SchemaRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces the document at `uri`.
    pub fn register(&mut self, uri: &str, body: Value) -> Result<(), SchemaError> {
        let key = document_key(uri)?;
        if !body.is_object() {
            return Err(SchemaError::NotAnObject {
                uri: key.to_string(),
            });
        }
        let uri = key.to_string();
        self.documents
            .insert(Arc::from(uri.as_str()), SchemaDocument { uri, body });
        self.rebuild_refs();
        Ok(())
    }

    /// Removes a document, returning it if it was present.
    pub fn unregister(&mut self, uri: &str) -> Option<SchemaDocument> {
        let key = document_key(uri).ok()?;
        let removed = self.documents.remove(key.as_str());
        if removed.is_some() {
            self.rebuild_refs();
        }
        removed
    }

    fn target(&self, base: &Url, reference: &str) -> Option<RefTarget> {
        let (url, _) = self.resolve(base, reference).ok()?;
        let mut key = url.clone();
        key.set_fragment(None);
        let (doc, _) = self.documents.get_key_value(key.as_str())?;
        let pointer = percent_decode_str(url.fragment().unwrap_or(""))
            .decode_utf8()
            .ok()?
            .into_owned();
        Some(RefTarget {
            doc: doc.clone(),
            pointer,
            label: Arc::from(url.as_str()),
        })
    }

    fn rebuild_refs(&mut self) {
        let mut refs: HashMap<Arc<str>, HashMap<String, RefTarget>> = HashMap::new();
        let mut roots = HashMap::new();
        for key in self.documents.keys() {
            let Ok(base) = Url::parse(key) else { continue };
            for root in [key.to_string(), format!("{key}#")] {
                if let Some(t) = self.target(&base, &root) {
                    roots.insert(root, t);
                }
            }
            let mut found = Vec::new();
            collect_refs(&self.documents[key].body, &mut found);
            let table = refs.entry(key.clone()).or_default();
            for reference in found {
                if let Some(t) = self.target(&base, reference) {
                    table.insert(reference.to_string(), t);
                }
            }
        }
        self.refs = refs;
        self.roots = roots;
    }

    pub fn get(&self, uri: &str) -> Option<&SchemaDocument> {
        let key = document_key(uri).ok()?;
        self.documents.get(key.as_str())
    }

    pub fn contains(&self, uri: &str) -> bool {
        self.get(uri).is_some()
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn uris(&self) -> impl Iterator<Item = &str> {
        self.documents.keys().map(|k| &**k)
    }

    /// Loads every `*.json` file under `root`; a file at `a/b.json` is
    /// registered as `base` joined with `a/b.json`.
    pub fn load_dir(root: &Path, base: &str) -> Result<Self, SchemaError> {
        let base = Url::parse(base).map_err(|e| SchemaError::MalformedUri {
            uri: base.to_string(),
            reason: e.to_string(),
        })?;
        let mut registry = Self::new();
        let mut pending = vec![root.to_path_buf()];
        let load_err = |path: &Path, e: &dyn std::fmt::Display| SchemaError::Load {
            path: path.display().to_string(),
            reason: e.to_string(),
        };
        while let Some(dir) = pending.pop() {
            let entries = std::fs::read_dir(&dir).map_err(|e| load_err(&dir, &e))?;
            for entry in entries {
                let path = entry.map_err(|e| load_err(&dir, &e))?.path();
                if path.is_dir() {
                    pending.push(path);
                    continue;
                }
                if path.extension().and_then(|e| e.to_str()) != Some("json") {
                    continue;
                }
                let relative = path
                    .strip_prefix(root)
                    .map_err(|e| load_err(&path, &e))?
                    .components()
                    .map(|c| c.as_os_str().to_string_lossy().into_owned())
                    .collect::<Vec<_>>()
                    .join("/");
                let uri = base.join(&relative).map_err(|e| load_err(&path, &e))?;
                let text = std::fs::read_to_string(&path).map_err(|e| load_err(&path, &e))?;
                let body: Value = serde_json::from_str(&text).map_err(|e| load_err(&path, &e))?;
                registry.register(uri.as_str(), body)?;
            }
        }
        Ok(registry)
    }

    /// Resolves `reference` against `base_uri` and returns the target
    /// sub-document. Single step: a target that is itself a `$ref` is returned
    /// as-is.
    pub fn resolve_ref(&self, base_uri: &str, reference: &str) -> Result<&Value, SchemaError> {
        let base = document_key(base_uri)?;
        if !self.documents.contains_key(base.as_str()) {
            return Err(SchemaError::UnknownDocument {
                uri: base.to_string(),
            });
        }
        self.resolve(&base, reference).map(|(_, v)| v)
    }

    /// Like [`resolve_ref`](Self::resolve_ref) but keeps following while the
    /// target is a bare `$ref`, detecting cycles and enforcing [`MAX_REF_DEPTH`].
    pub fn resolve_chain(&self, base_uri: &str, reference: &str) -> Result<&Value, SchemaError> {
        let base = document_key(base_uri)?;
        let mut chain = Vec::new();
        let (mut current, mut target) = self.follow(base.as_str(), reference, &mut chain)?;
        while let Some(next) = target.get("$ref").and_then(Value::as_str) {
            let (doc, value) = self.follow(&current, next, &mut chain)?;
            current = doc;
            target = value;
        }
        Ok(target)
    }

    /// One hop with cycle/depth bookkeeping. `chain` holds the absolute targets
    /// visited since the last time instance structure was consumed.
    pub(crate) fn follow<'s>(
        &'s self,
        base: &str,
        reference: &str,
        chain: &mut Vec<Arc<str>>,
    ) -> Result<(Arc<str>, &'s Value), SchemaError> {
        let hop = self.hop(base, reference)?;
        self.push_hop(chain, hop.label.clone())?;
        Ok((hop.doc, hop.value))
    }

    /// Where `reference`, appearing in the document `base`, points to.
    pub(crate) fn hop<'s>(&'s self, base: &str, reference: &str) -> Result<Hop<'s>, SchemaError> {
        let cached = self.refs.get(base).and_then(|table| table.get(reference));
        if let Some((t, value)) = cached.and_then(|t| self.lookup(t).map(|v| (t, v))) {
            return Ok(Hop {
                doc: t.doc.clone(),
                value,
                label: t.label.clone(),
            });
        }
        let base = Url::parse(base).map_err(|e| SchemaError::MalformedUri {
            uri: base.to_string(),
            reason: e.to_string(),
        })?;
        let (target, value) = self.resolve(&base, reference)?;
        let mut key = target.clone();
        key.set_fragment(None);
        let doc = match self.documents.get_key_value(key.as_str()) {
            Some((k, _)) => k.clone(),
            None => Arc::from(key.as_str()),
        };
        Ok(Hop {
            doc,
            value,
            label: Arc::from(target.as_str()),
        })
    }

    fn lookup(&self, target: &RefTarget) -> Option<&Value> {
        resolve_pointer(&self.documents.get(&target.doc)?.body, &target.pointer)
    }

    pub(crate) fn push_hop(
        &self,
        chain: &mut Vec<Arc<str>>,
        label: Arc<str>,
    ) -> Result<(), SchemaError> {
        if chain.contains(&label) {
            chain.push(label);
            return Err(SchemaError::RefCycle {
                chain: chain.iter().map(|l| l.to_string()).collect(),
            });
        }
        if chain.len() >= MAX_REF_DEPTH {
            return Err(SchemaError::RefDepthExceeded {
                start: chain.first().unwrap_or(&label).to_string(),
            });
        }
        chain.push(label);
        Ok(())
    }

    /// Resolves to `(absolute target uri with fragment, value)`.
    fn resolve(&self, base: &Url, reference: &str) -> Result<(Url, &Value), SchemaError> {
        let target = base
            .join(reference)
            .map_err(|e| SchemaError::MalformedUri {
                uri: reference.to_string(),
                reason: e.to_string(),
            })?;
        let mut key = target.clone();
        key.set_fragment(None);
        let doc = self
            .documents
            .get(key.as_str())
            .ok_or_else(|| SchemaError::UnknownDocument {
                uri: key.to_string(),
            })?;
        let raw_fragment = target.fragment().unwrap_or("");
        let fragment = percent_decode_str(raw_fragment)
            .decode_utf8()
            .map_err(|_| SchemaError::UnsupportedFragment {
                reference: reference.to_string(),
                fragment: raw_fragment.to_string(),
            })?;
        if !fragment.is_empty() && !fragment.starts_with('/') {
            return Err(SchemaError::UnsupportedFragment {
                reference: reference.to_string(),
                fragment: fragment.into_owned(),
            });
        }
        let value =
            resolve_pointer(&doc.body, &fragment).ok_or_else(|| SchemaError::MissingFragment {
                uri: key.to_string(),
                fragment: fragment.to_string(),
            })?;
        Ok((target, value))
    }

    /// Validates `instance` against the schema registered at `schema_uri`
    /// (which may carry a JSON Pointer fragment).
    pub fn validate(
        &self,
        schema_uri: &str,
        instance: &Value,
    ) -> Result<ValidationReport, SchemaError> {
        let mut chain = Vec::new();
        let root = self
            .roots
            .get(schema_uri)
            .and_then(|t| self.lookup(t).map(|v| (t, v)));
        let (base, schema) = match root {
            Some((t, value)) => {
                self.push_hop(&mut chain, t.label.clone())?;
                (t.doc.clone(), value)
            }
            None => {
                Url::parse(schema_uri).map_err(|e| SchemaError::MalformedUri {
                    uri: schema_uri.to_string(),
                    reason: e.to_string(),
                })?;
                self.follow(schema_uri, schema_uri, &mut chain)?
            }
        };
        let mut evaluator = Evaluator::new(self);
        evaluator.evaluate(&base, schema, instance, chain)?;
        Ok(ValidationReport::from_errors(evaluator.into_errors()))
    }

    /// Every `$ref` in the registry whose target does not resolve, as
    /// `(document uri, ref value, error)`.
    pub fn unresolved_refs(&self) -> Vec<(String, String, SchemaError)> {
        self.documents
            .keys()
            .flat_map(|uri| self.unresolved_refs_in(uri))
            .collect()
    }

    /// Unresolvable `$ref`s inside one document.
    pub fn unresolved_refs_in(&self, uri: &str) -> Vec<(String, String, SchemaError)> {
        let Ok(base) = document_key(uri) else {
            return Vec::new();
        };
        let Some(doc) = self.documents.get(base.as_str()) else {
            return Vec::new();
        };
        let mut refs = Vec::new();
        collect_refs(&doc.body, &mut refs);
        refs.into_iter()
            .filter_map(|r| {
                self.resolve(&base, r)
                    .err()
                    .map(|e| (base.to_string(), r.to_string(), e))
            })
            .collect()
    }

    /// Stable digest of the registry contents.
    pub fn fingerprint(&self) -> u64 {
        let mut hasher = DefaultHasher::new();
        for (uri, doc) in &self.documents {
            uri.hash(&mut hasher);
            doc.body.to_string().hash(&mut hasher);
        }
        hasher.finish()
    }
}

fn collect_refs<'a>(value: &'a Value, out: &mut Vec<&'a str>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                match (k.as_str(), v) {
                    ("$ref", Value::String(r)) => out.push(r),
                    // enum members are data, not subschemas
                    ("enum", _) => {}
                    _ => collect_refs(v, out),
                }
            }
        }
        Value::Array(items) => items.iter().for_each(|v| collect_refs(v, out)),
        _ => {}
    }
}
