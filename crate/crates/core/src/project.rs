//! Projects and the project manager.
//!
//! A project is an isolated namespace: one [`Ontology`] plus one
//! [`KnowledgeGraph`]. With a data directory, each project lives in
//! `<data_dir>/<name>/` as two append-only files: `descriptors.jsonl`
//! (accepted descriptor documents, in registration order) and `graph.log`
//! (one [`GraphLogRecord`](crate::graph::GraphLogRecord) per line). Restoring
//! re-registers the descriptors and replays the log.

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::descriptor::{KnownFunctions, MetaSchema, Role};
use crate::graph::{
    check_document, plan_edge, plan_node, replay_log, ElementKey, GraphError, GraphLog, GraphWrite,
    KnowledgeGraph, LogError,
};
use crate::journal::{FsyncPolicy, Journal};
use crate::ontology::{Ontology, OntologyError, Registration};
use crate::schema::{ValidationError, ValidationReport};

pub const DESCRIPTORS_FILE: &str = "descriptors.jsonl";
pub const GRAPH_LOG_FILE: &str = "graph.log";

#[derive(Debug, Error)]
pub enum ProjectError {
    #[error("invalid project name {0:?}: expected 1-64 characters from [a-z0-9_-]")]
    InvalidName(String),
    #[error("project {0:?} already exists")]
    DuplicateProject(String),
    #[error("no project named {0:?}")]
    UnknownProject(String),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("document failed validation: {0}")]
    Invalid(ValidationReport),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("storage error: {0}")]
    Io(#[from] io::Error),
    #[error("cannot restore project {project:?}: {reason}")]
    Restore { project: String, reason: String },
    #[error(
        "project {0:?} refuses writes after a storage failure; restart to recover from the log"
    )]
    Poisoned(String),
}

impl ProjectError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::InvalidName(_) => "invalid_project_name",
            Self::DuplicateProject(_) => "duplicate_project",
            Self::UnknownProject(_) => "unknown_project",
            Self::Ontology(e) => e.code(),
            Self::Graph(e) => e.code(),
            Self::Invalid(_) => "invalid_document",
            Self::Log(_) | Self::Io(_) => "storage_error",
            Self::Restore { .. } => "restore_error",
            Self::Poisoned(_) => "project_poisoned",
        }
    }
}

/// `[a-z0-9_-]{1,64}`
pub fn validate_project_name(name: &str) -> Result<(), ProjectError> {
    let ok = (1..=64).contains(&name.len())
        && name
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_' || b == b'-');
    if ok {
        Ok(())
    } else {
        Err(ProjectError::InvalidName(name.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectSummary {
    pub name: String,
    pub descriptors: usize,
    pub nodes: usize,
    pub edges: usize,
    pub stubs: usize,
}

#[derive(Debug)]
struct Storage {
    descriptors: Journal,
    graph_log: GraphLog,
}

#[derive(Debug)]
pub struct Project {
    name: String,
    ontology: Ontology,
    graph: KnowledgeGraph,
    storage: Option<Storage>,
    poisoned: bool,
}

impl Project {
    /// An empty, memory-only project.
    pub fn create(
        name: &str,
        meta: MetaSchema,
        known: KnownFunctions,
    ) -> Result<Self, ProjectError> {
        validate_project_name(name)?;
        Ok(Self {
            name: name.to_string(),
            ontology: Ontology::new(meta, known),
            graph: KnowledgeGraph::new(),
            storage: None,
            poisoned: false,
        })
    }

    /// Opens (or initialises) the project stored in `dir`.
    pub fn open(
        dir: &Path,
        name: &str,
        meta: MetaSchema,
        known: KnownFunctions,
        fsync: FsyncPolicy,
    ) -> Result<Self, ProjectError> {
        let mut project = Self::create(name, meta, known)?;
        let restore_err = |reason: String| ProjectError::Restore {
            project: name.to_string(),
            reason,
        };
        let (descriptors, lines) = Journal::open(&dir.join(DESCRIPTORS_FILE), fsync)?;
        for (i, line) in lines.iter().enumerate() {
            let doc: Value = serde_json::from_str(line)
                .map_err(|e| restore_err(format!("{DESCRIPTORS_FILE} line {}: {e}", i + 1)))?;
            project
                .ontology
                .register_descriptor(&doc)
                .map_err(|e| restore_err(format!("{DESCRIPTORS_FILE} line {}: {e}", i + 1)))?;
        }
        let (graph_log, records) = GraphLog::open(&dir.join(GRAPH_LOG_FILE), fsync)?;
        project.graph = replay_log(&records)?;
        project.storage = Some(Storage {
            descriptors,
            graph_log,
        });
        Ok(project)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ontology(&self) -> &Ontology {
        &self.ontology
    }

    pub fn graph(&self) -> &KnowledgeGraph {
        &self.graph
    }

    pub fn summary(&self) -> ProjectSummary {
        ProjectSummary {
            name: self.name.clone(),
            descriptors: self.ontology.len(),
            nodes: self.graph.node_count(),
            edges: self.graph.edge_count(),
            stubs: self.graph.stub_count(),
        }
    }

    fn check_writable(&self) -> Result<(), ProjectError> {
        if self.poisoned {
            Err(ProjectError::Poisoned(self.name.clone()))
        } else {
            Ok(())
        }
    }

    pub fn register_descriptor(&mut self, candidate: &Value) -> Result<Registration, ProjectError> {
        self.check_writable()?;
        let registration = self.ontology.register_descriptor(candidate)?;
        if let Some(storage) = &mut self.storage {
            if let Err(e) = storage.descriptors.append(&[candidate.to_string()]) {
                self.poisoned = true;
                return Err(e.into());
            }
        }
        Ok(registration)
    }

    /// Descriptor schema plus the store's data-document rules.
    pub fn validate_document(
        &self,
        title: &str,
        doc: &Value,
    ) -> Result<ValidationReport, ProjectError> {
        let report = self.ontology.validate_instance(title, doc)?;
        let contract = check_document(&self.ontology, title, doc)?;
        Ok(report.merge(ValidationReport::from_errors(contract)))
    }

    /// Bulk form: the array is validated against the generated bulk
    /// descriptor, and every element against the data-document rules.
    pub fn validate_bulk(
        &self,
        title: &str,
        docs: &Value,
    ) -> Result<ValidationReport, ProjectError> {
        let mut report = self.ontology.validate_bulk(title, docs)?;
        if let Value::Array(items) = docs {
            let mut contract: Vec<ValidationError> = Vec::new();
            for (i, doc) in items.iter().enumerate() {
                for mut e in check_document(&self.ontology, title, doc)? {
                    e.path = format!("/{i}{}", e.path);
                    contract.push(e);
                }
            }
            report = report.merge(ValidationReport::from_errors(contract));
        }
        Ok(report)
    }

    /// Applies the writes for one validated document. With storage attached
    /// the writes are also collected into `log` for appending afterwards.
    fn upsert(
        &mut self,
        title: &str,
        doc: Value,
        log: &mut Vec<GraphWrite>,
    ) -> Result<ElementKey, ProjectError> {
        let Value::Object(members) = doc else {
            unreachable!("validated documents are objects")
        };
        let (key, writes) = match self.ontology.role(title) {
            Some(Role::Edge) => plan_edge(&self.graph, &self.ontology, title, members)?,
            _ => plan_node(&self.ontology, title, members)?,
        };
        let logged = self.storage.is_some();
        for write in writes {
            if logged {
                log.push(write.clone());
            }
            self.graph.apply_owned(write);
        }
        Ok(key)
    }

    fn persist(&mut self, writes: &[GraphWrite]) -> Result<(), ProjectError> {
        if let Some(storage) = &mut self.storage {
            if let Err(e) = storage.graph_log.append(writes) {
                self.poisoned = true;
                return Err(e.into());
            }
        }
        Ok(())
    }

    /// Validates and upserts one data document.
    pub fn upload(&mut self, title: &str, doc: Value) -> Result<ElementKey, ProjectError> {
        self.check_writable()?;
        let report = self.validate_document(title, &doc)?;
        if !report.valid {
            return Err(ProjectError::Invalid(report));
        }
        let mut writes = Vec::new();
        let key = self.upsert(title, doc, &mut writes)?;
        self.persist(&writes)?;
        Ok(key)
    }

    /// Validates the whole array first; nothing is written unless every
    /// element is valid.
    pub fn upload_bulk(&mut self, title: &str, docs: Value) -> Result<usize, ProjectError> {
        self.check_writable()?;
        let report = self.validate_bulk(title, &docs)?;
        if !report.valid {
            return Err(ProjectError::Invalid(report));
        }
        let Value::Array(items) = docs else {
            unreachable!("bulk schema requires an array")
        };
        let count = items.len();
        let mut writes = Vec::new();
        for doc in items {
            self.upsert(title, doc, &mut writes)?;
        }
        self.persist(&writes)?;
        Ok(count)
    }
}

/// Store-wide settings.
#[derive(Debug, Clone, Default)]
pub struct StoreConfig {
    /// `None` keeps everything in memory.
    pub data_dir: Option<PathBuf>,
    pub fsync: FsyncPolicy,
    pub known_functions: KnownFunctions,
}

pub type SharedProject = Arc<RwLock<Project>>;

/// Creates, selects and restores projects. Each project has its own lock,
/// so work on different projects proceeds in parallel.
#[derive(Debug)]
pub struct ProjectManager {
    config: StoreConfig,
    meta: MetaSchema,
    projects: RwLock<BTreeMap<String, SharedProject>>,
}

impl ProjectManager {
    pub fn in_memory() -> Self {
        Self::open(StoreConfig::default()).expect("no storage to fail")
    }

    /// Restores every project directory found under `config.data_dir`.
    pub fn open(config: StoreConfig) -> Result<Self, ProjectError> {
        let meta = MetaSchema::bundled();
        let mut projects = BTreeMap::new();
        if let Some(root) = &config.data_dir {
            std::fs::create_dir_all(root)?;
            let mut dirs: Vec<PathBuf> = std::fs::read_dir(root)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_dir())
                .collect();
            dirs.sort();
            for dir in dirs {
                let Some(name) = dir.file_name().and_then(|n| n.to_str()).map(str::to_string)
                else {
                    continue;
                };
                if validate_project_name(&name).is_err() {
                    tracing::warn!(dir = %dir.display(), "skipping directory with invalid project name");
                    continue;
                }
                let project = Project::open(
                    &dir,
                    &name,
                    meta.clone(),
                    config.known_functions.clone(),
                    config.fsync,
                )?;
                tracing::info!(project = %name, nodes = project.graph.node_count(), edges = project.graph.edge_count(), "restored project");
                projects.insert(name, Arc::new(RwLock::new(project)));
            }
        }
        Ok(Self {
            config,
            meta,
            projects: RwLock::new(projects),
        })
    }

    pub fn meta(&self) -> &MetaSchema {
        &self.meta
    }

    pub fn create_project(&self, name: &str) -> Result<SharedProject, ProjectError> {
        validate_project_name(name)?;
        let mut projects = self.projects.write();
        if projects.contains_key(name) {
            return Err(ProjectError::DuplicateProject(name.to_string()));
        }
        let known = self.config.known_functions.clone();
        let project = match &self.config.data_dir {
            Some(root) => Project::open(
                &root.join(name),
                name,
                self.meta.clone(),
                known,
                self.config.fsync,
            )?,
            None => Project::create(name, self.meta.clone(), known)?,
        };
        let shared = Arc::new(RwLock::new(project));
        projects.insert(name.to_string(), shared.clone());
        Ok(shared)
    }

    pub fn get(&self, name: &str) -> Result<SharedProject, ProjectError> {
        self.projects
            .read()
            .get(name)
            .cloned()
            .ok_or_else(|| ProjectError::UnknownProject(name.to_string()))
    }

    pub fn summaries(&self) -> Vec<ProjectSummary> {
        let projects: Vec<SharedProject> = self.projects.read().values().cloned().collect();
        projects.iter().map(|p| p.read().summary()).collect()
    }
}
