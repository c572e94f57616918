//! Descriptor-driven knowledge graph construction.
//!
//! - [`schema`]: draft-04 subset validator with a local `$ref` registry.
//! - [`descriptor`]: node/edge descriptors, their meta-schemas and bulk variants.
//! - [`ontology`]: per-project concepts, roles and the isa hierarchy.
//! - [`graph`]: the labelled-property graph and its write log.
//! - [`project`]: projects tying the above together, with on-disk persistence.

pub mod descriptor;
pub mod graph;
mod journal;
pub mod ontology;
pub mod project;
pub mod schema;

pub use journal::FsyncPolicy;
