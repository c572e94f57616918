//! Validator for the draft-04 keyword subset used by descriptors.
//!
//! Supported keywords: `$ref`, `definitions`, `type`, `properties`,
//! `additionalProperties`, `required`, `items`, `enum`, `minLength`,
//! `maxLength`, `minimum`, `maximum` (with the draft-04 boolean
//! `exclusiveMinimum`/`exclusiveMaximum` modifiers) and `pattern`.
//! Everything else is ignored, as draft-04 ignores unknown keywords.
//!
//! Documents live in a [`SchemaRegistry`] keyed by absolute URI (fragment
//! stripped). `$ref` values are resolved as RFC 3986 relative references against
//! the URI of the document they appear in; fragments must be empty or a JSON
//! Pointer.

mod pointer;
mod registry;
mod report;
mod validate;

pub use pointer::{escape_token, join_pointer, resolve_pointer};
pub use registry::{SchemaDocument, SchemaError, SchemaRegistry, MAX_REF_DEPTH};
pub use report::{ValidationError, ValidationReport};
