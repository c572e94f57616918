use serde_json::{json, Value};

use super::{Descriptor, Role};

/// Inserts `bulk_` in front of the last path segment, keeping any fragment:
/// `…/ranking/he.json#` → `…/ranking/bulk_he.json#`.
pub fn bulk_id(id: &str) -> String {
    let (body, fragment) = match id.find('#') {
        Some(i) => id.split_at(i),
        None => (id, ""),
    };
    match body.rfind('/') {
        Some(i) => format!("{}bulk_{}{fragment}", &body[..=i], &body[i + 1..]),
        None => format!("bulk_{body}{fragment}"),
    }
}

/// Last path segment of a descriptor id, without fragment.
pub(crate) fn file_name(id: &str) -> &str {
    let body = id.split('#').next().unwrap_or(id);
    body.rsplit('/').next().unwrap_or(body)
}

/// Array schema whose items are the descriptor itself, referenced relatively.
pub fn generate_bulk_descriptor(descriptor: &Descriptor) -> Value {
    let key = match descriptor.role() {
        Role::Node => "node",
        Role::Edge => "edge",
    };
    json!({
        "$schema": descriptor.schema_uri,
        "id": bulk_id(&descriptor.id),
        "title": format!("Bulk {}", descriptor.title),
        "definitions": {
            key: {"$ref": format!("./{}#", file_name(&descriptor.id))}
        },
        "type": "array",
        "items": {"$ref": format!("#/definitions/{key}")}
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bulk_id_keeps_prefix_and_fragment() {
        assert_eq!(
            bulk_id("http://localhost:8000/schemas/ranking/he.json#"),
            "http://localhost:8000/schemas/ranking/bulk_he.json#"
        );
        assert_eq!(bulk_id("http://h/a/b.json"), "http://h/a/bulk_b.json");
        assert_eq!(file_name("http://h/a/b.json#"), "b.json");
    }
}
