use std::fmt;

use serde::{Deserialize, Serialize};

/// One located validation failure.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ValidationError {
    /// JSON Pointer into the instance.
    pub path: String,
    pub keyword: String,
    pub message: String,
}

impl ValidationError {
    pub fn new(
        path: impl Into<String>,
        keyword: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Self {
            path: path.into(),
            keyword: keyword.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = if self.path.is_empty() {
            "/"
        } else {
            &self.path
        };
        write!(f, "{path}: {} ({})", self.message, self.keyword)
    }
}

/// Outcome of validating an instance. `valid` is true exactly when `errors`
/// is empty; errors are kept in canonical order (path, then keyword, then
/// message, all lexicographic).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub errors: Vec<ValidationError>,
}

impl ValidationReport {
    pub fn from_errors(mut errors: Vec<ValidationError>) -> Self {
        errors.sort();
        Self {
            valid: errors.is_empty(),
            errors,
        }
    }

    pub fn ok() -> Self {
        Self::from_errors(Vec::new())
    }

    /// Merges two reports, restoring canonical order.
    pub fn merge(self, other: ValidationReport) -> Self {
        let mut errors = self.errors;
        errors.extend(other.errors);
        Self::from_errors(errors)
    }

    /// Rebases every error path under `prefix` (itself a JSON Pointer).
    pub fn prefixed(self, prefix: &str) -> Self {
        let errors = self
            .errors
            .into_iter()
            .map(|mut e| {
                e.path = format!("{prefix}{}", e.path);
                e
            })
            .collect();
        Self::from_errors(errors)
    }

    /// `(path, keyword)` pairs, the shape the oracle tests compare on.
    pub fn locations(&self) -> Vec<(String, String)> {
        self.errors
            .iter()
            .map(|e| (e.path.clone(), e.keyword.clone()))
            .collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            return f.write_str("valid");
        }
        for (i, e) in self.errors.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}
