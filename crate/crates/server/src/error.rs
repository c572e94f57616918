use axum::extract::rejection::PathRejection;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use schemagraph_core::descriptor::DescriptorError;
use schemagraph_core::graph::GraphError;
use schemagraph_core::ontology::OntologyError;
use schemagraph_core::project::ProjectError;
use schemagraph_core::schema::ValidationReport;
use serde::{Deserialize, Serialize};

/// Body of every non-2xx response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    /// JSON Pointer into the request body; empty when the whole body (or no
    /// body) is concerned.
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<ValidationReport>,
    #[serde(skip)]
    pub status: u16,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            code: code.to_string(),
            message: message.into(),
            path: String::new(),
            details: None,
            status: status.as_u16(),
        }
    }

    pub fn at(mut self, path: impl Into<String>) -> Self {
        self.path = path.into();
        self
    }

    pub fn with_report(mut self, report: ValidationReport) -> Self {
        if let Some(first) = report.errors.first() {
            self.path = first.path.clone();
        }
        self.details = Some(report);
        self
    }

    pub fn malformed_json(reason: impl std::fmt::Display) -> Self {
        Self::new(
            StatusCode::BAD_REQUEST,
            "malformed_json",
            format!("request body is not valid JSON: {reason}"),
        )
    }

    pub fn not_found(what: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", what)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

fn descriptor_path(e: &DescriptorError) -> String {
    match e {
        DescriptorError::MissingSchema | DescriptorError::UnknownMetaSchema(_) => "/$schema".into(),
        DescriptorError::MissingGraphElement | DescriptorError::RoleMismatch { .. } => {
            "/graph_element".into()
        }
        DescriptorError::EdgeKeywordOnNode { keyword }
        | DescriptorError::InvalidReference { keyword } => {
            format!("/{keyword}")
        }
        DescriptorError::ParentsOnEdge => "/parents".into(),
        DescriptorError::RequiredRestriction { .. } => "/required".into(),
        DescriptorError::InvalidId { .. } => "/id".into(),
        DescriptorError::SettingsShape(_) => "/settings".into(),
        _ => String::new(),
    }
}

impl From<OntologyError> for ApiError {
    fn from(e: OntologyError) -> Self {
        let (status, path) = match &e {
            OntologyError::Descriptor(d) => (StatusCode::UNPROCESSABLE_ENTITY, descriptor_path(d)),
            OntologyError::DuplicateTitle(_) => (StatusCode::CONFLICT, "/title".into()),
            OntologyError::DuplicateId(_) => (StatusCode::CONFLICT, "/id".into()),
            OntologyError::DanglingReference { keyword, .. }
            | OntologyError::NotANode { keyword, .. } => {
                (StatusCode::UNPROCESSABLE_ENTITY, format!("/{keyword}"))
            }
            OntologyError::IsaCycle { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "/parents".into()),
            OntologyError::UnresolvedSchemaRef { .. } => {
                (StatusCode::UNPROCESSABLE_ENTITY, String::new())
            }
            OntologyError::UnknownTitle(_) => (StatusCode::NOT_FOUND, String::new()),
            OntologyError::NotANodeDescriptor(_) => {
                (StatusCode::UNPROCESSABLE_ENTITY, String::new())
            }
        };
        let report = match &e {
            OntologyError::Descriptor(d) => d.report().cloned(),
            _ => None,
        };
        let err = ApiError::new(status, e.code(), e.to_string()).at(path);
        match report {
            Some(r) => err.with_report(r),
            None => err,
        }
    }
}

impl From<GraphError> for ApiError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::UnknownLabel(_) => {
                ApiError::new(StatusCode::NOT_FOUND, e.code(), e.to_string())
            }
            GraphError::WrongRole { .. } => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.code(), e.to_string())
            }
            GraphError::Contract(errors) => {
                let report = ValidationReport::from_errors(errors);
                ApiError::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    "invalid_document",
                    report.to_string(),
                )
                .with_report(report)
            }
        }
    }
}

impl From<ProjectError> for ApiError {
    fn from(e: ProjectError) -> Self {
        let code = e.code();
        match e {
            ProjectError::Ontology(o) => o.into(),
            ProjectError::Graph(g) => g.into(),
            ProjectError::Invalid(report) => ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                code,
                format!("document failed validation: {report}"),
            )
            .with_report(report),
            ProjectError::InvalidName(_) => {
                ApiError::new(StatusCode::BAD_REQUEST, code, e.to_string()).at("/name")
            }
            ProjectError::DuplicateProject(_) => {
                ApiError::new(StatusCode::CONFLICT, code, e.to_string()).at("/name")
            }
            ProjectError::UnknownProject(_) => {
                ApiError::new(StatusCode::NOT_FOUND, code, e.to_string())
            }
            ProjectError::Poisoned(_) => {
                ApiError::new(StatusCode::SERVICE_UNAVAILABLE, code, e.to_string())
            }
            ProjectError::Log(_) | ProjectError::Io(_) | ProjectError::Restore { .. } => {
                tracing::error!(error = %e, "storage failure");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, code, e.to_string())
            }
        }
    }
}

impl From<PathRejection> for ApiError {
    fn from(e: PathRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_path", e.body_text())
    }
}
