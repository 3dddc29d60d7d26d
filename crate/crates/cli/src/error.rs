use serde_json::{json, Value};

/// Failure of a CLI run, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Config rejected before any computation; `field` is a JSON path.
    Schema { field: String, message: String },
    /// Conflicting or out-of-range flags.
    Usage(String),
    Core(qtrace_core::Error),
    Output { path: String, message: String },
    /// `--golden` ran but some rows missed their reference.
    GoldenFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Schema {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        use qtrace_core::Error as E;
        match self {
            CliError::Schema { .. } | CliError::Usage(_) => 2,
            CliError::Core(E::InvalidArgument(_)) => 2,
            CliError::Core(E::ResourceLimit { .. }) => 3,
            CliError::Core(_) => 4,
            CliError::Output { .. } => 5,
            CliError::GoldenFailed { .. } => 1,
        }
    }

    /// Machine-readable record written to stderr.
    pub fn to_json(&self) -> Value {
        use qtrace_core::Error as E;
        let code = self.exit_code();
        match self {
            CliError::Schema { field, message } => json!({
                "error": "schema", "exit_code": code, "field": field, "message": message
            }),
            CliError::Usage(message) => json!({
                "error": "usage", "exit_code": code, "message": message
            }),
            CliError::Core(e) => {
                let detail = match e {
                    E::InvalidArgument(_) => json!({ "kind": "invalid-argument" }),
                    E::ResourceLimit { what, requested, cap } => json!({
                        "kind": "resource-limit", "what": what,
                        "requested": requested.to_string(), "cap": cap.to_string()
                    }),
                    E::IllConditionedGram { min_eigenvalue, floor } => json!({
                        "kind": "ill-conditioned-gram", "min_eigenvalue": min_eigenvalue, "floor": floor
                    }),
                    E::DegenerateAugmentation { d, states, dim } => json!({
                        "kind": "degenerate-augmentation", "d": d, "states": states, "dim": dim
                    }),
                    E::DivergentBound { denominator } => json!({
                        "kind": "divergent-bound", "denominator": denominator
                    }),
                };
                let class = if code == 3 { "resource-limit" } else if code == 4 { "numerical" } else { "invalid-argument" };
                json!({ "error": class, "exit_code": code, "message": e.to_string(), "detail": detail })
            }
            CliError::Output { path, message } => json!({
                "error": "output", "exit_code": code, "path": path, "message": message
            }),
            CliError::GoldenFailed { failed, total } => json!({
                "error": "golden", "exit_code": code, "failed": failed, "total": total
            }),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Schema { field, message } => write!(f, "config error at {field}: {message}"),
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Output { path, message } => write!(f, "cannot write {path}: {message}"),
            CliError::GoldenFailed { failed, total } => write!(f, "{failed} of {total} golden rows failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qtrace_core::Error> for CliError {
    fn from(e: qtrace_core::Error) -> Self {
        CliError::Core(e)
    }
}
