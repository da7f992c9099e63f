use std::path::PathBuf;

/// Errors raised anywhere in the solver pipeline.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unsupported mesh format: {0}")]
    UnsupportedFormat(String),

    #[error("msh parse error in section {section} (line {line}): {message}")]
    Parse {
        section: String,
        line: usize,
        message: String,
    },

    #[error("mesh integrity error: {0}")]
    Integrity(String),

    #[error("unknown physical name {name:?}; available: {}", available.join(", "))]
    Lookup {
        name: String,
        available: Vec<String>,
    },

    #[error("degenerate element {element}: signed area {area:e}")]
    Geometry { element: usize, area: f64 },

    #[error("index ({row}, {col}) out of range for dimension {n}")]
    IndexOutOfRange { row: usize, col: usize, n: usize },

    #[error("CG did not converge after {iterations} iterations (relative residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("Jacobi preconditioner needs a positive diagonal; row {row} has {value:e}")]
    Preconditioner { row: usize, value: f64 },

    #[error("conflicting Dirichlet values for dof {dof}: {first} vs {second}")]
    Constraint { dof: usize, first: f64, second: f64 },

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("load step {step}, inner iteration {inner}: {source}")]
    Stagger {
        step: usize,
        inner: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Strips any [`Error::Stagger`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stagger { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
