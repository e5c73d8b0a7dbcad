use std::io;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("edge {{{u}, {v}}} has non-positive weight {weight}")]
    NonPositiveWeight { u: usize, v: usize, weight: String },
    #[error("vertex {index} out of range for a graph with {count} vertices")]
    VertexOutOfRange { index: usize, count: usize },
    #[error("vertex {0} is not incident to any edge")]
    IsolatedVertex(usize),
    #[error("graph is not connected ({components} components)")]
    NotConnected { components: usize },
    #[error("weight table has no entry for edge {{{0}, {1}}}")]
    MissingTableEntry(usize, usize),
    #[error("invalid vertex ordering: {0}")]
    BadOrdering(String),
    #[error("line {}, field {}: {msg}", .line, .field.as_deref().unwrap_or("-"))]
    Parse {
        line: usize,
        field: Option<String>,
        msg: String,
    },
    #[error("note sequence has fewer than two distinct notes")]
    EmptySequence,
    #[error("brute force limited to {bound} vertices, graph has {count}")]
    TooLarge { count: usize, bound: usize },
    #[error("mismatched inputs: {0}")]
    MismatchedInputs(String),
    #[error("barcode pair born at edge ({0}, {1}) has no counterpart upstream")]
    UnmatchedPair(usize, usize),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(
        line: usize,
        field: impl Into<Option<String>>,
        msg: impl Into<String>,
    ) -> Self {
        Error::Parse {
            line,
            field: field.into(),
            msg: msg.into(),
        }
    }
}
