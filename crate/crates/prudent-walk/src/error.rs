use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A precondition of the operation was violated by the input.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The requested computation exceeds a configured capacity limit.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A series or DP failed to converge in the requested regime.
    #[error("divergence: {0}")]
    Divergence(String),

    /// A root solver could not bracket or refine its target.
    #[error("solver failure: {0}")]
    Solver(String),

    /// The transformation is only defined for the even-parity case.
    #[error("unsupported case: {0}")]
    Unsupported(String),

    /// A sampler exceeded its restart cap without producing a sample.
    #[error("sampler stalled: {0}")]
    SamplerStall(String),

    /// Malformed serialized input.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
