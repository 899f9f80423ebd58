use thiserror::Error;

/// Errors raised by the analysis and reconstruction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("jet centers differ: {0} vs {1}")]
    CenterMismatch(f64, f64),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("{stage}: requires order ≥ {required}, jet has order {available}")]
    InsufficientOrder {
        required: usize,
        available: usize,
        stage: &'static str,
    },

    #[error("matrix not invertible: {0}")]
    NotInvertible(String),

    #[error("constant term must be positive, got {0}")]
    NonPositive(f64),

    #[error("curve is not Lagrangian (isotropy residual {0:.3e})")]
    NonLagrangian(f64),

    #[error("rank not constant along the curve: {0}")]
    RankNotConstant(String),

    #[error("flag stalls at dimension {dim} < {ambient}; use reduce_ambient")]
    IncompleteFlag { dim: usize, ambient: usize },

    #[error("zero velocity: the curve is constant at the center")]
    ZeroVelocity,

    #[error("condition (G) violated: {0}")]
    ConditionG(String),

    #[error("frame is not normal: nonessential curvature block of size {0:.3e}")]
    NotNormal(f64),

    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),

    #[error("invalid curvature spec: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Wraps an error with the name of the pipeline stage that raised it.
    pub fn at(self, stage: &'static str) -> Error {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// Strips stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for failures of the mathematical hypotheses (as opposed to bad input).
    pub fn is_analyzability(&self) -> bool {
        matches!(
            self.root(),
            Error::InsufficientOrder { .. }
                | Error::NotInvertible(_)
                | Error::RankNotConstant(_)
                | Error::IncompleteFlag { .. }
                | Error::ZeroVelocity
                | Error::ConditionG(_)
                | Error::NonPositive(_)
                | Error::NotNormal(_)
        )
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at(stage))
    }
}
