use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("field is not conjugate-symmetric (max deviation {deviation:e})")]
    NotReal { deviation: f64 },

    #[error("non-finite coefficient at flat index {0}")]
    NonFinite(usize),

    #[error("norm {0} is not supported here")]
    UnsupportedNorm(String),

    #[error("solver did not converge after {iters} iterations (relative gap {gap:e})")]
    NotConverged { iters: usize, gap: f64, value: f64 },

    #[error("decay budget violated at the grid edge (edge ratio {edge_ratio:e}); need half-width T >= {required_half_width}")]
    DecayViolation { edge_ratio: f64, required_half_width: f64 },

    #[error("point {0} is outside the open strip 0 < Re z < 1")]
    OutsideStrip(String),

    #[error("symbol is not odd in coordinate {coordinate} (at index {index:?})")]
    OddnessViolation { coordinate: usize, index: Vec<i64> },

    #[error("bandlimit {have} too small: need N >= {need}")]
    InsufficientBandlimit { have: usize, need: usize },

    #[error("malformed file: {0}")]
    Format(String),

    #[error("pipeline stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }
}
