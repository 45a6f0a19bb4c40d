use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised by the geometry, solver and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The target lies (numerically) in the focal plane of a frame.
    #[error("target depth is degenerate in frame {frame}")]
    DepthDegenerate { frame: usize },

    #[error("at least 2 views are required, got {0}")]
    InsufficientViews(usize),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("solver diverged at iteration {iteration}: {reason}")]
    Diverged { iteration: usize, reason: String },

    #[error("estimate coincides with range station {index}")]
    StationCoincidence { index: usize },

    #[error("{block} residuals have no spread, min-max normalization is undefined")]
    DegenerateSpread { block: &'static str },

    #[error("ridge parameter needs more rows than the rank of T: {rows} rows, rank {rank}")]
    InsufficientRows { rows: usize, rank: usize },

    #[error("normal matrix is singular")]
    SingularSystem,

    #[error("scenario geometry infeasible: {0}")]
    GeometryInfeasible(String),

    #[error("sight lines no longer intersect forward (gamma/2 - delta = {margin_deg} deg)")]
    UnboundedError { margin_deg: f64 },

    #[error("no records to aggregate")]
    EmptyCell,
}
