use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty region: no cell center lies inside the workspace")]
    EmptyRegion,
    #[error("disconnected region: {components} 4-connected components")]
    DisconnectedRegion { components: usize },
    #[error("grid spacing must be positive, got {0}")]
    InvalidSpacing(f64),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("agent {agent} at ({x}, {y}) is outside the workspace")]
    PositionOutside { agent: usize, x: f64, y: f64 },
    #[error("at least one agent is required")]
    NoAgents,
    #[error("cell set is empty")]
    EmptyCellSet,
    #[error("max edge {max_edge} must be below the coverage radius {radius} (triangle capture would not cover the whole triangle)")]
    MeshEdgeTooLong { max_edge: f64, radius: f64 },
    #[error("triangulation needs at least 3 sample points, got {0}")]
    TooFewSamples(usize),
    #[error("point ({x}, {y}) is outside triangle {triangle}")]
    PointOutsideTriangle { triangle: usize, x: f64, y: f64 },
    #[error("heat source is negative ({value}) at cell {cell}")]
    NegativeSource { cell: usize, value: f64 },
    #[error("heat solver did not converge in {iterations} iterations (residual {residual:e}, target {target:e})")]
    SolverDiverged { iterations: usize, residual: f64, target: f64 },
    #[error("projection failed: no cell of the agent's set within reach of ({x}, {y})")]
    Projection { x: f64, y: f64 },
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
