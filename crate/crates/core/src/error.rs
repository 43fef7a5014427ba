use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("tensor is not symmetric positive definite (d11={d11}, d12={d12}, d22={d22}, det={det})")]
    NotSpd { d11: f64, d12: f64, d22: f64, det: f64 },

    #[error("vector has vanishing metric norm")]
    DegenerateVector,

    #[error("triangle {triangle} is degenerate (det of edge matrix = {det:e})")]
    DegenerateTriangle { triangle: usize, det: f64 },

    #[error("metric angle {angle:e} in triangle {triangle} is too small for a cotangent")]
    DegenerateMetricAngle { triangle: usize, angle: f64 },

    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifold(usize, usize),

    #[error("flipping edge ({0}, {1}) would invert a triangle")]
    NonConvexQuad(usize, usize),

    #[error("edge id {0} is not an interior edge")]
    NotInterior(usize),

    #[error("resolution must be at least 1 in each direction (got {nx}x{ny})")]
    BadResolution { nx: usize, ny: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid mesh: {0}")]
    Validation(String),

    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("condition forms disagree on edge {edge} (symmetric lhs {lhs_symmetric}, asymmetric lhs {lhs_asymmetric}, a_ij {a_ij:e})")]
    InconsistentVerdicts {
        edge: usize,
        lhs_symmetric: f64,
        lhs_asymmetric: f64,
        a_ij: f64,
    },

    #[error("on edge {edge}: {source}")]
    OnEdge {
        edge: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("in triangle {triangle}: {source}")]
    InTriangle {
        triangle: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn in_triangle(self, triangle: usize) -> Self {
        match self {
            e @ (Error::InTriangle { .. }
            | Error::DegenerateTriangle { .. }
            | Error::DegenerateMetricAngle { .. }) => e,
            e => Error::InTriangle {
                triangle,
                source: Box::new(e),
            },
        }
    }

    pub(crate) fn on_edge(self, edge: usize) -> Self {
        Error::OnEdge {
            edge,
            source: Box::new(self),
        }
    }

    /// The innermost error, without triangle/edge context.
    pub fn root(&self) -> &Error {
        match self {
            Error::InTriangle { source, .. } | Error::OnEdge { source, .. } => source.root(),
            e => e,
        }
    }
}
