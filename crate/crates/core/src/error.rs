use thiserror::Error;

/// Errors surfaced by graph construction, numeric kernels, and simulation.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric: |a[{row},{col}] - a[{col},{row}]| = {deviation:.3e} exceeds 1e-12")]
    NotSymmetric {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },

    #[error("probability {value} outside the open interval (0, 1)")]
    ProbabilityOutOfRange { value: f64 },

    #[error("standard deviation {value} is negative")]
    NegativeStandardDeviation { value: f64 },

    #[error("graph must have at least one node")]
    EmptyGraph,

    #[error("edge ({u}, {v}) is out of range for {nodes} nodes (endpoints are 1-indexed)")]
    EdgeOutOfRange { u: usize, v: usize, nodes: usize },

    #[error("self-loop at node {node} is not allowed")]
    SelfLoop { node: usize },

    #[error("graph is disconnected; components: {components:?}")]
    Disconnected { components: Vec<Vec<usize>> },

    #[error("no connected graph found in {attempts} attempts (edge probability {rho} too small for {nodes} nodes)")]
    ConnectivityCapExceeded {
        attempts: usize,
        rho: f64,
        nodes: usize,
    },

    #[error("edge list parse error at line {line}: {message}")]
    EdgeListParse { line: usize, message: String },

    #[error(
        "consensus spectrum rejected: |lambda_{index}| = {magnitude:.12} >= 1 - 1e-9 \
         (deviation series diverges; choose a smaller kappa)"
    )]
    SpectrumRejected { index: usize, magnitude: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("posterior precision matrix is singular: no information about the arms")]
    NoInformation,

    #[error("empty q-value list: nothing to select from")]
    EmptySelection,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
