use thiserror::Error;

/// Failures raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("logarithm requested inside the cut locus (trace = {trace})")]
    CutLocus { trace: f64 },
    #[error("operation needs derivatives but the source manifold is a point cloud")]
    PointCloudHasNoDerivative,
    #[error("diffeomorphism of the circle is not monotone (min jacobian {min_jacobian})")]
    NonMonotone { min_jacobian: f64 },
    #[error("state is not regular: node {node} has |P|^2 + |sigma|^2 = {value}")]
    NotRegular { node: usize, value: f64 },
    #[error("target covector is not conormal at node {node} (|P'.DQ| = {residual})")]
    NotConormal { node: usize, residual: f64 },
    #[error("nearest-point projection onto the embedded curve failed: {0}")]
    ProjectionFailed(String),
    #[error("embedded images differ (distance {distance})")]
    ImagesDiffer { distance: f64 },
    #[error("states are not in the same momentum level set (residual {residual})")]
    NotInLevelSet { residual: f64 },
    #[error("recovered reparametrization is not volume preserving (jacobian deviation {deviation})")]
    NotVolumePreserving { deviation: f64 },
    #[error("fixed-point iteration did not converge after {iterations} iterations (update {update})")]
    NoConvergence { iterations: usize, update: f64 },
    #[error("path quadrature did not converge (difference {difference})")]
    QuadratureNotConverged { difference: f64 },
    #[error("velocity field is not divergence free (max |div u| = {max_divergence})")]
    NotDivergenceFree { max_divergence: f64 },
    #[error("derivative check failed: {0}")]
    InconsistentDerivative(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
