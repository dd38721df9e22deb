use thiserror::Error;

/// Coordinate axis of the tensor grid, used to label degree/node mismatches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::X => f.write_str("x"),
            Axis::Y => f.write_str("y"),
        }
    }
}

/// Error type shared by every module of the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A grid or quadrature rule was requested with zero nodes.
    #[error("node count must be at least 1")]
    EmptyGrid,

    /// A univariate argument left the closed interval [-1, 1].
    #[error("{value} lies outside [-1, 1]")]
    OutOfRange { value: f64 },

    /// An evaluation point left the closed unit square.
    #[error("point ({x}, {y}) lies outside [-1, 1] x [-1, 1]")]
    OutOfDomain { x: f64, y: f64 },

    /// A degree request exceeds what the node count can resolve.
    #[error("degree {degree} along {axis} is not resolvable by {nodes} nodes (need degree < node count)")]
    DegreeUnresolvable { axis: Axis, degree: usize, nodes: usize },

    /// The sampled function produced a non-finite value at a quadrature node.
    #[error("function value {value} at node ({x}, {y}) is not finite")]
    NonFiniteSample { x: f64, y: f64, value: f64 },

    /// A reciprocal-product factor was zero or negative, i.e. the requested
    /// argument sits outside the product's validity range.
    #[error("product factor {factor} at eta = {eta} is not positive; the bound is undefined here")]
    NonPositiveFactor { eta: f64, factor: f64 },

    /// A decay bound was requested below its first admissible index.
    #[error("decay bound applies only from index {min}; got {index}")]
    BoundNotApplicable { index: usize, min: usize },

    /// Catch-all for violated preconditions with a human-readable reason.
    #[error("{0}")]
    InvalidArgument(String),

    /// Expression evaluation divided by zero at a concrete point.
    #[error("division by zero at ({x}, {y})")]
    DivisionByZero { x: f64, y: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
