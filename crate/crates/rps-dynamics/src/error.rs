//! Error type shared by all modules of the crate.

use std::path::PathBuf;

/// Errors produced by the dynamics, return-map and scan operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Game parameters outside their admissible ranges.
    #[error("invalid game parameters: {0}")]
    InvalidParams(String),

    /// A strategy vector that is not a point of the simplex.
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    /// The point lies within `gamma_tol` of an indifference set, where the
    /// best response (and hence the map) is not single-valued.
    #[error("point within tolerance of the indifference set ({detail})")]
    GammaCollision { detail: String },

    /// A point required to lie in branch B of the factor map does not.
    #[error("point is not in branch B of the factor map")]
    NotInBranchB,

    /// The section coordinate is within `gamma_tol` of a return-time
    /// threshold, so the branch index is ambiguous at this tolerance.
    #[error("section coordinate {s} within tolerance of threshold b_{k} = {threshold}")]
    ThresholdCollision { s: f64, k: u32, threshold: f64 },

    /// A computed return time exceeded the a-priori bound C.
    #[error("return time exceeded bound C = {bound}")]
    BoundViolation { bound: u32 },

    /// The parameters sit within `1e-12` of a head/tail breakpoint, where
    /// the orbit count is discontinuous and both neighboring counts are
    /// legitimate.
    #[error("parameters on a bifurcation boundary (head {head}, tail {tail})")]
    BifurcationBoundary { head: u32, tail: u32 },

    /// A lifted periodic orbit failed to close up within tolerance.
    #[error("orbit for branch {k} failed to close: residual {residual:.3e}")]
    OrbitClosureFailure { k: u32, residual: f64 },

    /// Root bracketing for bisection failed.
    #[error("bisection bracket failure: {0}")]
    BracketFailure(String),

    /// File output failed.
    #[error("io error writing {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
