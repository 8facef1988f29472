use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The principal branch of a Böttcher factor can no longer be trusted.
    #[error("principal-branch product unsafe at factor {index} (|c/z^2| = {ratio:.3})")]
    BranchUnsafe { index: usize, ratio: f64 },

    #[error("{what} did not converge (residual {residual:.3e})")]
    NoConvergence { what: &'static str, residual: f64 },

    /// The orbit multiplier is too close to 1 for the variational solve.
    #[error("near-parabolic orbit (|1 - rho| = {distance:.3e})")]
    NearParabolic { distance: f64 },

    #[error("orbit point too close to the critical point 0")]
    ZeroOrbitPoint,

    #[error("forward matching of periodic points is ambiguous (margin {margin:.3e})")]
    MatchingAmbiguous { margin: f64 },

    #[error("contour needs refinement at sample {0}")]
    NeedRefinement(usize),

    #[error("function vanishes on the contour")]
    ZeroOnContour,

    #[error("iterate left the domain |lambda| > {bound}")]
    LeftDomain { bound: f64 },

    #[error("branch tracking failed along continuation path at t = {t:.3e}")]
    TrackingFailed { t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
