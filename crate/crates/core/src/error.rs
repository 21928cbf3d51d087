use thiserror::Error;

/// Errors raised by the geometric pipeline.
///
/// Numerical degeneracies carry the offending magnitude so callers can
/// decide whether to mask the point or abort.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("singular jet: |constant term| = {magnitude:e} below {threshold:e}")]
    SingularJet { magnitude: f64, threshold: f64 },

    #[error("jet order exhausted: requested {requested} derivatives of an order-{order} jet")]
    OrderExhausted { requested: usize, order: usize },

    #[error("frame Gram residual {residual:e} exceeds tolerance {tol:e}")]
    FrameGram { residual: f64, tol: f64 },

    #[error("vector is not normal to the mean curvature sphere: residual {residual:e}")]
    NotNormal { residual: f64 },

    #[error("unknown chart `{0}`")]
    UnknownChart(String),

    #[error("chart `{name}` rejected: {what} residual {residual:e} exceeds {tol:e}")]
    ChartRejected {
        name: String,
        what: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("chart is not an immersion at (u, v) = ({u}, {v}): <F_z, F_zbar> = {value:e}")]
    NonImmersion { u: f64, v: f64, value: f64 },

    #[error("lift leaves the forward light cone at (u, v) = ({u}, {v})")]
    BackwardLift { u: f64, v: f64 },

    #[error("coincident points: |<Y, Yhat>| = {value:e}")]
    CoincidentPoints { value: f64 },

    #[error("contact elements share a base point; use the same-point invariants")]
    SamePoint,

    #[error("contact element Gram matrix invalid: residual {residual:e}")]
    ContactGram { residual: f64 },

    #[error("degenerate span: {0}")]
    DegenerateSpan(&'static str),

    #[error("|lambda| = {0} is not unitary")]
    NotUnitary(f64),

    #[error("<kappa, kappa> = {value:e} is degenerate; use the S-Willmore or Hill branch")]
    DegenerateQuadratic { value: f64 },

    #[error("not S-Willmore at this point: parallelism defect {defect:e}")]
    NotSWillmore { defect: f64 },

    #[error("umbilic point: <kappa, kappa-bar> = {value:e}")]
    Umbilic { value: f64 },

    #[error("Hill solution vanishes: |y| = {value:e}")]
    HillZero { value: f64 },

    #[error("degenerate adjoint point: sigma = {sigma:e}")]
    DegenerateAdjoint { sigma: f64 },

    #[error("base surface is not Willmore: residual {residual:e}")]
    NotWillmore { residual: f64 },

    #[error("mu violates the adjoint conditions: |theta| = {theta:e}, |<eta, eta>| = {conformality:e}")]
    NotAdjoint { theta: f64, conformality: f64 },

    #[error("invalid quaternion normal: {0}")]
    InvalidNormal(&'static str),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures that come from the geometry at a point rather than
    /// from bad input; grid sweeps mask these instead of aborting.
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::SingularJet { .. }
                | Error::NonImmersion { .. }
                | Error::CoincidentPoints { .. }
                | Error::Umbilic { .. }
                | Error::HillZero { .. }
                | Error::DegenerateAdjoint { .. }
                | Error::DegenerateQuadratic { .. }
                | Error::NotSWillmore { .. }
                | Error::FrameGram { .. }
        )
    }
}
