//! Numerical thresholds used across the crate.
//!
//! Jets make every residual rounding-limited, so these are small multiples
//! of f64 precision scaled by the depth of the derivative chain involved.

/// Constant-term magnitude below which a jet division or square root is
/// treated as singular.
pub const SINGULAR_JET: f64 = 1e-12;

/// Lower bound on `<F_z, F_zbar>` for a chart point to count as immersed.
pub const IMMERSION: f64 = 1e-10;

/// Sphericity `| |f| - 1 |` accepted for chart samples.
pub const SPHERICITY: f64 = 1e-12;

/// Conformality `|<F_z, F_z>|` accepted for chart samples.
pub const CONFORMALITY: f64 = 1e-10;

/// Gram relations of a constructed frame.
pub const FRAME_GRAM: f64 = 1e-10;

/// Default bound for structure, integrability and Willmore residuals.
pub const RESIDUAL: f64 = 1e-8;

/// `<kappa, kappa-bar>` below this marks an umbilic point.
pub const UMBILIC: f64 = 1e-12;

/// `|<kappa, kappa>|` below this makes the conformality quadratic degenerate.
pub const QUADRATIC_DEGENERATE: f64 = 1e-10;

/// Discriminant magnitude flagging a branch merge of the two roots.
pub const BRANCH_MERGE: f64 = 1e-10;

/// Parallelism defect of `D_zbar kappa` against `kappa` for S-Willmore points.
pub const S_WILLMORE: f64 = 1e-8;

/// `sigma` below this is a branch point of the adjoint surface.
pub const SIGMA_DEGENERATE: f64 = 1e-8;

/// `|<Y, Yhat>|` below this routes contact elements to the same-point formulas.
pub const SAME_POINT: f64 = 1e-9;

/// Touch / co-touch threshold on normalized contact invariants.
pub const TOUCH: f64 = 1e-8;

/// Quaternionic normal comparison threshold.
pub const QUAT_NORMAL: f64 = 1e-9;

/// Default jet order for chart evaluation.
pub const DEFAULT_ORDER: usize = 6;

/// Jet order needed to frame an adjoint surface and take its Willmore
/// residual: four orders for the base frame and `D_zbar kappa`, one for
/// `sigma`, four more for the adjoint's own Willmore operator.
pub const ADJOINT_ORDER: usize = 9;
