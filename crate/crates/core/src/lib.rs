//! Möbius geometry of surfaces in `S^n` in the light-cone model.
//!
//! The crate evaluates conformally parametrized surface charts as Taylor
//! jets, builds the canonical lift and its frame, and checks the invariants
//! of single surfaces (Schwarzian, Hopf differential, Willmore condition),
//! of surface pairs (`theta`, `rho`, touch and co-touch), of adjoint
//! transforms of Willmore surfaces, and of the point-pair map `Y ^ Yhat`.
//! A quaternionic module relates left/right normal vectors of 2-planes in
//! `R^4` to the contact-element invariants.

pub mod adjoint;
pub mod chart;
pub mod error;
pub mod grid;
pub mod invariants;
pub mod jet;
pub mod lorentz;
pub mod pair;
pub mod pairmap;
pub mod quat;
pub mod tolerances;

pub use error::{Error, Result};
pub use jet::{Jet2, JetVec};
pub use lorentz::{Bivector, CLorentzVec, LorentzMap, LorentzVec, NullFrame, Scalar, Vector};
pub use num_complex::Complex64;
