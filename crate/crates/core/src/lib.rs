//! Analytic loss-landscape machinery for two-layer ReLU student-teacher
//! networks with Gaussian inputs.
//!
//! * [`kernel`]: closed-form loss, gradient, Hessian and a Monte-Carlo oracle.
//! * [`symmetry`]: fixed-point-space coordinates and the reduced field for real `d`.
//! * [`series`]: truncated Laurent series in `s = d^{-1/κ}`.
//! * [`solver`]: Newton solves, real-`d` continuation and family seeds.
//! * [`fps`]: fractional power series coefficients of the critical families.
//! * [`spectrum`]: Hessian spectra split by isotypic component.
//! * [`extras`]: Xavier-initialization bounds and fossilized critical sets.

pub mod error;
pub mod family;
pub mod extras;
pub mod fps;
pub mod kernel;
pub mod linalg;
pub mod scalar;
pub mod series;
pub mod solver;
pub mod spectrum;
pub mod symmetry;

pub use error::{Error, Result};
pub use family::{FamilyId, FamilyType};
pub use kernel::WeightConfig;
