//! Frame-level verification of Dirac operator factorization on Riemannian
//! submersions.
//!
//! A submersion is presented by the bracket coefficients of an adapted
//! orthonormal frame at a point. From these the crate builds the O'Neill
//! tensors, the relevant spinor modules and spin connections, and the Dirac
//! operators as finite matrices, then checks that the total Dirac operator
//! equals the graded tensor sum of the vertical and base operators minus a
//! curvature term.
//!
//! ```
//! use spinfac::{catalog, operators::Assembly, geometry::Submersion};
//!
//! let hopf: Submersion = catalog::hopf().try_into().unwrap();
//! let asm = Assembly::build(&hopf).unwrap();
//! assert!(asm.factorization_residual().max() < 1e-12);
//! let lambda = asm.curvature_scalar(1e-12).unwrap();
//! assert!((lambda.re - 0.5).abs() < 1e-12);
//! ```

pub mod catalog;
pub mod clifford;
pub mod geometry;
pub mod linalg;
pub mod operators;
pub mod parallel;
pub mod spin;
pub mod suite;

pub use geometry::{FrameGeometry, Submersion, DEFAULT_TOLERANCE};
pub use parallel::Execution;
pub use suite::{fuzz, verify, Report};
